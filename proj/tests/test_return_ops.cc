#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "sffm/return_ops.h"

namespace {

using sffm::Mat;

TEST(ReturnOps, TwoPhaseExactValues) {
  const auto ex = oracle::Example(5);
  const auto ops = sffm::assemble(ex.model, 1.0);
  Mat<double> phi(2, 2), m(2, 2);
  phi << 0, 1, 0.5, 0;
  m << 1, 2, 1, 1;
  EXPECT_LE((ops.phi - phi).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((ops.phi_l - phi).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((ops.m - m).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(ops.identity_error, 1e-12);
}

TEST(ReturnOps, AgreesWithSubspaceOracleOnExamples) {
  for (int k : {1, 2, 4, 6}) {
    const auto ex = oracle::Example(k);
    for (bool tilted : {false, true}) {
      const auto gen = sffm::fluid_generator(ex.model, ex.init.lambda);
      const auto& b = gen.blocks(tilted);
      const Mat<double> psi = sffm::compute_psi(gen, tilted).X;
      const Mat<double> xi = sffm::compute_xi(gen, tilted).X;
      EXPECT_LE((psi - oracle::RiccatiBySubspace(b.pp, b.pm, b.mp, b.mm)).cwiseAbs().maxCoeff(),
                1e-9)
          << "example " << k;
      EXPECT_LE((xi - oracle::RiccatiBySubspace(b.mm, b.mp, b.pm, b.pp)).cwiseAbs().maxCoeff(),
                1e-9)
          << "example " << k;
    }
  }
}

TEST(ReturnOps, RoundTripAndRowSums) {
  std::mt19937_64 rng(4);
  int used = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4;
    const Mat<double> T = oracle::RandomGenerator(n, rng);
    sffm::Vec<double> c(n), r(n);
    c << 1, -1, 1, -1;
    r << 1, -2, 1.5, -1;
    const sffm::SffmModel<double> model(T, c, r);
    const auto st = sffm::stability(model);
    // Tilted transforms can be infinite when X drifts up.
    if (st.class_y != sffm::DriftClass::kStable || st.class_x != sffm::DriftClass::kStable)
      continue;
    const auto ops = sffm::assemble(model, 0.05);
    ++used;
    EXPECT_LE((sffm::returns_from_visits(ops.m) - ops.phi).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((ops.psi.rowwise().sum().array() - 1).abs().maxCoeff(), 1e-8);
    // Xi is substochastic when Y drifts down.
    EXPECT_LE(ops.xi.rowwise().sum().maxCoeff(), 1 + 1e-12);
    EXPECT_GE(ops.psi_l.minCoeff(), -1e-14);
  }
  EXPECT_GE(used, 3);
}

TEST(ReturnOps, RejectsNullRecurrentAndBadLambda) {
  const auto ex3 = oracle::Example(3);
  EXPECT_THROW(sffm::assemble(ex3.model, 1.0), sffm::NumericalError);
  const auto ex1 = oracle::Example(1);
  EXPECT_THROW(sffm::assemble(ex1.model, 0.0), std::invalid_argument);
}

TEST(ReturnOps, PermutationIsRSignOrder) {
  const auto ex = oracle::Example(6);
  const auto ops = sffm::assemble(ex.model, ex.init.lambda);
  EXPECT_EQ(ops.perm_r, (std::vector<int>{0, 3, 1, 2}));
  // Phi vanishes on same-sign blocks.
  for (int i : ex.model.partition().s_plus_r)
    for (int j : ex.model.partition().s_plus_r) EXPECT_EQ(ops.phi(i, j), 0.0);
}

TEST(ReturnOps, InfiniteTransformIsReported) {
  // A large tilt on up-phases makes the tilted return transform infinite.
  sffm::Mat<double> T(2, 2);
  T << -1, 1, 1, -1;
  sffm::Vec<double> c(2), r(2);
  c << 1, -1;
  r << 1, -1;
  const sffm::SffmModel<double> model(T, c, r);
  EXPECT_THROW(sffm::assemble(model, 5.0), sffm::NumericalError);
}

}  // namespace
