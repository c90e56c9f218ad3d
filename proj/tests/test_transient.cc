#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "sffm/transient.h"

namespace {

using sffm::Mat;
using sffm::RowVec;

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(Weights, MatchWordEnumeration) {
  for (int k : {1, 2, 4}) {
    const auto ex = oracle::Example(k);
    const auto w = sffm::h_weights(ex.model, 7);
    const Mat<double> Q = ex.model.fluid_Q();
    const Mat<double> G = Mat<double>((-ex.model.c_prime()).asDiagonal());
    for (int m = 0; m <= 7; ++m)
      for (int j = 0; j <= m; ++j)
        EXPECT_LE((w.h[m][j] - oracle::WordSum(Q, G, j, m)).cwiseAbs().maxCoeff(), 1e-10)
            << "h(" << j << "," << m << ")";
  }
}

TEST(Weights, TwoPhaseValue) {
  const auto w = sffm::h_weights(oracle::Example(1).model, 2);
  Mat<double> ref(2, 2);
  ref << 4, 0, 0, -2;
  EXPECT_LE((w.h[2][1] - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Boundary, RecursionMatchesClosedForm) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto [m, init] = sffm::build_tandem_model(oracle::RandomTandem(6, rng));
    for (int n = 0; n <= 6; ++n) {
      const auto bv = sffm::boundary_rhs(m, init, n);
      EXPECT_LE((bv.recursive - bv.closed_form).cwiseAbs().maxCoeff(),
                1e-9 * std::max(1.0, bv.recursive.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Boundary, FailsForArbitraryInitialDistribution) {
  auto ex = oracle::Example(1);
  ex.init.nu0 << 0.4, 0.4;
  EXPECT_FALSE(sffm::check_boundary(ex.model, ex.init, 0).front().pass);
  EXPECT_THROW(sffm::mu_exp_Dy(ex.model, ex.init, 1.0, 1.0), std::invalid_argument);
}

TEST(Transient, PhaseMarginalIsMarkovChainLaw) {
  for (int k : {1, 4}) {
    const auto ex = oracle::Example(k);
    for (double y : {0.1, 1.0, 3.0}) {
      const auto md = sffm::mass_decomposition(ex.model, ex.init, y);
      const RowVec<double> ref =
          ex.init.total() * oracle::Expm(Mat<double>(ex.model.fluid_Q() * y));
      EXPECT_LE((md.phase_marginal - ref).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_NEAR(md.phase_marginal.sum(), 1.0, 1e-12);
      EXPECT_GE(md.at_zero.minCoeff(), -1e-12);
      EXPECT_GE(md.above_zero.minCoeff(), -1e-12);
    }
  }
}

TEST(Transient, SeriesAgreesWithClosedForm) {
  const auto ex = oracle::Example(1);
  for (double y : {0.2, 1.0})
    for (double v : {0.0, 0.5, kInf}) {
      const auto a = sffm::mu_exp_Dy(ex.model, ex.init, y, v);
      const auto b = sffm::series_mu_exp_Dy(ex.model, ex.init, y, v, 30);
      EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LE((a.atom_part - b.atom_part).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Transient, UpPhaseAtomVanishes) {
  const auto ex = oracle::Example(4);
  for (int n = 0; n <= 6; ++n) {
    const auto d = sffm::dn_measure(ex.model, ex.init, n, 1.0);
    for (int j : ex.model.partition().s_plus_c) EXPECT_NEAR(d.atom_part(j), 0.0, 1e-12);
  }
  for (double y : {0.3, 2.0}) {
    const auto mu = sffm::mu_exp_Dy(ex.model, ex.init, y, 0.0);
    for (int j : ex.model.partition().s_plus_c) EXPECT_NEAR(mu.values(j), 0.0, 1e-12);
  }
}

TEST(Transient, LimitInY) {
  const auto ex = oracle::Example(1);
  const auto lim = sffm::limit_y_infinity(ex.model, ex.init);
  const auto far = sffm::mu_exp_Dy(ex.model, ex.init, 60.0, 1.0);
  EXPECT_LE((lim.at(1.0) - far.values).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(lim.constant(1), 2.0 / 3, 1e-12);
  const auto ex2 = oracle::Example(3);
  sffm::InitialDistribution<double> init = ex2.init;
  // Example 3 has X stable; reverse c to make it transient.
  sffm::Vec<double> c = -ex2.model.c();
  const sffm::SffmModel<double> flipped(ex2.model.T(), c, ex2.model.r());
  EXPECT_THROW(sffm::limit_y_infinity(flipped, init), sffm::NumericalError);
}

TEST(Transient, LongDoubleInstantiation) {
  const auto ex = oracle::Example(4);
  const sffm::SffmModel<long double> m(ex.model.T().cast<long double>(),
                                       ex.model.c().cast<long double>(),
                                       ex.model.r().cast<long double>());
  sffm::InitialDistribution<long double> init;
  init.lambda = ex.init.lambda;
  init.nu0 = ex.init.nu0.cast<long double>();
  init.point_mass = ex.init.point_mass.cast<long double>();
  const auto wide = sffm::mu_exp_Dy<long double>(m, init, 0.5L, 1.0L);
  const auto narrow = sffm::mu_exp_Dy(ex.model, ex.init, 0.5, 1.0);
  EXPECT_LE((wide.values.cast<double>() - narrow.values).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Transient, ArgumentChecks) {
  const auto ex = oracle::Example(1);
  EXPECT_THROW(sffm::mu_exp_Dy(ex.model, ex.init, -1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(sffm::mu_exp_Dy(ex.model, ex.init, 1.0, -1.0), std::invalid_argument);
  EXPECT_THROW(sffm::h_weights(ex.model, -1), std::invalid_argument);
}

}  // namespace
