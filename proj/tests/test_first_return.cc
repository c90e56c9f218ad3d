#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.h"
#include "sffm/first_return.h"

namespace {

using sffm::RowVec;

TEST(FirstReturn, TwoPhaseClosedForm) {
  const auto ex = oracle::Example(5);
  for (double v : {0.0, 0.5, 1.0, 2.0}) {
    const auto fr = sffm::mu_phi(ex.model, ex.init, v);
    const double e = std::exp(-v);
    EXPECT_NEAR(fr.values(0), 0.4 - 0.3 * e, 1e-12);
    EXPECT_NEAR(fr.values(1), 0.2 - 0.2 * e, 1e-12);
    EXPECT_NEAR(fr.psi_part(0), fr.values(1), 0);
    EXPECT_NEAR(fr.xi_part(0), fr.values(0), 0);
  }
  const auto whole = sffm::mu_phi(ex.model, ex.init, std::numeric_limits<double>::infinity());
  EXPECT_LE((whole.values - whole.const_part).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FirstReturn, OneStepVisitMeasureIsFirstReturnWithVisits) {
  // With Phi replaced by M the first-return formula is the n = 1 visit measure.
  const auto ex = oracle::Example(6);
  const auto ops = sffm::assemble(ex.model, ex.init.lambda);
  for (double v : {0.3, 1.5}) {
    const auto vm = sffm::visit_measure(ex.model, ex.init, v, 1, ops);
    const RowVec<double> ref = ex.init.total() * ops.m -
                               std::exp(-ex.init.lambda * v) * ex.init.nu0 / ex.init.lambda * ops.m_l;
    EXPECT_LE((vm.values - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(FirstReturn, VisitMeasureTotalsAreMuMn) {
  const auto ex = oracle::Example(1);
  const auto ops = sffm::assemble(ex.model, ex.init.lambda);
  const double inf = std::numeric_limits<double>::infinity();
  sffm::Mat<double> Mn = sffm::Mat<double>::Identity(2, 2);
  for (int n = 1; n <= 4; ++n) {
    Mn = Mn * ops.m;
    const auto vm = sffm::visit_measure(ex.model, ex.init, inf, n, ops);
    EXPECT_LE((vm.values - ex.init.total() * Mn).cwiseAbs().maxCoeff(), 1e-10) << n;
  }
}

TEST(FirstReturn, RejectsNullRecurrent) {
  const auto ex = oracle::Example(3);
  EXPECT_THROW(sffm::mu_phi(ex.model, ex.init, 1.0), sffm::NumericalError);
}

}  // namespace
