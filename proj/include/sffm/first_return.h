#pragma once

#include <limits>
#include <stdexcept>

#include "sffm/matops.h"
#include "sffm/model.h"
#include "sffm/return_ops.h"
#include "sffm/transient.h"

namespace sffm {

/// Joint law of the phase and X at the first return of the unbounded Y-fluid
/// to its starting level, over A_v.
template <typename Scalar>
struct FirstReturnMeasure {
  RowVec<Scalar> values;
  /// values on S^- (reached from starts in S^+), in S^- index order.
  RowVec<Scalar> psi_part;
  /// values on S^+ (reached from starts in S^-), in S^+ index order.
  RowVec<Scalar> xi_part;
  /// mu([0, inf)) Phi.
  RowVec<Scalar> const_part;
  /// e^{-lambda v} (nu(0)/lambda) Phi_lambda.
  RowVec<Scalar> decay_part;
};

namespace internal {

template <typename Scalar>
void RequireNotNullRecurrent(const SffmModel<Scalar>& model) {
  const StabilityReport<Scalar> s = stability(model);
  if (s.class_x == DriftClass::kNullRecurrent ||
      s.class_y == DriftClass::kNullRecurrent) {
    throw NumericalError(
        "first-return measure requires X and Y not null recurrent");
  }
}

}  // namespace internal

/// -e^{-lambda v} (nu(0)/lambda) Phi_lambda + (P + nu(0)/lambda) Phi.
template <typename Scalar>
FirstReturnMeasure<Scalar> mu_phi(const SffmModel<Scalar>& model,
                                  const InitialDistribution<Scalar>& init,
                                  Scalar v, const ReturnOperators<Scalar>& ops,
                                  const TransientOptions& options = {}) {
  if (!(v >= 0)) throw std::invalid_argument("mu_phi: v must be nonnegative");
  internal::RequireNotNullRecurrent(model);
  if (options.check_order >= 0) {
    internal::RequireBoundary(model, init, h_weights(model, options.check_order),
                              options.check_order);
  }
  FirstReturnMeasure<Scalar> out;
  out.const_part = init.total() * ops.phi;
  out.decay_part =
      internal::TailMass(init.lambda, v) * (init.nu0 / init.lambda) * ops.phi_l;
  out.values = out.const_part - out.decay_part;
  out.psi_part = SubRow(out.values, model.partition().s_minus_r);
  out.xi_part = SubRow(out.values, model.partition().s_plus_r);
  return out;
}

template <typename Scalar>
FirstReturnMeasure<Scalar> mu_phi(const SffmModel<Scalar>& model,
                                  const InitialDistribution<Scalar>& init,
                                  Scalar v, const TransientOptions& options = {}) {
  internal::RequireNotNullRecurrent(model);
  return mu_phi(model, init, v, assemble(model, init.lambda), options);
}

/// Expected n-step visit measure mu M^n over A_v.
template <typename Scalar>
TransientMeasure<Scalar> visit_measure(const SffmModel<Scalar>& model,
                                       const InitialDistribution<Scalar>& init,
                                       Scalar v, int n,
                                       const ReturnOperators<Scalar>& ops) {
  if (n < 1) throw std::invalid_argument("visit_measure: n must be at least 1");
  if (!(v >= 0)) throw std::invalid_argument("visit_measure: v must be nonnegative");
  internal::RequireNotNullRecurrent(model);
  const RowVec<Scalar> base = init.nu0 / init.lambda;
  const Mat<Scalar> diff = ops.m - ops.m_l;
  std::vector<Mat<Scalar>> m_pow{Mat<Scalar>::Identity(model.n(), model.n())};
  for (int k = 1; k <= n; ++k) m_pow.push_back(m_pow.back() * ops.m);
  TransientMeasure<Scalar> out;
  RowVec<Scalar> left = base;  // base * M_l^k
  out.atom_part = init.point_mass * m_pow[n];
  for (int k = 0; k <= n - 1; ++k) {
    out.atom_part += left * diff * m_pow[n - 1 - k];
    left = left * ops.m_l;
  }
  out.density_part = (1 - internal::TailMass(init.lambda, v)) * left;
  out.values = out.density_part + out.atom_part;
  return out;
}

}  // namespace sffm
