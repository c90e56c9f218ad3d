#pragma once

#include <stdexcept>
#include <vector>

#include "sffm/matops.h"
#include "sffm/model.h"

namespace sffm {

template <typename Scalar>
struct GeneratorBlocks {
  Mat<Scalar> pp, pm, mp, mm;
};

/// Q = |R|^{-1} T and Q_lambda = |R|^{-1}(T + lambda C) with their r-sign blocks.
template <typename Scalar>
struct FluidGenerator {
  Scalar lambda = 0;
  Mat<Scalar> Q;
  Mat<Scalar> Q_lambda;
  GeneratorBlocks<Scalar> plain;
  GeneratorBlocks<Scalar> tilted;
  PhasePartition partition;

  const GeneratorBlocks<Scalar>& blocks(bool is_tilted) const {
    return is_tilted ? tilted : plain;
  }
};

template <typename Scalar>
FluidGenerator<Scalar> fluid_generator(const SffmModel<Scalar>& model,
                                       Scalar lambda) {
  FluidGenerator<Scalar> g;
  g.lambda = lambda;
  g.partition = model.partition();
  g.Q = model.fluid_Q();
  g.Q_lambda = g.Q;
  g.Q_lambda.diagonal() += lambda * model.c_prime();
  const auto& up = g.partition.s_plus_r;
  const auto& down = g.partition.s_minus_r;
  auto split = [&](const Mat<Scalar>& M) {
    return GeneratorBlocks<Scalar>{Sub(M, up, up), Sub(M, up, down),
                                   Sub(M, down, up), Sub(M, down, down)};
  };
  g.plain = split(g.Q);
  g.tilted = split(g.Q_lambda);
  return g;
}

/// Minimal nonnegative solution of Q+- + Q++ Psi + Psi Q-- + Psi Q-+ Psi = 0.
template <typename Scalar>
RiccatiSolution<Scalar> compute_psi(const FluidGenerator<Scalar>& gen,
                                    bool tilted,
                                    const RiccatiOptions& options = {}) {
  const auto& b = gen.blocks(tilted);
  return solve_riccati<Scalar>(b.pp, b.pm, b.mp, b.mm, options);
}

/// Minimal nonnegative solution of Q-+ + Q-- Xi + Xi Q++ + Xi Q+- Xi = 0.
template <typename Scalar>
RiccatiSolution<Scalar> compute_xi(const FluidGenerator<Scalar>& gen,
                                   bool tilted,
                                   const RiccatiOptions& options = {}) {
  const auto& b = gen.blocks(tilted);
  return solve_riccati<Scalar>(b.mm, b.mp, b.pm, b.pp, options);
}

template <typename Scalar>
struct ReturnOperators {
  Scalar lambda = 0;
  Mat<Scalar> psi, xi, phi, m;
  Mat<Scalar> psi_l, xi_l, phi_l, m_l;
  SolveReport psi_report, xi_report, psi_l_report, xi_l_report;
  /// max-norm of Phi - (I+M)^{-1} M, untilted and tilted.
  double identity_error = 0;
  double identity_error_l = 0;
  /// Natural phase order to (S^+, S^-) order.
  std::vector<int> perm_r;
};

namespace internal {

template <typename Scalar>
Mat<Scalar> AntiDiagonal(const PhasePartition& part, const Mat<Scalar>& upper,
                         const Mat<Scalar>& lower) {
  const int n = static_cast<int>(part.perm_r.size());
  Mat<Scalar> out = Mat<Scalar>::Zero(n, n);
  const auto& up = part.s_plus_r;
  const auto& down = part.s_minus_r;
  for (std::size_t i = 0; i < up.size(); ++i)
    for (std::size_t j = 0; j < down.size(); ++j) out(up[i], down[j]) = upper(i, j);
  for (std::size_t i = 0; i < down.size(); ++i)
    for (std::size_t j = 0; j < up.size(); ++j) out(down[i], up[j]) = lower(i, j);
  return out;
}

// M = Phi (I - Phi)^{-1}.
template <typename Scalar>
Mat<Scalar> VisitsFromReturns(const Mat<Scalar>& phi) {
  const Eigen::Index n = phi.rows();
  const Mat<Scalar> I = Mat<Scalar>::Identity(n, n);
  try {
    return linear_solve(Mat<Scalar>((I - phi).transpose()),
                        Mat<Scalar>(phi.transpose()))
        .transpose();
  } catch (const NumericalError&) {
    throw NumericalError("M undefined (null recurrent Y)");
  }
}

template <typename Scalar>
double MeqError(const Mat<Scalar>& phi, const Mat<Scalar>& m) {
  const Eigen::Index n = phi.rows();
  const Mat<Scalar> I = Mat<Scalar>::Identity(n, n);
  const Mat<Scalar> back = linear_solve(Mat<Scalar>(I + m), m);
  return static_cast<double>((back - phi).cwiseAbs().maxCoeff());
}

}  // namespace internal

/// Phi = (I + M)^{-1} M.
template <typename Scalar>
Mat<Scalar> returns_from_visits(const Mat<Scalar>& m) {
  const Eigen::Index n = m.rows();
  return linear_solve(Mat<Scalar>(Mat<Scalar>::Identity(n, n) + m), m);
}

/// Psi, Xi, Phi, M and their lambda-tilted versions, in natural phase order.
template <typename Scalar>
ReturnOperators<Scalar> assemble(const SffmModel<Scalar>& model, Scalar lambda,
                                 const RiccatiOptions& options = {}) {
  if (!(lambda > 0)) throw std::invalid_argument("assemble: lambda must be positive");
  if (stability(model).class_y == DriftClass::kNullRecurrent) {
    throw NumericalError("M undefined (null recurrent Y)");
  }
  const FluidGenerator<Scalar> gen = fluid_generator(model, lambda);
  ReturnOperators<Scalar> out;
  out.lambda = lambda;
  out.perm_r = gen.partition.perm_r;

  auto take = [](RiccatiSolution<Scalar> s, Mat<Scalar>* X, SolveReport* rep) {
    *X = std::move(s.X);
    *rep = s.report;
  };
  take(compute_psi(gen, false, options), &out.psi, &out.psi_report);
  take(compute_xi(gen, false, options), &out.xi, &out.xi_report);
  take(compute_psi(gen, true, options), &out.psi_l, &out.psi_l_report);
  take(compute_xi(gen, true, options), &out.xi_l, &out.xi_l_report);
  for (const SolveReport* r : {&out.psi_report, &out.xi_report,
                               &out.psi_l_report, &out.xi_l_report}) {
    if (!r->converged) {
      throw NumericalError("Riccati iteration did not converge (residual " +
                           internal::Num(r->residual) + ")");
    }
  }
  out.phi = internal::AntiDiagonal(gen.partition, out.psi, out.xi);
  out.phi_l = internal::AntiDiagonal(gen.partition, out.psi_l, out.xi_l);
  out.m = internal::VisitsFromReturns(out.phi);
  out.m_l = internal::VisitsFromReturns(out.phi_l);
  out.identity_error = internal::MeqError(out.phi, out.m);
  out.identity_error_l = internal::MeqError(out.phi_l, out.m_l);
  return out;
}

}  // namespace sffm
