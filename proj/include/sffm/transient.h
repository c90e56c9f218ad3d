#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "sffm/matops.h"
#include "sffm/model.h"

namespace sffm {

/// A phase-indexed measure over A_v = [0, v], split into the part carried by
/// the density on (0, v] and the atom at zero.
template <typename Scalar>
struct TransientMeasure {
  RowVec<Scalar> values;
  RowVec<Scalar> density_part;
  RowVec<Scalar> atom_part;
};

/// h(k,m) and f(k,m) for 0 <= k <= m <= order, and when built with an initial
/// distribution, A(m), M(l,m), B(m) for 1 <= m <= order.
///
/// h(k,m) sums all products of m factors with -|R|^{-1}C appearing k times
/// and |R|^{-1}T the rest; f(k,m) = h(k,m) (-|R|^{-1}C)^{-m}.
template <typename Scalar>
struct WeightTable {
  int order = 0;
  std::vector<std::vector<Mat<Scalar>>> h;  // h[m][k]
  std::vector<std::vector<Mat<Scalar>>> f;  // f[m][k]
  std::vector<RowVec<Scalar>> A;            // A[m], index 0 unused
  std::vector<std::vector<RowVec<Scalar>>> M;  // M[m][l], 1 <= l <= m-1
  std::vector<RowVec<Scalar>> B;            // B[m], zero for m < 2
};

template <typename Scalar>
WeightTable<Scalar> h_weights(const SffmModel<Scalar>& model, int order) {
  if (order < 0) throw std::invalid_argument("h_weights: negative order");
  const int n = model.n();
  const Mat<Scalar> Q = model.fluid_Q();
  const Vec<Scalar> neg_c = -model.c_prime();
  WeightTable<Scalar> w;
  w.order = order;
  w.h.resize(order + 1);
  w.f.resize(order + 1);
  w.h[0].push_back(Mat<Scalar>::Identity(n, n));
  for (int m = 0; m < order; ++m) {
    w.h[m + 1].resize(m + 2);
    for (int k = 0; k <= m + 1; ++k) {
      Mat<Scalar> next = Mat<Scalar>::Zero(n, n);
      if (k <= m) next += w.h[m][k] * Q;
      if (k >= 1) next += w.h[m][k - 1] * neg_c.asDiagonal();
      w.h[m + 1][k] = std::move(next);
    }
  }
  for (int m = 0; m <= order; ++m) {
    const Vec<Scalar> scale = neg_c.array().pow(Scalar(-m)).matrix();
    for (int k = 0; k <= m; ++k) w.f[m].push_back(w.h[m][k] * scale.asDiagonal());
  }
  return w;
}

namespace internal {

// (-lambda)^k nu(0): the k-th derivative of the density at zero.
template <typename Scalar>
RowVec<Scalar> DensityDerivative(const InitialDistribution<Scalar>& init, int k) {
  return std::pow(-init.lambda, k) * init.nu0;
}

}  // namespace internal

/// Weights h, f plus A, M(l, .), B for the given initial distribution.
template <typename Scalar>
WeightTable<Scalar> boundary_weights(const SffmModel<Scalar>& model,
                                     const InitialDistribution<Scalar>& init,
                                     int order) {
  WeightTable<Scalar> w = h_weights(model, order);
  const auto& up = model.partition().s_plus_c;
  const auto& down = model.partition().s_minus_c;
  const int np = static_cast<int>(up.size());
  const RowVec<Scalar> P_minus = SubRow(init.point_mass, down);
  const RowVec<Scalar> nu_minus = SubRow(init.nu0, down);

  w.A.assign(order + 1, RowVec<Scalar>::Zero(np));
  for (int m = 1; m <= order; ++m) {
    // [Q^m]_{-+} (-C'_+)^{-m} is the -+ block of f(0,m).
    RowVec<Scalar> a = -P_minus * Sub(w.f[m][0], down, up);
    for (int k = 1; k <= m - 1; ++k) {
      a -= std::pow(-init.lambda, k - 1) * nu_minus * Sub(w.f[m][k], down, up);
    }
    w.A[m] = std::move(a);
  }

  // chain[l][j]: signed sum over chains k_1 < ... < k_l < j of
  // A(k_1) f(k_1,k_2)_{++} ... f(k_l,j)_{++}; chain[0][j] = A(j).
  std::vector<std::vector<RowVec<Scalar>>> chain(
      order + 1, std::vector<RowVec<Scalar>>(order + 1, RowVec<Scalar>::Zero(np)));
  for (int j = 1; j <= order; ++j) chain[0][j] = w.A[j];
  for (int l = 1; l <= order; ++l) {
    for (int j = l + 1; j <= order; ++j) {
      RowVec<Scalar> s = RowVec<Scalar>::Zero(np);
      for (int k = l; k < j; ++k) s -= chain[l - 1][k] * Sub(w.f[j][k], up, up);
      chain[l][j] = std::move(s);
    }
  }
  w.M.assign(order + 1, {});
  w.B.assign(order + 1, RowVec<Scalar>::Zero(np));
  for (int m = 0; m <= order; ++m) {
    w.M[m].assign(std::max(m, 1), RowVec<Scalar>::Zero(np));
    for (int l = 1; l <= m - 1; ++l) {
      w.M[m][l] = chain[l][m];
      w.B[m] += chain[l][m];
    }
  }
  return w;
}

template <typename Scalar>
struct BoundaryValue {
  /// nu_+^{(n)}(0) from the recursion over lower orders.
  RowVec<Scalar> recursive;
  /// nu_+^{(n)}(0) = A(n+1) + B(n+1).
  RowVec<Scalar> closed_form;
};

namespace internal {

// The chain sums in A, B and the recursion cancel heavily (terms grow like
// |Q|^n |C'|^{-n}), so double inputs are evaluated in long double.
template <typename Scalar>
struct Wider {
  using type = Scalar;
};
template <>
struct Wider<double> {
  using type = long double;
};

template <typename To, typename From>
SffmModel<To> CastModel(const SffmModel<From>& m) {
  return SffmModel<To>(m.T().template cast<To>(), m.c().template cast<To>(),
                       m.r().template cast<To>());
}

template <typename To, typename From>
InitialDistribution<To> CastInit(const InitialDistribution<From>& init) {
  InitialDistribution<To> out;
  out.lambda = static_cast<To>(init.lambda);
  out.nu0 = init.nu0.template cast<To>();
  out.point_mass = init.point_mass.template cast<To>();
  return out;
}

}  // namespace internal

/// The value nu_+^{(n)}(0) must take for the boundary conditions to hold.
template <typename Scalar>
BoundaryValue<Scalar> boundary_rhs(const SffmModel<Scalar>& model,
                                   const InitialDistribution<Scalar>& init,
                                   int n) {
  if (n < 0) throw std::invalid_argument("boundary_rhs: negative order");
  using W = typename internal::Wider<Scalar>::type;
  if constexpr (!std::is_same_v<W, Scalar>) {
    const BoundaryValue<W> wide = boundary_rhs(internal::CastModel<W>(model),
                                               internal::CastInit<W>(init), n);
    return {wide.recursive.template cast<Scalar>(), wide.closed_form.template cast<Scalar>()};
  }
  const WeightTable<Scalar> w = boundary_weights(model, init, n + 1);
  const auto& up = model.partition().s_plus_c;
  std::vector<RowVec<Scalar>> rec(n + 1);
  rec[0] = w.A[1];
  for (int m = 1; m <= n; ++m) {
    RowVec<Scalar> v = w.A[m + 1];
    for (int k = 1; k <= m; ++k) v -= rec[k - 1] * Sub(w.f[m + 1][k], up, up);
    rec[m] = std::move(v);
  }
  return {rec[n], w.A[n + 1] + w.B[n + 1]};
}

struct BoundaryCheck {
  int order = 0;
  bool pass = false;
  double error = 0;
};

namespace internal {

// D^n P = P Q^n + sum_{k=1}^n nu^{(k-1)}(0) h(k,n).
template <typename Scalar>
RowVec<Scalar> DnAtom(const WeightTable<Scalar>& w,
                      const InitialDistribution<Scalar>& init, int n) {
  RowVec<Scalar> out = init.point_mass * w.h[n][0];
  for (int k = 1; k <= n; ++k) out += DensityDerivative(init, k - 1) * w.h[n][k];
  return out;
}

// D^n nu(0) = sum_k nu^{(k)}(0) h(k,n).
template <typename Scalar>
RowVec<Scalar> DnDensityAtZero(const WeightTable<Scalar>& w,
                               const InitialDistribution<Scalar>& init, int n) {
  RowVec<Scalar> out = RowVec<Scalar>::Zero(init.nu0.size());
  for (int k = 0; k <= n; ++k) out += DensityDerivative(init, k) * w.h[n][k];
  return out;
}

template <typename Scalar>
std::vector<BoundaryCheck> CheckBoundary(const SffmModel<Scalar>& model,
                                         const InitialDistribution<Scalar>& init,
                                         const WeightTable<Scalar>& w, int N,
                                         double tol) {
  const auto& up = model.partition().s_plus_c;
  const auto& down = model.partition().s_minus_c;
  const Mat<Scalar> Q = model.fluid_Q();
  const Vec<Scalar> cp = model.c_prime();
  Mat<Scalar> gain = Sub(Q, down, up);
  for (std::size_t j = 0; j < up.size(); ++j) gain.col(j) /= cp(up[j]);
  std::vector<BoundaryCheck> out;
  for (int n = 0; n <= N; ++n) {
    const RowVec<Scalar> lhs = SubRow(DnDensityAtZero(w, init, n), up);
    const RowVec<Scalar> rhs = SubRow(DnAtom(w, init, n), down) * gain;
    using std::max;
    const Scalar scale =
        max<Scalar>(Scalar(1), max(lhs.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff()));
    BoundaryCheck c;
    c.order = n;
    c.error = static_cast<double>((lhs - rhs).cwiseAbs().maxCoeff() / scale);
    c.pass = c.error <= tol;
    out.push_back(c);
  }
  return out;
}

template <typename Scalar>
void RequireBoundary(const SffmModel<Scalar>& model,
                     const InitialDistribution<Scalar>& init,
                     const WeightTable<Scalar>& w, int N) {
  for (const BoundaryCheck& c : CheckBoundary(model, init, w, N, 1e-9)) {
    if (!c.pass) {
      throw std::invalid_argument("boundary condition fails at order " +
                                  std::to_string(c.order));
    }
  }
}

template <typename Scalar>
Scalar TailMass(Scalar lambda, Scalar v) {
  using std::exp;
  return v == std::numeric_limits<Scalar>::infinity() ? Scalar(0) : exp(-lambda * v);
}

template <typename Scalar>
TransientMeasure<Scalar> DnMeasure(const WeightTable<Scalar>& w,
                                   const InitialDistribution<Scalar>& init,
                                   int n, Scalar v) {
  const Scalar inside = 1 - TailMass(init.lambda, v);
  TransientMeasure<Scalar> out;
  out.density_part = RowVec<Scalar>::Zero(init.nu0.size());
  for (int k = 0; k <= n; ++k) {
    out.density_part += inside / init.lambda * DensityDerivative(init, k) * w.h[n][k];
  }
  out.atom_part = DnAtom(w, init, n);
  out.values = out.density_part + out.atom_part;
  return out;
}

}  // namespace internal

/// Boundary conditions at orders 0..N: D^n nu_+(0) against
/// D^n P_- (|R_-|^{-1} T_{-+}) (|R_+|^{-1} C_+)^{-1}.
template <typename Scalar>
std::vector<BoundaryCheck> check_boundary(const SffmModel<Scalar>& model,
                                          const InitialDistribution<Scalar>& init,
                                          int N, double tol = 1e-9) {
  if (N < 0) throw std::invalid_argument("check_boundary: negative order");
  return internal::CheckBoundary(model, init, h_weights(model, N), N, tol);
}

/// D^n mu over A_v (v may be +infinity).
template <typename Scalar>
TransientMeasure<Scalar> dn_measure(const SffmModel<Scalar>& model,
                                    const InitialDistribution<Scalar>& init,
                                    int n, Scalar v) {
  if (n < 0) throw std::invalid_argument("dn_measure: negative order");
  if (!(v >= 0)) throw std::invalid_argument("dn_measure: v must be nonnegative");
  const WeightTable<Scalar> w = h_weights(model, n);
  internal::RequireBoundary(model, init, w, n);
  TransientMeasure<Scalar> out = internal::DnMeasure(w, init, n, v);
  const RowVec<Scalar> atom_up = SubRow(out.atom_part, model.partition().s_plus_c);
  const Scalar scale = std::max<Scalar>(Scalar(1), out.atom_part.cwiseAbs().maxCoeff());
  if (atom_up.size() > 0 && atom_up.cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NumericalError("atom in up-phases does not vanish at order " +
                         std::to_string(n));
  }
  return out;
}

struct TransientOptions {
  /// Highest boundary-condition order verified; negative skips the check
  /// (for models carrying the structural certificate).
  int check_order = 5;
};

/// P(phi(omega(y)) = j, X(omega(y)) in A_v) in closed form.
template <typename Scalar>
TransientMeasure<Scalar> mu_exp_Dy(const SffmModel<Scalar>& model,
                                   const InitialDistribution<Scalar>& init,
                                   Scalar y, Scalar v,
                                   const TransientOptions& options = {}) {
  if (!(y >= 0)) throw std::invalid_argument("mu_exp_Dy: y must be nonnegative");
  if (!(v >= 0)) throw std::invalid_argument("mu_exp_Dy: v must be nonnegative");
  if (options.check_order >= 0) {
    internal::RequireBoundary(model, init, h_weights(model, options.check_order),
                              options.check_order);
  }
  Mat<Scalar> Ql = model.fluid_Q();
  Ql.diagonal() += init.lambda * model.c_prime();
  const Mat<Scalar> El = expm(Mat<Scalar>(Ql * y));
  const Mat<Scalar> E = expm(Mat<Scalar>(model.fluid_Q() * y));
  const RowVec<Scalar> above = init.nu0 / init.lambda * El;
  TransientMeasure<Scalar> out;
  out.density_part = (1 - internal::TailMass(init.lambda, v)) * above;
  out.atom_part = init.total() * E - above;
  out.values = out.density_part + out.atom_part;
  return out;
}

template <typename Scalar>
struct MassDecomposition {
  RowVec<Scalar> at_zero;
  RowVec<Scalar> above_zero;
  RowVec<Scalar> phase_marginal;
};

template <typename Scalar>
MassDecomposition<Scalar> mass_decomposition(const SffmModel<Scalar>& model,
                                             const InitialDistribution<Scalar>& init,
                                             Scalar y,
                                             const TransientOptions& options = {}) {
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  const TransientMeasure<Scalar> whole = mu_exp_Dy(model, init, y, inf, options);
  return {whole.atom_part, whole.density_part, whole.values};
}

/// Coefficients of the y -> infinity limit: values(v) = const - e^{-lambda v} decay.
template <typename Scalar>
struct StationaryLimit {
  Scalar lambda = 1;
  RowVec<Scalar> decay;
  RowVec<Scalar> constant;

  RowVec<Scalar> at(Scalar v) const {
    return constant - internal::TailMass(lambda, v) * decay;
  }
};

template <typename Scalar>
StationaryLimit<Scalar> limit_y_infinity(const SffmModel<Scalar>& model,
                                         const InitialDistribution<Scalar>& init) {
  if (stability(model).class_x != DriftClass::kStable) {
    throw NumericalError("limit does not exist (X is not stable)");
  }
  Mat<Scalar> Ql = model.fluid_Q();
  Ql.diagonal() += init.lambda * model.c_prime();
  const ZeroProjection<Scalar> p_tilted = zero_eigen_projection(Ql);
  const ZeroProjection<Scalar> p_plain = zero_eigen_projection(model.fluid_Q());
  if (!p_tilted.converges || !p_plain.converges) {
    throw NumericalError("limit does not exist: " +
                         (p_tilted.converges ? p_plain.diagnostic : p_tilted.diagnostic));
  }
  StationaryLimit<Scalar> out;
  out.lambda = init.lambda;
  out.decay = init.nu0 / init.lambda * p_tilted.P0;
  out.constant = init.total() * p_plain.P0;
  return out;
}

/// Truncated Taylor series sum_{n<=N} y^n/n! D^n mu(A_v).
template <typename Scalar>
TransientMeasure<Scalar> series_mu_exp_Dy(const SffmModel<Scalar>& model,
                                          const InitialDistribution<Scalar>& init,
                                          Scalar y, Scalar v, int N) {
  if (N < 0) throw std::invalid_argument("series_mu_exp_Dy: negative order");
  const WeightTable<Scalar> w = h_weights(model, N);
  internal::RequireBoundary(model, init, w, N);
  TransientMeasure<Scalar> out;
  out.values = RowVec<Scalar>::Zero(model.n());
  out.density_part = out.values;
  out.atom_part = out.values;
  Scalar coef = 1;
  for (int n = 0; n <= N; ++n) {
    if (n > 0) coef *= y / n;
    const TransientMeasure<Scalar> term = internal::DnMeasure(w, init, n, v);
    out.density_part += coef * term.density_part;
    out.atom_part += coef * term.atom_part;
  }
  out.values = out.density_part + out.atom_part;
  return out;
}

}  // namespace sffm
