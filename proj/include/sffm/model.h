#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sffm/matops.h"

namespace sffm {

/// Sign partitions of the phase space. Index lists are 0-based and ascending.
struct PhasePartition {
  std::vector<int> s_plus_r, s_minus_r;
  std::vector<int> s_plus_c, s_minus_c;
  /// Diagonal of the indicator of r_j > 0.
  std::vector<int> r_check;
  /// perm_r[k] is the natural index of the k-th phase in (S^+, S^-) order.
  std::vector<int> perm_r;
  /// perm_c[k] is the natural index of the k-th phase in (S_+, S_-) order.
  std::vector<int> perm_c;
};

inline std::vector<int> InversePermutation(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = static_cast<int>(k);
  return inv;
}

/// Rows and columns of M reordered by perm (result(k,l) = M(perm[k], perm[l])).
template <typename Derived>
Mat<typename Derived::Scalar> Permute(const Eigen::MatrixBase<Derived>& M,
                                      const std::vector<int>& perm) {
  Mat<typename Derived::Scalar> out(M.rows(), M.cols());
  for (Eigen::Index k = 0; k < M.rows(); ++k)
    for (Eigen::Index l = 0; l < M.cols(); ++l) out(k, l) = M(perm[k], perm[l]);
  return out;
}

/// Entries of a row vector reordered by perm (result(k) = v(perm[k])).
template <typename Derived>
RowVec<typename Derived::Scalar> PermuteRow(const Eigen::MatrixBase<Derived>& v,
                                            const std::vector<int>& perm) {
  RowVec<typename Derived::Scalar> out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = v(perm[k]);
  return out;
}

/// Submatrix with the given row and column index lists.
template <typename Derived>
Mat<typename Derived::Scalar> Sub(const Eigen::MatrixBase<Derived>& M,
                                  const std::vector<int>& rows,
                                  const std::vector<int>& cols) {
  Mat<typename Derived::Scalar> out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = M(rows[i], cols[j]);
  return out;
}

template <typename Derived>
RowVec<typename Derived::Scalar> SubRow(const Eigen::MatrixBase<Derived>& v,
                                        const std::vector<int>& idx) {
  RowVec<typename Derived::Scalar> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

template <typename Scalar>
PhasePartition MakePartition(const Vec<Scalar>& c, const Vec<Scalar>& r) {
  PhasePartition p;
  const int n = static_cast<int>(r.size());
  p.r_check.assign(n, 0);
  for (int j = 0; j < n; ++j) {
    if (r(j) > 0) {
      p.s_plus_r.push_back(j);
      p.r_check[j] = 1;
    } else {
      p.s_minus_r.push_back(j);
    }
    (c(j) > 0 ? p.s_plus_c : p.s_minus_c).push_back(j);
  }
  p.perm_r = p.s_plus_r;
  p.perm_r.insert(p.perm_r.end(), p.s_minus_r.begin(), p.s_minus_r.end());
  p.perm_c = p.s_plus_c;
  p.perm_c.insert(p.perm_c.end(), p.s_minus_c.begin(), p.s_minus_c.end());
  return p;
}

/// Phase generator T with X-rates c and Y-rates r. Immutable.
template <typename Scalar>
class SffmModel {
 public:
  SffmModel(Mat<Scalar> T, Vec<Scalar> c, Vec<Scalar> r)
      : T_(std::move(T)), c_(std::move(c)), r_(std::move(r)) {
    if (T_.rows() != T_.cols() || c_.size() != T_.rows() ||
        r_.size() != T_.rows()) {
      throw std::invalid_argument("SffmModel: inconsistent dimensions");
    }
    partition_ = MakePartition<Scalar>(c_, r_);
  }

  int n() const { return static_cast<int>(T_.rows()); }
  const Mat<Scalar>& T() const { return T_; }
  const Vec<Scalar>& c() const { return c_; }
  const Vec<Scalar>& r() const { return r_; }
  const PhasePartition& partition() const { return partition_; }

  /// |R|^{-1} T.
  Mat<Scalar> fluid_Q() const {
    return r_.cwiseAbs().cwiseInverse().asDiagonal() * T_;
  }
  /// Diagonal of |R|^{-1} C.
  Vec<Scalar> c_prime() const { return c_.cwiseQuotient(r_.cwiseAbs()); }

 private:
  Mat<Scalar> T_;
  Vec<Scalar> c_;
  Vec<Scalar> r_;
  PhasePartition partition_;
};

/// Exponential density nu0 * exp(-lambda x) plus an atom at zero.
template <typename Scalar>
struct InitialDistribution {
  Scalar lambda = 1;
  RowVec<Scalar> nu0;
  RowVec<Scalar> point_mass;

  RowVec<Scalar> total() const { return point_mass + nu0 / lambda; }
};

/// Parameters of the structured model for which the boundary conditions hold
/// at every order.
template <typename Scalar>
struct TandemParams {
  Scalar b = 1;
  Scalar beta = 1;
  Scalar gamma = 1;
  Mat<Scalar> T_pm;
  Mat<Scalar> T_mp;
  Vec<Scalar> abs_r;
  Vec<Scalar> r_signs;
  Vec<Scalar> c_signs;
  RowVec<Scalar> P_minus;
  /// Optional split of the nu_-(0) mass over S_-; uniform when empty.
  RowVec<Scalar> nu_minus_weights;
};

enum class DriftClass { kStable, kNullRecurrent, kTransient };

inline const char* ToString(DriftClass c) {
  switch (c) {
    case DriftClass::kStable: return "stable";
    case DriftClass::kNullRecurrent: return "null_recurrent";
    case DriftClass::kTransient: return "transient";
  }
  return "?";
}

template <typename Scalar>
struct StabilityReport {
  RowVec<Scalar> pi;
  Scalar drift_x = 0;
  Scalar drift_y = 0;
  DriftClass class_x = DriftClass::kStable;
  DriftClass class_y = DriftClass::kStable;
};

namespace internal {

template <typename Derived>
bool IsIrreducible(const Eigen::MatrixBase<Derived>& T) {
  const Eigen::Index n = T.rows();
  if (n <= 1) return true;
  auto reach = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const Eigen::Index i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto w = forward ? T(i, j) : T(j, i);
        if (j != i && w > 0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    for (char s : seen)
      if (!s) return false;
    return true;
  };
  return reach(true) && reach(false);
}

template <typename Scalar>
std::string Num(Scalar x) {
  std::ostringstream os;
  os << static_cast<double>(x);
  return os.str();
}

}  // namespace internal

/// Every violated model invariant, phases numbered from 1. Empty means valid.
template <typename Scalar>
std::vector<std::string> validate(const SffmModel<Scalar>& model,
                                  double row_tol = 1e-12) {
  std::vector<std::string> out;
  const auto& T = model.T();
  const int n = model.n();
  if (n == 0) {
    out.push_back("model has no phases");
    return out;
  }
  if (!T.allFinite() || !model.c().allFinite() || !model.r().allFinite()) {
    out.push_back("non-finite entries in model");
    return out;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && T(i, j) < 0) {
        out.push_back("negative off-diagonal generator entry at (" +
                      std::to_string(i + 1) + "," + std::to_string(j + 1) +
                      "): " + internal::Num(T(i, j)));
      }
    }
    const Scalar s = T.row(i).sum();
    using std::abs;
    if (abs(s) > row_tol) {
      out.push_back("generator row " + std::to_string(i + 1) + " sums to " +
                    internal::Num(s));
    }
  }
  if (!internal::IsIrreducible(T)) out.push_back("generator is reducible");
  for (int i = 0; i < n; ++i) {
    if (model.c()(i) == 0)
      out.push_back("zero c-rate at phase " + std::to_string(i + 1));
    if (model.r()(i) == 0)
      out.push_back("zero r-rate at phase " + std::to_string(i + 1));
  }
  return out;
}

/// Every violated invariant of an initial distribution for the model.
template <typename Scalar>
std::vector<std::string> validate(const SffmModel<Scalar>& model,
                                  const InitialDistribution<Scalar>& init,
                                  double mass_tol = 1e-12) {
  std::vector<std::string> out;
  const int n = model.n();
  if (init.nu0.size() != n || init.point_mass.size() != n) {
    out.push_back("initial distribution has wrong dimension");
    return out;
  }
  if (!(init.lambda > 0)) out.push_back("lambda must be positive");
  for (int j = 0; j < n; ++j) {
    if (init.nu0(j) < 0)
      out.push_back("negative density coefficient at phase " + std::to_string(j + 1));
    if (init.point_mass(j) < 0)
      out.push_back("negative point mass at phase " + std::to_string(j + 1));
  }
  for (int j : model.partition().s_plus_c) {
    if (init.point_mass(j) != 0)
      out.push_back("point mass in up-phase " + std::to_string(j + 1));
  }
  if (init.lambda > 0) {
    using std::abs;
    const Scalar mass = init.total().sum();
    if (abs(mass - 1) > mass_tol)
      out.push_back("total mass is " + internal::Num(mass));
  }
  return out;
}

/// Removes the phases in zero_set, folding their sojourns into the rates
/// between the remaining phases.
template <typename Scalar>
Mat<Scalar> censor_zero_phases(const Eigen::Ref<const Mat<Scalar>>& T_bar,
                               const std::vector<int>& zero_set) {
  const int total = static_cast<int>(T_bar.rows());
  std::vector<char> is_zero(total, 0);
  for (int z : zero_set) {
    if (z < 0 || z >= total) throw std::invalid_argument("censor_zero_phases: bad index");
    is_zero[z] = 1;
  }
  std::vector<int> keep, zero;
  for (int i = 0; i < total; ++i) (is_zero[i] ? zero : keep).push_back(i);
  Mat<Scalar> T = Sub(T_bar, keep, keep);
  if (zero.empty()) return T;
  const Mat<Scalar> T00 = Sub(T_bar, zero, zero);
  Eigen::PartialPivLU<Mat<Scalar>> lu(-T00);
  if (!(lu.rcond() > 64 * std::numeric_limits<Scalar>::epsilon())) {
    throw NumericalError("zero-rate class is absorbing");
  }
  T += Sub(T_bar, keep, zero) * lu.solve(Sub(T_bar, zero, keep));
  return T;
}

/// Stationary vector and drift classification of both fluids.
template <typename Scalar>
StabilityReport<Scalar> stability(const SffmModel<Scalar>& model,
                                  double zero_band = 1e-10) {
  const int n = model.n();
  Mat<Scalar> A = model.T().transpose();
  A.row(n - 1).setOnes();
  Vec<Scalar> rhs = Vec<Scalar>::Zero(n);
  rhs(n - 1) = 1;
  StabilityReport<Scalar> out;
  out.pi = linear_solve(A, rhs).transpose();
  out.drift_x = out.pi.dot(model.c().transpose());
  out.drift_y = out.pi.dot(model.r().transpose());
  auto classify = [&](Scalar d) {
    if (d < -zero_band) return DriftClass::kStable;
    if (d > zero_band) return DriftClass::kTransient;
    return DriftClass::kNullRecurrent;
  };
  out.class_x = classify(out.drift_x);
  out.class_y = classify(out.drift_y);
  return out;
}

/// Model with |R|^{-1} T = [[-(b+beta) I, T_pm], [T_mp, -b I]] in c-sign order,
/// |c| = gamma |r|, and the exponential initial distribution with
/// lambda = beta / gamma that meets the boundary conditions at every order.
template <typename Scalar>
std::pair<SffmModel<Scalar>, InitialDistribution<Scalar>> build_tandem_model(
    const TandemParams<Scalar>& p, double tol = 1e-12) {
  using std::abs;
  const int n = static_cast<int>(p.abs_r.size());
  if (p.r_signs.size() != n || p.c_signs.size() != n) {
    throw std::invalid_argument("tandem: sign vectors must match abs_r");
  }
  if (!(p.b > 0) || !(p.beta > 0) || !(p.gamma > 0)) {
    throw std::invalid_argument("tandem: b, beta, gamma must be positive");
  }
  std::vector<int> up, down;
  for (int i = 0; i < n; ++i) {
    if (!(p.abs_r(i) > 0)) throw std::invalid_argument("tandem: abs_r must be positive");
    if (p.r_signs(i) == 0 || p.c_signs(i) == 0)
      throw std::invalid_argument("tandem: signs must be nonzero");
    (p.c_signs(i) > 0 ? up : down).push_back(i);
  }
  const int np = static_cast<int>(up.size());
  const int nm = static_cast<int>(down.size());
  if (np == 0 || nm == 0) {
    throw std::invalid_argument("tandem: both c-sign classes must be nonempty");
  }
  if (p.T_pm.rows() != np || p.T_pm.cols() != nm || p.T_mp.rows() != nm ||
      p.T_mp.cols() != np || p.P_minus.size() != nm) {
    throw std::invalid_argument("tandem: block sizes do not match c_signs");
  }
  if ((p.T_pm.array() < 0).any() || (p.T_mp.array() < 0).any() ||
      (p.P_minus.array() < 0).any()) {
    throw std::invalid_argument("tandem: blocks and P_minus must be nonnegative");
  }
  const Scalar scale = 1 + p.b + p.beta;
  for (int i = 0; i < np; ++i)
    if (abs(p.T_pm.row(i).sum() - (p.b + p.beta)) > tol * scale)
      throw std::invalid_argument("tandem: T_pm row " + std::to_string(i + 1) +
                                  " does not sum to b+beta");
  for (int i = 0; i < nm; ++i)
    if (abs(p.T_mp.row(i).sum() - p.b) > tol * scale)
      throw std::invalid_argument("tandem: T_mp row " + std::to_string(i + 1) +
                                  " does not sum to b");

  const Scalar lambda = p.beta / p.gamma;
  const Scalar atom = p.P_minus.sum();
  const Scalar bound = lambda * p.gamma / (p.b + lambda * p.gamma);
  if (atom > bound) throw std::invalid_argument("atom too large");

  Mat<Scalar> Qc = Mat<Scalar>::Zero(n, n);
  Qc.topLeftCorner(np, np).diagonal().setConstant(-(p.b + p.beta));
  Qc.topRightCorner(np, nm) = p.T_pm;
  Qc.bottomLeftCorner(nm, np) = p.T_mp;
  Qc.bottomRightCorner(nm, nm).diagonal().setConstant(-p.b);
  std::vector<int> order = up;
  order.insert(order.end(), down.begin(), down.end());
  Mat<Scalar> Q(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) Q(order[k], order[l]) = Qc(k, l);
  Mat<Scalar> T = p.abs_r.asDiagonal() * Q;
  for (int i = 0; i < n; ++i) T(i, i) = -(T.row(i).sum() - T(i, i));
  Vec<Scalar> c = p.gamma * p.abs_r.cwiseProduct(p.c_signs.cwiseSign());
  Vec<Scalar> r = p.abs_r.cwiseProduct(p.r_signs.cwiseSign());

  InitialDistribution<Scalar> init;
  init.lambda = lambda;
  init.nu0 = RowVec<Scalar>::Zero(n);
  init.point_mass = RowVec<Scalar>::Zero(n);
  // |R_+|^{-1} C_+ = gamma I.
  const RowVec<Scalar> nu_plus = p.P_minus * p.T_mp / p.gamma;
  const Scalar minus_mass = lambda - (p.b + lambda * p.gamma) / p.gamma * atom;
  if (minus_mass < 0) throw std::invalid_argument("atom too large");
  RowVec<Scalar> w = p.nu_minus_weights;
  if (w.size() == 0) {
    w = RowVec<Scalar>::Ones(nm);
  } else if (w.size() != nm || (w.array() < 0).any() || !(w.sum() > 0)) {
    throw std::invalid_argument("tandem: bad nu_minus_weights");
  }
  const RowVec<Scalar> nu_minus = minus_mass * w / w.sum();
  for (int k = 0; k < np; ++k) init.nu0(up[k]) = nu_plus(k);
  for (int k = 0; k < nm; ++k) {
    init.nu0(down[k]) = nu_minus(k);
    init.point_mass(down[k]) = p.P_minus(k);
  }
  return {SffmModel<Scalar>(std::move(T), std::move(c), std::move(r)), init};
}

}  // namespace sffm
