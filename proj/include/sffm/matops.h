#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sffm {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Raised when an iteration fails to converge or a limit does not exist.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct RiccatiOptions {
  double tol = 1e-13;
  int max_iter = 200000;
  /// Polish the fixed-point iterate with Newton steps on the Sylvester form.
  bool newton = true;
};

template <typename Scalar>
struct RiccatiSolution {
  Mat<Scalar> X;
  SolveReport report;
};

template <typename Scalar>
struct ZeroProjection {
  Mat<Scalar> P0;
  bool converges = false;
  std::string diagnostic;
};

namespace internal {

template <typename Derived>
typename Derived::RealScalar InfNorm(const Eigen::MatrixBase<Derived>& A) {
  if (A.size() == 0) return 0;
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

template <typename Derived>
typename Derived::RealScalar OneNorm(const Eigen::MatrixBase<Derived>& A) {
  if (A.size() == 0) return 0;
  return A.cwiseAbs().colwise().sum().maxCoeff();
}

// Pade numerator/denominator pair for degree m, Higham (2005) coefficients.
template <typename Scalar>
void PadeTerms(const Mat<Scalar>& A, int m, Mat<Scalar>* U, Mat<Scalar>* V) {
  const Eigen::Index n = A.rows();
  const Mat<Scalar> I = Mat<Scalar>::Identity(n, n);
  const Mat<Scalar> A2 = A * A;
  if (m == 13) {
    static constexpr std::array<double, 14> b = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};
    const Mat<Scalar> A4 = A2 * A2;
    const Mat<Scalar> A6 = A4 * A2;
    auto c = [](int i) { return static_cast<Scalar>(b[i]); };
    const Mat<Scalar> W1 = c(13) * A6 + c(11) * A4 + c(9) * A2;
    const Mat<Scalar> W2 = c(7) * A6 + c(5) * A4 + c(3) * A2 + c(1) * I;
    const Mat<Scalar> Z1 = c(12) * A6 + c(10) * A4 + c(8) * A2;
    const Mat<Scalar> Z2 = c(6) * A6 + c(4) * A4 + c(2) * A2 + c(0) * I;
    *U = A * (A6 * W1 + W2);
    *V = A6 * Z1 + Z2;
    return;
  }
  static constexpr std::array<double, 10> b3 = {120, 60, 12, 1};
  static constexpr std::array<double, 10> b5 = {30240, 15120, 3360, 420, 30, 1};
  static constexpr std::array<double, 10> b7 = {17297280, 8648640, 1995840,
                                                277200,   25200,   1512,
                                                56,       1};
  static constexpr std::array<double, 10> b9 = {
      17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
      2162160.0,     110880.0,     3960.0,       90.0,        1.0};
  const auto& b = m == 3 ? b3 : m == 5 ? b5 : m == 7 ? b7 : b9;
  Mat<Scalar> odd = static_cast<Scalar>(b[1]) * I;
  Mat<Scalar> even = static_cast<Scalar>(b[0]) * I;
  Mat<Scalar> power = I;
  for (int k = 2; k <= m; k += 2) {
    power = power * A2;
    even += static_cast<Scalar>(b[k]) * power;
    odd += static_cast<Scalar>(b[k + 1]) * power;
  }
  *U = A * odd;
  *V = even;
}

}  // namespace internal

/// Matrix exponential by scaling and squaring with a Pade approximant.
template <typename Derived>
Mat<typename Derived::Scalar> expm(const Eigen::MatrixBase<Derived>& A_in) {
  using Scalar = typename Derived::Scalar;
  using std::ceil;
  using std::log2;
  if (A_in.rows() != A_in.cols()) {
    throw std::invalid_argument("expm: matrix must be square");
  }
  if (!A_in.allFinite()) {
    throw std::invalid_argument("expm: non-finite entries");
  }
  const Eigen::Index n = A_in.rows();
  if (n == 0) return Mat<Scalar>(0, 0);
  Mat<Scalar> A = A_in;
  const Scalar norm = internal::OneNorm(A);

  static constexpr std::array<double, 4> theta = {
      1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
      2.097847961257068e0};
  static constexpr std::array<int, 4> degree = {3, 5, 7, 9};
  Mat<Scalar> U, V;
  int squarings = 0;
  bool done = false;
  for (int i = 0; i < 4 && !done; ++i) {
    if (norm <= static_cast<Scalar>(theta[i])) {
      internal::PadeTerms<Scalar>(A, degree[i], &U, &V);
      done = true;
    }
  }
  if (!done) {
    const Scalar theta13 = static_cast<Scalar>(5.371920351148152e0);
    if (norm > theta13) {
      squarings = static_cast<int>(ceil(log2(norm / theta13)));
      A /= std::pow(Scalar(2), squarings);
    }
    internal::PadeTerms<Scalar>(A, 13, &U, &V);
  }
  Mat<Scalar> E = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < squarings; ++i) E = E * E;
  return E;
}

/// Solves A X = B, refusing numerically singular A.
template <typename DerivedA, typename DerivedB>
Mat<typename DerivedA::Scalar> linear_solve(
    const Eigen::MatrixBase<DerivedA>& A,
    const Eigen::MatrixBase<DerivedB>& B) {
  using Scalar = typename DerivedA::Scalar;
  if (A.rows() != A.cols() || A.rows() != B.rows()) {
    throw std::invalid_argument("linear_solve: dimension mismatch");
  }
  if (A.rows() == 0) return Mat<Scalar>(0, B.cols());
  Eigen::PartialPivLU<Mat<Scalar>> lu(A);
  const Scalar rcond = lu.rcond();
  if (!(rcond > 64 * std::numeric_limits<Scalar>::epsilon())) {
    std::ostringstream msg;
    msg << "linear_solve: matrix is numerically singular (rcond estimate "
        << static_cast<double>(rcond) << ")";
    throw NumericalError(msg.str());
  }
  return lu.solve(B);
}

/// Minimal nonnegative solution X of B + A X + X D + X C X = 0.
///
/// The iteration splits off the diagonals of A and D and updates
///   X_{k+1} o (a_i + d_j) = B + N_A X_k + X_k N_D + X_k C X_k
/// from X_0 = 0, where N_A, N_D are the nonnegative remainders. Iterates are
/// entrywise nondecreasing.
template <typename Scalar>
RiccatiSolution<Scalar> solve_riccati(const Eigen::Ref<const Mat<Scalar>>& A,
                                      const Eigen::Ref<const Mat<Scalar>>& B,
                                      const Eigen::Ref<const Mat<Scalar>>& C,
                                      const Eigen::Ref<const Mat<Scalar>>& D,
                                      const RiccatiOptions& options = {}) {
  const Eigen::Index p = B.rows();
  const Eigen::Index q = B.cols();
  if (A.rows() != p || A.cols() != p || D.rows() != q || D.cols() != q ||
      C.rows() != q || C.cols() != p) {
    throw std::invalid_argument("solve_riccati: dimension mismatch");
  }
  if ((B.array() < 0).any() || (C.array() < 0).any()) {
    throw std::invalid_argument("solve_riccati: B and C must be nonnegative");
  }
  if (!(options.tol > 0)) {
    throw std::invalid_argument("solve_riccati: tol must be positive");
  }
  RiccatiSolution<Scalar> out;
  out.X = Mat<Scalar>::Zero(p, q);
  if (p == 0 || q == 0) {
    out.report.converged = true;
    return out;
  }
  auto residual = [&](const Mat<Scalar>& X) -> Mat<Scalar> {
    return B + A * X + X * D + X * C * X;
  };

  Vec<Scalar> a = -A.diagonal();
  Vec<Scalar> d = -D.diagonal();
  Scalar min_sum = a.minCoeff() + d.minCoeff();
  // A shift keeps every divisor positive; the extra diagonal mass goes into
  // the nonnegative remainders.
  Scalar shift = 0;
  if (min_sum <= 0) shift = -min_sum + std::max<Scalar>(Scalar(1), -min_sum);
  a.array() += shift;
  Mat<Scalar> NA = A;
  NA.diagonal() += a;
  Mat<Scalar> ND = D;
  ND.diagonal() += d;
  Mat<Scalar> denom(p, q);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < q; ++j) denom(i, j) = a(i) + d(j);

  Mat<Scalar> X = Mat<Scalar>::Zero(p, q);
  Scalar res = internal::InfNorm(residual(X));
  int k = 0;
  while (k < options.max_iter && res > options.tol) {
    Mat<Scalar> next =
        (B + NA * X + X * ND + X * C * X).cwiseQuotient(denom);
    ++k;
    if (!next.allFinite()) throw NumericalError("iteration diverged: no finite minimal nonnegative solution");
    const Scalar step = internal::InfNorm(next - X);
    X = std::move(next);
    res = internal::InfNorm(residual(X));
    if (step == 0) break;
  }

  if (options.newton && res > 0) {
    // (A + X C) H + H (D + C X) = -R, solved through the Kronecker form.
    for (int it = 0; it < 60 && res > options.tol * 1e-3; ++it) {
      const Mat<Scalar> L = A + X * C;
      const Mat<Scalar> Rm = D + C * X;
      Mat<Scalar> K = Mat<Scalar>::Zero(p * q, p * q);
      for (Eigen::Index j = 0; j < q; ++j) {
        K.block(j * p, j * p, p, p) += L;
        for (Eigen::Index l = 0; l < q; ++l) {
          K.block(l * p, j * p, p, p).diagonal().array() += Rm(j, l);
        }
      }
      const Mat<Scalar> R = residual(X);
      Vec<Scalar> rhs = -Eigen::Map<const Vec<Scalar>>(R.data(), p * q);
      Eigen::FullPivLU<Mat<Scalar>> lu(K);
      if (!lu.isInvertible()) break;
      Vec<Scalar> h = lu.solve(rhs);
      Mat<Scalar> candidate = X + Eigen::Map<Mat<Scalar>>(h.data(), p, q);
      if (!candidate.allFinite()) break;
      const Scalar cres = internal::InfNorm(residual(candidate));
      if (!(cres < res)) break;
      X = std::move(candidate);
      res = cres;
      ++k;
    }
  }
  out.X = X;
  out.report.iterations = k;
  out.report.residual = static_cast<double>(res);
  out.report.converged = res <= options.tol;
  return out;
}

/// Spectral projector onto the zero eigenvalue; the limit of exp(A y).
template <typename Derived>
ZeroProjection<typename Derived::Scalar> zero_eigen_projection(
    const Eigen::MatrixBase<Derived>& A_in, double zero_tol = 1e-9) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  if (A_in.rows() != A_in.cols()) {
    throw std::invalid_argument("zero_eigen_projection: matrix must be square");
  }
  if (!A_in.allFinite()) {
    throw std::invalid_argument("zero_eigen_projection: non-finite entries");
  }
  const Mat<Scalar> A = A_in;
  const Eigen::Index n = A.rows();
  ZeroProjection<Scalar> out;
  out.P0 = Mat<Scalar>::Zero(n, n);
  if (n == 0) {
    out.converges = true;
    return out;
  }
  Eigen::EigenSolver<Mat<Scalar>> es(A, false);
  if (es.info() != Eigen::Success) {
    out.diagnostic = "eigenvalue computation failed";
    return out;
  }
  const Scalar tol = static_cast<Scalar>(zero_tol);
  Eigen::Index zeros = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<Scalar> ev = es.eigenvalues()(i);
    if (abs(ev) <= tol) {
      ++zeros;
    } else if (ev.real() >= -tol) {
      out.diagnostic = ev.real() > tol ? "limit diverges" : "limit oscillates";
      return out;
    }
  }
  out.converges = true;
  if (zeros == 0) return out;

  Eigen::JacobiSVD<Mat<Scalar>> right(A, Eigen::ComputeFullV);
  Eigen::JacobiSVD<Mat<Scalar>> left(A.transpose(), Eigen::ComputeFullV);
  const Scalar scale = std::max<Scalar>(Scalar(1), internal::InfNorm(A));
  Eigen::Index rank_defect = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (right.singularValues()(i) <= tol * scale) ++rank_defect;
  }
  if (rank_defect != zeros) {
    out.converges = false;
    out.diagnostic = "zero eigenvalue is not semisimple";
    return out;
  }
  const Mat<Scalar> Vr = right.matrixV().rightCols(zeros);
  const Mat<Scalar> Wl = left.matrixV().rightCols(zeros);
  const Mat<Scalar> G = Wl.transpose() * Vr;
  Eigen::FullPivLU<Mat<Scalar>> lu(G);
  if (!lu.isInvertible()) {
    out.converges = false;
    out.diagnostic = "zero eigenvalue is not semisimple";
    return out;
  }
  out.P0 = Vr * lu.solve(Wl.transpose());
  return out;
}

}  // namespace sffm
