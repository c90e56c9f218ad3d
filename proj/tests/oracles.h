#pragma once

// Test-side reference computations. None of these call into the solver code
// they are used to check.

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "sffm/model.h"
#include "sffm/model_file.h"

namespace oracle {

using sffm::Mat;
using sffm::RowVec;
using sffm::Vec;

inline sffm::ResolvedModel Example(int k) { return sffm::Resolve(sffm::BuiltinExample(k)); }

/// exp(A) from Eigen's unsupported MatrixFunctions module.
inline Mat<double> Expm(const Mat<double>& A) { return A.exp(); }

/// Minimal solution of B + A X + X D + X C X = 0 from the invariant subspace
/// of K = [[A, B], [-C, -D]] belonging to its |D| eigenvalues of largest real part.
inline Mat<double> RiccatiBySubspace(const Mat<double>& A, const Mat<double>& B,
                                     const Mat<double>& C, const Mat<double>& D) {
  const Eigen::Index p = A.rows(), m = D.rows();
  Mat<double> K(p + m, p + m);
  K << A, B, -C, -D;
  Eigen::EigenSolver<Mat<double>> es(K);
  std::vector<Eigen::Index> idx(p + m);
  for (Eigen::Index i = 0; i < p + m; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return es.eigenvalues()(a).real() > es.eigenvalues()(b).real();
  });
  Eigen::MatrixXcd V(p + m, m);
  for (Eigen::Index j = 0; j < m; ++j) V.col(j) = es.eigenvectors().col(idx[j]);
  const Eigen::MatrixXcd top = V.topRows(p);
  const Eigen::MatrixXcd bottom = V.bottomRows(m);
  return (top * bottom.inverse()).real();
}

/// Censoring through the embedded jump chain: zero phases are skipped by
/// summing over excursions of the jump chain, holding rates stay put.
inline Mat<double> CensorByJumpChain(const Mat<double>& T, const std::vector<int>& zero) {
  const int n = static_cast<int>(T.rows());
  std::vector<int> keep;
  for (int i = 0; i < n; ++i)
    if (std::find(zero.begin(), zero.end(), i) == zero.end()) keep.push_back(i);
  Mat<double> P = Mat<double>::Zero(n, n);
  Vec<double> q(n);
  for (int i = 0; i < n; ++i) {
    q(i) = -T(i, i);
    for (int j = 0; j < n; ++j)
      if (j != i) P(i, j) = T(i, j) / q(i);
  }
  auto sub = [](const Mat<double>& M, const std::vector<int>& r, const std::vector<int>& c) {
    Mat<double> out(r.size(), c.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = M(r[i], c[j]);
    return out;
  };
  const Mat<double> Pzz = sub(P, zero, zero);
  // Expected visits of the jump chain inside the zero class, by power series.
  Mat<double> N = Mat<double>::Identity(zero.size(), zero.size());
  Mat<double> term = N;
  for (int k = 0; k < 20000 && term.cwiseAbs().maxCoeff() > 1e-18; ++k) {
    term = term * Pzz;
    N += term;
  }
  const Mat<double> Pc = sub(P, keep, keep) + sub(P, keep, zero) * N * sub(P, zero, keep);
  Mat<double> out(keep.size(), keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j)
      out(i, j) = q(keep[i]) * (Pc(i, j) - (i == j ? 1.0 : 0.0));
  return out;
}

/// h(k,m) by summing every word of length m with k factors equal to the
/// diagonal G and m-k factors equal to Q.
inline Mat<double> WordSum(const Mat<double>& Q, const Mat<double>& G, int k, int m) {
  const Eigen::Index n = Q.rows();
  Mat<double> total = Mat<double>::Zero(n, n);
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    Mat<double> w = Mat<double>::Identity(n, n);
    for (int i = 0; i < m; ++i) w = w * ((mask >> i) & 1u ? G : Q);
    total += w;
  }
  return total;
}

/// Random irreducible generator with off-diagonal rates in [lo, hi].
inline Mat<double> RandomGenerator(int n, std::mt19937_64& rng, double lo = 0.1,
                                   double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat<double> T(n, n);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      T(i, j) = u(rng);
      s += T(i, j);
    }
    T(i, i) = -s;
  }
  return T;
}

/// Random row of nonnegative weights summing to total.
inline RowVec<double> RandomSplit(int n, double total, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  RowVec<double> w(n);
  for (int i = 0; i < n; ++i) w(i) = u(rng);
  return w * (total / w.sum());
}

/// Random parameters for the structured model, n <= max_n phases.
inline sffm::TandemParams<double> RandomTandem(int max_n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(2, max_n);
  const int n = size(rng);
  std::uniform_int_distribution<int> split(1, n - 1);
  const int np = split(rng), nm = n - np;
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::bernoulli_distribution coin(0.5);
  sffm::TandemParams<double> p;
  p.b = u(rng);
  p.beta = u(rng);
  p.gamma = u(rng);
  p.T_pm.resize(np, nm);
  for (int i = 0; i < np; ++i) p.T_pm.row(i) = RandomSplit(nm, p.b + p.beta, rng);
  p.T_mp.resize(nm, np);
  for (int i = 0; i < nm; ++i) p.T_mp.row(i) = RandomSplit(np, p.b, rng);
  p.abs_r.resize(n);
  p.r_signs.resize(n);
  p.c_signs.resize(n);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < n; ++i) {
    p.abs_r(i) = u(rng);
    p.r_signs(i) = coin(rng) ? 1 : -1;
  }
  for (int k = 0; k < n; ++k) p.c_signs(order[k]) = k < np ? 1 : -1;
  const double lambda = p.beta / p.gamma;
  const double bound = lambda * p.gamma / (p.b + lambda * p.gamma);
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  p.P_minus = RandomSplit(nm, frac(rng) * bound, rng);
  return p;
}

}  // namespace oracle
