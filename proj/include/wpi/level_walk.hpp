#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "wpi/finite_kernel.hpp"

namespace wpi {

/// Walk on levels: from (i, j) with j < i move to (i, j+1); from (i, i) jump to (K, 1) with
/// K ~ nu.  States are the mu-full set {(i, j) : 1 <= j <= i <= L}, L = length of nu.
struct LevelWalk {
  std::vector<double> nu;  ///< nu(1..L), positive
  FiniteKernel P;
  FiniteKernel P_adj;
  std::vector<std::pair<int, int>> labels;  ///< (i, j) of each index

  int index(int i, int j) const { return (i - 1) * i / 2 + (j - 1); }
  int levels() const { return int(nu.size()); }
};

/// mu(i, j) = nu(i) 1{j <= i} / sum_k k nu(k)
inline Vector level_walk_stationary(const std::vector<double>& nu) {
  const int L = int(nu.size());
  double norm = 0.0;
  for (int i = 1; i <= L; ++i) norm += i * nu[i - 1];
  Vector mu(L * (L + 1) / 2);
  for (int i = 1; i <= L; ++i)
    for (int j = 1; j <= i; ++j) mu((i - 1) * i / 2 + (j - 1)) = nu[i - 1] / norm;
  return mu;
}

/// `nu` lists nu(1), nu(2), ...; trailing zeros are dropped (maximal level length i0), it is
/// renormalised, and every level up to i0 must carry mass.
inline LevelWalk level_walk_build(std::vector<double> nu) {
  while (!nu.empty() && nu.back() == 0.0) nu.pop_back();
  if (nu.size() < 2) fail(ErrorKind::BadSupport, "nu must charge at least two levels");
  double total = 0.0;
  for (double v : nu) {
    if (!(v > 0.0)) fail(ErrorKind::BadSupport, "nu must be positive on 1..i0");
    total += v;
  }
  for (double& v : nu) v /= total;
  LevelWalk w;
  w.nu = nu;
  const int L = int(nu.size());
  const int n = L * (L + 1) / 2;
  for (int i = 1; i <= L; ++i)
    for (int j = 1; j <= i; ++j) w.labels.push_back({i, j});
  Matrix P = Matrix::Zero(n, n), Q = Matrix::Zero(n, n);
  for (int i = 1; i <= L; ++i) {
    for (int j = 1; j <= i; ++j) {
      int x = w.index(i, j);
      if (j < i)
        P(x, w.index(i, j + 1)) = 1.0;
      else
        for (int k = 1; k <= L; ++k) P(x, w.index(k, 1)) += nu[k - 1];
      if (j > 1)
        Q(x, w.index(i, j - 1)) = 1.0;
      else
        for (int k = 1; k <= L; ++k) Q(x, w.index(k, k)) += nu[k - 1];
    }
  }
  Vector mu = level_walk_stationary(nu);
  w.P = FiniteKernel(std::move(P), mu);
  w.P_adj = FiniteKernel(std::move(Q), mu);
  return w;
}

/// (P*)^k P^k
inline FiniteKernel level_walk_power_product(const LevelWalk& w, int k) {
  Matrix A = matrix_power(w.P_adj, k).P() * matrix_power(w.P, k).P();
  for (Eigen::Index i = 0; i < A.rows(); ++i) A.row(i) /= A.row(i).sum();
  return FiniteKernel(std::move(A), w.P.mu());
}

/// 1_{A_k} - mu(A_k) with A_k = {(i, i) : i > k}: an observable fixed by (P*)^k P^k.
inline Vector level_walk_witness(const LevelWalk& w, int k) {
  Vector f = Vector::Zero(w.P.size());
  for (int i = k + 1; i <= w.levels(); ++i) f(w.index(i, i)) = 1.0;
  return f.array() - w.P.mu().dot(f);
}

}  // namespace wpi
