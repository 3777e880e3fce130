#pragma once

// Helpers shared by the unit tests and the acceptance runner: random
// instances and dense Eigen oracles.

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

#include "gcheb/linalg.hpp"

namespace gcheb::testing {

inline Eigen::VectorXcd to_eigen(const ComplexVector& v) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

inline ComplexVector from_eigen(const Eigen::VectorXcd& v) {
  std::vector<cplx> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i);
  return ComplexVector(std::move(out));
}

inline ComplexVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {gauss(rng), gauss(rng)};
  return ComplexVector(std::move(v));
}

/// Random sparse matrix with roughly `density` fill, scaled so its spectral
/// radius is `rho` (measured densely, so keep n small).
inline SparseMatrix random_sparse(std::size_t n, double density, double rho, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, {gauss(rng), gauss(rng)}});
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && unit(rng) < density) t.push_back({i, j, {gauss(rng), gauss(rng)}});
    }
  }
  SparseMatrix a = SparseMatrix::from_triplets(n, n, std::move(t));
  const Eigen::ComplexEigenSolver<DenseMatrix> es(a.to_dense(), false);
  const double r = es.eigenvalues().cwiseAbs().maxCoeff();
  const DenseMatrix scaled = a.to_dense() * (rho / r);
  return SparseMatrix::from_dense(scaled);
}

/// Dense solve of (I - M) x = g.
inline ComplexVector dense_fixed_point(const SparseMatrix& m, const ComplexVector& g) {
  const auto n = static_cast<Eigen::Index>(m.rows());
  const DenseMatrix a = DenseMatrix::Identity(n, n) - m.to_dense();
  return from_eigen(a.partialPivLu().solve(to_eigen(g)));
}

inline double rel_diff(const ComplexVector& a, const ComplexVector& b) {
  return norm2(a - b) / std::max(norm2(b), 1e-300);
}

}  // namespace gcheb::testing
