#pragma once

// Seeded normal sparse test systems and the built-in 4x4 non-normal fixture.

#include <cstdint>
#include <vector>

#include "gcheb/linalg.hpp"
#include "gcheb/solvers.hpp"

namespace gcheb {

struct NormalMatrixSpec {
  std::size_t n = 1000;
  std::size_t block_size = 100;
  double lambda1 = 0.9;
  double inner_radius = 0.6;
  std::uint64_t seed = 42;

  /// Throws DomainError unless 0 < inner_radius < lambda1 < 1 and
  /// block_size <= n.
  void validate() const;
};

/// Entry 0 is lambda1, the rest inner_radius * a * e^{2 pi i b} with a, b
/// uniform on [0, 1] (a = 0 rejected).
std::vector<cplx> random_spectrum(const NormalMatrixSpec& spec);

/// Haar-like random unitary on the leading block_size indices, identity on
/// the rest. ||U* U - I||_max <= 1e-12.
SparseMatrix embedded_random_unitary(std::size_t n, std::size_t block_size, std::uint64_t seed);

/// Uniformly random permutation matrix: column j has its one in row perm[j].
SparseMatrix random_permutation(std::size_t n, std::uint64_t seed);

struct GeneratedSystem {
  IterationSystem system;       // M, M~ = M*, g, g~, lambda1; k = 1
  ComplexVector reference;      // all ones
  std::vector<cplx> spectrum;   // diagonal of D
  SparseMatrix unitary;         // U = P U0
};

/// M = U* D U with U = P U0, entries below 1e-14 dropped; M~ = M*,
/// g = (I - M) x and g~ = (I - M~) x for x = ones.
GeneratedSystem assemble_normal_system(const NormalMatrixSpec& spec);

/// Same construction from explicit parts (used for the identity-U checks).
GeneratedSystem assemble_normal_system(const std::vector<cplx>& diag, const SparseMatrix& unitary);

struct Example33 {
  IterationSystem system;         // k = 1, lambda1 = 0.9, M~ = P conj(D) P^{-1}
  ComplexVector reference;        // all ones
  std::vector<cplx> eigenvalues;  // 0.9, 0.4 + 0.7i, 0.4 - 0.7i, -0.5
  DenseMatrix P;
  DenseMatrix D;
};

/// The 4x4 non-normal example with its printed eigenvector matrix. Throws
/// FixtureCorrupt if P^{-1} M P does not reproduce D to 1e-12.
Example33 example33_fixture();

/// ||M M* - M* M||_F
double normality_defect(const SparseMatrix& m);

}  // namespace gcheb
