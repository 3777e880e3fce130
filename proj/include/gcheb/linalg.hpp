#pragma once

// Complex vectors, CSR sparse matrices and the operator actions used by the
// iteration schemes. Matrix powers are applied, never formed.

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

namespace gcheb {

using cplx = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;

class ComplexVector {
 public:
  ComplexVector() = default;
  explicit ComplexVector(std::size_t n, cplx fill = {}) : values_(n, fill) {}
  /// Throws DomainError if any entry is NaN or infinite.
  explicit ComplexVector(std::vector<cplx> values);
  ComplexVector(std::initializer_list<cplx> values)
      : ComplexVector(std::vector<cplx>(values)) {}

  static ComplexVector zeros(std::size_t n) { return ComplexVector(n); }
  static ComplexVector ones(std::size_t n) { return ComplexVector(n, cplx(1.0)); }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  std::span<cplx> span() { return values_; }
  std::span<const cplx> span() const { return values_; }
  const std::vector<cplx>& values() const { return values_; }
  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  ComplexVector& operator+=(const ComplexVector& other);
  ComplexVector& operator-=(const ComplexVector& other);
  ComplexVector& operator*=(cplx a);
  /// this += a * x
  ComplexVector& axpy(cplx a, const ComplexVector& x);

  friend bool operator==(const ComplexVector&, const ComplexVector&) = default;

 private:
  std::vector<cplx> values_;
};

ComplexVector operator+(ComplexVector a, const ComplexVector& b);
ComplexVector operator-(ComplexVector a, const ComplexVector& b);
ComplexVector operator*(cplx a, ComplexVector v);

/// Euclidean norm; the only norm used for reported errors and residuals.
double norm2(const ComplexVector& v);
double norm_inf(const ComplexVector& v);
/// sum_i conj(a_i) b_i
cplx dot(const ComplexVector& a, const ComplexVector& b);
bool all_finite(const ComplexVector& v);

struct Triplet {
  std::size_t row;
  std::size_t col;
  cplx value;
};

/// Compressed sparse row matrix with complex entries. Column indices are
/// strictly increasing within each row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Takes raw CSR arrays and validates the layout.
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<cplx> values);

  /// Duplicates are summed; entries with |value| <= drop_tol are dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries, double drop_tol = 0.0);
  static SparseMatrix from_dense(const DenseMatrix& a, double drop_tol = 0.0);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix diagonal(std::span<const cplx> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> col_indices() const { return col_indices_; }
  std::span<const cplx> values() const { return values_; }

  /// Entry (i, j); zero when not stored.
  cplx at(std::size_t i, std::size_t j) const;
  DenseMatrix to_dense() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<cplx> values_;
};

using ComplexSparseMatrix = SparseMatrix;

/// Caps the worker threads used by matvec. 1 (the default) gives the
/// reference summation order; row partitioning never changes per-row order,
/// so results agree bitwise at any thread count.
void set_matvec_threads(unsigned threads);
unsigned matvec_threads();

ComplexVector matvec(const SparseMatrix& a, const ComplexVector& v);
SparseMatrix conj_transpose(const SparseMatrix& a);
/// Sparse product a * b (row-wise Gustavson accumulation).
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b, double drop_tol = 0.0);
/// a + beta * b
SparseMatrix add(const SparseMatrix& a, cplx beta, const SparseMatrix& b);
double frobenius_norm(const SparseMatrix& a);

/// (I + A + ... + A^{k-1}) v by Horner accumulation: k - 1 matvecs.
ComplexVector geometric_sum_apply(const SparseMatrix& a, int k, const ComplexVector& v);

/// The action of base^k, as k successive matvecs.
class PoweredOperator {
 public:
  PoweredOperator(std::shared_ptr<const SparseMatrix> base, int k);

  ComplexVector apply(const ComplexVector& v) const;
  const SparseMatrix& base() const { return *base_; }
  const std::shared_ptr<const SparseMatrix>& base_ptr() const { return base_; }
  int power() const { return k_; }
  std::size_t dim() const { return base_->rows(); }

 private:
  std::shared_ptr<const SparseMatrix> base_;
  int k_;
};

struct EigenDecomposition {
  std::vector<cplx> eigenvalues;  // descending modulus
  DenseMatrix eigenvectors;       // column j pairs with eigenvalues[j]
};

/// Dense eigensolver for validation-sized problems (n <= 64).
EigenDecomposition dense_eigendecomposition(const DenseMatrix& a);

inline constexpr std::size_t kDenseEigenMaxDim = 64;

}  // namespace gcheb
