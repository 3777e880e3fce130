#include "gcheb/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "gcheb/errors.hpp"

namespace gcheb {

namespace {

std::atomic<unsigned> g_matvec_threads{1};

// Below this many rows, thread startup costs more than the product.
constexpr std::size_t kParallelRowThreshold = 4096;

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a) + " vs " +
                            std::to_string(b));
  }
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

// ---------------------------------------------------------------------------
// ComplexVector

ComplexVector::ComplexVector(std::vector<cplx> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!finite(values_[i])) {
      throw DomainError("non-finite vector entry at index " + std::to_string(i));
    }
  }
}

ComplexVector& ComplexVector::operator+=(const ComplexVector& other) {
  require_same_size(size(), other.size(), "vector add");
  for (std::size_t i = 0; i < size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ComplexVector& ComplexVector::operator-=(const ComplexVector& other) {
  require_same_size(size(), other.size(), "vector subtract");
  for (std::size_t i = 0; i < size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ComplexVector& ComplexVector::operator*=(cplx a) {
  for (auto& v : values_) v *= a;
  return *this;
}

ComplexVector& ComplexVector::axpy(cplx a, const ComplexVector& x) {
  require_same_size(size(), x.size(), "axpy");
  for (std::size_t i = 0; i < size(); ++i) values_[i] += a * x.values_[i];
  return *this;
}

ComplexVector operator+(ComplexVector a, const ComplexVector& b) { return a += b; }
ComplexVector operator-(ComplexVector a, const ComplexVector& b) { return a -= b; }
ComplexVector operator*(cplx a, ComplexVector v) { return v *= a; }

double norm2(const ComplexVector& v) {
  // Scaled accumulation keeps tiny error vectors (rate^m for large m) exact.
  double scale = 0.0;
  for (const auto& z : v) scale = std::max({scale, std::abs(z.real()), std::abs(z.imag())});
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double sum = 0.0;
  for (const auto& z : v) sum += std::norm(z / scale);
  return scale * std::sqrt(sum);
}

double norm_inf(const ComplexVector& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

cplx dot(const ComplexVector& a, const ComplexVector& b) {
  require_same_size(a.size(), b.size(), "dot");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

bool all_finite(const ComplexVector& v) {
  return std::all_of(v.begin(), v.end(), finite);
}

// ---------------------------------------------------------------------------
// SparseMatrix

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices, std::vector<cplx> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != rows_ + 1 || row_offsets_.front() != 0) {
    throw Error("CSR: row_offsets must have n_rows + 1 entries starting at 0");
  }
  if (col_indices_.size() != values_.size() || row_offsets_.back() != values_.size()) {
    throw Error("CSR: nnz disagrees between row_offsets, col_indices and values");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) throw Error("CSR: row_offsets decreasing");
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      if (col_indices_[p] >= cols_) throw Error("CSR: column index out of range");
      if (p > row_offsets_[i] && col_indices_[p] <= col_indices_[p - 1]) {
        throw Error("CSR: column indices not strictly increasing in row " +
                    std::to_string(i));
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> entries, double drop_tol) {
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols) throw DimensionMismatch("triplet out of range");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> cols_out;
  std::vector<cplx> vals_out;
  cols_out.reserve(entries.size());
  vals_out.reserve(entries.size());
  for (std::size_t p = 0; p < entries.size();) {
    std::size_t q = p;
    cplx sum = 0.0;
    while (q < entries.size() && entries[q].row == entries[p].row &&
           entries[q].col == entries[p].col) {
      sum += entries[q].value;
      ++q;
    }
    if (std::abs(sum) > drop_tol || (drop_tol == 0.0 && sum != cplx(0.0))) {
      cols_out.push_back(entries[p].col);
      vals_out.push_back(sum);
      ++offsets[entries[p].row + 1];
    }
    p = q;
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals_out));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& a, double drop_tol) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != cplx(0.0)) {
        t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), a(i, j)});
      }
    }
  }
  return from_triplets(a.rows(), a.cols(), std::move(t), drop_tol);
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<cplx> ones(n, 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const cplx> diag) {
  const std::size_t n = diag.size();
  std::vector<std::size_t> offsets(n + 1);
  std::vector<std::size_t> cols(n);
  std::iota(offsets.begin(), offsets.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  return SparseMatrix(n, n, std::move(offsets), std::move(cols),
                      std::vector<cplx>(diag.begin(), diag.end()));
}

cplx SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d = DenseMatrix::Zero(static_cast<Eigen::Index>(rows_),
                                    static_cast<Eigen::Index>(cols_));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col_indices_[p])) = values_[p];
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Operations

void set_matvec_threads(unsigned threads) { g_matvec_threads = std::max(1u, threads); }
unsigned matvec_threads() { return g_matvec_threads; }

ComplexVector matvec(const SparseMatrix& a, const ComplexVector& v) {
  require_same_size(a.cols(), v.size(), "matvec");
  ComplexVector out(a.rows());
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();

  auto rows_kernel = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      cplx s = 0.0;
      for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) s += vals[p] * v[cols[p]];
      out[i] = s;
    }
  };

  const unsigned threads = matvec_threads();
  if (threads <= 1 || a.rows() < kParallelRowThreshold) {
    rows_kernel(0, a.rows());
    return out;
  }
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (a.rows() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < a.rows(); begin += chunk) {
      workers.emplace_back(rows_kernel, begin, std::min(a.rows(), begin + chunk));
    }
  }
  return out;
}

SparseMatrix conj_transpose(const SparseMatrix& a) {
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  std::vector<std::size_t> t_offsets(a.cols() + 1, 0);
  for (const auto c : cols) ++t_offsets[c + 1];
  std::partial_sum(t_offsets.begin(), t_offsets.end(), t_offsets.begin());
  std::vector<std::size_t> next(t_offsets.begin(), t_offsets.end() - 1);
  std::vector<std::size_t> t_cols(a.nnz());
  std::vector<cplx> t_vals(a.nnz());
  // Rows are visited in increasing order, so each transposed row fills in
  // increasing column order.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
      const std::size_t q = next[cols[p]]++;
      t_cols[q] = i;
      t_vals[q] = std::conj(vals[p]);
    }
  }
  return SparseMatrix(a.cols(), a.rows(), std::move(t_offsets), std::move(t_cols),
                      std::move(t_vals));
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b, double drop_tol) {
  require_same_size(a.cols(), b.rows(), "multiply");
  const auto ao = a.row_offsets();
  const auto ac = a.col_indices();
  const auto av = a.values();
  const auto bo = b.row_offsets();
  const auto bc = b.col_indices();
  const auto bv = b.values();

  std::vector<std::size_t> offsets(a.rows() + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<cplx> vals;
  std::vector<cplx> acc(b.cols(), 0.0);
  std::vector<char> used(b.cols(), 0);
  std::vector<std::size_t> pattern;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    pattern.clear();
    for (std::size_t p = ao[i]; p < ao[i + 1]; ++p) {
      const cplx aval = av[p];
      const std::size_t k = ac[p];
      for (std::size_t q = bo[k]; q < bo[k + 1]; ++q) {
        const std::size_t j = bc[q];
        if (!used[j]) {
          used[j] = 1;
          pattern.push_back(j);
        }
        acc[j] += aval * bv[q];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (const auto j : pattern) {
      if (std::abs(acc[j]) > drop_tol || (drop_tol == 0.0 && acc[j] != cplx(0.0))) {
        cols.push_back(j);
        vals.push_back(acc[j]);
      }
      acc[j] = 0.0;
      used[j] = 0;
    }
    offsets[i + 1] = cols.size();
  }
  return SparseMatrix(a.rows(), b.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix add(const SparseMatrix& a, cplx beta, const SparseMatrix& b) {
  require_same_size(a.rows(), b.rows(), "add rows");
  require_same_size(a.cols(), b.cols(), "add cols");
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) {
      t.push_back({i, a.col_indices()[p], a.values()[p]});
    }
    for (std::size_t p = b.row_offsets()[i]; p < b.row_offsets()[i + 1]; ++p) {
      t.push_back({i, b.col_indices()[p], beta * b.values()[p]});
    }
  }
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

double frobenius_norm(const SparseMatrix& a) {
  double s = 0.0;
  for (const auto& v : a.values()) s += std::norm(v);
  return std::sqrt(s);
}

ComplexVector geometric_sum_apply(const SparseMatrix& a, int k, const ComplexVector& v) {
  if (k < 1) throw DomainError("geometric sum needs k >= 1");
  require_same_size(a.cols(), v.size(), "geometric_sum_apply");
  require_same_size(a.rows(), a.cols(), "geometric_sum_apply (square)");
  // v + A(v + A(v + ...))
  ComplexVector acc = v;
  for (int j = 1; j < k; ++j) {
    acc = matvec(a, acc);
    acc += v;
  }
  return acc;
}

PoweredOperator::PoweredOperator(std::shared_ptr<const SparseMatrix> base, int k)
    : base_(std::move(base)), k_(k) {
  if (!base_) throw Error("powered operator needs a base matrix");
  if (k_ < 1) throw DomainError("power must be >= 1");
  require_same_size(base_->rows(), base_->cols(), "powered operator (square)");
}

ComplexVector PoweredOperator::apply(const ComplexVector& v) const {
  ComplexVector out = matvec(*base_, v);
  for (int j = 1; j < k_; ++j) out = matvec(*base_, out);
  return out;
}

EigenDecomposition dense_eigendecomposition(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("eigendecomposition needs a square matrix");
  if (static_cast<std::size_t>(a.rows()) > kDenseEigenMaxDim) {
    throw DomainError("dense eigendecomposition limited to n <= 64");
  }
  Eigen::ComplexEigenSolver<DenseMatrix> solver(a, true);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("dense eigensolver did not converge");
  }
  const auto n = a.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto& vals = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    const double ax = std::abs(vals(x));
    const double ay = std::abs(vals(y));
    if (ax != ay) return ax > ay;
    return std::arg(vals(x)) < std::arg(vals(y));
  });
  EigenDecomposition out;
  out.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.eigenvalues.push_back(vals(order[static_cast<std::size_t>(j)]));
    out.eigenvectors.col(j) = solver.eigenvectors().col(order[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace gcheb
