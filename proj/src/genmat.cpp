#include "gcheb/genmat.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <numbers>
#include <numeric>
#include <random>

#include "gcheb/errors.hpp"

namespace gcheb {

namespace {

constexpr double kDropTol = 1e-14;

// Independent streams for the spectrum, the unitary block and the permutation.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

}  // namespace

void NormalMatrixSpec::validate() const {
  if (n == 0) throw DomainError("dimension must be positive");
  if (block_size > n) throw DomainError("block_size exceeds n");
  if (!(0.0 < inner_radius && inner_radius < lambda1 && lambda1 < 1.0)) {
    throw DomainError("need 0 < inner_radius < lambda1 < 1");
  }
}

std::vector<cplx> random_spectrum(const NormalMatrixSpec& spec) {
  spec.validate();
  auto rng = substream(spec.seed, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<cplx> d;
  d.reserve(spec.n);
  d.push_back(spec.lambda1);
  while (d.size() < spec.n) {
    const double a = unit(rng);
    const double b = unit(rng);
    if (a == 0.0) continue;
    d.push_back(spec.inner_radius * a * std::polar(1.0, 2.0 * std::numbers::pi * b));
  }
  return d;
}

SparseMatrix embedded_random_unitary(std::size_t n, std::size_t block_size, std::uint64_t seed) {
  if (block_size > n) throw DomainError("block_size exceeds n");
  if (block_size == 0) return SparseMatrix::identity(n);

  auto rng = substream(seed, 2);
  std::normal_distribution<double> gauss;
  const auto b = static_cast<Eigen::Index>(block_size);
  DenseMatrix z(b, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    for (Eigen::Index i = 0; i < b; ++i) z(i, j) = cplx(gauss(rng), gauss(rng));
  }
  Eigen::HouseholderQR<DenseMatrix> qr(z);
  DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(b, b);
  const DenseMatrix& r = qr.matrixQR();
  // Fix the phase ambiguity of QR so Q follows the invariant measure.
  for (Eigen::Index j = 0; j < b; ++j) {
    const cplx d = r(j, j);
    const double ad = std::abs(d);
    if (ad > 0.0) q.col(j) *= d / ad;
  }

  std::vector<Triplet> t;
  t.reserve(block_size * block_size + (n - block_size));
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), q(i, j)});
    }
  }
  for (std::size_t i = block_size; i < n; ++i) t.push_back({i, i, 1.0});
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix random_permutation(std::size_t n, std::uint64_t seed) {
  auto rng = substream(seed, 3);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t j = 0; j < n; ++j) t.push_back({perm[j], j, 1.0});
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

GeneratedSystem assemble_normal_system(const std::vector<cplx>& diag, const SparseMatrix& unitary) {
  const std::size_t n = diag.size();
  if (unitary.rows() != n || unitary.cols() != n) {
    throw DimensionMismatch("unitary and diagonal differ in size");
  }
  const SparseMatrix d = SparseMatrix::diagonal(diag);
  SparseMatrix m = multiply(conj_transpose(unitary), multiply(d, unitary), kDropTol);
  SparseMatrix mt = conj_transpose(m);

  const ComplexVector x = ComplexVector::ones(n);
  ComplexVector g = x - matvec(m, x);
  ComplexVector gt = x - matvec(mt, x);

  double r1 = 0.0;
  cplx lambda1 = 0.0;
  for (const auto& l : diag) {
    if (std::abs(l) > r1) {
      r1 = std::abs(l);
      lambda1 = l;
    }
  }
  GeneratedSystem out{make_system(std::move(m), std::move(g), std::move(mt), std::move(gt),
                                  lambda1),
                      x, diag, unitary};
  return out;
}

GeneratedSystem assemble_normal_system(const NormalMatrixSpec& spec) {
  spec.validate();
  const auto diag = random_spectrum(spec);
  const SparseMatrix u0 = embedded_random_unitary(spec.n, spec.block_size, spec.seed);
  const SparseMatrix p = random_permutation(spec.n, spec.seed);
  return assemble_normal_system(diag, multiply(p, u0));
}

Example33 example33_fixture() {
  using C = cplx;
  DenseMatrix m(4, 4);
  m << C(1.40, 0.70), C(-1.80, -2.80), C(1.20, -2.80), C(0.20, 0.00),    //
      C(0.25, 0.35), C(-0.95, -1.05), C(-0.60, -0.70), C(-0.85, 0.35),   //
      C(0.00, 0.00), C(0.90, 0.70), C(1.30, 1.40), C(0.90, 0.70),        //
      C(-0.25, -0.35), C(-0.45, 0.35), C(-1.20, -0.70), C(-0.55, -1.05);
  DenseMatrix p(4, 4);
  p << -2.0, 3.0, 1.0, -1.0,  //
      -0.5, 1.0, 0.5, -0.75,  //
      0.0, -1.0, 0.0, 0.5,    //
      0.5, 0.0, -0.5, -0.25;
  const std::vector<cplx> eig{C(0.9, 0.0), C(0.4, 0.7), C(0.4, -0.7), C(-0.5, 0.0)};
  DenseMatrix d = DenseMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) d(i, i) = eig[static_cast<std::size_t>(i)];

  const DenseMatrix p_inv = p.inverse();
  const double defect = (p_inv * m * p - d).cwiseAbs().maxCoeff();
  if (!(defect <= 1e-12)) {
    throw FixtureCorrupt("P^-1 M P deviates from the diagonal by " + std::to_string(defect));
  }
  const DenseMatrix mt = p * d.conjugate() * p_inv;

  const ComplexVector x = ComplexVector::ones(4);
  SparseMatrix ms = SparseMatrix::from_dense(m);
  SparseMatrix mts = SparseMatrix::from_dense(mt, kDropTol);
  ComplexVector g = x - matvec(ms, x);
  ComplexVector gt = x - matvec(mts, x);
  return Example33{make_system(std::move(ms), std::move(g), std::move(mts), std::move(gt),
                               C(0.9, 0.0)),
                   x, eig, p, d};
}

double normality_defect(const SparseMatrix& m) {
  const SparseMatrix mh = conj_transpose(m);
  return frobenius_norm(add(multiply(m, mh), -1.0, multiply(mh, m)));
}

}  // namespace gcheb
