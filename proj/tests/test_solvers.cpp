#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "gcheb/errors.hpp"
#include "gcheb/genmat.hpp"
#include "gcheb/solvers.hpp"
#include "support.hpp"

using namespace gcheb;
using namespace gcheb::testing;

namespace {

using lcplx = std::complex<long double>;

// Independent scalar oracle: f_m(x, conj x) by the plain recurrence in
// extended precision.
lcplx f_scalar(int m, lcplx x) {
  lcplx a = 1.0L, b = x, c = 3.0L * x * x - 2.0L * std::conj(x);
  if (m == 0) return a;
  if (m == 1) return b;
  for (int j = 3; j <= m; ++j) {
    const lcplx d = 3.0L * x * c - 3.0L * std::conj(x) * b + a;
    a = b;
    b = c;
    c = d;
  }
  return c;
}

cplx p_scalar(int m, cplx lambda, cplx lambda1) {
  const lcplx l(lambda.real(), lambda.imag());
  const lcplx l1(lambda1.real(), lambda1.imag());
  const lcplx r = f_scalar(m, l / l1) / f_scalar(m, 1.0L / l1);
  return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
}

// Error system of a diagonal normal problem: g = g~ = 0, so the iterates
// are the errors eta^(m) themselves and keep full relative precision.
IterationSystem diagonal_error_system(const std::vector<cplx>& d, cplx lambda1) {
  const std::size_t n = d.size();
  std::vector<cplx> dc(n);
  for (std::size_t i = 0; i < n; ++i) dc[i] = std::conj(d[i]);
  return make_system(SparseMatrix::diagonal(d), ComplexVector::zeros(n),
                     SparseMatrix::diagonal(dc), ComplexVector::zeros(n), lambda1);
}

// Random system with a consistent tilde pair for reference solution x.
IterationSystem random_system(std::size_t n, double rho, std::mt19937_64& rng, ComplexVector& x) {
  auto m = random_sparse(n, 0.2, rho, rng);
  x = random_vector(n, rng);
  auto mt = conj_transpose(m);
  auto g = x - matvec(m, x);
  auto gt = x - matvec(mt, x);
  const auto e = dense_eigendecomposition(m.to_dense());
  return make_system(std::move(m), std::move(g), std::move(mt), std::move(gt), e.eigenvalues[0]);
}

}  // namespace

TEST_CASE("make_system checks dimensions") {
  CHECK_THROWS_AS(make_system(SparseMatrix::identity(3), ComplexVector::ones(2)),
                  DimensionMismatch);
  CHECK_THROWS_AS(make_system(SparseMatrix::identity(3), ComplexVector::ones(3),
                              SparseMatrix::identity(2), ComplexVector::ones(2)),
                  DimensionMismatch);
}

TEST_CASE("basic iteration with M = 0 reaches g in one step and stays") {
  const ComplexVector g{cplx(1, 2), cplx(-3, 0.5)};
  const auto sys = make_system(SparseMatrix::from_triplets(2, 2, {}), g);
  IterateOptions o;
  o.keep_iterates = true;
  const auto r = basic_iterate(sys, ComplexVector::zeros(2), 5, o);
  REQUIRE(r.iterates.size() == 6);
  for (int m = 1; m <= 5; ++m) CHECK(r.iterates[static_cast<std::size_t>(m)] == g);
}

TEST_CASE("basic iteration started at the solution stays there") {
  std::mt19937_64 rng(1);
  ComplexVector x;
  const auto sys = random_system(10, 0.8, rng, x);
  const auto r = basic_iterate(sys, x, 50);
  CHECK(rel_diff(r.last, x) < 1e-12);
}

TEST_CASE("basic iteration on the 4x4 example with k = 2 contracts by 0.81") {
  const auto fx = example33_fixture();
  const auto sys = transform_system(fx.system, 2);
  IterateOptions o;
  o.reference = fx.reference;
  o.form = ErrorForm::homogeneous;
  const auto r = basic_iterate(sys, ComplexVector::zeros(4), 60, o);
  CHECK(tail_rate(r.trace, 30, 60) == doctest::Approx(0.81).epsilon(0.02 / 0.81));
}

TEST_CASE("basic iteration diverges with a typed error when rho > 1") {
  const auto sys = make_system(SparseMatrix::diagonal(std::vector<cplx>{1.5, 0.2}),
                               ComplexVector::ones(2));
  CHECK_THROWS_AS(basic_iterate(sys, ComplexVector::zeros(2), 200), Divergence);
}

TEST_CASE("transform_system with k = 1 leaves the system unchanged") {
  std::mt19937_64 rng(2);
  ComplexVector x;
  const auto sys = random_system(8, 0.7, rng, x);
  const auto t = transform_system(sys, 1);
  CHECK(t.k == 1);
  CHECK(t.h == sys.g);
  CHECK(*t.h_tilde == *sys.g_tilde);
}

TEST_CASE("transform_system keeps the fixed point of a random 20x20 system") {
  std::mt19937_64 rng(3);
  const auto m = random_sparse(20, 0.3, 0.8, rng);
  const auto g = random_vector(20, rng);
  const auto sys = make_system(m, g);
  const auto t = transform_system(sys, 3);
  const DenseMatrix d = m.to_dense();
  const DenseMatrix m3 = d * d * d;
  const auto x1 = dense_fixed_point(m, g);
  const auto x3 = dense_fixed_point(SparseMatrix::from_dense(m3), t.h);
  CHECK(rel_diff(x3, x1) < 1e-10);
}

TEST_CASE("transform_system on a diagonal with k = 2 gives h = (1 + lambda) g") {
  const std::vector<cplx> d{0.5, cplx(0.1, 0.3), -0.4};
  const ComplexVector g{1.0, cplx(2, 1), -3.0};
  const auto t = transform_system(make_system(SparseMatrix::diagonal(d), g), 2);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(t.h[i] - (1.0 + d[i]) * g[i]) < 1e-15);
}

TEST_CASE("transform_system rejects k < 1") {
  const auto sys = make_system(SparseMatrix::identity(2), ComplexVector::ones(2));
  CHECK_THROWS_AS(transform_system(sys, 0), DomainError);
}

TEST_CASE("property: transformed iteration converges to the same vector") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto m = random_sparse(30, 0.15, 0.9, rng);
    const auto g = random_vector(30, rng);
    const auto sys = make_system(m, g);
    const auto base = basic_iterate(sys, ComplexVector::zeros(30), 400).last;
    for (const int k : {2, 3, 5}) {
      const auto tk = transform_system(sys, k);
      const auto xk = basic_iterate(tk, ComplexVector::zeros(30), 400 / k + 1).last;
      CHECK(rel_diff(xk, base) < 1e-8);
    }
  }
}

TEST_CASE("classical scheme with M = 0 converges in one step") {
  const ComplexVector g{cplx(2.0), cplx(-1.0)};
  // Any rho in (0, 1) bounds the empty spectrum.
  const auto sys = make_system(SparseMatrix::from_triplets(2, 2, {}), g, std::nullopt,
                               std::nullopt, 0.5);
  const auto r = solve(sys, ComplexVector::zeros(2), {10, 1e-12}, Scheme::classical);
  CHECK(r.converged);
  CHECK(r.steps == 1);
}

TEST_CASE("classical scheme beats basic on a symmetric tridiagonal matrix") {
  const std::size_t n = 50;
  const double c = 0.95 / (2.0 * std::cos(std::numbers::pi / 51.0));
  std::vector<Triplet> t;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    t.push_back({i, i + 1, c});
    t.push_back({i + 1, i, c});
  }
  auto m = SparseMatrix::from_triplets(n, n, std::move(t));
  const auto x = ComplexVector::ones(n);
  auto g = x - matvec(m, x);
  const auto sys = make_system(std::move(m), std::move(g), std::nullopt, std::nullopt, 0.95);
  IterateOptions o;
  o.reference = x;
  const auto basic = basic_iterate(sys, ComplexVector::zeros(n), 20, o);
  const auto cheb = chebyshev_iterate(sys, 0.95, ComplexVector::zeros(n), 20, o);
  CHECK(*cheb.trace.records[20].err_norm < *basic.trace.records[20].err_norm);
}

TEST_CASE("classical scheme on the scalar 0.9 matches -1 / C_m(1/0.9)") {
  const auto sys = make_system(SparseMatrix::diagonal(std::vector<cplx>{0.9}), ComplexVector{0.1});
  IterateOptions o;
  o.keep_iterates = true;
  const auto r = chebyshev_iterate(sys, 0.9, ComplexVector::zeros(1), 20, o);
  // Values of -1 / C_m(1/0.9) computed in 30-digit arithmetic.
  const std::vector<std::pair<int, double>> expect{{1, -0.9},
                                                   {2, -0.680672268907563025},
                                                   {5, -0.191686414543093654},
                                                   {10, -0.0187156822950361476},
                                                   {20, -0.000175169060710213752}};
  for (const auto& [m, eta] : expect) {
    const cplx err = r.iterates[static_cast<std::size_t>(m)][0] - 1.0;
    CHECK(std::abs(err - eta) <= 1e-12);
  }
}

TEST_CASE("generalized scheme started at the solution stays there") {
  std::mt19937_64 rng(5);
  ComplexVector x;
  const auto sys = random_system(12, 0.8, rng, x);
  const auto r = generalized_chebyshev_iterate(transform_system(sys, 2), x, 100);
  CHECK(rel_diff(r.last, x) < 1e-11);
}

TEST_CASE("property: every scheme preserves the fixed point for 100 steps") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 5; ++t) {
    ComplexVector x;
    const auto sys = random_system(15, 0.85, rng, x);
    for (const auto s : {Scheme::basic, Scheme::classical, Scheme::generalized}) {
      const auto r = solve(sys, x, {100, 0.0}, s);
      CHECK(rel_diff(r.solution, x) < 1e-11);
      for (const auto& rec : r.trace.records) CHECK(rec.residual <= 1e-11 * norm2(sys.g) + 1e-13);
    }
  }
}

TEST_CASE("generalized scheme on the 4x4 example with k = 2 contracts by about 0.442") {
  const auto fx = example33_fixture();
  const auto sys = transform_system(fx.system, 2);
  IterateOptions o;
  o.reference = fx.reference;
  o.form = ErrorForm::homogeneous;
  const auto r = generalized_chebyshev_iterate(sys, ComplexVector::zeros(4), 60, o);
  CHECK(tail_rate(r.trace, 30, 60) == doctest::Approx(0.442).epsilon(0.02 / 0.442));
}

TEST_CASE("generalized scheme on diag(0.9, 0.3, -0.2) matches p_m(lambda) eps0") {
  const std::vector<cplx> d{0.9, 0.3, -0.2};
  const auto sys = diagonal_error_system(d, 0.9);
  IterateOptions o;
  o.keep_iterates = true;
  const auto eps0 = -1.0 * ComplexVector::ones(3);
  const auto r = generalized_chebyshev_iterate(sys, eps0, 60, o);
  for (int m = 0; m <= 60; ++m) {
    for (std::size_t i = 0; i < 3; ++i) {
      const cplx eta = r.iterates[static_cast<std::size_t>(m)][i];
      const cplx expect = -p_scalar(m, d[i], 0.9);
      CHECK(std::abs(eta - expect) <= 1e-9 * std::abs(expect));
    }
  }
}

TEST_CASE("generalized scheme on a complex diagonal matches the scalar oracle") {
  const cplx l1 = std::polar(0.85, 0.4);
  const std::vector<cplx> d{l1, cplx(0.2, 0.1), cplx(-0.25, 0.05), cplx(0.1, -0.3)};
  const auto sys = diagonal_error_system(d, l1);
  IterateOptions o;
  o.keep_iterates = true;
  const auto eps0 = -1.0 * ComplexVector::ones(d.size());
  const auto r = generalized_chebyshev_iterate(sys, eps0, 60, o);
  double worst = 0.0;
  for (int m = 0; m <= 60; ++m) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      const cplx eta = r.iterates[static_cast<std::size_t>(m)][i];
      const cplx expect = -p_scalar(m, d[i], l1);
      worst = std::max(worst, std::abs(eta - expect) / std::abs(expect));
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("basic seeding reproduces the first two basic iterates") {
  const auto fx = example33_fixture();
  const auto sys = transform_system(fx.system, 2);
  IterateOptions o;
  o.seeding = Seeding::basic_iterates;
  o.keep_iterates = true;
  const auto g = generalized_chebyshev_iterate(sys, ComplexVector::zeros(4), 5, o);
  const auto b = basic_iterate(sys, ComplexVector::zeros(4), 2, o);
  CHECK(g.iterates[1] == b.iterates[1]);
  CHECK(g.iterates[2] == b.iterates[2]);
}

TEST_CASE("generalized scheme reports missing data") {
  const auto plain = make_system(SparseMatrix::identity(2) , ComplexVector::ones(2));
  CHECK_THROWS_AS(generalized_chebyshev_iterate(plain, ComplexVector::zeros(2), 5),
                  MissingTildeData);
  const auto no_l1 = make_system(SparseMatrix::diagonal(std::vector<cplx>{0.5, 0.2}),
                                 ComplexVector::ones(2),
                                 SparseMatrix::diagonal(std::vector<cplx>{0.5, 0.2}),
                                 ComplexVector::ones(2));
  CHECK_THROWS_AS(generalized_chebyshev_iterate(no_l1, ComplexVector::zeros(2), 5),
                  MissingLambda1);
}

TEST_CASE("matvec accounting per scheme") {
  const auto fx = example33_fixture();
  for (const int k : {1, 2, 3}) {
    const auto sys = transform_system(fx.system, k);
    const auto x0 = ComplexVector::zeros(4);
    const auto b = basic_iterate(sys, x0, 10).trace;
    for (std::size_t m = 1; m < b.records.size(); ++m) CHECK(b.records[m].matvecs == std::size_t(k));
    const auto g = generalized_chebyshev_iterate(sys, x0, 10).trace;
    CHECK(g.records[1].matvecs == std::size_t(k));
    for (std::size_t m = 2; m < g.records.size(); ++m) {
      CHECK(g.records[m].matvecs == std::size_t(2 * k));
    }
    IterateOptions o;
    o.seeding = Seeding::basic_iterates;
    const auto gb = generalized_chebyshev_iterate(sys, x0, 10, o).trace;
    CHECK(gb.records[2].matvecs == std::size_t(k));
    CHECK(gb.records[3].matvecs == std::size_t(2 * k));
    std::size_t total = 0;
    for (const auto& r : g.records) total += r.matvecs;
    CHECK(g.total_matvecs() == total);
  }
  const auto sys = fx.system;
  const auto c = chebyshev_iterate(sys, 0.9, ComplexVector::zeros(4), 10).trace;
  for (std::size_t m = 1; m < c.records.size(); ++m) CHECK(c.records[m].matvecs == 1);
}

TEST_CASE("solve with M = 0 converges at step 1") {
  const auto sys = make_system(SparseMatrix::from_triplets(3, 3, {}), ComplexVector::ones(3));
  for (const auto s : {Scheme::basic, Scheme::generalized}) {
    auto full = sys;
    if (s == Scheme::generalized) {
      full = make_system(SparseMatrix::from_triplets(3, 3, {}), ComplexVector::ones(3),
                         SparseMatrix::from_triplets(3, 3, {}), ComplexVector::ones(3), 0.5);
    }
    const auto r = solve(full, ComplexVector::zeros(3), {50, 1e-12}, s);
    CHECK(r.converged);
    CHECK(r.steps == 1);
  }
}

TEST_CASE("solve on the 1000x1000 normal system: generalized needs fewer matvecs") {
  const auto gen = assemble_normal_system(NormalMatrixSpec{});
  const auto sys = transform_system(gen.system, 3);
  const auto x0 = ComplexVector::zeros(sys.dim());
  const auto b = solve(sys, x0, {500, 1e-8}, Scheme::basic);
  const auto g = solve(sys, x0, {500, 1e-8}, Scheme::generalized);
  REQUIRE(b.converged);
  REQUIRE(g.converged);
  CHECK(g.trace.total_matvecs() < b.trace.total_matvecs());
  CHECK(rel_diff(g.solution, gen.reference) < 1e-6);
}

TEST_CASE("solve on the 4x4 example for 10 steps: acceleration pulls ahead") {
  const auto fx = example33_fixture();
  const auto sys = transform_system(fx.system, 2);
  IterateOptions o;
  o.reference = fx.reference;
  const auto b = solve(sys, ComplexVector::zeros(4), {10, 0.0}, Scheme::basic, o);
  const auto g = solve(sys, ComplexVector::zeros(4), {10, 0.0}, Scheme::generalized, o);
  CHECK_FALSE(g.converged);
  REQUIRE(g.trace.records.size() == 11);
  CHECK(*g.trace.records[10].err_norm < *b.trace.records[10].err_norm);
  CHECK(tail_rate(g.trace, 5, 10) < tail_rate(b.trace, 5, 10));
}

TEST_CASE("residuals are measured on the untransformed system") {
  const auto fx = example33_fixture();
  const auto sys = transform_system(fx.system, 3);
  IterateOptions o;
  o.keep_iterates = true;
  const auto r = basic_iterate(sys, ComplexVector::zeros(4), 4, o);
  for (std::size_t m = 0; m < r.iterates.size(); ++m) {
    const auto& y = r.iterates[m];
    const double res = norm2((y - matvec(*fx.system.M, y)) - fx.system.g);
    CHECK(r.trace.records[m].residual == doctest::Approx(res).epsilon(1e-12));
  }
}

TEST_CASE("homogeneous and affine forms give the same iterates") {
  const auto fx = example33_fixture();
  const auto sys = transform_system(fx.system, 2);
  IterateOptions a;
  a.reference = fx.reference;
  a.form = ErrorForm::affine;
  IterateOptions h = a;
  h.form = ErrorForm::homogeneous;
  const auto ta = generalized_chebyshev_iterate(sys, ComplexVector::zeros(4), 20, a).trace;
  const auto th = generalized_chebyshev_iterate(sys, ComplexVector::zeros(4), 20, h).trace;
  for (std::size_t m = 0; m <= 20; ++m) {
    CHECK(*ta.records[m].err_norm == doctest::Approx(*th.records[m].err_norm).epsilon(1e-6));
  }
}

TEST_CASE("homogeneous form requires a consistent reference") {
  const auto fx = example33_fixture();
  IterateOptions o;
  o.form = ErrorForm::homogeneous;
  CHECK_THROWS_AS(basic_iterate(fx.system, ComplexVector::zeros(4), 3, o), Error);
  o.reference = ComplexVector::zeros(4);
  CHECK_THROWS_AS(basic_iterate(fx.system, ComplexVector::zeros(4), 3, o), Error);
}

TEST_CASE("tail_rate and mean_ratio on a synthetic geometric trace") {
  ConvergenceTrace t;
  for (int m = 0; m <= 20; ++m) {
    TraceRecord r;
    r.m = m;
    r.err_norm = std::pow(0.5, m);
    if (m > 0) r.ratio = 0.5;
    t.records.push_back(r);
  }
  CHECK(tail_rate(t, 5, 15) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mean_ratio(t, 10, 20) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(tail_rate(t, 25, 30), DomainError);
}

TEST_CASE("scheme names round trip") {
  for (const auto s : {Scheme::basic, Scheme::classical, Scheme::generalized}) {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK_FALSE(parse_scheme("jacobi"));
}
