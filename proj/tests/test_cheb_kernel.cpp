#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gcheb/cheb_kernel.hpp"
#include "gcheb/errors.hpp"
#include "gcheb/spectrum.hpp"

using namespace gcheb;
using std::numbers::pi;

TEST_CASE("phi1 at the origin is one") {
  CHECK(std::abs(phi1(0.0, 0.0) - 1.0) < 1e-15);
}

TEST_CASE("phi1 at (1/3, 2/3) is the cusp e^{2 pi i/3}") {
  const cplx cusp = std::polar(1.0, 2.0 * pi / 3.0);
  CHECK(std::abs(phi1(1.0 / 3.0, 2.0 / 3.0) - cusp) < 1e-14);
  // All three exponentials coincide there.
  const cplx a = std::polar(1.0, 2.0 * pi / 3.0);
  const cplx b = std::polar(1.0, -2.0 * pi * 2.0 / 3.0);
  const cplx c = std::polar(1.0, 2.0 * pi * (2.0 / 3.0 - 1.0 / 3.0));
  CHECK(std::abs(a - b) < 1e-14);
  CHECK(std::abs(a - c) < 1e-14);
}

TEST_CASE("phi1 on the diagonal is real in [-1/3, 1]") {
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    const cplx v = phi1(t, t);
    CHECK(std::abs(v.imag()) < 1e-15);
    CHECK(v.real() >= -1.0 / 3.0 - 1e-15);
    CHECK(v.real() <= 1.0 + 1e-15);
  }
}

TEST_CASE("phi1 has modulus at most one and matches its definition") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const GenCosPoint p{u(rng), u(rng)};
    const cplx direct = (std::polar(1.0, 2 * pi * p.theta1) + std::polar(1.0, -2 * pi * p.theta2) +
                         std::polar(1.0, 2 * pi * (p.theta2 - p.theta1))) /
                        3.0;
    CHECK(std::abs(p.value() - direct) < 1e-14);
    CHECK(std::abs(p.value()) <= 1.0 + 1e-15);
  }
}

TEST_CASE("eval_f seeds and the listed second polynomial") {
  const cplx i(0.0, 1.0);
  CHECK(std::abs(eval_f(2, i) - cplx(-3.0, 2.0)) < 1e-15);
  CHECK(eval_f(0, i) == cplx(1.0));
  CHECK(eval_f(1, i) == i);
}

TEST_CASE("eval_f is one at the cusp x = 1 for every m") {
  for (int m = 0; m <= 100; ++m) CHECK(std::abs(eval_f(m, 1.0) - 1.0) < 1e-12);
}

TEST_CASE("eval_f(3, phi1(theta)) equals phi1(3 theta)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double t1 = u(rng);
    const double t2 = u(rng);
    CHECK(std::abs(eval_f(3, phi1(t1, t2)) - phi1(3 * t1, 3 * t2)) < 1e-13);
  }
}

TEST_CASE("property: functional equation f_m(phi1(theta)) = phi1(m theta)") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double t1 = u(rng);
    const double t2 = u(rng);
    const cplx x = phi1(t1, t2);
    for (int m = 0; m <= 50; ++m) {
      worst = std::max(worst, std::abs(eval_f(m, x) - phi1(m * t1, m * t2)));
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("property: f_m maps the deltoid into itself") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const cplx x = phi1(u(rng), u(rng));
    for (int m = 0; m <= 50; ++m) CHECK(deltoid_contains(eval_f(m, x), 1e-9));
  }
}

TEST_CASE("property: membership quartic vanishes on the boundary curve") {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = 2.0 * pi * i / 1000.0;
    worst = std::max(worst, std::abs(deltoid_quartic(deltoid_boundary(t))));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("property: membership quartic is nonpositive on the phi1 image") {
  double worst = -1.0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      worst = std::max(worst, deltoid_quartic(phi1(i / 100.0, j / 100.0)));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("deltoid_contains examples") {
  CHECK(deltoid_contains(0.0));
  CHECK(deltoid_contains(1.0));
  CHECK(deltoid_quartic(1.0) == doctest::Approx(0.0));
  CHECK(deltoid_contains(0.3));
  CHECK_FALSE(deltoid_contains(-1.0));
  CHECK(deltoid_quartic(-1.0) == doctest::Approx(16.0));
  CHECK(std::abs(deltoid_boundary(pi) - cplx(-1.0 / 3.0)) < 1e-15);
}

TEST_CASE("power_preimage_contains on the 4x4 example quotient") {
  const cplx z = cplx(0.4, 0.7) / 0.9;
  CHECK_FALSE(power_preimage_contains(z, 1));
  CHECK(power_preimage_contains(z, 2));
  for (int k = 1; k <= 10; ++k) CHECK(power_preimage_contains(0.0, k));
}

TEST_CASE("property: the disc of radius 3^{-1/k} lies in the k-th preimage") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 1; k <= 8; ++k) {
    const double r = std::pow(3.0, -1.0 / k);
    for (int i = 0; i < 300; ++i) {
      const cplx z = std::polar(r * std::sqrt(u(rng)), 2 * pi * u(rng));
      CHECK(power_preimage_contains(z, k));
    }
  }
}

TEST_CASE("coefficient stream at lambda1 = 0.9 satisfies the identity at m = 3") {
  auto s = coefficient_stream(0.9);
  CHECK(s.m() == 3);
  const auto c = s.step();
  CHECK(std::abs(c.c1 - c.c2 + c.c3 - 1.0) < 1e-12);
}

TEST_CASE("coefficient stream at m = 3 matches direct polynomial values") {
  const cplx l1(0.6, 0.3);
  const cplx w = 1.0 / l1;
  auto s = coefficient_stream(l1);
  const auto c = s.step();
  const cplx f3 = eval_f(3, w);
  CHECK(std::abs(c.c1 - 3.0 * eval_f(2, w) / (l1 * f3)) < 1e-13);
  CHECK(std::abs(c.c2 - 3.0 * eval_f(1, w) / (std::conj(l1) * f3)) < 1e-13);
  CHECK(std::abs(c.c3 - 1.0 / f3) < 1e-13);
}

TEST_CASE("coefficient stream at lambda1 = 0.81 is real and c3 tends to e^{-3 alpha}") {
  auto s = coefficient_stream(0.81);
  ChebCoefficients c{};
  for (int m = 3; m <= 300; ++m) {
    c = s.step();
    CHECK(std::abs(c.c1.imag()) < 1e-15);
    CHECK(std::abs(c.c2.imag()) < 1e-15);
    CHECK(std::abs(c.c3.imag()) < 1e-15);
  }
  const double alpha = alpha_from_lambda1(0.81);
  CHECK(alpha == doctest::Approx(0.816).epsilon(1e-3));
  CHECK(c.c3.real() == doctest::Approx(std::exp(-3 * alpha)).epsilon(1e-10));
}

TEST_CASE("coefficient stream for complex lambda1 keeps the identity") {
  auto s = coefficient_stream(std::polar(0.9, pi / 7));
  for (int m = 3; m <= 200; ++m) {
    const auto c = s.step();
    CHECK(std::abs(c.c1 - c.c2 + c.c3 - 1.0) < 1e-12);
  }
}

TEST_CASE("property: coefficient identity over random lambda1") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const cplx l1 = std::polar(0.1 + 0.89 * u(rng), 2 * pi * u(rng));
    auto s = coefficient_stream(l1);
    for (int m = 3; m <= 200; ++m) {
      const auto c = s.step();
      worst = std::max(worst, std::abs(c.c1 - c.c2 + c.c3 - 1.0));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("coefficients do not change when the window is rescaled") {
  auto a = coefficient_stream(cplx(0.7, 0.2));
  for (int i = 0; i < 5; ++i) a.step();
  auto b = a;
  b.rescale_window(1e3);
  for (int i = 0; i < 20; ++i) {
    const auto ca = a.step();
    const auto cb = b.step();
    CHECK(std::abs(ca.c1 - cb.c1) < 1e-13);
    CHECK(std::abs(ca.c2 - cb.c2) < 1e-13);
    CHECK(std::abs(ca.c3 - cb.c3) < 1e-13);
  }
}

TEST_CASE("coefficient stream stays finite for long runs and small lambda1") {
  auto s = coefficient_stream(0.05);
  for (int m = 3; m <= 2000; ++m) {
    const auto c = s.step();
    REQUIRE(std::isfinite(std::abs(c.c1)));
    REQUIRE(std::isfinite(std::abs(c.c3)));
  }
  CHECK(s.scale_exponent() > 0.0);
}

TEST_CASE("coefficient stream rejects lambda1 outside the open unit disc") {
  CHECK_THROWS_AS(coefficient_stream(0.0), DomainError);
  CHECK_THROWS_AS(coefficient_stream(1.0), DomainError);
  CHECK_THROWS_AS(coefficient_stream(cplx(0.8, 0.8)), DomainError);
}

TEST_CASE("starting the stream at m = 2 uses the backward value conj(w)") {
  const double l1 = 0.9;
  ChebCoefficientStream s(l1, 2);
  const auto c = s.step();
  const double w = 1.0 / l1;
  const cplx f2 = eval_f(2, w);
  CHECK(std::abs(c.c1 - 3.0 * w / (l1 * f2)) < 1e-13);
  CHECK(std::abs(c.c2 - 3.0 / (l1 * f2)) < 1e-13);
  CHECK(std::abs(c.c3 - w / f2) < 1e-13);
  CHECK(std::abs(c.c1 - c.c2 + c.c3 - 1.0) < 1e-13);
  CHECK(s.m() == 3);
}

TEST_CASE("classical ratios at rho = 0.9, m = 2 match direct Chebyshev evaluation") {
  // C0 = 1, C1 = 1/rho, C2 = 2/rho^2 - 1 evaluated independently.
  auto s = classical_cheb_ratio_stream(0.9);
  const auto r = s.step();
  CHECK(r.weight == doctest::Approx(1.680672268907563).epsilon(1e-14));
  CHECK(r.lag == doctest::Approx(0.680672268907563).epsilon(1e-14));
}

TEST_CASE("classical ratios satisfy weight - lag = 1") {
  for (const double rho : {0.2, 0.5, 0.9, 0.99}) {
    auto s = classical_cheb_ratio_stream(rho);
    for (int m = 2; m <= 300; ++m) {
      const auto r = s.step();
      CHECK(std::abs(r.weight - r.lag - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("classical stream stays finite for small rho") {
  auto s = classical_cheb_ratio_stream(0.01);
  for (int m = 2; m <= 500; ++m) {
    const auto r = s.step();
    REQUIRE(std::isfinite(r.weight));
    REQUIRE(std::isfinite(r.lag));
  }
}
