#include "gcheb/cheb_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gcheb/errors.hpp"

namespace gcheb {

namespace {

cplx unit_phase(double turns) {
  const double a = 2.0 * std::numbers::pi * turns;
  return {std::cos(a), std::sin(a)};
}

void check_lambda1(cplx lambda1) {
  const double r = std::abs(lambda1);
  if (!std::isfinite(r) || r <= 0.0 || r >= 1.0) {
    throw DomainError("coefficient stream needs 0 < |lambda1| < 1, got |lambda1| = " +
                      std::to_string(r));
  }
}

}  // namespace

cplx phi1(double theta1, double theta2) {
  return (unit_phase(theta1) + unit_phase(-theta2) + unit_phase(theta2 - theta1)) / 3.0;
}

cplx eval_f(int m, cplx x) {
  const cplx xb = std::conj(x);
  cplx f0 = 1.0;
  cplx f1 = x;
  cplx f2 = 3.0 * x * x - 2.0 * xb;
  if (m <= 0) return f0;
  if (m == 1) return f1;
  for (int j = 3; j <= m; ++j) {
    const cplx next = 3.0 * x * f2 - 3.0 * xb * f1 + f0;
    f0 = f1;
    f1 = f2;
    f2 = next;
  }
  return f2;
}

double deltoid_quartic(cplx z) {
  const double r2 = std::norm(z);
  return 3.0 * r2 * r2 + 6.0 * r2 - 8.0 * (z * z * z).real() - 1.0;
}

cplx deltoid_boundary(double t) {
  return (2.0 * std::polar(1.0, t) + std::polar(1.0, -2.0 * t)) / 3.0;
}

bool deltoid_contains(cplx z, double tol) { return deltoid_quartic(z) <= tol; }

bool power_preimage_contains(cplx z, int k, double tol) {
  cplx zk = 1.0;
  for (int i = 0; i < k; ++i) zk *= z;
  return deltoid_contains(zk, tol);
}

ChebCoefficientStream::ChebCoefficientStream(cplx lambda1, int first_m)
    : lambda1_(lambda1), w_(1.0 / lambda1), m_(2) {
  check_lambda1(lambda1);
  if (first_m < 2) throw DomainError("coefficient stream starts at m >= 2");
  window_ = {std::conj(w_), cplx(1.0), w_};  // f_{-1}, f_0, f_1
  while (m_ < first_m) step();
}

ChebCoefficients ChebCoefficientStream::step() {
  const auto [fa, fb, fc] = window_;
  const cplx fm = 3.0 * w_ * fc - 3.0 * std::conj(w_) * fb + fa;
  if (!std::isfinite(fm.real()) || !std::isfinite(fm.imag()) ||
      std::abs(fm) < std::numeric_limits<double>::min()) {
    throw DegenerateCoefficient("f_m(1/lambda1) vanished at m = " + std::to_string(m_));
  }
  ChebCoefficients out{3.0 * fc / (lambda1_ * fm), 3.0 * fb / (std::conj(lambda1_) * fm),
                       fa / fm};

  window_ = {fb, fc, fm};
  const double scale =
      std::max({std::abs(window_[0]), std::abs(window_[1]), std::abs(window_[2])});
  for (auto& v : window_) v /= scale;
  scale_exponent_ += std::log(scale);
  ++m_;
  return out;
}

void ChebCoefficientStream::rescale_window(double factor) {
  for (auto& v : window_) v *= factor;
  scale_exponent_ -= std::log(factor);
}

ClassicalRatioStream::ClassicalRatioStream(double rho) : rho_(rho), t_(1.0 / rho) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw DomainError("classical stream needs 0 < rho < 1, got " + std::to_string(rho));
  }
  window_ = {1.0, t_};
}

ClassicalRatios ClassicalRatioStream::step() {
  const auto [ca, cb] = window_;
  const double cm = 2.0 * t_ * cb - ca;
  ClassicalRatios out{2.0 * cb / (rho_ * cm), ca / cm};
  const double scale = std::max(std::abs(cb), std::abs(cm));
  window_ = {cb / scale, cm / scale};
  ++m_;
  return out;
}

}  // namespace gcheb
