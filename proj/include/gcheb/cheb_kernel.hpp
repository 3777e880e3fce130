#pragma once

// Generalized Chebyshev polynomials of the A2 root system (first component),
// classical Chebyshev ratios, and the deltoid region they leave invariant.

#include <array>
#include <complex>

namespace gcheb {

using cplx = std::complex<double>;

/// Membership slack used when testing eigenvalue quotients against the deltoid.
inline constexpr double kDeltoidTol = 1e-9;

/// Normalized generalized cosine
///   phi1(t1, t2) = (e^{2 pi i t1} + e^{-2 pi i t2} + e^{2 pi i (t2 - t1)}) / 3.
/// For real angles the value lies in the deltoid, and phi2 = conj(phi1).
cplx phi1(double theta1, double theta2);

struct GenCosPoint {
  double theta1 = 0.0;
  double theta2 = 0.0;

  cplx value() const { return phi1(theta1, theta2); }
};

/// f_m(x, conj(x)) from the three-term recurrence
///   f_m = 3x f_{m-1} - 3 conj(x) f_{m-2} + f_{m-3}
/// seeded with f_0 = 1, f_1 = x, f_2 = 3x^2 - 2 conj(x).
/// Grows geometrically outside the deltoid; solvers use the coefficient
/// stream instead of raw values.
cplx eval_f(int m, cplx x);

/// Membership quartic h(z) = 3|z|^4 + 6|z|^2 - 8 Re(z^3) - 1. It vanishes on
/// the Steiner hypocycloid and is negative strictly inside it.
double deltoid_quartic(cplx z);

/// Point of the bounding hypocycloid, (2e^{it} + e^{-2it}) / 3.
cplx deltoid_boundary(double t);

bool deltoid_contains(cplx z, double tol = kDeltoidTol);

/// True iff z^k lies in the deltoid.
bool power_preimage_contains(cplx z, int k, double tol = kDeltoidTol);

struct ChebCoefficients {
  cplx c1;  // weight on (M y^{m-1} + g)
  cplx c2;  // weight on (M~ y^{m-2} + g~), applied with a minus sign
  cplx c3;  // weight on y^{m-3}
};

/// Produces, for m = first_m, first_m + 1, ..., the scale-free ratios
///   c1 = 3 f_{m-1}(w) / (lambda1 f_m(w)),
///   c2 = 3 f_{m-2}(w) / (conj(lambda1) f_m(w)),
///   c3 = f_{m-3}(w) / f_m(w),          w = 1 / lambda1,
/// which always satisfy c1 - c2 + c3 = 1.
///
/// Only a three-value window proportional to (f_{m-3}, f_{m-2}, f_{m-1}) is
/// kept; it is renormalized to unit max-magnitude after every step, the
/// discarded scale going into scale_exponent().
///
/// first_m may be 2, in which case the first triple uses f_{-1}(x) = conj(x)
/// (the backward continuation of the recurrence, phi1(-theta) = conj(phi1(theta))).
class ChebCoefficientStream {
 public:
  explicit ChebCoefficientStream(cplx lambda1, int first_m = 3);

  /// Coefficients for index m(), then advances to m() + 1.
  ChebCoefficients step();

  int m() const { return m_; }
  cplx lambda1() const { return lambda1_; }
  /// Natural log of the total factor divided out of the window so far.
  double scale_exponent() const { return scale_exponent_; }
  /// Multiplies the stored window by `factor`. Emitted ratios do not change.
  void rescale_window(double factor);

 private:
  cplx lambda1_;
  cplx w_;
  std::array<cplx, 3> window_;  // ~ (f_{m-3}, f_{m-2}, f_{m-1})
  double scale_exponent_ = 0.0;
  int m_;
};

inline ChebCoefficientStream coefficient_stream(cplx lambda1) {
  return ChebCoefficientStream(lambda1);
}

struct ClassicalRatios {
  double weight;  // 2 C_{m-1}(1/rho) / (rho C_m(1/rho))
  double lag;     // C_{m-2}(1/rho) / C_m(1/rho)
};

/// Classical counterpart for real spectra in (-rho, rho), starting at m = 2.
/// weight - lag == 1 for every m.
class ClassicalRatioStream {
 public:
  explicit ClassicalRatioStream(double rho);

  ClassicalRatios step();
  int m() const { return m_; }

 private:
  double rho_;
  double t_;
  std::array<double, 2> window_;  // ~ (C_{m-2}, C_{m-1})
  int m_ = 2;
};

inline ClassicalRatioStream classical_cheb_ratio_stream(double rho) {
  return ClassicalRatioStream(rho);
}

}  // namespace gcheb
