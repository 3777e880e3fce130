#include "gcheb/spectrum.hpp"

#include <algorithm>
#include <array>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "gcheb/errors.hpp"

namespace gcheb {

namespace {

using Real50 = boost::multiprecision::cpp_bin_float_50;

// Just enough complex arithmetic over Real50 for polynomial refinement.
struct Complex50 {
  Real50 re = 0;
  Real50 im = 0;

  Complex50() = default;
  Complex50(Real50 r, Real50 i = 0) : re(std::move(r)), im(std::move(i)) {}
  explicit Complex50(cplx z) : re(z.real()), im(z.imag()) {}
  explicit Complex50(int r) : re(r), im(0) {}

  cplx to_double() const { return {static_cast<double>(re), static_cast<double>(im)}; }
  Real50 norm() const { return re * re + im * im; }
  Complex50 conj() const { return {re, -im}; }

  friend Complex50 operator+(const Complex50& a, const Complex50& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend Complex50 operator-(const Complex50& a, const Complex50& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend Complex50 operator-(const Complex50& a) { return {-a.re, -a.im}; }
  friend Complex50 operator*(const Complex50& a, const Complex50& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Complex50 operator/(const Complex50& a, const Complex50& b) {
    const Real50 d = b.norm();
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
  }
};

// Roots of the monic cubic mu^3 + p[2] mu^2 + p[1] mu + p[0].
// Companion-matrix eigenvalues seed a Weierstrass (Durand-Kerner) refinement
// carried out in 50 significant digits, which resolves clustered roots.
std::array<Complex50, 3> cubic_roots(const std::array<Complex50, 3>& p) {
  DenseMatrix companion = DenseMatrix::Zero(3, 3);
  companion(0, 0) = -p[2].to_double();
  companion(0, 1) = -p[1].to_double();
  companion(0, 2) = -p[0].to_double();
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  const auto eig = dense_eigendecomposition(companion);

  std::array<Complex50, 3> z;
  for (int j = 0; j < 3; ++j) {
    // Spread coincident seeds; Weierstrass updates need distinct points.
    const cplx nudge = std::polar(1e-7 * (1.0 + std::abs(eig.eigenvalues[j])), 2.1 * j + 0.4);
    z[j] = Complex50(eig.eigenvalues[j] + nudge);
  }
  auto eval = [&](const Complex50& x) { return ((x + p[2]) * x + p[1]) * x + p[0]; };
  const Real50 stop = Real50(1e-90);
  for (int iter = 0; iter < 2000; ++iter) {
    Real50 biggest = 0;
    for (int j = 0; j < 3; ++j) {
      Complex50 denom(1);
      for (int i = 0; i < 3; ++i) {
        if (i != j) denom = denom * (z[j] - z[i]);
      }
      if (denom.norm() == 0) break;
      const Complex50 step = eval(z[j]) / denom;
      z[j] = z[j] - step;
      biggest = std::max(biggest, step.norm());
    }
    if (biggest < stop) break;
  }
  return z;
}

double max_modulus(const std::array<Complex50, 3>& roots) {
  Real50 best = 0;
  for (const auto& r : roots) best = std::max(best, r.norm());
  return static_cast<double>(sqrt(best));
}

Complex50 complex_pow(const Complex50& z, int k) {
  Complex50 out(1);
  for (int i = 0; i < k; ++i) out = out * z;
  return out;
}

// Dedupe by value: a repeated eigenvalue is one point of the spectrum.
void push_unique(std::vector<cplx>& set, cplx z, double tol) {
  for (const auto& s : set) {
    if (std::abs(s - z) <= tol) return;
  }
  set.push_back(z);
}

// Smallest n <= max_order with |z^n - 1| <= tol.
std::optional<int> root_of_unity_order(cplx z, double tol, int max_order) {
  cplx p = 1.0;
  for (int n = 1; n <= max_order; ++n) {
    p *= z;
    if (std::abs(p - 1.0) <= tol) return n;
  }
  return std::nullopt;
}

double largest_nondominant_ratio(const SpectrumInfo& info, double mod_tol, bool& found) {
  const double r1 = std::abs(info.lambda1);
  double r = 0.0;
  found = false;
  for (const auto& l : info.eigenvalues) {
    if (std::abs(l) >= (1.0 - mod_tol) * r1) continue;
    found = true;
    r = std::max(r, std::abs(l) / r1);
  }
  return r;
}

std::string fmt(double v, int digits = 10) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

std::string fmt(cplx z) { return fmt(z.real()) + (z.imag() < 0 ? "" : "+") + fmt(z.imag()) + "i"; }

}  // namespace

std::string to_string(SpectrumSource source) {
  switch (source) {
    case SpectrumSource::exact:
      return "exact";
    case SpectrumSource::estimated:
      return "estimated";
    case SpectrumSource::user_supplied:
      return "user_supplied";
  }
  return "unknown";
}

std::string to_string(DominantClass c) {
  switch (c) {
    case DominantClass::unique_dominant:
      return "UniqueDominant";
    case DominantClass::root_of_unity_family:
      return "RootOfUnityFamily";
    case DominantClass::inapplicable:
      return "Inapplicable";
  }
  return "unknown";
}

SpectrumInfo SpectrumInfo::from_eigenvalues(std::vector<cplx> eigenvalues, SpectrumSource source,
                                            bool complete) {
  if (eigenvalues.empty()) throw DomainError("spectrum needs at least one eigenvalue");
  double rmax = 0.0;
  for (const auto& l : eigenvalues) rmax = std::max(rmax, std::abs(l));
  cplx pick = 0.0;
  double best_arg = 10.0;
  for (const auto& l : eigenvalues) {
    if (std::abs(l) >= rmax * (1.0 - 1e-12) && std::abs(std::arg(l)) < best_arg) {
      best_arg = std::abs(std::arg(l));
      pick = l;
    }
  }
  return from_lambda1(pick, std::move(eigenvalues), source, complete);
}

SpectrumInfo SpectrumInfo::from_lambda1(cplx lambda1, std::vector<cplx> others,
                                        SpectrumSource source, bool complete) {
  const double r1 = std::abs(lambda1);
  if (!(r1 > 0.0 && r1 < 1.0)) {
    throw DomainError("dominant eigenvalue must satisfy 0 < |lambda1| < 1, got " + fmt(r1));
  }
  for (const auto& l : others) {
    if (std::abs(l) > r1 * (1.0 + 1e-12)) {
      throw DomainError("eigenvalue " + fmt(l) + " exceeds |lambda1| = " + fmt(r1));
    }
  }
  SpectrumInfo info;
  info.lambda1 = lambda1;
  info.eigenvalues = std::move(others);
  const bool listed = std::any_of(info.eigenvalues.begin(), info.eigenvalues.end(),
                                  [&](cplx l) { return std::abs(l - lambda1) <= 1e-14 * r1; });
  if (!listed) info.eigenvalues.insert(info.eigenvalues.begin(), lambda1);
  info.source = source;
  info.complete = complete;
  return info;
}

double SpectrumInfo::default_mod_tol() const {
  return source == SpectrumSource::estimated ? 1e-3 : 1e-8;
}

Classification classify_dominant(const SpectrumInfo& info, double mod_tol, int rou_max_order) {
  Classification out;
  const double r1 = std::abs(info.lambda1);
  for (const auto& l : info.eigenvalues) {
    if (std::abs(l) >= (1.0 - mod_tol) * r1) push_unique(out.dominant, l, mod_tol * r1);
  }
  if (out.dominant.size() <= 1) {
    out.kind = DominantClass::unique_dominant;
    return out;
  }
  int k0 = 1;
  for (const auto& l : out.dominant) {
    const cplx zeta = l / info.lambda1;
    const auto order = root_of_unity_order(zeta / std::abs(zeta), mod_tol, rou_max_order);
    if (!order) {
      out.kind = DominantClass::inapplicable;
      out.k0 = 0;
      return out;
    }
    k0 = std::lcm(k0, *order);
  }
  out.kind = DominantClass::root_of_unity_family;
  out.k0 = k0;
  return out;
}

int k_bound_for_ratio(double r) {
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("quotient modulus must lie in [0, 1)");
  if (r <= 1.0 / 3.0) return 1;
  auto fits = [r](int k) { return r <= std::pow(3.0, -1.0 / k); };
  int k = static_cast<int>(std::ceil(std::log(3.0) / std::log(1.0 / r)));
  k = std::max(k, 1);
  while (k > 1 && fits(k - 1)) --k;
  while (!fits(k)) ++k;
  return k;
}

int select_k_bound(const SpectrumInfo& info, std::optional<double> mod_tol) {
  const double tol = mod_tol.value_or(info.default_mod_tol());
  const auto cls = classify_dominant(info, tol);
  if (cls.kind != DominantClass::unique_dominant) {
    throw NotUniqueDominant("spectrum has " + std::to_string(cls.dominant.size()) +
                            " dominant eigenvalues");
  }
  bool found = false;
  const double r = largest_nondominant_ratio(info, tol, found);
  return found ? k_bound_for_ratio(r) : 1;
}

std::optional<int> select_k_geometric(const SpectrumInfo& info, int k_max, double tol) {
  for (int k = 1; k <= k_max; ++k) {
    const bool all_inside =
        std::all_of(info.eigenvalues.begin(), info.eigenvalues.end(), [&](cplx l) {
          return power_preimage_contains(l / info.lambda1, k, tol);
        });
    if (all_inside) return k;
  }
  return std::nullopt;
}

int k_for_family(int k0, const SpectrumInfo& info, std::optional<double> mod_tol) {
  if (k0 < 1) throw DomainError("family order must be positive");
  bool found = false;
  const double r = largest_nondominant_ratio(info, mod_tol.value_or(info.default_mod_tol()), found);
  return found ? k0 * k_bound_for_ratio(r) : k0;
}

double alpha_from_lambda1(double lambda1) {
  if (!(lambda1 > 0.0 && lambda1 < 1.0)) {
    throw DomainError("alpha is defined for 0 < lambda1 < 1, got " + fmt(lambda1));
  }
  // Larger root t of t^2 - (3/l - 1) t + 1 = 0 is e^alpha.
  return std::acosh((3.0 / lambda1 - 1.0) / 2.0);
}

double asymptotic_rate_g(double lambda1) {
  if (!(lambda1 > 0.0 && lambda1 < 1.0)) {
    throw DomainError("g is defined for 0 < lambda1 < 1, got " + fmt(lambda1));
  }
  const double s = 2.0 * lambda1 / (3.0 - lambda1);
  // (1 - sqrt(1 - s^2)) / s without the cancellation at small s.
  return s / (1.0 + std::sqrt(1.0 - s * s));
}

double mu_max(cplx lambda, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("mu_max needs alpha > 0");
  const Real50 e = exp(-Real50(alpha));
  const Real50 a = 1 + e + e * e;
  const Real50 b = -(e + e * e + e * e * e);
  const Real50 c = e * e * e;
  const Complex50 l(lambda);
  return max_modulus(cubic_roots({-Complex50(c), -(Complex50(b) * l.conj()),
                                  -(Complex50(a) * l)}));
}

double mu_max_general(cplx lambda, cplx lambda1) {
  const double r1 = std::abs(lambda1);
  if (!(r1 > 0.0 && r1 < 1.0)) throw DomainError("mu_max_general needs 0 < |lambda1| < 1");
  const Complex50 l1(lambda1);
  const Complex50 w = Complex50(1) / l1;
  // Growth factor of f_m(w): dominant root of t^3 - 3w t^2 + 3 conj(w) t - 1.
  const auto ts = cubic_roots({Complex50(-1), Complex50(3) * w.conj(), -(Complex50(3) * w)});
  Complex50 xi = ts[0];
  for (const auto& t : ts) {
    if (t.norm() > xi.norm()) xi = t;
  }
  const Complex50 c1 = Complex50(3) / (l1 * xi);
  const Complex50 c2 = Complex50(3) / (l1.conj() * xi * xi);
  const Complex50 c3 = Complex50(1) / complex_pow(xi, 3);
  const Complex50 l(lambda);
  // mu^3 - c1 l mu^2 + c2 conj(l) mu - c3 = 0
  return max_modulus(cubic_roots({-c3, c2 * l.conj(), -(c1 * l)}));
}

double feasibility_root() {
  static const double root = [] {
    auto f = [](double z) { return ((z + 1.0) * z + 2.0) * z - 1.0; };
    double lo = 0.0;  // f(0) = -1
    double hi = 1.0;  // f(1) = 3
    while (hi - lo > 1e-15) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return root;
}

double feasibility_threshold(int k) {
  if (k < 1) throw DomainError("feasibility threshold needs k >= 1");
  return std::pow(feasibility_root(), 1.0 / k);
}

DominantEstimate estimate_dominant_eigenvalue(const SparseMatrix& M, int iters, double tol,
                                              std::uint64_t seed) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    throw DimensionMismatch("power iteration needs a non-empty square matrix");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  ComplexVector v(M.rows());
  for (auto& z : v) z = {gauss(rng), gauss(rng)};
  v *= 1.0 / norm2(v);

  DominantEstimate est{0.0, std::numeric_limits<double>::infinity(), 0};
  for (int it = 1; it <= iters; ++it) {
    ComplexVector w = matvec(M, v);
    const cplx rq = dot(v, w);
    est = {rq, norm2(w - rq * v), it};
    if (est.residual <= tol) return est;
    const double nw = norm2(w);
    if (nw == 0.0) return {0.0, 0.0, it};
    v = (1.0 / nw) * std::move(w);
  }
  throw NoConvergence("power iteration residual " + fmt(est.residual) + " above " + fmt(tol) +
                          " after " + std::to_string(iters) +
                          " steps (several dominant eigenvalues or a tight cluster?)",
                      est.lambda1, est.residual);
}

SpectrumReport build_report(const SpectrumInfo& info, int k_max) {
  SpectrumReport rep;
  rep.lambda1 = info.lambda1;
  rep.source = info.source;
  const double r1 = std::abs(info.lambda1);
  const auto cls = classify_dominant(info);
  rep.classification = cls.kind;
  rep.k0 = cls.k0;

  if (cls.kind == DominantClass::inapplicable) {
    rep.predicted_basic_rate = r1;
    rep.fair_comparison_rate = r1 * r1;
    rep.feasibility_threshold = feasibility_threshold(1);
    rep.notes.push_back(
        "dominant eigenvalues differ by a non-root-of-unity factor: no power of the iteration "
        "can be accelerated");
    return rep;
  }

  rep.k_bound = cls.kind == DominantClass::unique_dominant ? select_k_bound(info)
                                                            : k_for_family(cls.k0, info);
  if (info.complete) {
    rep.k_geometric = select_k_geometric(info, std::max(k_max, *rep.k_bound));
  }
  rep.k_selected = rep.k_geometric ? rep.k_geometric : rep.k_bound;
  const int k = *rep.k_selected;

  cplx lk = 1.0;
  for (int i = 0; i < k; ++i) lk *= info.lambda1;
  rep.predicted_basic_rate = std::pow(r1, k);
  rep.fair_comparison_rate = std::pow(r1, 2 * k);
  rep.feasibility_threshold = feasibility_threshold(k);
  rep.practical = rep.predicted_basic_rate >= feasibility_root();

  if (std::abs(lk.imag()) <= 1e-12 * std::abs(lk) && lk.real() > 0.0) {
    rep.alpha = alpha_from_lambda1(lk.real());
    rep.predicted_accel_rate = asymptotic_rate_g(lk.real());
  } else {
    double worst = 0.0;
    for (const auto& l : info.eigenvalues) {
      cplx p = 1.0;
      for (int i = 0; i < k; ++i) p *= l;
      worst = std::max(worst, mu_max_general(p, lk));
    }
    rep.predicted_accel_rate = worst;
    rep.notes.push_back("lambda1^k is not real positive: accelerated rate from the limiting cubic");
  }
  if (!info.complete) {
    rep.notes.push_back("partial spectrum: k from the 1/3-disc bound only");
  }
  return rep;
}

std::string format_report(const SpectrumReport& r) {
  auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : "none"; };
  std::ostringstream os;
  os << "classification = " << to_string(r.classification) << '\n';
  if (r.classification == DominantClass::root_of_unity_family) os << "k0 = " << r.k0 << '\n';
  os << "lambda1 = " << fmt(r.lambda1) << '\n';
  os << "spectrum_source = " << to_string(r.source) << '\n';
  os << "k_bound = " << opt_int(r.k_bound) << '\n';
  os << "k_geometric = " << opt_int(r.k_geometric) << '\n';
  os << "k_selected = " << opt_int(r.k_selected) << '\n';
  os << "alpha = " << (r.alpha ? fmt(*r.alpha) : "none") << '\n';
  os << "predicted_basic_rate = " << fmt(r.predicted_basic_rate) << '\n';
  os << "predicted_accel_rate = "
     << (r.predicted_accel_rate ? fmt(*r.predicted_accel_rate) : "none") << '\n';
  os << "fair_comparison_rate = " << fmt(r.fair_comparison_rate) << '\n';
  os << "feasibility_root = " << fmt(feasibility_root())
     << " (real root of z^3 + z^2 + 2z - 1)\n";
  os << "feasibility_threshold = " << fmt(r.feasibility_threshold) << '\n';
  os << "practical = " << (r.practical ? "true" : "false") << '\n';
  for (const auto& n : r.notes) os << "note = " << n << '\n';
  return os.str();
}

}  // namespace gcheb
