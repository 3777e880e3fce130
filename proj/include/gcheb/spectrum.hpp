#pragma once

// Applicability classification, choice of the power k, and asymptotic rate
// prediction from (possibly partial) spectral data.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcheb/cheb_kernel.hpp"
#include "gcheb/linalg.hpp"

namespace gcheb {

enum class SpectrumSource { exact, estimated, user_supplied };

std::string to_string(SpectrumSource source);

struct SpectrumInfo {
  std::vector<cplx> eigenvalues;
  cplx lambda1;
  SpectrumSource source = SpectrumSource::exact;
  /// Whether `eigenvalues` is the whole spectrum (enables the geometric k test).
  bool complete = true;

  /// Picks lambda1 as an eigenvalue of largest modulus (ties go to the one
  /// with smallest |arg|, so a positive real dominant eigenvalue wins).
  /// Throws DomainError unless 0 < |lambda1| < 1.
  static SpectrumInfo from_eigenvalues(std::vector<cplx> eigenvalues,
                                       SpectrumSource source = SpectrumSource::exact,
                                       bool complete = true);
  /// Known dominant eigenvalue plus whatever other eigenvalues are known.
  static SpectrumInfo from_lambda1(cplx lambda1, std::vector<cplx> others, SpectrumSource source,
                                   bool complete = false);

  /// 1e-8 for exact or user-supplied spectra, 1e-3 for estimated ones.
  double default_mod_tol() const;
};

enum class DominantClass { unique_dominant, root_of_unity_family, inapplicable };

std::string to_string(DominantClass c);

struct Classification {
  DominantClass kind = DominantClass::unique_dominant;
  int k0 = 1;                  // order of the group generated by dominant ratios
  std::vector<cplx> dominant;  // the set S
};

inline constexpr int kRootOfUnityMaxOrder = 64;

Classification classify_dominant(const SpectrumInfo& info, double mod_tol,
                                 int rou_max_order = kRootOfUnityMaxOrder);
inline Classification classify_dominant(const SpectrumInfo& info) {
  return classify_dominant(info, info.default_mod_tol());
}

/// Smallest k with r <= 3^{-1/k} (1 when r <= 1/3). Requires 0 <= r < 1.
int k_bound_for_ratio(double r);

/// Disc bound: k from the largest non-dominant quotient |lambda/lambda1|.
/// Throws NotUniqueDominant unless the spectrum has a unique dominant eigenvalue.
int select_k_bound(const SpectrumInfo& info, std::optional<double> mod_tol = std::nullopt);

/// Smallest k <= k_max with (lambda/lambda1)^k in the deltoid for every
/// listed eigenvalue.
std::optional<int> select_k_geometric(const SpectrumInfo& info, int k_max,
                                      double tol = kDeltoidTol);

/// k0 when every eigenvalue is dominant, else k0 * k1 with k1 the smallest
/// power taking the largest non-dominant quotient into the 1/3 disc.
int k_for_family(int k0, const SpectrumInfo& info, std::optional<double> mod_tol = std::nullopt);

/// Positive alpha with 1/lambda1 = (e^alpha + e^-alpha + 1) / 3; 0 < lambda1 < 1.
double alpha_from_lambda1(double lambda1);

/// g(l) = (1 - sqrt(1 - s^2)) / s with s = 2l / (3 - l); equals e^{-alpha(l)}.
double asymptotic_rate_g(double lambda1);

/// Largest |mu| among roots of mu^3 - a l mu^2 - b conj(l) mu - c = 0 with
/// a = 1 + e^-alpha + e^-2alpha, b = -(e^-alpha + e^-2alpha + e^-3alpha),
/// c = e^-3alpha. Roots come from the companion matrix and are refined in
/// 50-digit arithmetic (the cubic has a triple root at l = lambda1).
double mu_max(cplx lambda, double alpha);

/// Same cubic for a possibly complex dominant eigenvalue, using the limiting
/// scheme coefficients 3/(lambda1 xi), 3/(conj(lambda1) xi^2), 1/xi^3 where xi
/// is the dominant root of t^3 - 3w t^2 + 3 conj(w) t - 1, w = 1/lambda1.
/// Reduces to mu_max(lambda, alpha(lambda1)) for real positive lambda1.
double mu_max_general(cplx lambda, cplx lambda1);

/// Real root of z^3 + z^2 + 2z - 1 (where g(l) = l^2), about 0.3926.
double feasibility_root();
/// feasibility_root()^{1/k}: acceleration of the power-k iteration pays off
/// only for lambda1 above this.
double feasibility_threshold(int k);

struct DominantEstimate {
  cplx lambda1;
  double residual;  // ||M v - lambda1 v|| / ||v||
  int iterations;
};

/// Power iteration with Rayleigh quotient. Throws NoConvergence if the
/// residual is still above tol after `iters` steps.
DominantEstimate estimate_dominant_eigenvalue(const SparseMatrix& M, int iters, double tol,
                                              std::uint64_t seed);

struct SpectrumReport {
  DominantClass classification = DominantClass::inapplicable;
  int k0 = 1;
  cplx lambda1;
  SpectrumSource source = SpectrumSource::exact;
  std::optional<int> k_bound;
  std::optional<int> k_geometric;
  std::optional<int> k_selected;
  std::optional<double> alpha;  // for the selected k, real lambda1 only
  double predicted_basic_rate = 0.0;
  std::optional<double> predicted_accel_rate;
  double fair_comparison_rate = 0.0;
  double feasibility_threshold = 0.0;
  bool practical = false;
  std::vector<std::string> notes;
};

SpectrumReport build_report(const SpectrumInfo& info, int k_max = kRootOfUnityMaxOrder);

/// key = value lines, stable order.
std::string format_report(const SpectrumReport& report);

}  // namespace gcheb
