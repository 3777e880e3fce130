#pragma once

// Basic, k-transformed, classical Chebyshev and generalized (A2) Chebyshev
// iterations for x = M x + g, with a shared convergence trace.

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "gcheb/linalg.hpp"

namespace gcheb {

/// One accelerable fixed-point problem x = M x + g, optionally carrying the
/// conjugate-eigenvector partner (M~, g~) with x = M~ x + g~, the dominant
/// eigenvalue lambda1 of M, and the power k of the transformed iteration
/// x <- M^k x + h. The M, g, M~, g~ and lambda1 fields always describe the
/// untransformed problem; h and h~ are the right-hand sides for power k.
struct IterationSystem {
  std::shared_ptr<const SparseMatrix> M;
  ComplexVector g;
  std::shared_ptr<const SparseMatrix> M_tilde;
  std::optional<ComplexVector> g_tilde;
  std::optional<cplx> lambda1;
  int k = 1;
  ComplexVector h;
  std::optional<ComplexVector> h_tilde;

  std::size_t dim() const { return M ? M->rows() : 0; }
  bool has_tilde() const { return M_tilde && g_tilde && h_tilde; }
  PoweredOperator op() const { return PoweredOperator(M, k); }
  /// Throws MissingTildeData when the tilde pair is absent.
  PoweredOperator tilde_op() const;
  /// lambda1^k, the dominant eigenvalue of the operator actually iterated.
  std::optional<cplx> effective_lambda1() const;
};

/// Builds a k = 1 system and checks dimensions (DimensionMismatch).
IterationSystem make_system(SparseMatrix M, ComplexVector g,
                            std::optional<SparseMatrix> M_tilde = std::nullopt,
                            std::optional<ComplexVector> g_tilde = std::nullopt,
                            std::optional<cplx> lambda1 = std::nullopt);

/// Same fixed point, iteration operator M^k, right side
/// h = (I + M + ... + M^{k-1}) g; the tilde pair is transformed alike.
/// k is absolute (relative to the untransformed M).
IterationSystem transform_system(const IterationSystem& sys, int k);

enum class Scheme { basic, classical, generalized };

std::string_view to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

struct TraceRecord {
  int m = 0;
  std::optional<double> err_norm;  // ||x - y^(m)|| when the solution is known
  double residual = 0.0;           // ||(I - M) y^(m) - g|| on the k = 1 system
  std::optional<double> ratio;     // err (or residual) ratio to step m - 1
  std::size_t matvecs = 0;         // spent producing this iterate
  std::size_t cumulative_matvecs = 0;
};

struct ConvergenceTrace {
  Scheme scheme = Scheme::basic;
  int k = 1;
  std::vector<TraceRecord> records;

  std::size_t total_matvecs() const {
    return records.empty() ? 0 : records.back().cumulative_matvecs;
  }
};

/// exp of the least-squares slope of log(err) (residual if no error is
/// recorded) over m_first..m_last. Throws DomainError on an empty window.
double tail_rate(const ConvergenceTrace& trace, int m_first, int m_last);
/// Arithmetic mean of the recorded ratios for m_first < m <= m_last.
double mean_ratio(const ConvergenceTrace& trace, int m_first, int m_last);

/// How y^(2) of the generalized scheme is produced.
enum class Seeding {
  /// m = 2 instance of the three-term scheme (uses M~ y^(0)); keeps
  /// eta^(m) = f_m(M/lambda1) / f_m(1/lambda1) eps^(0) exact for every m.
  consistent,
  /// y^(2) = x^(2), a plain basic step.
  basic_iterates,
};

/// Affine iterates y directly, or iterate the error d = y - x on the
/// homogeneous system (g = g~ = 0) and report y = x + d. Same iterates in
/// exact arithmetic; the homogeneous form keeps error norms meaningful far
/// below the rounding level of ||x||. Requires a reference solution.
enum class ErrorForm { affine, homogeneous };

struct IterateOptions {
  std::optional<ComplexVector> reference;
  ErrorForm form = ErrorForm::affine;
  Seeding seeding = Seeding::consistent;
  bool keep_iterates = false;
  /// Divergence once the residual exceeds this multiple of the initial one.
  double divergence_factor = 1e12;
};

struct IterationResult {
  ComplexVector last;
  std::vector<ComplexVector> iterates;  // y^(0)..y^(steps) if requested
  ConvergenceTrace trace;
};

/// x^(m) = M^k x^(m-1) + h.
IterationResult basic_iterate(const IterationSystem& sys, const ComplexVector& x0, int steps,
                              const IterateOptions& opts = {});

/// Classical Chebyshev semi-iteration for real spectra in (-rho, rho).
/// The spectrum condition is the caller's responsibility.
IterationResult chebyshev_iterate(const IterationSystem& sys, double rho, const ComplexVector& x0,
                                  int steps, const IterateOptions& opts = {});

/// Generalized Chebyshev semi-iteration
///   y^(m) = c1 (A y^(m-1) + h) - c2 (A~ y^(m-2) + h~) + c3 y^(m-3)
/// with A = M^k, A~ = M~^k and coefficients from lambda1^k. Needs M~, g~
/// (MissingTildeData) and lambda1 (MissingLambda1).
IterationResult generalized_chebyshev_iterate(const IterationSystem& sys, const ComplexVector& x0,
                                              int steps, const IterateOptions& opts = {});

struct StoppingRule {
  int max_steps = 200;
  double residual_tol = 1e-10;  // relative to ||g||
};

struct SolveResult {
  ComplexVector solution;  // best iterate by residual
  ConvergenceTrace trace;
  bool converged = false;
  int steps = 0;
};

/// Runs `scheme` until ||(I - M) y - g|| <= residual_tol ||g|| on the
/// untransformed system or max_steps is reached. The classical scheme uses
/// rho = |lambda1|^k.
SolveResult solve(const IterationSystem& sys, const ComplexVector& x0, const StoppingRule& stop,
                  Scheme scheme, const IterateOptions& opts = {});

}  // namespace gcheb
