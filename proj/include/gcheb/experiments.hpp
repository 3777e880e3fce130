#pragma once

// Batch experiments behind the `gcheb` command line tool. Each run writes
// plot-ready CSV plus a plain-text report into an output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gcheb/genmat.hpp"
#include "gcheb/solvers.hpp"
#include "gcheb/spectrum.hpp"

namespace gcheb::cli {

/// Process exit codes. Stable; documented in the README.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIoError = 3,
  kInapplicableSpectrum = 4,
  kNotConverged = 5,
  kNumericalError = 6,
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "GCHEB_OUTPUT_DIR";

struct ExperimentConfig {
  std::string subcommand;
  std::filesystem::path out_dir = ".";

  NormalMatrixSpec spec;

  std::vector<Scheme> schemes{Scheme::basic, Scheme::generalized};
  std::optional<int> k_override;  // nullopt: automatic
  int max_steps = 200;
  double residual_tol = 1e-10;
  ErrorForm error_form = ErrorForm::homogeneous;
  Seeding seeding = Seeding::consistent;
  unsigned threads = 1;

  // custom / report
  std::optional<std::filesystem::path> matrix_path;
  std::optional<std::filesystem::path> rhs_path;
  std::optional<std::filesystem::path> tilde_path;
  std::optional<std::filesystem::path> tilde_rhs_path;
  std::optional<std::filesystem::path> spectrum_path;
  std::optional<cplx> lambda1;
  bool estimate = false;
  bool assume_normal = false;
  int estimate_iters = 5000;
  double estimate_tol = 1e-10;
  std::uint64_t estimate_seed = 1;

  // deltoid-sample
  int grid = 201;
  double extent = 1.2;
  int boundary_samples = 1000;

  /// Throws std::invalid_argument on inconsistent flags.
  void validate() const;
  /// One-line key=value rendering of the whole configuration.
  std::string describe() const;
};

struct RunSummary {
  int exit_code = kOk;
  std::optional<SpectrumReport> report;
  std::vector<ConvergenceTrace> traces;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> messages;
};

RunSummary run_example33(const ExperimentConfig& config);
RunSummary run_normal_sparse(const ExperimentConfig& config);
RunSummary run_custom(const ExperimentConfig& config);
RunSummary run_deltoid_sample(const ExperimentConfig& config);
RunSummary run_report(const ExperimentConfig& config);

/// Dispatches on config.subcommand.
RunSummary run(const ExperimentConfig& config);

/// CSV columns: m,scheme,k,err_norm,residual,ratio,matvecs (matvecs is
/// cumulative). The first line is a `# ` comment carrying the configuration.
void write_trace_csv(const std::filesystem::path& path, const std::vector<ConvergenceTrace>& traces,
                     const std::string& metadata);

/// Eigenvalues, one per line as `re im`, `re,im` or `re`; `#` starts a comment.
std::vector<cplx> read_spectrum_file(const std::filesystem::path& path);

/// Parses `re`, `re,im` or `re im`.
cplx parse_complex(const std::string& text);

}  // namespace gcheb::cli
