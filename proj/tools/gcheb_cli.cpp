// gcheb: experiment runner for generalized Chebyshev acceleration.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "gcheb/errors.hpp"
#include "gcheb/experiments.hpp"

namespace {

using gcheb::cli::ExperimentConfig;

struct RawFlags {
  std::string schemes = "basic,generalized";
  std::string k = "auto";
  std::string error_form = "homogeneous";
  std::string seeding = "consistent";
  std::string lambda1;
  std::string matrix, rhs, tilde, tilde_rhs, spectrum;
  double spec_lambda1 = 0.9;
};

std::vector<gcheb::Scheme> parse_schemes(const std::string& text) {
  std::vector<gcheb::Scheme> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto s = gcheb::parse_scheme(item);
    if (!s) throw CLI::ValidationError("--schemes", "unknown scheme '" + item + "'");
    out.push_back(*s);
  }
  if (out.empty()) throw CLI::ValidationError("--schemes", "empty scheme list");
  return out;
}

void add_solver_flags(CLI::App* app, ExperimentConfig& c, RawFlags& raw) {
  app->add_option("--schemes", raw.schemes, "comma list of basic, classical, generalized")
      ->capture_default_str();
  app->add_option("--k", raw.k, "power transform k, or auto")->capture_default_str();
  app->add_option("--steps", c.max_steps, "maximum iteration steps")->capture_default_str();
  app->add_option("--residual-tol", c.residual_tol, "stopping residual (custom)")
      ->capture_default_str();
  app->add_option("--error-form", raw.error_form, "homogeneous or affine")->capture_default_str();
  app->add_option("--seeding", raw.seeding, "consistent or basic")->capture_default_str();
}

void add_common_flags(CLI::App* app, ExperimentConfig& c) {
  app->add_option("--out", c.out_dir, "output directory (default $GCHEB_OUTPUT_DIR or .)");
  app->add_option("--threads", c.threads, "matvec threads; 1 is bit-reproducible")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_spectrum_flags(CLI::App* app, ExperimentConfig& c, RawFlags& raw) {
  app->add_option("--spectrum", raw.spectrum, "file of eigenvalues, one `re im` per line");
  app->add_option("--lambda1", raw.lambda1, "dominant eigenvalue as re or re,im");
  app->add_flag("--estimate", c.estimate, "estimate lambda1 by power iteration");
  app->add_option("--estimate-iters", c.estimate_iters)->capture_default_str();
  app->add_option("--estimate-tol", c.estimate_tol)->capture_default_str();
  app->add_option("--estimate-seed", c.estimate_seed)->capture_default_str();
}

void finalize(ExperimentConfig& c, const RawFlags& raw, bool out_given) {
  if (!out_given) {
    if (const char* env = std::getenv(gcheb::cli::kOutputDirEnv); env && *env) c.out_dir = env;
  }
  c.schemes = parse_schemes(raw.schemes);
  if (raw.k != "auto") {
    try {
      std::size_t pos = 0;
      const int k = std::stoi(raw.k, &pos);
      if (pos != raw.k.size()) throw std::invalid_argument("k");
      c.k_override = k;
    } catch (const std::exception&) {
      throw CLI::ValidationError("--k", "expected a positive integer or auto");
    }
  }
  if (raw.error_form == "homogeneous") {
    c.error_form = gcheb::ErrorForm::homogeneous;
  } else if (raw.error_form == "affine") {
    c.error_form = gcheb::ErrorForm::affine;
  } else {
    throw CLI::ValidationError("--error-form", "expected homogeneous or affine");
  }
  if (raw.seeding == "consistent") {
    c.seeding = gcheb::Seeding::consistent;
  } else if (raw.seeding == "basic") {
    c.seeding = gcheb::Seeding::basic_iterates;
  } else {
    throw CLI::ValidationError("--seeding", "expected consistent or basic");
  }
  if (c.subcommand == "normal-sparse") {
    c.spec.lambda1 = raw.spec_lambda1;
  } else if (!raw.lambda1.empty()) {
    try {
      c.lambda1 = gcheb::cli::parse_complex(raw.lambda1);
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError("--lambda1", e.what());
    }
  }
  auto path = [](const std::string& s) -> std::optional<std::filesystem::path> {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
  };
  c.matrix_path = path(raw.matrix);
  c.rhs_path = path(raw.rhs);
  c.tilde_path = path(raw.tilde);
  c.tilde_rhs_path = path(raw.tilde_rhs);
  c.spectrum_path = path(raw.spectrum);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace gcheb::cli;
  CLI::App app{"gcheb: generalized Chebyshev acceleration experiments"};
  app.require_subcommand(1);

  ExperimentConfig c;
  RawFlags raw;

  auto* ex = app.add_subcommand("example33", "4x4 non-normal example with the k = 2 transform");
  add_common_flags(ex, c);
  add_solver_flags(ex, c, raw);

  auto* ns = app.add_subcommand("normal-sparse", "seeded normal sparse system");
  add_common_flags(ns, c);
  add_solver_flags(ns, c, raw);
  ns->add_option("--n", c.spec.n, "dimension")->capture_default_str();
  ns->add_option("--block", c.spec.block_size, "unitary block size")->capture_default_str();
  ns->add_option("--lambda1", raw.spec_lambda1, "planted dominant eigenvalue")
      ->capture_default_str();
  ns->add_option("--inner-radius", c.spec.inner_radius, "radius of the remaining spectrum")
      ->capture_default_str();
  ns->add_option("--seed", c.spec.seed, "generator seed")->capture_default_str();

  auto* cu = app.add_subcommand("custom", "user-supplied Matrix Market system");
  add_common_flags(cu, c);
  add_solver_flags(cu, c, raw);
  add_spectrum_flags(cu, c, raw);
  cu->add_option("--matrix", raw.matrix, "iteration matrix M (Matrix Market)")->required();
  cu->add_option("--rhs", raw.rhs, "vector g (Matrix Market array)");
  cu->add_option("--tilde", raw.tilde, "companion matrix M~ (Matrix Market)");
  cu->add_option("--tilde-rhs", raw.tilde_rhs, "vector g~ (Matrix Market array)");
  cu->add_flag("--assume-normal", c.assume_normal, "take M~ = M* (checked)");

  auto* dl = app.add_subcommand("deltoid-sample", "membership grid and boundary of the deltoid");
  add_common_flags(dl, c);
  dl->add_option("--grid", c.grid, "grid points per axis")->capture_default_str();
  dl->add_option("--extent", c.extent, "grid covers [-extent, extent]^2")->capture_default_str();
  dl->add_option("--boundary-samples", c.boundary_samples)->capture_default_str();
  dl->add_option("--spectrum", raw.spectrum, "eigenvalues whose quotients are written");

  auto* rp = app.add_subcommand("report", "spectrum report only");
  add_common_flags(rp, c);
  add_spectrum_flags(rp, c, raw);
  rp->add_option("--matrix", raw.matrix, "matrix for --estimate");

  try {
    app.parse(argc, argv);
    const auto* sub = app.get_subcommands().front();
    c.subcommand = sub->get_name();
    finalize(c, raw, sub->count("--out") > 0);
    c.validate();
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "gcheb: " << e.what() << '\n';
    return kUsage;
  }

  try {
    const RunSummary s = run(c);
    for (const auto& m : s.messages) std::cerr << "gcheb: " << m << '\n';
    if (s.report) std::cout << format_report(*s.report);
    for (const auto& f : s.files) std::cout << "wrote " << f.string() << '\n';
    if (s.exit_code == kInapplicableSpectrum) {
      std::cerr << "gcheb: spectrum is inapplicable (no unique dominant eigenvalue class)\n";
    } else if (s.exit_code == kNotConverged) {
      std::cerr << "gcheb: not converged within " << c.max_steps << " steps\n";
    }
    return s.exit_code;
  } catch (const gcheb::MissingTildeData& e) {
    std::cerr << "gcheb: " << e.what() << '\n';
    return kUsage;
  } catch (const gcheb::IoError& e) {
    std::cerr << "gcheb: I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const gcheb::Error& e) {
    std::cerr << "gcheb: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "gcheb: " << e.what() << '\n';
    return kUsage;
  }
}
