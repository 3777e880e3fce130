#include "gcheb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "gcheb/errors.hpp"
#include "gcheb/matrix_market.hpp"

namespace gcheb::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v, int digits = 10) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

std::string scheme_list(const std::vector<Scheme>& schemes) {
  std::string s;
  for (const auto sc : schemes) {
    if (!s.empty()) s += ',';
    s += to_string(sc);
  }
  return s;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

bool spectrum_is_real(const std::vector<cplx>& eig) {
  return std::all_of(eig.begin(), eig.end(),
                     [](cplx l) { return std::abs(l.imag()) <= 1e-12 * std::max(1.0, std::abs(l)); });
}

// Fixed-length run of one scheme; classical uses rho = |lambda1^k|.
ConvergenceTrace run_fixed(const IterationSystem& sys, Scheme scheme, const ComplexVector& x0,
                           int steps, const IterateOptions& opts) {
  switch (scheme) {
    case Scheme::basic:
      return basic_iterate(sys, x0, steps, opts).trace;
    case Scheme::classical: {
      const auto l = sys.effective_lambda1();
      if (!l) throw MissingLambda1("classical scheme needs lambda1");
      return chebyshev_iterate(sys, std::abs(*l), x0, steps, opts).trace;
    }
    case Scheme::generalized:
      return generalized_chebyshev_iterate(sys, x0, steps, opts).trace;
  }
  throw Error("unknown scheme");
}

struct Window {
  int first;
  int last;
};

// Measured rates appended to report.txt.
std::string measured_rates(const std::vector<ConvergenceTrace>& traces, Window tail,
                           std::optional<Window> mean) {
  std::ostringstream os;
  for (const auto& t : traces) {
    const int last_m = t.records.empty() ? 0 : t.records.back().m;
    const int lo = std::min(tail.first, last_m);
    const int hi = std::min(tail.last, last_m);
    const std::string name(to_string(t.scheme));
    if (hi - lo >= 1) {
      try {
        os << "measured." << name << ".tail_rate[" << lo << ".." << hi
           << "] = " << num(tail_rate(t, lo, hi), 6) << '\n';
      } catch (const DomainError&) {
        os << "measured." << name << ".tail_rate = none\n";
      }
    }
    if (mean && last_m >= mean->last) {
      os << "measured." << name << ".mean_ratio(" << mean->first << ".." << mean->last
         << "] = " << num(mean_ratio(t, mean->first, mean->last), 6) << '\n';
    }
    os << "measured." << name << ".matvecs = " << t.total_matvecs() << '\n';
  }
  return os.str();
}

IterateOptions options_for(const ExperimentConfig& c, const ComplexVector& reference) {
  IterateOptions o;
  o.reference = reference;
  o.form = c.error_form;
  o.seeding = c.seeding;
  return o;
}

std::vector<ConvergenceTrace> run_schemes(const ExperimentConfig& c, const IterationSystem& sys,
                                          const ComplexVector& reference,
                                          const std::vector<cplx>& spectrum, RunSummary& summary) {
  std::vector<ConvergenceTrace> traces;
  if (c.max_steps == 0) return traces;
  const ComplexVector x0 = ComplexVector::zeros(sys.dim());
  const IterateOptions opts = options_for(c, reference);
  for (const auto scheme : c.schemes) {
    if (scheme == Scheme::classical && !spectrum_is_real(spectrum)) {
      summary.messages.push_back("classical scheme skipped: spectrum is not real");
      continue;
    }
    traces.push_back(run_fixed(sys, scheme, x0, c.max_steps, opts));
  }
  return traces;
}

void finish_run(const ExperimentConfig& c, RunSummary& s, const std::string& report_text) {
  const fs::path csv = c.out_dir / "trace.csv";
  write_trace_csv(csv, s.traces, c.describe());
  s.files.push_back(csv);
  const fs::path rep = c.out_dir / "report.txt";
  write_text(rep, "# " + c.describe() + "\n" + report_text);
  s.files.push_back(rep);
}

int choose_k(const ExperimentConfig& c, const SpectrumReport& rep) {
  if (c.k_override) return *c.k_override;
  return rep.k_selected.value_or(1);
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::vector<std::string> known{"example33", "normal-sparse", "custom",
                                              "deltoid-sample", "report"};
  if (std::find(known.begin(), known.end(), subcommand) == known.end()) {
    throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
  }
  if (max_steps < 0) throw std::invalid_argument("--steps must be >= 0");
  if (k_override && *k_override < 1) throw std::invalid_argument("--k must be >= 1");
  if (subcommand == "normal-sparse") {
    try {
      spec.validate();
    } catch (const DomainError& e) {
      throw std::invalid_argument(std::string("normal-sparse spec: ") + e.what());
    }
  }
  if (subcommand == "custom" && !matrix_path) {
    throw std::invalid_argument("custom requires --matrix");
  }
  if (subcommand == "custom" && !spectrum_path && !lambda1 && !estimate) {
    throw std::invalid_argument("custom requires one of --spectrum, --lambda1, --estimate");
  }
  if (subcommand == "custom" && tilde_path && assume_normal) {
    throw std::invalid_argument("--tilde and --assume-normal are mutually exclusive");
  }
  if (subcommand == "report" && !spectrum_path && !(matrix_path && estimate) && !lambda1) {
    throw std::invalid_argument("report requires --spectrum, --lambda1, or --matrix with --estimate");
  }
  if (subcommand == "deltoid-sample" && (grid < 2 || extent <= 0.0 || boundary_samples < 1)) {
    throw std::invalid_argument("deltoid-sample needs --grid >= 2, --extent > 0");
  }
}

std::string ExperimentConfig::describe() const {
  std::ostringstream os;
  os << "subcommand=" << subcommand;
  if (subcommand == "normal-sparse") {
    os << " n=" << spec.n << " block=" << spec.block_size << " lambda1=" << num(spec.lambda1)
       << " inner_radius=" << num(spec.inner_radius) << " seed=" << spec.seed;
  }
  os << " schemes=" << scheme_list(schemes)
     << " k=" << (k_override ? std::to_string(*k_override) : std::string("auto"))
     << " steps=" << max_steps << " residual_tol=" << num(residual_tol)
     << " error_form=" << (error_form == ErrorForm::homogeneous ? "homogeneous" : "affine")
     << " seeding=" << (seeding == Seeding::consistent ? "consistent" : "basic")
     << " threads=" << threads;
  if (matrix_path) os << " matrix=" << matrix_path->string();
  if (rhs_path) os << " rhs=" << rhs_path->string();
  if (tilde_path) os << " tilde=" << tilde_path->string();
  if (tilde_rhs_path) os << " tilde_rhs=" << tilde_rhs_path->string();
  if (spectrum_path) os << " spectrum=" << spectrum_path->string();
  if (lambda1) os << " lambda1=" << num(lambda1->real()) << ',' << num(lambda1->imag());
  if (estimate) {
    os << " estimate=1 estimate_iters=" << estimate_iters << " estimate_tol=" << num(estimate_tol)
       << " estimate_seed=" << estimate_seed;
  }
  if (assume_normal) os << " assume_normal=1";
  if (subcommand == "deltoid-sample") {
    os << " grid=" << grid << " extent=" << num(extent) << " boundary_samples=" << boundary_samples;
  }
  return os.str();
}

void write_trace_csv(const fs::path& path, const std::vector<ConvergenceTrace>& traces,
                     const std::string& metadata) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# " << metadata << '\n';
  out << "m,scheme,k,err_norm,residual,ratio,matvecs\n";
  out << std::setprecision(17);
  for (const auto& t : traces) {
    for (const auto& r : t.records) {
      out << r.m << ',' << to_string(t.scheme) << ',' << t.k << ',';
      if (r.err_norm) out << *r.err_norm;
      out << ',' << r.residual << ',';
      if (r.ratio) out << *r.ratio;
      out << ',' << r.cumulative_matvecs << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

cplx parse_complex(const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  double re = 0.0;
  double im = 0.0;
  if (!(is >> re)) throw std::invalid_argument("cannot parse complex value '" + text + "'");
  std::string rest;
  if (!(is >> rest)) return {re, 0.0};
  std::istringstream im_in(rest);
  if (!(im_in >> im) || !im_in.eof()) {
    throw std::invalid_argument("cannot parse complex value '" + text + "'");
  }
  if (is >> rest) throw std::invalid_argument("trailing text in complex value '" + text + "'");
  return {re, im};
}

std::vector<cplx> read_spectrum_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spectrum file " + path.string());
  std::vector<cplx> out;
  for (std::string line; std::getline(in, line);) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_complex(line));
    } catch (const std::invalid_argument& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  }
  if (out.empty()) throw IoError(path.string() + ": no eigenvalues");
  return out;
}

// ---------------------------------------------------------------------------

RunSummary run_example33(const ExperimentConfig& c) {
  RunSummary s;
  ensure_dir(c.out_dir);
  const auto fx = example33_fixture();
  const auto info = SpectrumInfo::from_eigenvalues(fx.eigenvalues, SpectrumSource::exact);
  s.report = build_report(info);
  const int k = choose_k(c, *s.report);
  const IterationSystem sys = transform_system(fx.system, k);
  s.traces = run_schemes(c, sys, fx.reference, fx.eigenvalues, s);

  std::ostringstream rep;
  rep << format_report(*s.report);
  rep << "k_used = " << k << '\n';
  rep << measured_rates(s.traces, {30, 60}, std::nullopt);
  finish_run(c, s, rep.str());
  return s;
}

RunSummary run_normal_sparse(const ExperimentConfig& c) {
  RunSummary s;
  ensure_dir(c.out_dir);
  const auto gen = assemble_normal_system(c.spec);
  const auto info = SpectrumInfo::from_eigenvalues(gen.spectrum, SpectrumSource::exact);
  s.report = build_report(info);
  const int k = choose_k(c, *s.report);
  const IterationSystem sys = transform_system(gen.system, k);
  s.traces = run_schemes(c, sys, gen.reference, gen.spectrum, s);

  const fs::path m_path = c.out_dir / "M.mtx";
  const fs::path mt_path = c.out_dir / "M_tilde.mtx";
  const fs::path g_path = c.out_dir / "g.mtx";
  const fs::path gt_path = c.out_dir / "g_tilde.mtx";
  const fs::path spec_path = c.out_dir / "spectrum.txt";
  const fs::path meta_path = c.out_dir / "system.meta";
  const std::string comment = "normal sparse system, seed " + std::to_string(c.spec.seed);
  mm::write(m_path, *gen.system.M, comment);
  mm::write(mt_path, *gen.system.M_tilde, comment + " (conjugate transpose)");
  mm::write_vector(g_path, gen.system.g);
  mm::write_vector(gt_path, *gen.system.g_tilde);
  {
    std::ostringstream sp;
    sp << std::setprecision(17);
    for (const auto& l : gen.spectrum) sp << l.real() << ' ' << l.imag() << '\n';
    write_text(spec_path, sp.str());
  }
  mm::write_metadata(meta_path, {{"n", std::to_string(c.spec.n)},
                                 {"seed", std::to_string(c.spec.seed)},
                                 {"lambda1", num(c.spec.lambda1, 17)},
                                 {"inner_radius", num(c.spec.inner_radius, 17)},
                                 {"block_size", std::to_string(c.spec.block_size)},
                                 {"nnz", std::to_string(gen.system.M->nnz())}});
  s.files.insert(s.files.end(), {m_path, mt_path, g_path, gt_path, spec_path, meta_path});

  std::ostringstream rep;
  rep << format_report(*s.report);
  rep << "k_used = " << k << '\n';
  rep << "nnz = " << gen.system.M->nnz() << '\n';
  rep << measured_rates(s.traces, {20, 40}, Window{10, 20});
  finish_run(c, s, rep.str());
  return s;
}

RunSummary run_custom(const ExperimentConfig& c) {
  RunSummary s;
  ensure_dir(c.out_dir);
  SparseMatrix m = mm::read(*c.matrix_path);
  if (m.rows() != m.cols()) throw UnreadableMatrix("iteration matrix must be square");
  const std::size_t n = m.rows();

  // Right-hand sides. Without --rhs the problem is manufactured from x = ones.
  std::optional<ComplexVector> reference;
  ComplexVector g;
  if (c.rhs_path) {
    g = mm::read_vector(*c.rhs_path);
    if (g.size() != n) throw DimensionMismatch("rhs length differs from matrix");
  } else {
    reference = ComplexVector::ones(n);
    g = *reference - matvec(m, *reference);
    s.messages.push_back("no --rhs: using g = (I - M) 1 so the solution is all ones");
  }

  std::optional<SparseMatrix> mt;
  if (c.tilde_path) {
    mt = mm::read(*c.tilde_path);
  } else if (c.assume_normal) {
    const double defect = normality_defect(m);
    const double scale = std::pow(frobenius_norm(m), 2);
    if (defect > 1e-6 * std::max(scale, 1e-300)) {
      s.messages.push_back("warning: matrix is not normal (||MM* - M*M||_F / ||M||_F^2 = " +
                           num(defect / scale, 3) + "); M~ = M* may be wrong");
    }
    mt = conj_transpose(m);
  }
  std::optional<ComplexVector> gt;
  if (mt) {
    if (c.tilde_rhs_path) {
      gt = mm::read_vector(*c.tilde_rhs_path);
    } else if (reference) {
      gt = *reference - matvec(*mt, *reference);
    }
  }
  const bool wants_generalized =
      std::find(c.schemes.begin(), c.schemes.end(), Scheme::generalized) != c.schemes.end();
  if (wants_generalized && !mt) {
    throw MissingTildeData(
        "generalized scheme needs M~: pass --tilde FILE, or --assume-normal for a normal matrix");
  }
  if (wants_generalized && !gt) {
    throw MissingTildeData("generalized scheme with --rhs also needs --tilde-rhs");
  }

  // Spectral data.
  SpectrumInfo info;
  if (c.spectrum_path) {
    info = SpectrumInfo::from_eigenvalues(read_spectrum_file(*c.spectrum_path),
                                          SpectrumSource::user_supplied, true);
  } else if (c.lambda1) {
    info = SpectrumInfo::from_lambda1(*c.lambda1, {}, SpectrumSource::user_supplied, false);
  } else {
    const auto est = estimate_dominant_eigenvalue(m, c.estimate_iters, c.estimate_tol,
                                                  c.estimate_seed);
    s.messages.push_back("estimated lambda1 = " + num(est.lambda1.real()) + "," +
                         num(est.lambda1.imag()) + " (residual " + num(est.residual, 3) + ")");
    info = SpectrumInfo::from_lambda1(est.lambda1, {}, SpectrumSource::estimated, false);
  }
  s.report = build_report(info);

  std::ostringstream rep;
  rep << format_report(*s.report);
  if (s.report->classification == DominantClass::inapplicable) {
    s.exit_code = kInapplicableSpectrum;
    finish_run(c, s, rep.str());
    return s;
  }
  const int k = choose_k(c, *s.report);
  rep << "k_used = " << k << '\n';
  if (!c.k_override && !info.complete && info.eigenvalues.size() < 2) {
    rep << "note = only lambda1 is known so k defaults to 1; pass --k or a --spectrum file\n";
  }

  IterationSystem sys = transform_system(make_system(std::move(m), std::move(g), std::move(mt),
                                                     std::move(gt), info.lambda1),
                                         k);
  const ComplexVector x0 = ComplexVector::zeros(n);
  IterateOptions opts;
  opts.reference = reference;
  opts.seeding = c.seeding;
  opts.form = reference ? c.error_form : ErrorForm::affine;
  bool all_converged = true;
  const bool real_spectrum = info.complete && spectrum_is_real(info.eigenvalues);
  for (const auto scheme : c.schemes) {
    if (scheme == Scheme::classical && !real_spectrum) {
      s.messages.push_back("classical scheme skipped: spectrum not known to be real");
      continue;
    }
    SolveResult res;
    try {
      res = solve(sys, x0, {c.max_steps, c.residual_tol}, scheme, opts);
    } catch (const Divergence& e) {
      rep << "solve." << to_string(scheme) << ".converged = false\n";
      rep << "solve." << to_string(scheme) << ".diverged = " << e.what() << '\n';
      s.messages.push_back(e.what());
      all_converged = false;
      continue;
    }
    rep << "solve." << to_string(scheme) << ".converged = " << (res.converged ? "true" : "false")
        << '\n';
    rep << "solve." << to_string(scheme) << ".steps = " << res.steps << '\n';
    rep << "solve." << to_string(scheme) << ".matvecs = " << res.trace.total_matvecs() << '\n';
    all_converged = all_converged && res.converged;
    s.traces.push_back(res.trace);
  }
  if (!real_spectrum) rep << "note = classical scheme needs a complete real spectrum\n";
  for (const auto& msg : s.messages) rep << "message = " << msg << '\n';
  if (!all_converged) s.exit_code = kNotConverged;
  finish_run(c, s, rep.str());
  return s;
}

RunSummary run_deltoid_sample(const ExperimentConfig& c) {
  RunSummary s;
  ensure_dir(c.out_dir);
  const std::array<int, 3> powers{1, 2, 3};

  const fs::path grid_path = c.out_dir / "grid.csv";
  {
    std::ofstream out(grid_path);
    if (!out) throw IoError("cannot write " + grid_path.string());
    out << "# " << c.describe() << '\n' << "x,y,h,in_k1,in_k2,in_k3\n" << std::setprecision(12);
    for (int i = 0; i < c.grid; ++i) {
      const double x = -c.extent + 2.0 * c.extent * i / (c.grid - 1);
      for (int j = 0; j < c.grid; ++j) {
        const double y = -c.extent + 2.0 * c.extent * j / (c.grid - 1);
        const cplx z(x, y);
        out << x << ',' << y << ',' << deltoid_quartic(z);
        for (const int k : powers) out << ',' << (power_preimage_contains(z, k) ? 1 : 0);
        out << '\n';
      }
    }
    if (!out) throw IoError("write failed for " + grid_path.string());
  }

  const fs::path boundary_path = c.out_dir / "boundary.csv";
  {
    std::ofstream out(boundary_path);
    if (!out) throw IoError("cannot write " + boundary_path.string());
    out << "# " << c.describe() << '\n' << "t,x,y,h\n" << std::setprecision(17);
    for (int i = 0; i < c.boundary_samples; ++i) {
      const double t = 2.0 * std::numbers::pi * i / c.boundary_samples;
      const cplx z = deltoid_boundary(t);
      out << t << ',' << z.real() << ',' << z.imag() << ',' << deltoid_quartic(z) << '\n';
    }
  }

  const fs::path cusp_path = c.out_dir / "cusps.csv";
  {
    std::ofstream out(cusp_path);
    if (!out) throw IoError("cannot write " + cusp_path.string());
    out << "x,y,in_k1,in_k2,in_k3\n" << std::setprecision(17);
    for (int j = 0; j < 3; ++j) {
      const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * j / 3.0);
      out << z.real() << ',' << z.imag();
      for (const int k : powers) out << ',' << (power_preimage_contains(z, k) ? 1 : 0);
      out << '\n';
    }
  }

  // Eigenvalue quotients of a system: the supplied spectrum or the 4x4 example.
  std::vector<cplx> eig = c.spectrum_path ? read_spectrum_file(*c.spectrum_path)
                                          : example33_fixture().eigenvalues;
  const auto info = SpectrumInfo::from_eigenvalues(eig, SpectrumSource::user_supplied);
  const fs::path q_path = c.out_dir / "quotients.csv";
  {
    std::ofstream out(q_path);
    if (!out) throw IoError("cannot write " + q_path.string());
    out << "re,im,in_k1,in_k2,in_k3\n" << std::setprecision(17);
    for (const auto& l : info.eigenvalues) {
      const cplx q = l / info.lambda1;
      out << q.real() << ',' << q.imag();
      for (const int k : powers) out << ',' << (power_preimage_contains(q, k) ? 1 : 0);
      out << '\n';
    }
  }
  s.files = {grid_path, boundary_path, cusp_path, q_path};
  return s;
}

RunSummary run_report(const ExperimentConfig& c) {
  RunSummary s;
  ensure_dir(c.out_dir);
  SpectrumInfo info;
  if (c.spectrum_path) {
    info = SpectrumInfo::from_eigenvalues(read_spectrum_file(*c.spectrum_path),
                                          SpectrumSource::user_supplied, true);
  } else if (c.matrix_path && c.estimate) {
    const auto est = estimate_dominant_eigenvalue(mm::read(*c.matrix_path), c.estimate_iters,
                                                  c.estimate_tol, c.estimate_seed);
    info = SpectrumInfo::from_lambda1(est.lambda1, {}, SpectrumSource::estimated, false);
  } else {
    info = SpectrumInfo::from_lambda1(*c.lambda1, {}, SpectrumSource::user_supplied, false);
  }
  s.report = build_report(info);
  const fs::path rep = c.out_dir / "report.txt";
  write_text(rep, "# " + c.describe() + "\n" + format_report(*s.report));
  s.files.push_back(rep);
  if (s.report->classification == DominantClass::inapplicable) s.exit_code = kInapplicableSpectrum;
  return s;
}

RunSummary run(const ExperimentConfig& config) {
  config.validate();
  set_matvec_threads(config.threads);
  if (config.subcommand == "example33") return run_example33(config);
  if (config.subcommand == "normal-sparse") return run_normal_sparse(config);
  if (config.subcommand == "custom") return run_custom(config);
  if (config.subcommand == "deltoid-sample") return run_deltoid_sample(config);
  return run_report(config);
}

}  // namespace gcheb::cli
