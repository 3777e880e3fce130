#include "gcheb/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>

#include "gcheb/cheb_kernel.hpp"
#include "gcheb/errors.hpp"

namespace gcheb {

namespace {
std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}
}  // namespace

PoweredOperator IterationSystem::tilde_op() const {
  if (!M_tilde) throw MissingTildeData("system has no tilde matrix");
  return PoweredOperator(M_tilde, k);
}

std::optional<cplx> IterationSystem::effective_lambda1() const {
  if (!lambda1) return std::nullopt;
  cplx v = 1.0;
  for (int i = 0; i < k; ++i) v *= *lambda1;
  return v;
}

IterationSystem make_system(SparseMatrix M, ComplexVector g, std::optional<SparseMatrix> M_tilde,
                            std::optional<ComplexVector> g_tilde, std::optional<cplx> lambda1) {
  if (M.rows() != M.cols()) throw DimensionMismatch("iteration matrix must be square");
  if (g.size() != M.rows()) throw DimensionMismatch("right-hand side length differs from M");
  if (M_tilde && (M_tilde->rows() != M.rows() || M_tilde->cols() != M.cols())) {
    throw DimensionMismatch("M~ and M differ in shape");
  }
  if (g_tilde && g_tilde->size() != M.rows()) {
    throw DimensionMismatch("g~ length differs from M");
  }
  IterationSystem sys;
  sys.M = std::make_shared<const SparseMatrix>(std::move(M));
  sys.h = g;
  sys.g = std::move(g);
  if (M_tilde) sys.M_tilde = std::make_shared<const SparseMatrix>(std::move(*M_tilde));
  sys.h_tilde = g_tilde;
  sys.g_tilde = std::move(g_tilde);
  sys.lambda1 = lambda1;
  return sys;
}

IterationSystem transform_system(const IterationSystem& sys, int k) {
  if (k < 1) throw DomainError("transform power must be >= 1");
  IterationSystem out = sys;
  out.k = k;
  out.h = geometric_sum_apply(*sys.M, k, sys.g);
  if (sys.M_tilde && sys.g_tilde) {
    out.h_tilde = geometric_sum_apply(*sys.M_tilde, k, *sys.g_tilde);
  } else {
    out.h_tilde.reset();
  }
  return out;
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::basic:
      return "basic";
    case Scheme::classical:
      return "classical";
    case Scheme::generalized:
      return "generalized";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  if (name == "basic") return Scheme::basic;
  if (name == "classical") return Scheme::classical;
  if (name == "generalized") return Scheme::generalized;
  return std::nullopt;
}

double tail_rate(const ConvergenceTrace& trace, int m_first, int m_last) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : trace.records) {
    if (r.m < m_first || r.m > m_last) continue;
    const double v = r.err_norm ? *r.err_norm : r.residual;
    if (!(v > 0.0)) continue;
    const double x = r.m;
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw DomainError("tail_rate needs at least two positive samples in the window");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return std::exp(slope);
}

double mean_ratio(const ConvergenceTrace& trace, int m_first, int m_last) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : trace.records) {
    if (r.m <= m_first || r.m > m_last || !r.ratio) continue;
    sum += *r.ratio;
    ++n;
  }
  if (n == 0) throw DomainError("mean_ratio: no ratios in the window");
  return sum / n;
}

namespace {

// Produces successive iterates of one scheme; advance() returns the matvecs
// it spent.
class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual std::size_t advance() = 0;
  virtual const ComplexVector& current() const = 0;
};

class BasicStepper final : public Stepper {
 public:
  BasicStepper(PoweredOperator op, ComplexVector rhs, ComplexVector y0)
      : op_(std::move(op)), rhs_(std::move(rhs)), y_(std::move(y0)) {}

  std::size_t advance() override {
    y_ = op_.apply(y_) += rhs_;
    return static_cast<std::size_t>(op_.power());
  }
  const ComplexVector& current() const override { return y_; }

 private:
  PoweredOperator op_;
  ComplexVector rhs_;
  ComplexVector y_;
};

class ClassicalStepper final : public Stepper {
 public:
  ClassicalStepper(PoweredOperator op, ComplexVector rhs, double rho, ComplexVector y0)
      : op_(std::move(op)), rhs_(std::move(rhs)), stream_(rho), y_(std::move(y0)) {}

  std::size_t advance() override {
    ComplexVector next = op_.apply(y_) += rhs_;
    if (m_ >= 1) {
      const auto [weight, lag] = stream_.step();
      next *= weight;
      next.axpy(-lag, prev_);
    }
    prev_ = std::move(y_);
    y_ = std::move(next);
    ++m_;
    return static_cast<std::size_t>(op_.power());
  }
  const ComplexVector& current() const override { return y_; }

 private:
  PoweredOperator op_;
  ComplexVector rhs_;
  ClassicalRatioStream stream_;
  ComplexVector y_;
  ComplexVector prev_;
  int m_ = 0;  // index of y_
};

class GeneralizedStepper final : public Stepper {
 public:
  GeneralizedStepper(PoweredOperator op, ComplexVector rhs, PoweredOperator tilde_op,
                     ComplexVector tilde_rhs, cplx lambda1, Seeding seeding, ComplexVector y0)
      : op_(std::move(op)),
        rhs_(std::move(rhs)),
        tilde_op_(std::move(tilde_op)),
        tilde_rhs_(std::move(tilde_rhs)),
        stream_(lambda1, seeding == Seeding::consistent ? 2 : 3),
        seeding_(seeding) {
    hist_[2] = std::move(y0);
  }

  std::size_t advance() override {
    const std::size_t k = static_cast<std::size_t>(op_.power());
    ComplexVector next = op_.apply(hist_[2]) += rhs_;
    std::size_t spent = k;
    const int target = m_ + 1;
    if (target == 2 && seeding_ == Seeding::consistent) {
      const auto c = stream_.step();
      const ComplexVector t = tilde_op_.apply(hist_[1]) += tilde_rhs_;
      next *= c.c1;
      next.axpy(c.c3 - c.c2, t);
      spent += k;
    } else if (target >= 3) {
      const auto c = stream_.step();
      const ComplexVector t = tilde_op_.apply(hist_[1]) += tilde_rhs_;
      next *= c.c1;
      next.axpy(-c.c2, t);
      next.axpy(c.c3, hist_[0]);
      spent += k;
    }
    hist_[0] = std::move(hist_[1]);
    hist_[1] = std::move(hist_[2]);
    hist_[2] = std::move(next);
    m_ = target;
    return spent;
  }
  const ComplexVector& current() const override { return hist_[2]; }

 private:
  PoweredOperator op_;
  ComplexVector rhs_;
  PoweredOperator tilde_op_;
  ComplexVector tilde_rhs_;
  ChebCoefficientStream stream_;
  Seeding seeding_;
  std::array<ComplexVector, 3> hist_;  // y^(m-2), y^(m-1), y^(m)
  int m_ = 0;
};

void check_start(const IterationSystem& sys, const ComplexVector& x0) {
  if (!sys.M) throw Error("iteration system has no matrix");
  if (x0.size() != sys.dim()) throw DimensionMismatch("start vector length differs from M");
}

// Everything the run loop needs to know about how vectors map to iterates.
struct Frame {
  bool homogeneous = false;
  const ComplexVector* reference = nullptr;
  double rhs_norm = 0.0;
};

Frame make_frame(const IterationSystem& sys, const IterateOptions& opts) {
  Frame f;
  f.rhs_norm = norm2(sys.g);
  if (opts.reference) {
    if (opts.reference->size() != sys.dim()) {
      throw DimensionMismatch("reference solution length differs from M");
    }
    f.reference = &*opts.reference;
  }
  if (opts.form == ErrorForm::homogeneous) {
    if (!f.reference) throw DomainError("homogeneous error form needs a reference solution");
    // x must really be the fixed point, or the error recurrence is meaningless.
    const ComplexVector defect = (*f.reference - matvec(*sys.M, *f.reference)) -= sys.g;
    const double scale = std::max({1.0, f.rhs_norm, norm2(*f.reference)});
    if (norm2(defect) > 1e-8 * scale) {
      throw DomainError("reference does not solve (I - M) x = g");
    }
    f.homogeneous = true;
  }
  return f;
}

struct RunOutcome {
  ComplexVector last;
  std::vector<ComplexVector> iterates;
  ConvergenceTrace trace;
  ComplexVector best;
  bool stopped_early = false;
};

ComplexVector to_iterate(const Frame& f, const ComplexVector& state) {
  return f.homogeneous ? *f.reference + state : state;
}

RunOutcome run(Stepper& stepper, const IterationSystem& sys, const Frame& frame,
               const IterateOptions& opts, Scheme scheme, int steps,
               const std::function<bool(const TraceRecord&)>& stop) {
  RunOutcome out;
  out.trace.scheme = scheme;
  out.trace.k = sys.k;

  double initial_residual = 0.0;
  double best_residual = std::numeric_limits<double>::infinity();
  std::size_t cumulative = 0;

  auto record = [&](int m, std::size_t spent) {
    const ComplexVector& state = stepper.current();
    if (!all_finite(state)) {
      throw Divergence(std::string(to_string(scheme)) + " iterate became non-finite at m = " +
                       std::to_string(m));
    }
    TraceRecord r;
    r.m = m;
    r.matvecs = spent;
    cumulative += spent;
    r.cumulative_matvecs = cumulative;
    if (frame.homogeneous) {
      r.residual = norm2(state - matvec(*sys.M, state));
      r.err_norm = norm2(state);
    } else {
      r.residual = norm2((state - matvec(*sys.M, state)) -= sys.g);
      if (frame.reference) r.err_norm = norm2(*frame.reference - state);
    }
    if (m == 0) {
      initial_residual = r.residual;
    } else {
      const auto& prev = out.trace.records.back();
      const double num = r.err_norm ? *r.err_norm : r.residual;
      const double den = prev.err_norm ? *prev.err_norm : prev.residual;
      if (den > 0.0) r.ratio = num / den;
      double base = initial_residual;
      if (base <= 0.0) base = frame.rhs_norm > 0.0 ? frame.rhs_norm : 1.0;
      if (r.residual > opts.divergence_factor * base) {
        throw Divergence(std::string(to_string(scheme)) + " residual exceeded " +
                         fmt_g(opts.divergence_factor) + " x initial at m = " +
                         std::to_string(m));
      }
    }
    if (r.residual < best_residual) {
      best_residual = r.residual;
      out.best = to_iterate(frame, state);
    }
    if (opts.keep_iterates) out.iterates.push_back(to_iterate(frame, state));
    out.trace.records.push_back(r);
    return stop && stop(r);
  };

  bool done = record(0, 0);
  for (int m = 1; m <= steps && !done; ++m) {
    const std::size_t spent = stepper.advance();
    done = record(m, spent);
  }
  out.stopped_early = done;
  out.last = to_iterate(frame, stepper.current());
  return out;
}

ComplexVector start_state(const Frame& f, const ComplexVector& x0) {
  return f.homogeneous ? x0 - *f.reference : x0;
}

ComplexVector rhs_for(const Frame& f, const ComplexVector& rhs) {
  return f.homogeneous ? ComplexVector::zeros(rhs.size()) : rhs;
}

std::unique_ptr<Stepper> make_stepper(const IterationSystem& sys, const Frame& frame,
                                      const IterateOptions& opts, Scheme scheme, double rho,
                                      const ComplexVector& x0) {
  switch (scheme) {
    case Scheme::basic:
      return std::make_unique<BasicStepper>(sys.op(), rhs_for(frame, sys.h),
                                            start_state(frame, x0));
    case Scheme::classical:
      return std::make_unique<ClassicalStepper>(sys.op(), rhs_for(frame, sys.h), rho,
                                                start_state(frame, x0));
    case Scheme::generalized: {
      if (!sys.M_tilde) throw MissingTildeData("generalized scheme needs M~");
      if (!sys.g_tilde || !sys.h_tilde) throw MissingTildeData("generalized scheme needs g~");
      const auto lambda = sys.effective_lambda1();
      if (!lambda) throw MissingLambda1("generalized scheme needs lambda1");
      if (frame.homogeneous) {
        const ComplexVector& x = *frame.reference;
        const ComplexVector defect =
            (x - matvec(*sys.M_tilde, x)) -= *sys.g_tilde;
        if (norm2(defect) > 1e-8 * std::max({1.0, frame.rhs_norm, norm2(x)})) {
          throw DomainError("reference does not solve (I - M~) x = g~");
        }
      }
      return std::make_unique<GeneralizedStepper>(sys.op(), rhs_for(frame, sys.h),
                                                  sys.tilde_op(), rhs_for(frame, *sys.h_tilde),
                                                  *lambda, opts.seeding, start_state(frame, x0));
    }
  }
  throw Error("unknown scheme");
}

IterationResult iterate(const IterationSystem& sys, const ComplexVector& x0, int steps,
                        const IterateOptions& opts, Scheme scheme, double rho) {
  check_start(sys, x0);
  if (steps < 0) throw DomainError("steps must be non-negative");
  const Frame frame = make_frame(sys, opts);
  auto stepper = make_stepper(sys, frame, opts, scheme, rho, x0);
  RunOutcome r = run(*stepper, sys, frame, opts, scheme, steps, {});
  return {std::move(r.last), std::move(r.iterates), std::move(r.trace)};
}

}  // namespace

IterationResult basic_iterate(const IterationSystem& sys, const ComplexVector& x0, int steps,
                              const IterateOptions& opts) {
  return iterate(sys, x0, steps, opts, Scheme::basic, 0.0);
}

IterationResult chebyshev_iterate(const IterationSystem& sys, double rho, const ComplexVector& x0,
                                  int steps, const IterateOptions& opts) {
  return iterate(sys, x0, steps, opts, Scheme::classical, rho);
}

IterationResult generalized_chebyshev_iterate(const IterationSystem& sys, const ComplexVector& x0,
                                              int steps, const IterateOptions& opts) {
  return iterate(sys, x0, steps, opts, Scheme::generalized, 0.0);
}

SolveResult solve(const IterationSystem& sys, const ComplexVector& x0, const StoppingRule& stop,
                  Scheme scheme, const IterateOptions& opts) {
  check_start(sys, x0);
  double rho = 0.0;
  if (scheme == Scheme::classical) {
    const auto lambda = sys.effective_lambda1();
    if (!lambda) throw MissingLambda1("classical scheme needs lambda1 for rho");
    rho = std::abs(*lambda);
  }
  const Frame frame = make_frame(sys, opts);
  auto stepper = make_stepper(sys, frame, opts, scheme, rho, x0);
  const double threshold = stop.residual_tol * (frame.rhs_norm > 0.0 ? frame.rhs_norm : 1.0);
  IterateOptions run_opts = opts;
  RunOutcome r = run(*stepper, sys, frame, run_opts, scheme, stop.max_steps,
                     [threshold](const TraceRecord& rec) { return rec.residual <= threshold; });
  SolveResult out;
  out.converged = r.stopped_early;
  out.steps = r.trace.records.empty() ? 0 : r.trace.records.back().m;
  out.solution = r.stopped_early ? std::move(r.last) : std::move(r.best);
  out.trace = std::move(r.trace);
  return out;
}

}  // namespace gcheb
