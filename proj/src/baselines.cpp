#include "sarc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "sarc/saarc.hpp"
#include "sarc/sarc.hpp"

namespace sarc {

namespace {

// Shared bookkeeping for the first-order baselines. Gradients taken only for
// monitoring are not charged to the ledger.
class FirstOrderRun {
 public:
  FirstOrderRun(const LossModel& model, const SolverConfig& config, const Vector& x0, const BaselineOptions& options,
                const char* phase)
      : model_(model), config_(config), options_(options), phase_(phase), start_(wall_seconds()) {
    if (config.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
    model.check_point(x0);
    result_.ledger = EpochLedger(model.n());
    f0_ = model.full_value(x0);
  }

  EpochLedger& ledger() { return result_.ledger; }

  // Records the monitored state; returns false once the run must stop.
  bool record(Index iter, const Vector& x, double f, double grad_norm, double step_param) {
    TraceRecord r;
    r.iter = iter;
    r.epochs = result_.ledger.epochs();
    r.f = f;
    r.grad_norm = grad_norm;
    r.sigma = step_param;
    r.sample_size = model_.n();
    r.success = iter > 0;
    r.phase = iter == 0 ? "init" : phase_;
    r.wall_time = wall_seconds() - start_;
    r.gradient_queries = result_.ledger.gradient_queries();
    r.hessian_queries = result_.ledger.hessian_queries();
    result_.trace.push_back(std::move(r));
    result_.x = x;
    result_.f = f;
    result_.grad_norm = grad_norm;
    result_.iterations = iter;
    result_.successes = iter;
    if (!std::isfinite(f) || f > options_.divergence_factor * std::abs(f0_)) {
      result_.status = RunStatus::diverged;
      return false;
    }
    if (grad_norm <= config_.grad_tol) {
      result_.status = RunStatus::converged;
      return false;
    }
    if (iter >= config_.max_iters) {
      result_.status = RunStatus::max_iters;
      return false;
    }
    return true;
  }

  RunResult take() { return std::move(result_); }

 private:
  const LossModel& model_;
  const SolverConfig& config_;
  const BaselineOptions& options_;
  const char* phase_;
  double start_;
  double f0_ = 0.0;
  RunResult result_;
};

}  // namespace

RunResult cr_run(const LossModel& model, SolverConfig config, const Vector& x0) {
  config.exact_hessian = true;
  RunResult r = sarc_run(model, config, x0);
  for (auto& rec : r.trace)
    if (rec.phase == "sarc") rec.phase = "cr";
  return r;
}

RunResult acr_run(const LossModel& model, SolverConfig config, const Vector& x0) {
  config.exact_hessian = true;
  return saarc_run(model, config, x0);
}

RunResult agd_run(const LossModel& model, const SolverConfig& config, const Vector& x0,
                  const BaselineOptions& options) {
  FirstOrderRun run(model, config, x0, options, "agd");
  const LipschitzInfo lip = config.lipschitz ? *config.lipschitz : lipschitz_bounds(model);
  double L = lip.Lbar > 0.0 ? lip.Lbar : 1.0;

  Vector x = x0;
  Vector y = x0;
  double t = 1.0;
  double fx = model.full_value(x);
  if (!run.record(0, x, fx, model.full_gradient(x).norm(), L)) return run.take();

  for (Index k = 1;; ++k) {
    const Vector gy = model.full_gradient(y);
    run.ledger().charge_full_gradient();
    const double fy = model.full_value(y);
    const double gy2 = gy.squaredNorm();
    Vector x_next = y - gy / L;
    double f_next = model.full_value(x_next);
    while (!(f_next <= fy - 0.5 * gy2 / L) && L < 1e300) {
      L *= 2.0;
      x_next = y - gy / L;
      f_next = model.full_value(x_next);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = std::move(x_next);
    fx = f_next;
    t = t_next;
    if (!run.record(k, x, fx, model.full_gradient(x).norm(), L)) break;
  }
  return run.take();
}

RunResult sgd_run(const LossModel& model, const SolverConfig& config, const Vector& x0,
                  const BaselineOptions& options) {
  if (options.sgd_batch < 1) throw std::invalid_argument("SGD batch must be >= 1");
  FirstOrderRun run(model, config, x0, options, "sgd");
  const LipschitzInfo lip = config.lipschitz ? *config.lipschitz : lipschitz_bounds(model);
  const double step = 1.0 / (lip.L > 0.0 ? lip.L : 1.0);
  const Index n = model.n();
  const bool full = options.sgd_batch >= n;
  CounterRng rng(config.seed, 2);

  Vector x = x0;
  if (!run.record(0, x, model.full_value(x), model.full_gradient(x).norm(), step)) return run.take();
  std::vector<Index> batch(static_cast<std::size_t>(std::min(options.sgd_batch, n)));
  for (Index epoch = 1;; ++epoch) {
    const Index target = epoch * n;
    while (run.ledger().gradient_queries() < target) {
      if (full) {
        x -= step * model.full_gradient(x);
        run.ledger().charge_full_gradient();
      } else {
        for (auto& j : batch) j = rng.uniform_index(n);
        x -= step * model.batch_gradient(batch, x);
        run.ledger().charge_gradients(static_cast<Index>(batch.size()));
      }
      if (!x.allFinite()) break;
    }
    const double f = x.allFinite() ? model.full_value(x) : std::numeric_limits<double>::infinity();
    const double gn = x.allFinite() ? model.full_gradient(x).norm() : std::numeric_limits<double>::infinity();
    if (!run.record(epoch, x, f, gn, step)) break;
  }
  return run.take();
}

RunResult lbfgs_run(const LossModel& model, const SolverConfig& config, const Vector& x0,
                    const BaselineOptions& options) {
  if (options.lbfgs_memory < 1) throw std::invalid_argument("L-BFGS memory must be >= 1");
  FirstOrderRun run(model, config, x0, options, "lbfgs");
  struct Pair {
    Vector s, y;
    double rho;
  };
  std::deque<Pair> memory;

  Vector x = x0;
  double f = model.full_value(x);
  Vector g = model.full_gradient(x);
  run.ledger().charge_full_gradient();
  if (!run.record(0, x, f, g.norm(), 1.0)) return run.take();

  for (Index k = 1;; ++k) {
    // Two-loop recursion.
    Vector q = g;
    std::vector<double> alpha(memory.size());
    for (std::size_t i = memory.size(); i-- > 0;) {
      alpha[i] = memory[i].rho * memory[i].s.dot(q);
      q -= alpha[i] * memory[i].y;
    }
    double scale = 1.0;
    if (!memory.empty()) {
      const Pair& last = memory.back();
      scale = last.s.dot(last.y) / last.y.squaredNorm();
    } else {
      scale = 1.0 / std::max(1.0, g.norm());
    }
    q *= scale;
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const double beta = memory[i].rho * memory[i].y.dot(q);
      q += (alpha[i] - beta) * memory[i].s;
    }
    Vector dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      memory.clear();
      dir = -g / std::max(1.0, g.norm());
      slope = g.dot(dir);
    }

    double step = 1.0;
    Vector x_next = x + dir;
    double f_next = model.full_value(x_next);
    while (!(f_next <= f + options.armijo_c1 * step * slope) && step > 1e-20) {
      step *= 0.5;
      x_next = x + step * dir;
      f_next = model.full_value(x_next);
    }
    const Vector g_next = model.full_gradient(x_next);
    run.ledger().charge_full_gradient();
    Pair p{x_next - x, g_next - g, 0.0};
    const double sy = p.s.dot(p.y);
    if (sy > 1e-10 * p.s.norm() * p.y.norm()) {
      p.rho = 1.0 / sy;
      memory.push_back(std::move(p));
      if (static_cast<Index>(memory.size()) > options.lbfgs_memory) memory.pop_front();
    }
    x = std::move(x_next);
    f = f_next;
    g = g_next;
    if (!run.record(k, x, f, g.norm(), step)) break;
  }
  return run.take();
}

}  // namespace sarc
