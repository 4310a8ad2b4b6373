#include "sarc/sarc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sarc {

namespace {

constexpr double kSarcLogExponent = 0.5;
constexpr double kSigmaCeiling = 1e200;

void push_record(SarcState& s, bool success) {
  TraceRecord r;
  r.iter = s.iter;
  r.epochs = s.ledger.epochs();
  r.f = s.f;
  r.grad_norm = s.grad_norm;
  r.sigma = s.sigma;
  r.eps_i = s.eps_i;
  r.sample_size = s.sample_size;
  r.success = success;
  r.phase = s.iter == 0 && s.trace.empty() ? "init" : "sarc";
  r.wall_time = wall_seconds() - s.start_time;
  r.gradient_queries = s.ledger.gradient_queries();
  r.hessian_queries = s.ledger.hessian_queries();
  r.krylov_dim = s.last_subproblem.krylov_dim;
  r.rng_draws = s.rng.counter();
  s.trace.push_back(std::move(r));
}

}  // namespace

double initial_hessian_tolerance(double kappa_theta, double grad_norm) {
  return std::min(1.0, (1.0 - kappa_theta) * grad_norm / 3.0);
}

Acceptance sarc_acceptance(double f, double f_trial, double model_decrease, double eta) {
  Acceptance acc;
  if (!std::isfinite(f_trial)) return acc;
  if (std::abs(model_decrease) < 1e-14 * std::abs(f)) {
    // Denominator at round-off level: accept plain descent.
    acc.success = f_trial <= f;
    acc.theta = model_decrease != 0.0 ? (f - f_trial) / model_decrease : (acc.success ? 1.0 : 0.0);
    return acc;
  }
  if (!(model_decrease > 0.0)) {
    acc.psd_violation = true;
    return acc;
  }
  acc.theta = (f - f_trial) / model_decrease;
  acc.success = acc.theta >= eta;
  return acc;
}

SarcState sarc_init(const LossModel& model, const SolverConfig& config, const Vector& x0) {
  config.validate(TerminationKind::subspace_optimal);
  model.check_point(x0);
  SarcHandoff h;
  h.f = model.full_value(x0);
  h.grad = model.full_gradient(x0);
  h.sigma = config.sigma0;
  h.rng = CounterRng(config.seed, 1);
  h.ledger = EpochLedger(model.n());
  h.ledger.charge_full_gradient();
  h.start_time = wall_seconds();
  SarcState s = sarc_init(model, config, x0, std::move(h));
  push_record(s, false);
  return s;
}

SarcState sarc_init(const LossModel& model, const SolverConfig& config, const Vector& x0, SarcHandoff handoff) {
  config.validate(TerminationKind::subspace_optimal);
  model.check_point(x0);
  if (handoff.grad.size() != x0.size()) throw std::invalid_argument("handoff gradient has wrong dimension");
  SarcState s;
  s.x = x0;
  s.f = handoff.f;
  s.grad = std::move(handoff.grad);
  s.grad_norm = s.grad.norm();
  s.sigma = std::max(config.sigma_min, handoff.sigma);
  s.eps_i = initial_hessian_tolerance(config.kappa_theta, s.grad_norm);
  s.lip = config.lipschitz ? *config.lipschitz : lipschitz_bounds(model);
  s.rng = handoff.rng;
  s.ledger = handoff.ledger;
  s.trace = std::move(handoff.trace);
  s.iter = handoff.iter_offset;
  s.start_time = handoff.start_time;
  if (s.grad_norm == 0.0) s.status = RunStatus::stationary_start;
  return s;
}

void sarc_step(SarcState& s, const LossModel& model, const SolverConfig& config) {
  if (s.terminal()) throw std::logic_error("sarc_step called on a terminal state");
  if (s.rebuild || !s.hessian) {
    HessianBuild hb = build_hessian(model, s.x, config, s.lip, s.eps_i, kSarcLogExponent, s.rng, s.ledger);
    s.sample_size = hb.op.query_count();
    s.hessian.emplace(std::move(hb.op));
    s.rebuild = false;
  }
  const SubsampledHessian& H = *s.hessian;
  CubicModel cm{s.grad, [&H](const Vector& v) { return H.apply(v); }, s.sigma, s.f};
  const TerminationSpec spec{TerminationKind::subspace_optimal, config.kappa_theta};
  s.last_subproblem = minimize_model(cm, spec, s.grad_norm, config.subproblem);
  const SubproblemResult& sub = s.last_subproblem;

  Vector trial = s.x + sub.s;
  const double f_trial = trial.allFinite() ? model.full_value(trial) : std::numeric_limits<double>::infinity();
  const Acceptance acc = sarc_acceptance(s.f, f_trial, sub.model_decrease, config.eta);
  if (acc.psd_violation) ++s.psd_violations;
  s.last_theta = acc.theta;
  s.last_model_decrease = sub.model_decrease;
  ++s.iter;

  if (acc.success) {
    s.x = std::move(trial);
    s.f = f_trial;
    s.grad = model.full_gradient(s.x);
    s.ledger.charge_full_gradient();
    s.grad_norm = s.grad.norm();
    s.eps_i = std::min(s.eps_i, (1.0 - config.kappa_theta) * s.grad_norm / 3.0);
    s.sigma = std::max(config.sigma_min, s.sigma / config.gamma1);
    s.rebuild = true;
    ++s.successes;
  } else {
    s.sigma *= config.gamma1;
    if (s.sigma > kSigmaCeiling) s.status = RunStatus::stalled;
  }
  push_record(s, acc.success);
}

RunResult sarc_finish(SarcState s, const LossModel& model, const SolverConfig& config) {
  while (!s.terminal()) {
    if (s.grad_norm <= config.grad_tol) {
      s.status = RunStatus::converged;
      break;
    }
    if (s.iter >= config.max_iters) {
      s.status = RunStatus::max_iters;
      break;
    }
    sarc_step(s, model, config);
  }
  if (s.status == RunStatus::stationary_start) s.status = RunStatus::converged;
  RunResult r;
  r.x = std::move(s.x);
  r.f = s.f;
  r.grad_norm = s.grad_norm;
  r.status = s.status;
  r.trace = std::move(s.trace);
  r.ledger = s.ledger;
  r.iterations = s.iter;
  r.successes = s.successes;
  return r;
}

RunResult sarc_run(const LossModel& model, const SolverConfig& config, const Vector& x0) {
  return sarc_finish(sarc_init(model, config, x0), model, config);
}

}  // namespace sarc
