#include "sarc/saarc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sarc {

namespace {

constexpr double kSaarcLogExponent = 1.0 / 3.0;
constexpr double kSigmaCeiling = 1e200;
constexpr Index kProbesPerCheck = 20;
constexpr std::uint64_t kProbeStream = 7;

void push_record(SaarcState& s, bool success, const char* phase) {
  TraceRecord r;
  r.iter = s.iter;
  r.epochs = s.ledger.epochs();
  r.f = s.f;
  r.grad_norm = s.grad_norm;
  r.sigma = s.sigma;
  r.eps_i = s.eps_i;
  r.sample_size = s.sample_size;
  r.success = success;
  r.phase = phase;
  r.wall_time = wall_seconds() - s.start_time;
  r.l = s.seq ? s.seq->l : 0;
  r.varsigma = s.seq ? s.seq->varsigma : 0.0;
  r.t3 = s.t3;
  r.gradient_queries = s.ledger.gradient_queries();
  r.hessian_queries = s.ledger.hessian_queries();
  r.krylov_dim = s.last_subproblem.krylov_dim;
  r.rng_draws = s.rng.counter();
  s.trace.push_back(std::move(r));
}

void ensure_hessian(SaarcState& s, const LossModel& model, const SolverConfig& config, const Vector& at) {
  if (!s.rebuild && s.hessian) return;
  HessianBuild hb = build_hessian(model, at, config, s.lip, s.eps_i, kSaarcLogExponent, s.rng, s.ledger);
  s.sample_size = hb.op.query_count();
  s.hessian.emplace(std::move(hb.op));
  s.rebuild = false;
}

SubproblemResult solve_at(const SaarcState& s, const SolverConfig& config, const Vector& grad, double gnorm,
                          double f0) {
  const SubsampledHessian& H = *s.hessian;
  CubicModel cm{grad, [&H](const Vector& v) { return H.apply(v); }, s.sigma, f0};
  const TerminationSpec spec{TerminationKind::accelerated, config.kappa_theta};
  return minimize_model(cm, spec, gnorm, config.subproblem);
}

void grow_sigma(SaarcState& s, const SolverConfig& config) {
  s.sigma *= config.gamma1;
  if (s.sigma > kSigmaCeiling) s.status = RunStatus::stalled;
}

double history_value(const SaarcState& s, const Vector& z) {
  double v = 0.0;
  for (const auto& h : s.history) v += h.weight * (h.f + h.grad.dot(z - h.point));
  return v + s.seq->varsigma / 6.0 * std::pow((z - s.seq->anchor).norm(), 3);
}

PsiCheck check_sequence(SaarcState& s, const VarsigmaUpdate& upd, const Vector& z) {
  const EstimatingSequence& seq = *s.seq;
  PsiCheck c;
  c.l = seq.l;
  c.psi_min = seq.value(z);
  c.threshold = upd.threshold;
  c.lower_bound_ok = c.psi_min >= c.threshold;
  c.loop_capped = upd.capped;
  c.stationarity = seq.stationarity_residual(z);
  const double independent = history_value(s, z);
  c.recompute_gap = std::abs(independent - c.psi_min) / std::max(1.0, std::abs(c.psi_min));

  const Index d = z.size();
  const double gnorm = seq.lin_grad.norm();
  const double radius = std::max({(z - seq.anchor).norm(), (s.x - seq.anchor).norm(), 1e-8});
  c.worst_probe_margin = std::numeric_limits<double>::infinity();
  for (Index p = 0; p < kProbesPerCheck; ++p) {
    Vector dir(d);
    for (Index i = 0; i < d; ++i) dir(i) = s.probe_rng.normal();
    const double dn = dir.norm();
    if (dn == 0.0) continue;
    const double t = radius * std::pow(10.0, 4.0 * s.probe_rng.uniform() - 2.0);
    const Vector probe = z + (t / dn) * dir;
    const double gap = seq.value(probe) - c.psi_min;
    const double bound = seq.varsigma / 12.0 * t * t * t;
    // Cancellation error of the two evaluations.
    const double rz = (z - seq.anchor).norm();
    const double rp = (probe - seq.anchor).norm();
    const double scale = 2.0 * std::abs(seq.lin_const) + gnorm * (rz + rp) +
                         seq.varsigma / 6.0 * (rz * rz * rz + rp * rp * rp);
    const double margin = (gap - bound) / std::max(scale, std::numeric_limits<double>::min());
    c.worst_probe_margin = std::min(c.worst_probe_margin, margin);
    ++c.probes;
    if (margin < -1e-12) ++c.probe_failures;
  }
  return c;
}

bool check_stop(SaarcState& s, const SolverConfig& config) {
  if (s.terminal()) return true;
  if (s.grad_norm <= config.grad_tol) {
    s.status = RunStatus::converged;
    return true;
  }
  if (s.phase == SaarcPhase::two && s.grad_y_norm <= config.grad_tol) {
    // The extrapolation point already meets the tolerance.
    s.x = s.y;
    s.f = s.f_y;
    s.grad = s.grad_y;
    s.grad_norm = s.grad_y_norm;
    s.status = RunStatus::converged;
    return true;
  }
  if (s.iter >= config.max_iters) {
    s.status = RunStatus::max_iters;
    return true;
  }
  return false;
}

RunResult to_result(SaarcState& s) {
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
  r.t1 = s.t1;
  r.t2 = s.t2;
  r.t3 = s.t3;
  return r;
}

}  // namespace

EstimatingSequence EstimatingSequence::start(const Vector& anchor, double f_anchor, double varsigma) {
  if (!(varsigma > 0.0)) throw std::invalid_argument("varsigma must be positive");
  EstimatingSequence seq;
  seq.anchor = anchor;
  seq.lin_grad = Vector::Zero(anchor.size());
  seq.lin_const = f_anchor;
  seq.varsigma = varsigma;
  seq.l = 1;
  return seq;
}

double EstimatingSequence::value(const Vector& z) const {
  const Vector u = z - anchor;
  const double r = u.norm();
  return lin_const + lin_grad.dot(u) + varsigma / 6.0 * r * r * r;
}

Vector EstimatingSequence::gradient(const Vector& z) const {
  const Vector u = z - anchor;
  return lin_grad + 0.5 * varsigma * u.norm() * u;
}

double EstimatingSequence::min_value() const {
  const double g = lin_grad.norm();
  return lin_const - 2.0 / 3.0 * g * std::sqrt(2.0 * g / varsigma);
}

double EstimatingSequence::stationarity_residual(const Vector& z) const {
  const double res = gradient(z).norm();
  const double g = lin_grad.norm();
  return g > 0.0 ? res / g : res;
}

void EstimatingSequence::add_linearization(double weight, const Vector& point, double f, const Vector& grad) {
  lin_const += weight * (f + grad.dot(anchor - point));
  lin_grad += weight * grad;
}

double EstimatingSequence::weight_total(Index l) {
  const double x = static_cast<double>(l);
  return x * (x + 1.0) * (x + 2.0) / 6.0;
}

Vector psi_argmin(const EstimatingSequence& seq) {
  const double g = seq.lin_grad.norm();
  if (g == 0.0) return seq.anchor;
  return seq.anchor - std::sqrt(2.0 / (seq.varsigma * g)) * seq.lin_grad;
}

VarsigmaUpdate grow_varsigma(EstimatingSequence& seq, double f_best, double gamma3, Index max_growth) {
  VarsigmaUpdate upd;
  upd.threshold = EstimatingSequence::weight_total(seq.l) * f_best;
  upd.psi_min = seq.value(psi_argmin(seq));
  while (upd.psi_min < upd.threshold && upd.multiplications < max_growth) {
    seq.varsigma *= gamma3;
    ++upd.multiplications;
    upd.psi_min = seq.value(psi_argmin(seq));
  }
  upd.capped = upd.psi_min < upd.threshold;
  return upd;
}

SaarcState saarc_init(const LossModel& model, const SolverConfig& config, const Vector& x0) {
  config.validate(TerminationKind::accelerated);
  model.check_point(x0);
  SaarcState s;
  s.start_time = wall_seconds();
  s.x = x0;
  s.f = model.full_value(x0);
  s.grad = model.full_gradient(x0);
  s.grad_norm = s.grad.norm();
  s.ledger = EpochLedger(model.n());
  s.ledger.charge_full_gradient();
  s.sigma = config.sigma0;
  s.eps_i = initial_hessian_tolerance(config.kappa_theta, s.grad_norm);
  s.lip = config.lipschitz ? *config.lipschitz : lipschitz_bounds(model);
  s.rng = CounterRng(config.seed, 1);
  s.probe_rng = CounterRng(config.seed, kProbeStream);
  if (s.grad_norm == 0.0) s.status = RunStatus::stationary_start;
  push_record(s, false, "init");
  return s;
}

void phase1_step(SaarcState& s, const LossModel& model, const SolverConfig& config) {
  if (s.terminal() || s.phase != SaarcPhase::one) throw std::logic_error("phase1_step needs a running Phase I state");
  ensure_hessian(s, model, config, s.x);
  s.last_subproblem = solve_at(s, config, s.grad, s.grad_norm, s.f);
  const SubproblemResult& sub = s.last_subproblem;
  if (!(sub.model_decrease >= 0.0)) ++s.psd_violations;

  Vector trial = s.x + sub.s;
  const double f_trial = trial.allFinite() ? model.full_value(trial) : std::numeric_limits<double>::infinity();
  const double model_at_trial = s.f - sub.model_decrease;
  const bool success = std::isfinite(f_trial) && model_at_trial - f_trial > 0.0;
  ++s.iter;
  ++s.t1;
  s.last_success = success;
  if (success) {
    s.f_before_success = s.f;
    s.x = std::move(trial);
    s.f = f_trial;
    s.grad = model.full_gradient(s.x);
    s.ledger.charge_full_gradient();
    s.grad_norm = s.grad.norm();
    s.eps_i = std::min(1.0, (1.0 - config.kappa_theta) * s.grad_norm / 3.0);
    s.sigma = std::max(config.sigma_min, s.sigma / config.gamma1);
    ++s.successes;
  } else {
    grow_sigma(s, config);
  }
  push_record(s, success, "phase1");
}

SaarcState phase1_run(const LossModel& model, const SolverConfig& config, const Vector& x0) {
  SaarcState s = saarc_init(model, config, x0);
  while (!check_stop(s, config) && s.successes == 0) phase1_step(s, model, config);
  return s;
}

void enter_phase2(SaarcState& s, const LossModel&, const SolverConfig& config) {
  if (s.phase != SaarcPhase::one || s.successes == 0) throw std::logic_error("Phase II needs a Phase I success");
  s.phase = SaarcPhase::two;
  s.seq = EstimatingSequence::start(s.x, s.f, config.varsigma1.value_or(config.sigma0));
  // The first minimizer is the anchor itself, so y_1 = x_1.
  s.y = s.x;
  s.f_y = s.f;
  s.grad_y = s.grad;
  s.grad_y_norm = s.grad_norm;
  s.rebuild = true;
  if (config.check_invariants) s.history.push_back({1.0, s.x, s.f, Vector::Zero(s.x.size())});
}

void phase2_step(SaarcState& s, const LossModel& model, const SolverConfig& config) {
  if (s.terminal() || s.phase != SaarcPhase::two) throw std::logic_error("phase2_step needs a running Phase II state");
  ensure_hessian(s, model, config, s.y);
  s.last_subproblem = solve_at(s, config, s.grad_y, s.grad_y_norm, s.f_y);
  const SubproblemResult& sub = s.last_subproblem;
  if (!(sub.model_decrease >= 0.0)) ++s.psd_violations;
  ++s.iter;
  ++s.t2;

  const double snorm = sub.s.norm();
  bool success = false;
  Vector trial;
  Vector g_trial;
  double f_trial = 0.0;
  if (snorm > 0.0 && sub.s.allFinite()) {
    trial = s.y + sub.s;
    g_trial = model.full_gradient(trial);
    s.ledger.charge_full_gradient();
    s.last_rho = -sub.s.dot(g_trial) / (snorm * snorm * snorm);
    success = std::isfinite(s.last_rho) && s.last_rho >= config.eta;
    if (success) f_trial = model.full_value(trial);
  }
  s.last_success = success;
  if (!success) {
    grow_sigma(s, config);
    push_record(s, false, "phase2");
    return;
  }

  s.f_before_success = s.f;
  s.x = std::move(trial);
  s.f = f_trial;
  s.grad = std::move(g_trial);
  s.grad_norm = s.grad.norm();
  s.sigma = std::max(config.sigma_min, s.sigma / config.gamma1);
  ++s.successes;

  EstimatingSequence& seq = *s.seq;
  seq.l += 1;
  const double w = EstimatingSequence::weight(seq.l);
  seq.add_linearization(w, s.x, s.f, s.grad);
  if (config.check_invariants) s.history.push_back({w, s.x, s.f, s.grad});
  const VarsigmaUpdate upd = grow_varsigma(seq, s.f, config.gamma3, config.max_varsigma_growth);
  s.t3 += upd.multiplications;
  const Vector z = psi_argmin(seq);
  if (config.check_invariants) s.checks.push_back(check_sequence(s, upd, z));

  const double l = static_cast<double>(seq.l);
  s.y = l / (l + 3.0) * s.x + 3.0 / (l + 3.0) * z;
  s.f_y = model.full_value(s.y);
  s.grad_y = model.full_gradient(s.y);
  s.ledger.charge_full_gradient();
  s.grad_y_norm = s.grad_y.norm();
  // The next Hessian lives at y, so its tolerance follows the gradient there.
  s.eps_i = std::min(1.0, (1.0 - config.kappa_theta) * s.grad_y_norm / 2.0);
  s.rebuild = true;
  push_record(s, true, "phase2");
}

void saarc_step(SaarcState& s, const LossModel& model, const SolverConfig& config) {
  if (s.phase == SaarcPhase::one) {
    phase1_step(s, model, config);
    if (s.successes > 0 && !s.terminal()) enter_phase2(s, model, config);
  } else {
    phase2_step(s, model, config);
  }
}

RunResult saarc_finish(SaarcState s, const LossModel& model, const SolverConfig& config) {
  while (!check_stop(s, config)) saarc_step(s, model, config);
  return to_result(s);
}

RunResult saarc_run(const LossModel& model, const SolverConfig& config, const Vector& x0) {
  return saarc_finish(saarc_init(model, config, x0), model, config);
}

bool sacr_should_switch(double f_prev, double f_next, double threshold) {
  const double progress = std::abs(f_next - f_prev);
  if (f_prev == 0.0) return progress <= threshold * (1.0 + std::abs(f_next));
  return progress / std::abs(f_prev) <= threshold;
}

SacrResult sacr_run(const LossModel& model, const SolverConfig& config, const Vector& x0) {
  SaarcState s = saarc_init(model, config, x0);
  bool switched = false;
  while (!check_stop(s, config)) {
    saarc_step(s, model, config);
    if (s.last_success && !s.terminal() && sacr_should_switch(s.f_before_success, s.f)) {
      switched = true;
      break;
    }
  }
  SacrResult out;
  if (!switched) {
    out.run = to_result(s);
    return out;
  }
  out.switch_iter = s.iter;
  SarcHandoff h;
  h.f = s.f;
  h.grad = s.grad;
  h.sigma = s.sigma;
  h.rng = s.rng;
  h.ledger = s.ledger;
  h.trace = std::move(s.trace);
  h.iter_offset = s.iter;
  h.start_time = s.start_time;
  const Index saarc_successes = s.successes;
  RunResult r = sarc_finish(sarc_init(model, config, s.x, std::move(h)), model, config);
  r.successes += saarc_successes;
  r.t1 = s.t1;
  r.t2 = s.t2;
  r.t3 = s.t3;
  out.run = std::move(r);
  return out;
}

}  // namespace sarc
