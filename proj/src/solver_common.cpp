#include <chrono>
#include <cmath>
#include <stdexcept>

#include "sarc/solver.hpp"

namespace sarc {

EpochLedger::EpochLedger(Index n) : n_(n) {
  if (n < 1) throw std::invalid_argument("epoch ledger needs n >= 1");
}

double EpochLedger::epochs() const {
  return static_cast<double>(gradient_queries_ + hessian_queries_) / static_cast<double>(n_);
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::running: return "running";
    case RunStatus::converged: return "converged";
    case RunStatus::stationary_start: return "stationary_start";
    case RunStatus::max_iters: return "max_iters";
    case RunStatus::diverged: return "diverged";
    case RunStatus::stalled: return "stalled";
  }
  return "unknown";
}

void SolverConfig::validate(TerminationKind kind) const {
  if (!(gamma1 > 1.0) || !(gamma2 > gamma1)) throw std::invalid_argument("need gamma2 > gamma1 > 1");
  if (!(gamma3 > 1.0)) throw std::invalid_argument("need gamma3 > 1");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  if (!(sigma_min > 0.0 && sigma_min < 1.0)) throw std::invalid_argument("sigma_min must lie in (0, 1)");
  if (!(sigma0 >= sigma_min) || !std::isfinite(sigma0)) throw std::invalid_argument("need sigma0 >= sigma_min");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (!(grad_tol >= 0.0)) throw std::invalid_argument("grad_tol must be >= 0");
  if (sample_size_override && *sample_size_override < 1) throw std::invalid_argument("sample size must be >= 1");
  if (varsigma1 && !(*varsigma1 > 0.0)) throw std::invalid_argument("varsigma1 must be positive");
  TerminationSpec{kind, kappa_theta}.validate(sigma_min);
}

HessianBuild build_hessian(const LossModel& model, const Vector& x, const SolverConfig& config,
                           const LipschitzInfo& lip, double eps_i, double log_exponent, CounterRng& rng,
                           EpochLedger& ledger) {
  if (config.exact_hessian || !(eps_i > 0.0)) {
    HessianBuild hb{SubsampledHessian::exact(model, x, config.exact_hessian ? 0.0 : 0.5 * eps_i),
                    exact_plan(model.n())};
    ledger.charge_hessians(hb.op.query_count());
    return hb;
  }
  SamplingPlan plan;
  if (config.sample_size_override) {
    plan = fixed_size_plan(model, x, config.scheme, *config.sample_size_override);
    plan.eps_i = 0.5 * eps_i;
  } else {
    const double per_iter = per_iteration_delta(config.delta, config.eps, log_exponent);
    plan = resolve_sampling_plan(model, x, lip, config.scheme, 0.5 * eps_i, per_iter);
  }
  if (config.scheme == SamplingScheme::nonuniform) ledger.note_curvature_sweep();
  SubsampledHessian op = SubsampledHessian::build(model, x, plan, rng, 0.5 * eps_i);
  ledger.charge_hessians(op.query_count());
  return {std::move(op), std::move(plan)};
}

double wall_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace sarc
