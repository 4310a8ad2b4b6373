#pragma once

#include <optional>

#include "sarc/solver.hpp"

namespace sarc {

// Adaptive cubic regularization with a sub-sampled Hessian. The Hessian is
// rebuilt only when the iterate moves; unsuccessful iterations reuse it and
// cost no oracle queries beyond a function value.
struct SarcState {
  Vector x;
  double f = 0.0;
  Vector grad;
  double grad_norm = 0.0;
  double sigma = 1.0;
  double eps_i = 1.0;
  std::optional<SubsampledHessian> hessian;
  Index sample_size = 0;
  bool rebuild = true;
  Index iter = 0;
  Index successes = 0;
  Index psd_violations = 0;
  RunStatus status = RunStatus::running;
  LipschitzInfo lip;
  CounterRng rng;
  EpochLedger ledger;
  Trace trace;
  double start_time = 0.0;
  // Last accepted step's acceptance ratio and model decrease (diagnostics).
  double last_theta = 0.0;
  double last_model_decrease = 0.0;
  SubproblemResult last_subproblem;

  bool terminal() const { return status != RunStatus::running; }
};

// State carried into SARC from another driver (used by the hybrid scheme).
struct SarcHandoff {
  double f = 0.0;
  Vector grad;
  double sigma = 1.0;
  CounterRng rng;
  EpochLedger ledger;
  Trace trace;
  Index iter_offset = 0;
  double start_time = 0.0;
};

// eps_0 = min{1, (1 - kappa)||grad f(x0)|| / 3}. The first Hessian is built
// lazily by the first step. A zero gradient yields a terminal state.
SarcState sarc_init(const LossModel& model, const SolverConfig& config, const Vector& x0);
SarcState sarc_init(const LossModel& model, const SolverConfig& config, const Vector& x0, SarcHandoff handoff);

double initial_hessian_tolerance(double kappa_theta, double grad_norm);

void sarc_step(SarcState& state, const LossModel& model, const SolverConfig& config);

RunResult sarc_run(const LossModel& model, const SolverConfig& config, const Vector& x0);

// Drives an initialized state until tolerance, iteration cap or a terminal
// condition; shared by the hybrid driver.
RunResult sarc_finish(SarcState state, const LossModel& model, const SolverConfig& config);

// Acceptance decision, including the guard for a vanishing denominator.
struct Acceptance {
  double theta = 0.0;
  bool success = false;
  bool psd_violation = false;
};
Acceptance sarc_acceptance(double f, double f_trial, double model_decrease, double eta);

}  // namespace sarc
