#pragma once

#include <optional>
#include <vector>

#include "sarc/sarc.hpp"
#include "sarc/solver.hpp"

namespace sarc {

// Lower model built from weighted linearizations plus a cubic anchored at
// the first accepted point:
//   psi(z) = lin_const + lin_grad^T (z - anchor) + (varsigma / 6) ||z - anchor||^3.
// Only the running sums are stored.
struct EstimatingSequence {
  Vector anchor;
  Vector lin_grad;
  double lin_const = 0.0;
  double varsigma = 1.0;
  Index l = 1;

  static EstimatingSequence start(const Vector& anchor, double f_anchor, double varsigma);

  double value(const Vector& z) const;
  Vector gradient(const Vector& z) const;
  // Closed-form minimum value, lin_const - (2/3) ||g|| sqrt(2 ||g|| / varsigma).
  double min_value() const;
  // ||grad psi(z)|| relative to ||lin_grad|| (absolute when lin_grad = 0).
  double stationarity_residual(const Vector& z) const;

  // Adds weight * (f + grad^T (z - point)).
  void add_linearization(double weight, const Vector& point, double f, const Vector& grad);

  // Sum of linearization weights after l successes, l(l+1)(l+2)/6.
  static double weight_total(Index l);
  // Weight of the l-th linearization, l(l+1)/2.
  static double weight(Index l) { return 0.5 * static_cast<double>(l) * static_cast<double>(l + 1); }
};

Vector psi_argmin(const EstimatingSequence& seq);

// Outcome of the varsigma growth loop at one success.
struct VarsigmaUpdate {
  Index multiplications = 0;
  bool capped = false;
  double threshold = 0.0;
  double psi_min = 0.0;
};
VarsigmaUpdate grow_varsigma(EstimatingSequence& seq, double f_best, double gamma3, Index max_growth);

// Numerical checks of the estimating sequence, recorded per success.
struct PsiCheck {
  Index l = 0;
  double psi_min = 0.0;
  double threshold = 0.0;
  bool lower_bound_ok = false;
  double stationarity = 0.0;
  double recompute_gap = 0.0;   // closed form vs independently accumulated sum
  Index probes = 0;
  Index probe_failures = 0;
  double worst_probe_margin = 0.0;  // min over probes of (gap - varsigma/12 r^3) / scale
  bool loop_capped = false;
};

enum class SaarcPhase { one, two };

struct SaarcState {
  SaarcPhase phase = SaarcPhase::one;
  // Best iterate (Phase I: current iterate) with cached value and gradient.
  Vector x;
  double f = 0.0;
  Vector grad;
  double grad_norm = 0.0;
  // Extrapolation point and its gradient (Phase II).
  Vector y;
  double f_y = 0.0;
  Vector grad_y;
  double grad_y_norm = 0.0;
  std::optional<EstimatingSequence> seq;
  double sigma = 1.0;
  double eps_i = 1.0;
  std::optional<SubsampledHessian> hessian;
  Index sample_size = 0;
  bool rebuild = true;
  Index iter = 0;
  Index successes = 0;
  Index t1 = 0;
  Index t2 = 0;
  Index t3 = 0;
  Index psd_violations = 0;
  RunStatus status = RunStatus::running;
  LipschitzInfo lip;
  CounterRng rng;
  CounterRng probe_rng;
  EpochLedger ledger;
  Trace trace;
  double start_time = 0.0;
  double last_rho = 0.0;
  // f before the most recent success (for the hybrid switch test).
  double f_before_success = 0.0;
  bool last_success = false;
  SubproblemResult last_subproblem;
  std::vector<PsiCheck> checks;
  // Every accepted linearization, kept only when invariant checks are on.
  struct Linearization {
    double weight;
    Vector point;
    double f;
    Vector grad;
  };
  std::vector<Linearization> history;

  bool terminal() const { return status != RunStatus::running; }
};

SaarcState saarc_init(const LossModel& model, const SolverConfig& config, const Vector& x0);

// One Phase I trial: success when the model overestimates f at the trial point.
void phase1_step(SaarcState& state, const LossModel& model, const SolverConfig& config);
// Runs Phase I trials until the first success, the iteration cap or a terminal state.
SaarcState phase1_run(const LossModel& model, const SolverConfig& config, const Vector& x0);
// Switches a state that has just finished Phase I into Phase II.
void enter_phase2(SaarcState& state, const LossModel& model, const SolverConfig& config);
void phase2_step(SaarcState& state, const LossModel& model, const SolverConfig& config);
// Advances whichever phase is active.
void saarc_step(SaarcState& state, const LossModel& model, const SolverConfig& config);

RunResult saarc_finish(SaarcState state, const LossModel& model, const SolverConfig& config);
RunResult saarc_run(const LossModel& model, const SolverConfig& config, const Vector& x0);

// Relative-progress switch rule of the hybrid; falls back to absolute
// progress against 0.1 (1 + |f|) when f_prev = 0.
bool sacr_should_switch(double f_prev, double f_next, double threshold = 0.1);

struct SacrResult {
  RunResult run;
  std::optional<Index> switch_iter;
};
SacrResult sacr_run(const LossModel& model, const SolverConfig& config, const Vector& x0);

}  // namespace sarc
