#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sarc/cubic.hpp"
#include "sarc/problem.hpp"
#include "sarc/sampling.hpp"

namespace sarc {

// Cost accounting in component-oracle queries. One epoch is n queries of
// component gradients or component Hessians. Function values and
// Hessian-vector products with an already-sampled operator are not charged.
class EpochLedger {
 public:
  explicit EpochLedger(Index n = 1);

  void charge_full_gradient() { gradient_queries_ += n_; }
  void charge_gradients(Index count) { gradient_queries_ += count; }
  void charge_hessians(Index count) { hessian_queries_ += count; }
  // O(n) pass over scalar curvatures for non-uniform probabilities; logged
  // separately and not counted as epochs.
  void note_curvature_sweep() { ++curvature_sweeps_; }

  Index n() const { return n_; }
  Index gradient_queries() const { return gradient_queries_; }
  Index hessian_queries() const { return hessian_queries_; }
  Index curvature_sweeps() const { return curvature_sweeps_; }
  double epochs() const;

 private:
  Index n_;
  Index gradient_queries_ = 0;
  Index hessian_queries_ = 0;
  Index curvature_sweeps_ = 0;
};

struct TraceRecord {
  Index iter = 0;
  double epochs = 0.0;
  double f = 0.0;
  double grad_norm = 0.0;
  double sigma = 0.0;
  double eps_i = 0.0;
  Index sample_size = 0;
  bool success = false;
  std::string phase;
  // In-memory only.
  double wall_time = 0.0;
  Index l = 0;
  double varsigma = 0.0;
  Index t3 = 0;
  Index gradient_queries = 0;
  Index hessian_queries = 0;
  Index krylov_dim = 0;
  std::uint64_t rng_draws = 0;
};

using Trace = std::vector<TraceRecord>;

enum class RunStatus { running, converged, stationary_start, max_iters, diverged, stalled };
std::string_view to_string(RunStatus status);

struct SolverConfig {
  double gamma1 = 2.0;
  double gamma2 = 5.0;
  double gamma3 = 2.0;
  double eta = 0.1;
  double sigma_min = 0.1;
  double sigma0 = 1.0;
  double kappa_theta = 0.05;
  double eps = 1e-6;    // target optimality; enters the sample-size log factor
  double delta = 0.1;   // total failure probability
  SamplingScheme scheme = SamplingScheme::uniform;
  Index max_iters = 1000;
  double grad_tol = 1e-9;
  std::uint64_t seed = 0;

  // Exact-Hessian mode (CR / ACR baselines): |S| = n and no shift.
  bool exact_hessian = false;
  // Fixed |S| in place of the sample-size lemmas (experiments and tests).
  std::optional<Index> sample_size_override;
  std::optional<LipschitzInfo> lipschitz;
  // Initial weight of the estimating sequence; defaults to sigma0.
  std::optional<double> varsigma1;
  Index max_varsigma_growth = 400;
  // Record estimating-sequence diagnostics at every Phase II success.
  bool check_invariants = false;
  SubproblemOptions subproblem;

  // Range checks shared by both drivers; the kappa rule depends on the
  // termination test in use.
  void validate(TerminationKind kind) const;
};

// Hessian approximation at x following the algorithm listings: tolerance
// eps_i / 2 in the sample-size rule, per-iteration failure probability
// delta * eps^exponent, shift eps_i / 2. Exact mode ignores eps_i.
struct HessianBuild {
  SubsampledHessian op;
  SamplingPlan plan;
};
HessianBuild build_hessian(const LossModel& model, const Vector& x, const SolverConfig& config,
                           const LipschitzInfo& lip, double eps_i, double log_exponent, CounterRng& rng,
                           EpochLedger& ledger);

struct RunResult {
  Vector x;
  double f = 0.0;
  double grad_norm = 0.0;
  RunStatus status = RunStatus::running;
  Trace trace;
  EpochLedger ledger;
  Index iterations = 0;
  Index successes = 0;
  // Accelerated runs only.
  Index t1 = 0;
  Index t2 = 0;
  Index t3 = 0;
};

// Seconds since an arbitrary epoch; used for trace wall times.
double wall_seconds();

}  // namespace sarc
