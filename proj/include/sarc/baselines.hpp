#pragma once

#include "sarc/solver.hpp"

namespace sarc {

struct BaselineOptions {
  // SGD mini-batch size; batch >= n takes the full gradient.
  Index sgd_batch = 1;
  Index lbfgs_memory = 10;
  double armijo_c1 = 1e-4;
  // A run is abandoned once f exceeds this multiple of |f(x0)|.
  double divergence_factor = 1e3;
};

// Cubic regularization with the exact Hessian: the SARC / SAARC drivers with
// the sample forced to all n components and no shift.
RunResult cr_run(const LossModel& model, SolverConfig config, const Vector& x0);
RunResult acr_run(const LossModel& model, SolverConfig config, const Vector& x0);

// Nesterov's accelerated gradient (FISTA form) with backtracking on L,
// starting from the averaged component bound. L never decreases.
RunResult agd_run(const LossModel& model, const SolverConfig& config, const Vector& x0,
                  const BaselineOptions& options = {});

// Constant step 1/L with L the largest component bound. One trace row per
// epoch; max_iters counts epochs.
RunResult sgd_run(const LossModel& model, const SolverConfig& config, const Vector& x0,
                  const BaselineOptions& options = {});

// Two-loop L-BFGS with Armijo backtracking.
RunResult lbfgs_run(const LossModel& model, const SolverConfig& config, const Vector& x0,
                    const BaselineOptions& options = {});

}  // namespace sarc
