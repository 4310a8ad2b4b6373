#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "sarc/baselines.hpp"
#include "sarc/solver.hpp"

namespace sarc {

enum class Algorithm { sarc, saarc, sacr, cr, acr, agd, sgd, lbfgs };

std::string_view to_string(Algorithm algo);
Algorithm algorithm_from_string(std::string_view name);

// "n,d,seed,skew[,row_scale]"
struct SynthSpec {
  Index n = 1000;
  Index d = 20;
  std::uint64_t seed = 0;
  double skew = 1.0;
  double row_scale = 1.0;

  static SynthSpec parse(std::string_view text);
};

struct RunSpec {
  Algorithm algorithm = Algorithm::sarc;
  std::optional<std::string> data_path;
  std::optional<SynthSpec> synth;
  double lambda = 1e-5;
  SolverConfig config;
  BaselineOptions baseline;
  std::string out;  // empty: no CSV
  // Standard deviation of the Gaussian initial point (variance 5000).
  double x0_std = std::sqrt(5000.0);

  void validate() const;
};

std::shared_ptr<const Dataset> load_dataset(const RunSpec& spec);

// Logistic regression with the (lambda/2)||x||^2 ridge.
LossModel benchmark_model(std::shared_ptr<const Dataset> data, double lambda);

Vector initial_point(Index d, std::uint64_t seed, double stddev);

RunResult run_algorithm(Algorithm algo, const LossModel& model, const SolverConfig& config, const Vector& x0,
                        const BaselineOptions& baseline = {});

struct BenchOutcome {
  RunResult run;
  std::optional<Index> switch_iter;
};
// Loads data, draws x0, runs, and writes the CSV trace when spec.out is set.
BenchOutcome run_benchmark(const RunSpec& spec);

// 0 on tolerance reached, 2 on iteration cap, 1 otherwise.
int exit_code(RunStatus status);

}  // namespace sarc
