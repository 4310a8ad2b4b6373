#include "sarc/bench.hpp"

#include <charconv>
#include <stdexcept>
#include <vector>

#include "sarc/libsvm.hpp"
#include "sarc/saarc.hpp"
#include "sarc/sarc.hpp"
#include "sarc/synth.hpp"
#include "sarc/trace_csv.hpp"

namespace sarc {

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::sarc: return "sarc";
    case Algorithm::saarc: return "saarc";
    case Algorithm::sacr: return "sacr";
    case Algorithm::cr: return "cr";
    case Algorithm::acr: return "acr";
    case Algorithm::agd: return "agd";
    case Algorithm::sgd: return "sgd";
    case Algorithm::lbfgs: return "lbfgs";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string_view name) {
  for (Algorithm a : {Algorithm::sarc, Algorithm::saarc, Algorithm::sacr, Algorithm::cr, Algorithm::acr,
                      Algorithm::agd, Algorithm::sgd, Algorithm::lbfgs})
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

SynthSpec SynthSpec::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.emplace_back(text.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (parts.size() < 4 || parts.size() > 5)
    throw std::invalid_argument("--synth expects n,d,seed,skew[,row_scale]");
  auto to_real = [](const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
  };
  auto to_int = [](const std::string& s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument("bad integer '" + s + "'");
    return v;
  };
  SynthSpec spec;
  spec.n = to_int(parts[0]);
  spec.d = to_int(parts[1]);
  const long long seed = to_int(parts[2]);
  if (seed < 0) throw std::invalid_argument("synthetic seed must be >= 0");
  spec.seed = static_cast<std::uint64_t>(seed);
  spec.skew = to_real(parts[3]);
  if (parts.size() == 5) spec.row_scale = to_real(parts[4]);
  if (spec.n < 1 || spec.d < 1) throw std::invalid_argument("synthetic n and d must be >= 1");
  return spec;
}

void RunSpec::validate() const {
  if (data_path.has_value() == synth.has_value()) throw std::invalid_argument("give exactly one of a data path or a synthetic spec");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(x0_std >= 0.0)) throw std::invalid_argument("x0 standard deviation must be >= 0");
}

std::shared_ptr<const Dataset> load_dataset(const RunSpec& spec) {
  spec.validate();
  if (spec.data_path) return std::make_shared<const Dataset>(parse_libsvm_file(*spec.data_path));
  const SynthSpec& s = *spec.synth;
  return std::make_shared<const Dataset>(synth_logistic(s.n, s.d, s.seed, s.skew, s.row_scale));
}

LossModel benchmark_model(std::shared_ptr<const Dataset> data, double lambda) {
  return LossModel(LossFamily::reg_logistic, std::move(data), lambda, 0.5);
}

Vector initial_point(Index d, std::uint64_t seed, double stddev) {
  CounterRng rng(seed, 3);
  Vector x(d);
  for (Index i = 0; i < d; ++i) x(i) = stddev * rng.normal();
  return x;
}

RunResult run_algorithm(Algorithm algo, const LossModel& model, const SolverConfig& config, const Vector& x0,
                        const BaselineOptions& baseline) {
  switch (algo) {
    case Algorithm::sarc: return sarc_run(model, config, x0);
    case Algorithm::saarc: return saarc_run(model, config, x0);
    case Algorithm::sacr: return sacr_run(model, config, x0).run;
    case Algorithm::cr: return cr_run(model, config, x0);
    case Algorithm::acr: return acr_run(model, config, x0);
    case Algorithm::agd: return agd_run(model, config, x0, baseline);
    case Algorithm::sgd: return sgd_run(model, config, x0, baseline);
    case Algorithm::lbfgs: return lbfgs_run(model, config, x0, baseline);
  }
  throw std::invalid_argument("unknown algorithm");
}

BenchOutcome run_benchmark(const RunSpec& spec) {
  auto data = load_dataset(spec);
  const LossModel model = benchmark_model(data, spec.lambda);
  const Vector x0 = initial_point(model.d(), spec.config.seed, spec.x0_std);
  BenchOutcome out;
  if (spec.algorithm == Algorithm::sacr) {
    SacrResult r = sacr_run(model, spec.config, x0);
    out.run = std::move(r.run);
    out.switch_iter = r.switch_iter;
  } else {
    out.run = run_algorithm(spec.algorithm, model, spec.config, x0, spec.baseline);
  }
  if (!spec.out.empty()) write_trace_csv_file(spec.out, out.run.trace);
  return out;
}

int exit_code(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return 0;
    case RunStatus::max_iters: return 2;
    default: return 1;
  }
}

}  // namespace sarc
