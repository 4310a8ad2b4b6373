// bench: run the cubic-regularization solvers and baselines on logistic
// regression and write CSV traces.
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sarc/bench.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(text.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string expand_out(std::string pattern, std::string_view algo) {
  const std::string key = "{algo}";
  for (auto pos = pattern.find(key); pos != std::string::npos; pos = pattern.find(key, pos + algo.size()))
    pattern.replace(pos, key.size(), algo);
  return pattern;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-sampled cubic regularization benchmark"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "Run one or more algorithms on one dataset");

  std::string algos;
  std::string data_path;
  std::string synth;
  std::string scheme = "uniform";
  sarc::RunSpec base;
  int jobs = 1;
  long long sgd_batch = 1;
  unsigned long long seed = 0;

  run->add_option("--algo", algos, "sarc|saarc|sacr|cr|acr|agd|sgd|lbfgs, comma separated")->required();
  auto* data_opt = run->add_option("--data", data_path, "LIBSVM file");
  auto* synth_opt = run->add_option("--synth", synth, "Synthetic data n,d,seed,skew[,row_scale]");
  data_opt->excludes(synth_opt);
  run->add_option("--lambda", base.lambda, "Ridge weight (lambda/2 ||x||^2)")->capture_default_str();
  run->add_option("--scheme", scheme, "Hessian sampling: uniform|nonuniform")->capture_default_str();
  run->add_option("--eps", base.config.eps, "Target optimality in the sample-size rule")->capture_default_str();
  run->add_option("--delta", base.config.delta, "Total failure probability")->capture_default_str();
  run->add_option("--seed", seed, "Seed for x0 and Hessian sampling")->capture_default_str();
  run->add_option("--out", base.out, "CSV trace path; {algo} is replaced by the algorithm name");
  run->add_option("--grad-tol", base.config.grad_tol, "Stop when ||grad f|| falls below this")->capture_default_str();
  run->add_option("--max-iters", base.config.max_iters, "Iteration cap (epochs for sgd)")->capture_default_str();
  run->add_option("--x0-std", base.x0_std, "Standard deviation of the Gaussian x0")->capture_default_str();
  run->add_option("--sigma0", base.config.sigma0, "Initial cubic weight")->capture_default_str();
  run->add_option("--kappa", base.config.kappa_theta, "Subproblem residual factor")->capture_default_str();
  run->add_option("--sgd-batch", sgd_batch, "SGD mini-batch size")->capture_default_str();
  run->add_option("--jobs", jobs, "Algorithms run in parallel")->capture_default_str()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  std::vector<sarc::RunSpec> specs;
  try {
    if (data_opt->count() == 0 && synth_opt->count() == 0) throw std::invalid_argument("give --data or --synth");
    if (!data_path.empty()) base.data_path = data_path;
    if (!synth.empty()) base.synth = sarc::SynthSpec::parse(synth);
    base.config.scheme = sarc::sampling_scheme_from_string(scheme);
    base.config.seed = seed;
    base.baseline.sgd_batch = sgd_batch;
    base.validate();
    const auto names = split_list(algos);
    if (names.size() > 1 && !base.out.empty() && base.out.find("{algo}") == std::string::npos)
      throw std::invalid_argument("--out needs an {algo} placeholder when several algorithms run");
    for (const auto& name : names) {
      sarc::RunSpec spec = base;
      spec.algorithm = sarc::algorithm_from_string(name);
      spec.out = expand_out(base.out, name);
      spec.config.validate(spec.algorithm == sarc::Algorithm::saarc || spec.algorithm == sarc::Algorithm::acr
                               ? sarc::TerminationKind::accelerated
                               : sarc::TerminationKind::subspace_optimal);
      specs.push_back(std::move(spec));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bench: %s\n", e.what());
    return 1;
  }

  std::vector<int> codes(specs.size(), 1);
  std::atomic<std::size_t> next{0};
  std::mutex print_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      const auto& spec = specs[i];
      try {
        const sarc::BenchOutcome out = sarc::run_benchmark(spec);
        codes[i] = sarc::exit_code(out.run.status);
        std::lock_guard lock(print_mutex);
        std::printf("%s status=%s iters=%lld epochs=%.6g f=%.12g grad_norm=%.6g", std::string(to_string(spec.algorithm)).c_str(),
                    std::string(to_string(out.run.status)).c_str(), static_cast<long long>(out.run.iterations),
                    out.run.ledger.epochs(), out.run.f, out.run.grad_norm);
        if (out.switch_iter) std::printf(" switch_iter=%lld", static_cast<long long>(*out.switch_iter));
        std::printf("\n");
      } catch (const std::exception& e) {
        std::lock_guard lock(print_mutex);
        std::fprintf(stderr, "bench: %s: %s\n", std::string(to_string(spec.algorithm)).c_str(), e.what());
        codes[i] = 1;
      }
    }
  };
  const int threads = std::min<int>(jobs, static_cast<int>(specs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (std::find(codes.begin(), codes.end(), 1) != codes.end()) return 1;
  if (std::find(codes.begin(), codes.end(), 2) != codes.end()) return 2;
  return 0;
}
