#include <doctest.h>

#include <cmath>
#include <random>

#include "sarc/sampling.hpp"
#include "sarc/synth.hpp"
#include "support.hpp"

using namespace sarc;
using testing_support::rel_err;

namespace {

std::shared_ptr<const Dataset> dense_data(const Matrix& a, const Vector& b) {
  return std::make_shared<const Dataset>(Dataset::from_dense(a, b));
}

LossModel small_logistic(std::uint64_t seed, Index n = 40, Index d = 5) {
  return LossModel(LossFamily::reg_logistic, std::make_shared<const Dataset>(synth_logistic(n, d, seed, 3.0)), 1e-2,
                   0.5);
}

}  // namespace

TEST_CASE("uniform sample size") {
  // ceil(64 ln 2000) evaluated by hand: 64 * 7.6009024595 = 486.46
  CHECK(sample_size_uniform(0.5, 0.01, 1.0, 10, 1000000) == 487);
  CHECK(sample_size_uniform(0.5, 0.01, 1.0, 10, 100) == 100);
  const SizeBound b10 = uniform_size_bound(0.5, 0.01, 1.0, 10);
  const SizeBound b20 = uniform_size_bound(0.5, 0.01, 1.0, 20);
  CHECK(b20.log_factor - b10.log_factor == doctest::Approx(std::log(2.0)));
  CHECK(sample_size_uniform(0.5, 0.01, 1.0, 20, 1000000) >= sample_size_uniform(0.5, 0.01, 1.0, 10, 1000000));
  CHECK_THROWS_AS(sample_size_uniform(1.5, 0.01, 1.0, 10, 100), std::invalid_argument);
  CHECK_THROWS_AS(sample_size_uniform(0.5, 0.0, 1.0, 10, 100), std::invalid_argument);
}

TEST_CASE("non-uniform sample size") {
  // max{16, (4)(100 + 100 - 2)/100 = 7.92} * ln 2000 = 121.61
  const SizeBound b = nonuniform_size_bound(0.5, 0.01, 1.0, 1.0, 0.01, 10, 100);
  CHECK(b.first_branch == doctest::Approx(16.0));
  CHECK(b.second_branch == doctest::Approx(7.92));
  CHECK(std::ceil(b.value()) == 122.0);
  // Resolved sizes are capped at n.
  CHECK(sample_size_nonuniform(0.5, 0.01, 1.0, 1.0, 0.01, 10, 100) == 100);
  CHECK(sample_size_nonuniform(0.5, 0.01, 1.0, 1.0, 0.01, 10, 1000) == 122);
  // n = 1, p_min = 1: the second branch vanishes.
  CHECK(nonuniform_size_bound(0.5, 0.01, 1.0, 1.0, 1.0, 10, 1).second_branch == 0.0);
  CHECK_THROWS_AS(sample_size_nonuniform(0.5, 0.01, 1.0, 1.0, 0.0, 10, 100), std::domain_error);
  // With Lbar <= L the first branch never exceeds the uniform one.
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 50; ++t) {
    const double L = u(gen) * 10.0, Lbar = L * u(gen), eps = u(gen) * 0.99;
    CHECK(nonuniform_size_bound(eps, 0.1, L, Lbar, 0.01, 5, 100).first_branch <=
          uniform_size_bound(eps, 0.1, L, 5).first_branch);
  }
}

TEST_CASE("per-iteration delta scales with the target") {
  CHECK(per_iteration_delta(0.1, 1e-6, 0.5) == doctest::Approx(1e-4));
  CHECK(per_iteration_delta(0.1, 1e-6, 1.0 / 3.0) == doctest::Approx(1e-3));
}

TEST_CASE("curvature-proportional distribution") {
  // Squared loss has curvature 2, so |f''| ||a||^2 = 3 and 1 for these rows.
  Matrix a(2, 1);
  a << std::sqrt(1.5), std::sqrt(0.5);
  auto ls = LossModel(LossFamily::ridge_least_squares, dense_data(a, Vector::Zero(2)), 0.0);
  CurvatureDistribution p = nonuniform_distribution(ls, Vector::Zero(1));
  CHECK(p.probabilities[0] == doctest::Approx(0.75));
  CHECK(p.probabilities[1] == doctest::Approx(0.25));
  CHECK(p.p_min == doctest::Approx(0.25));

  Matrix same = Matrix::Ones(4, 2);
  auto eq = LossModel(LossFamily::ridge_least_squares, dense_data(same, Vector::Zero(4)), 0.0);
  for (double pj : nonuniform_distribution(eq, Vector::Zero(2)).probabilities) CHECK(pj == doctest::Approx(0.25));

  Matrix with_zero(3, 2);
  with_zero << 1, 0, 0, 0, 0, 2;
  auto z = LossModel(LossFamily::ridge_least_squares, dense_data(with_zero, Vector::Zero(3)), 0.0);
  CurvatureDistribution pz = nonuniform_distribution(z, Vector::Zero(2));
  CHECK(pz.probabilities[1] == 0.0);
  CHECK(pz.p_min == doctest::Approx(0.2));
  double total = 0.0;
  for (double pj : pz.probabilities) total += pj;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // 1 - tanh has zero curvature at t = 0 for every row: degenerate.
  auto svm = LossModel(LossFamily::nonconvex_svm, dense_data(Matrix::Ones(3, 2), Vector::Ones(3)), 0.0);
  CHECK(nonuniform_distribution(svm, Vector::Zero(2)).degenerate);
  LipschitzInfo lip = lipschitz_bounds(svm);
  SamplingPlan plan = resolve_sampling_plan(svm, Vector::Zero(2), lip, SamplingScheme::nonuniform, 0.5, 0.1);
  CHECK(plan.fell_back_to_uniform);
  CHECK(plan.scheme == SamplingScheme::uniform);
}

TEST_CASE("exact mode reproduces the full Hessian") {
  LossModel m = small_logistic(2);
  std::mt19937_64 gen(4);
  const Vector x = testing_support::random_vector(gen, m.d());
  SubsampledHessian op = SubsampledHessian::exact(m, x, 0.3);
  const Matrix ref = m.dense_hessian(x) + 0.3 * Matrix::Identity(m.d(), m.d());
  CHECK((op.to_dense() - ref).norm() <= 1e-12 * ref.norm());
  CHECK(spectral_error(op, m, x) < 1e-12);
  CHECK(op.query_count() == m.n());
  // A plan of size >= n also takes the exact path.
  CounterRng rng(1);
  SubsampledHessian big = SubsampledHessian::build(m, x, fixed_size_plan(m, x, SamplingScheme::uniform, m.n()), rng, 0.0);
  CHECK(big.is_exact());
  CHECK(rng.counter() == 0);
}

TEST_CASE("single component") {
  Matrix a(1, 3);
  a << 1, -2, 0.5;
  auto m = LossModel(LossFamily::reg_logistic, dense_data(a, Vector::Ones(1)), 0.1, 0.5);
  const Vector x = Vector::Constant(3, 0.2);
  for (SamplingScheme scheme : {SamplingScheme::uniform, SamplingScheme::nonuniform}) {
    CounterRng rng(9);
    const SamplingPlan plan = fixed_size_plan(m, x, scheme, 1);
    SubsampledHessian op = SubsampledHessian::build(m, x, plan, rng, 0.05);
    const Matrix ref = m.dense_hessian(x) + 0.05 * Matrix::Identity(3, 3);
    CHECK((op.to_dense() - ref).norm() < 1e-12);
  }
}

TEST_CASE("sampling is deterministic and the operator symmetric") {
  LossModel m = small_logistic(3);
  std::mt19937_64 gen(8);
  const Vector x = testing_support::random_vector(gen, m.d());
  for (SamplingScheme scheme : {SamplingScheme::uniform, SamplingScheme::nonuniform}) {
    SamplingPlan plan = fixed_size_plan(m, x, scheme, 12);
    CounterRng r1(42), r2(42);
    SubsampledHessian a = SubsampledHessian::build(m, x, plan, r1, 0.1);
    SubsampledHessian b = SubsampledHessian::build(m, x, plan, r2, 0.1);
    CHECK(a.draws() == b.draws());
    CHECK(a.draws().size() == 12);
    CHECK(a.query_count() == 12);
    for (int t = 0; t < 5; ++t) {
      const Vector u = testing_support::random_vector(gen, m.d());
      const Vector v = testing_support::random_vector(gen, m.d());
      CHECK(std::abs(u.dot(a.apply(v)) - v.dot(a.apply(u))) <= 1e-12 * std::max(1.0, u.norm() * v.norm()));
      CHECK(rel_err(a.apply(v) - a.apply_unshifted(v), 0.1 * v) < 1e-12);
    }
  }
}

TEST_CASE("sub-sampled products are unbiased") {
  LossModel m = small_logistic(5);
  std::mt19937_64 gen(6);
  const Vector x = testing_support::random_vector(gen, m.d());
  const Vector v = testing_support::random_vector(gen, m.d());
  const Vector truth = m.full_hvp(x, v);
  for (SamplingScheme scheme : {SamplingScheme::uniform, SamplingScheme::nonuniform}) {
    CAPTURE(to_string(scheme));
    const SamplingPlan plan = fixed_size_plan(m, x, scheme, 4);
    CounterRng rng(77);
    const int M = 500;
    Matrix samples(m.d(), M);
    for (int k = 0; k < M; ++k) samples.col(k) = SubsampledHessian::build(m, x, plan, rng, 0.0).apply(v);
    const Vector mean = samples.rowwise().mean();
    for (Index i = 0; i < m.d(); ++i) {
      const double sd = std::sqrt((samples.row(i).array() - mean(i)).square().sum() / (M - 1));
      CHECK(std::abs(mean(i) - truth(i)) <= 3.0 * sd / std::sqrt(double(M)) + 1e-12);
    }
  }
}

TEST_CASE("spectral error of a one-draw sample from two components") {
  // H_1 = diag(2, 0), H_2 = diag(0, 8); either draw is off by ||(H_1 - H_2)/2|| = 4.
  Matrix a(2, 2);
  a << 1, 0, 0, 2;
  auto m = LossModel(LossFamily::ridge_least_squares, dense_data(a, Vector::Zero(2)), 0.0);
  const Vector x = Vector::Zero(2);
  const SamplingPlan plan = fixed_size_plan(m, x, SamplingScheme::uniform, 1);
  CounterRng rng(0);
  for (int t = 0; t < 6; ++t) {
    SubsampledHessian op = SubsampledHessian::build(m, x, plan, rng, 0.0);
    CHECK(spectral_error(op, m, x) == doctest::Approx(4.0));
  }
  CHECK_THROWS_AS(spectral_error(SubsampledHessian::exact(m, x, 0.0), m, x, 1), std::invalid_argument);
}

TEST_CASE("the shift restores positive semidefiniteness") {
  LossModel m = small_logistic(11, 200, 4);
  std::mt19937_64 gen(12);
  const Vector x = testing_support::random_vector(gen, m.d());
  const LipschitzInfo lip = lipschitz_bounds(m);
  CounterRng rng(5);
  const double eps = 0.4;
  SamplingPlan plan = resolve_sampling_plan(m, x, lip, SamplingScheme::uniform, eps, 0.1);
  plan.size = std::min<Index>(plan.size, m.n() - 1);
  plan.exact = false;
  int checked = 0;
  for (int t = 0; t < 30; ++t) {
    SubsampledHessian op = SubsampledHessian::build(m, x, plan, rng, eps);
    if (spectral_error(op, m, x) > eps) continue;
    ++checked;
    Eigen::SelfAdjointEigenSolver<Matrix> es(op.to_dense());
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
  CHECK(checked > 0);
}
