#include <doctest.h>

#include <cmath>
#include <random>

#include "sarc/cubic.hpp"
#include "support.hpp"

using namespace sarc;
using testing_support::cubic_global_min;

namespace {

CubicModel dense_model(const Matrix& H, const Vector& g, double sigma, double f0 = 0.0) {
  return CubicModel{g, [H](const Vector& v) { return Vector(H * v); }, sigma, f0};
}

Vector vec1(double x) { return Vector::Constant(1, x); }

const double kGolden = (1.0 - std::sqrt(5.0)) / 2.0;

}  // namespace

TEST_CASE("one-dimensional subspace solves") {
  auto flat = solve_tridiagonal_cubic(vec1(0.0), Vector(), 1.0, 3.0);
  CHECK(flat.y(0) == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(std::abs(1.0 + 3.0 * std::abs(flat.y(0)) * flat.y(0)) < 1e-10);

  auto golden = solve_tridiagonal_cubic(vec1(1.0), Vector(), 1.0, 1.0);
  CHECK(golden.y(0) == doctest::Approx(-0.618034).epsilon(1e-6));
  CHECK(std::abs(1.0 + golden.y(0) + golden.y(0) * std::abs(golden.y(0))) < 1e-10);
  CHECK(golden.lambda == doctest::Approx(std::abs(golden.y(0))));

  auto zero = solve_tridiagonal_cubic(Vector::Constant(2, 1.0), Vector::Constant(1, 0.5), 0.0, 1.0);
  CHECK(zero.y.norm() == 0.0);
}

TEST_CASE("tridiagonal subspace solves match the dense oracle") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    const Index k = 1 + t % 6;
    Vector diag(k), off(std::max<Index>(k - 1, 0));
    for (Index i = 0; i < k; ++i) diag(i) = nd(gen);
    for (Index i = 0; i + 1 < k; ++i) off(i) = nd(gen);
    Matrix T = Matrix::Zero(k, k);
    T.diagonal() = diag;
    for (Index i = 0; i + 1 < k; ++i) T(i, i + 1) = T(i + 1, i) = off(i);
    const double gnorm = std::abs(nd(gen)) + 0.1;
    const double sigma = 0.1 + std::abs(nd(gen));
    const Vector e1 = Vector::Unit(k, 0) * gnorm;
    auto sol = solve_tridiagonal_cubic(diag, off, gnorm, sigma);
    const double val = e1.dot(sol.y) + 0.5 * sol.y.dot(T * sol.y) + sigma / 3.0 * std::pow(sol.y.norm(), 3);
    CHECK(val <= cubic_global_min(T, e1, sigma).value + 1e-9);
    const Vector res = e1 + T * sol.y + sigma * sol.y.norm() * sol.y;
    CHECK(res.norm() <= 1e-8 * std::max(1.0, gnorm));
    Eigen::SelfAdjointEigenSolver<Matrix> es(T);
    CHECK(tridiagonal_min_eigenvalue(diag, off) == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-10));
  }
}

TEST_CASE("hard case in the subspace") {
  // e1 is orthogonal to the negative eigenvector of T.
  Vector diag(2);
  diag << 2.0, -1.0;
  auto sol = solve_tridiagonal_cubic(diag, Vector::Zero(1), 1.0, 1.0);
  Matrix T = diag.asDiagonal();
  const Vector e1 = Vector::Unit(2, 0);
  const double val = e1.dot(sol.y) + 0.5 * sol.y.dot(T * sol.y) + std::pow(sol.y.norm(), 3) / 3.0;
  CHECK(val == doctest::Approx(cubic_global_min(T, e1, 1.0).value).epsilon(1e-8));
  CHECK(sol.lambda >= 1.0 - 1e-8);
}

TEST_CASE("model gradient") {
  Matrix H(2, 2);
  H << 2, 1, 1, 3;
  const Vector g = Vector::Ones(2);
  CubicModel m = dense_model(H, g, 2.0, 5.0);
  CHECK(model_gradient(m, Vector::Zero(2)) == g);
  CHECK(m.value(Vector::Zero(2)) == 5.0);
  Vector s(2);
  s << 0.3, -0.2;
  const Vector expect = g + H * s + 2.0 * s.norm() * s;
  CHECK((model_gradient(m, s) - expect).norm() < 1e-15);
  // H = 0: grad m(t s) = g + sigma t^2 ||s|| s.
  CubicModel m0 = dense_model(Matrix::Zero(2, 2), g, 2.0);
  for (double t : {0.5, 2.0}) CHECK((model_gradient(m0, t * s) - (g + 2.0 * t * t * s.norm() * s)).norm() < 1e-14);
  CubicModel m1 = dense_model(Matrix::Identity(1, 1), vec1(1.0), 1.0);
  CHECK(std::abs(model_gradient(m1, vec1(kGolden))(0)) < 1e-12);
}

TEST_CASE("zero gradient returns the zero step") {
  CubicModel m = dense_model(Matrix::Identity(3, 3), Vector::Zero(3), 1.0);
  for (TerminationKind kind : {TerminationKind::subspace_optimal, TerminationKind::accelerated}) {
    SubproblemResult r = minimize_model(m, {kind, 0.05}, 0.0);
    CHECK(r.s.norm() == 0.0);
    CHECK(r.residual_norm == 0.0);
    CHECK(r.met_condition);
  }
}

TEST_CASE("one-dimensional model") {
  CubicModel m = dense_model(Matrix::Identity(1, 1), vec1(1.0), 1.0, 0.5);
  SubproblemResult r = minimize_model(m, {TerminationKind::subspace_optimal, 0.05}, 1.0);
  CHECK(r.s(0) == doctest::Approx(kGolden).epsilon(1e-9));
  CHECK(r.residual_norm <= 1e-10);
  CHECK(r.model_decrease == doctest::Approx(0.5 - 0.151636).epsilon(1e-5));
}

TEST_CASE("Lanczos solves against the eigenbasis oracle") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> us(0.1, 10.0);
  for (int t = 0; t < 60; ++t) {
    const Index d = 2 + t % 5;
    const bool psd = t % 2 == 0;
    const Matrix H = testing_support::random_symmetric(gen, d, psd);
    const Vector g = testing_support::random_vector(gen, d);
    const double sigma = us(gen);
    CubicModel m = dense_model(H, g, sigma);
    SubproblemOptions opts;
    opts.keep_basis = true;
    for (TerminationKind kind : {TerminationKind::subspace_optimal, TerminationKind::accelerated}) {
      const double kappa = 1e-3;
      SubproblemResult r = minimize_model(m, {kind, kappa}, g.norm(), opts);
      CHECK(r.met_condition);
      CHECK(r.residual_norm <= TerminationSpec{kind, kappa}.bound(g.norm(), r.step_norm) * (1 + 1e-12));
      // Optimal over the final Krylov space.
      const Vector proj = r.basis.transpose() * model_gradient(m, r.s);
      CHECK(proj.norm() <= 1e-8 * g.norm());
      CHECK(r.orthogonality_loss <= 1e-8);
      for (std::size_t k = 1; k < r.subspace_values.size(); ++k)
        CHECK(r.subspace_values[k] <= r.subspace_values[k - 1] + 1e-12);
      if (psd) CHECK(r.model_decrease >= 0.5 * r.s.dot(H * r.s) - 1e-12);
    }
    // Run to the full space: the global minimum.
    SubproblemResult full = minimize_model(m, {TerminationKind::subspace_optimal, 1e-14}, g.norm());
    CHECK(-full.model_decrease == doctest::Approx(cubic_global_min(H, g, sigma).value).epsilon(1e-8));
  }
}

TEST_CASE("selective re-orthogonalization keeps the basis orthonormal") {
  std::mt19937_64 gen(41);
  const Index d = 60;
  Vector eig(d);
  for (Index i = 0; i < d; ++i) eig(i) = std::pow(10.0, -3.0 + 3.0 * double(i) / double(d - 1));
  const Matrix H = eig.asDiagonal();
  const Vector g = testing_support::random_vector(gen, d);
  SubproblemOptions opts;
  opts.selective_reorthogonalization = true;
  SubproblemResult r = minimize_model(dense_model(H, g, 1.0), {TerminationKind::subspace_optimal, 1e-12}, g.norm(), opts);
  CHECK(r.orthogonality_loss <= 1e-6);
  CHECK(-r.model_decrease == doctest::Approx(cubic_global_min(H, g, 1.0).value).epsilon(1e-7));
}

TEST_CASE("gradient-descent backend") {
  std::mt19937_64 gen(51);
  const Matrix H = testing_support::random_symmetric(gen, 4, true);
  const Vector g = testing_support::random_vector(gen, 4);
  SubproblemOptions opts;
  opts.backend = SubproblemBackend::gradient_descent;
  CubicModel m = dense_model(H, g, 1.0);
  SubproblemResult r = minimize_model(m, {TerminationKind::accelerated, 0.05}, g.norm(), opts);
  CHECK(r.met_condition);
  const TerminationSpec spec{TerminationKind::accelerated, 0.05};
  CHECK(r.residual_norm <= spec.bound(g.norm(), r.step_norm));
  CHECK(r.model_decrease > 0.0);
}

TEST_CASE("termination parameter ranges") {
  CHECK_NOTHROW((TerminationSpec{TerminationKind::subspace_optimal, 0.05}.validate(0.1)));
  CHECK_THROWS_AS((TerminationSpec{TerminationKind::subspace_optimal, 0.07}.validate(0.1)), std::invalid_argument);
  CHECK_NOTHROW((TerminationSpec{TerminationKind::accelerated, 0.4}.validate(0.1)));
  CHECK_THROWS_AS((TerminationSpec{TerminationKind::accelerated, 0.5}.validate(0.1)), std::invalid_argument);
  CHECK_THROWS_AS((TerminationSpec{TerminationKind::accelerated, 0.0}.validate(0.1)), std::invalid_argument);
  const TerminationSpec s31{TerminationKind::subspace_optimal, 0.1};
  CHECK(s31.bound(2.0, 0.5) == doctest::Approx(0.1 * 0.25));
  CHECK(s31.bound(0.5, 3.0) == doctest::Approx(0.1 * 0.125));
  const TerminationSpec s41{TerminationKind::accelerated, 0.1};
  CHECK(s41.bound(2.0, 0.5) == doctest::Approx(0.1 * 0.5 * 0.5));
  CHECK(s41.bound(0.3, 4.0) == doctest::Approx(0.1 * 1.0 * 0.3));
}
