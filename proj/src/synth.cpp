#include "sarc/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "sarc/rng.hpp"

namespace sarc {

Dataset synth_logistic(Index n, Index d, std::uint64_t seed, double skew, double row_scale) {
  if (n < 1 || d < 1) throw std::invalid_argument("synthetic data needs n, d >= 1");
  if (!(skew > 0.0) || !(row_scale > 0.0)) throw std::invalid_argument("skew and row scale must be positive");
  CounterRng rows_rng(seed, 11);
  CounterRng label_rng(seed, 12);

  Vector w(d);
  for (Index i = 0; i < d; ++i) w(i) = 2.0 * label_rng.normal();

  const double std = row_scale / std::sqrt(static_cast<double>(d));
  Matrix a(n, d);
  Vector b(n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < d; ++i) a(j, i) = std * rows_rng.normal();
    if (j == 0) a.row(j) *= skew;
    double label = a.row(j).dot(w) >= 0.0 ? 1.0 : -1.0;
    if (label_rng.uniform() < 0.1) label = -label;
    b(j) = label;
  }
  return Dataset::from_dense(a, b);
}

Dataset synth_diagonal_quadratic(const Vector& eigenvalues, const Vector& x_star) {
  const Index d = eigenvalues.size();
  if (d < 1 || x_star.size() != d) throw std::invalid_argument("eigenvalues and minimizer must share a positive size");
  // (1/d) c^2 (x_i - x*_i)^2 has curvature 2 c^2 / d.
  Matrix a = Matrix::Zero(d, d);
  Vector b(d);
  for (Index i = 0; i < d; ++i) {
    if (!(eigenvalues(i) > 0.0)) throw std::invalid_argument("eigenvalues must be positive");
    const double c = std::sqrt(0.5 * eigenvalues(i) * static_cast<double>(d));
    a(i, i) = c;
    b(i) = c * x_star(i);
  }
  return Dataset::from_dense(a, b);
}

}  // namespace sarc
