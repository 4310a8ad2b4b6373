#pragma once

// Reference computations shared by the tests. Nothing here calls into the
// solver code it is used to check.

#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include <Eigen/Dense>

#include "sarc/problem.hpp"

namespace testing_support {

using sarc::Index;
using sarc::Matrix;
using sarc::Vector;

inline double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-12});
}

inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    const double step = h * std::max(1.0, std::abs(x(i)));
    xp(i) += step;
    xm(i) -= step;
    g(i) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return g;
}

inline Vector fd_directional(const std::function<Vector(const Vector&)>& grad, const Vector& x, const Vector& v,
                             double h = 1e-6) {
  const double step = h * std::max(1.0, x.norm()) / std::max(v.norm(), 1e-300);
  return (grad(x + step * v) - grad(x - step * v)) / (2.0 * step);
}

// Global minimum of g^T s + 1/2 s^T H s + (sigma/3)||s||^3 computed in the
// eigenbasis of the dense H: find mu >= max(0, -lambda_min) with
// ||(H + mu I)^{-1} g|| = mu / sigma by bisection, adding an eigenvector
// component in the hard case.
struct CubicOracle {
  Vector s;
  double value = 0.0;
};

inline CubicOracle cubic_global_min(const Matrix& H, const Vector& g, double sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()));
  const Vector lam = es.eigenvalues();
  const Matrix Q = es.eigenvectors();
  const Vector c = Q.transpose() * g;
  const Index d = g.size();
  auto norm_at = [&](double mu) {
    double acc = 0.0;
    for (Index i = 0; i < d; ++i) {
      const double den = lam(i) + mu;
      if (c(i) != 0.0) acc += c(i) * c(i) / (den * den);
    }
    return std::sqrt(acc);
  };
  const double lo0 = std::max(0.0, -lam(0));
  auto phi = [&](double mu) { return norm_at(mu) - mu / sigma; };
  double lo = lo0, hi = lo0 + 1.0;
  while (phi(hi) > 0.0) hi = lo0 + 2.0 * (hi - lo0);
  Vector y(d);
  double mu = 0.0;
  const bool hard = std::abs(c(0)) <= 1e-12 * std::max(1.0, c.norm()) && lam(0) < 0.0 && phi(lo0 + 1e-14) < 0.0;
  if (hard) {
    mu = lo0;
    for (Index i = 0; i < d; ++i) {
      const double den = lam(i) + mu;
      y(i) = std::abs(den) > 1e-14 ? -c(i) / den : 0.0;
    }
    const double target = mu / sigma;
    const double rest = y.squaredNorm();
    y(0) = std::sqrt(std::max(0.0, target * target - rest));
  } else {
    if (phi(lo) <= 0.0) lo = lo0;  // only possible when lo0 = 0 and g = 0
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (phi(mid) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    mu = 0.5 * (lo + hi);
    for (Index i = 0; i < d; ++i) y(i) = -c(i) / (lam(i) + mu);
  }
  CubicOracle out;
  out.s = Q * y;
  out.value = g.dot(out.s) + 0.5 * out.s.dot(H * out.s) + sigma / 3.0 * std::pow(out.s.norm(), 3);
  return out;
}

inline Matrix random_symmetric(std::mt19937_64& gen, Index d, bool psd) {
  std::normal_distribution<double> nd;
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = nd(gen);
  return psd ? Matrix(a * a.transpose() / static_cast<double>(d)) : Matrix(0.5 * (a + a.transpose()));
}

inline Vector random_vector(std::mt19937_64& gen, Index d, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = nd(gen);
  return v;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double mm = static_cast<double>(m);
  return (mm * sxy - sx * sy) / (mm * sxx - sx * sx);
}

}  // namespace testing_support
