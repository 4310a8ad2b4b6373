#include "sarc/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace sarc {

double CubicModel::value(const Vector& s) const {
  const double ns = s.norm();
  return f0 + g.dot(s) + 0.5 * s.dot(H(s)) + sigma / 3.0 * ns * ns * ns;
}

Vector model_gradient(const CubicModel& model, const Vector& s) {
  if (s.size() != model.g.size()) throw std::invalid_argument("model_gradient: step has wrong dimension");
  Vector out = model.g + model.H(s);
  out += (model.sigma * s.norm()) * s;
  return out;
}

void TerminationSpec::validate(double sigma_min) const {
  if (!(kappa_theta > 0.0) || !(kappa_theta < 0.5)) {
    throw std::invalid_argument("kappa_theta must lie in (0, 1/2)");
  }
  if (kind == TerminationKind::subspace_optimal && !(kappa_theta < 2.0 * sigma_min / 3.0)) {
    throw std::invalid_argument("kappa_theta must be below 2 sigma_min / 3 = " + std::to_string(2.0 * sigma_min / 3.0));
  }
}

double TerminationSpec::bound(double grad_f_norm, double step_norm) const {
  if (kind == TerminationKind::subspace_optimal) {
    const double g3 = grad_f_norm * grad_f_norm * grad_f_norm;
    return kappa_theta * std::min({grad_f_norm, g3, step_norm * step_norm});
  }
  return kappa_theta * std::min(1.0, step_norm) * std::min(step_norm, grad_f_norm);
}

bool TerminationSpec::satisfied(double residual, double grad_f_norm, double step_norm) const {
  return residual <= bound(grad_f_norm, step_norm);
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// LDL^T of T + lambda I; returns false if the matrix is not positive definite.
// On success y solves (T + lambda I) y = -gnorm e1 and q = y^T (T + lambda I)^{-1} y.
bool shifted_solve(const Vector& diag, const Vector& off, double lambda, double gnorm, Vector& y, double& q) {
  const Index k = diag.size();
  Vector piv(k), l(std::max<Index>(k - 1, 0));
  piv[0] = diag[0] + lambda;
  if (!(piv[0] > 0.0)) return false;
  for (Index i = 0; i + 1 < k; ++i) {
    l[i] = off[i] / piv[i];
    piv[i + 1] = diag[i + 1] + lambda - l[i] * off[i];
    if (!(piv[i + 1] > 0.0)) return false;
  }
  Vector z(k);
  z[0] = -gnorm;
  for (Index i = 0; i + 1 < k; ++i) z[i + 1] = -l[i] * z[i];
  y.resize(k);
  y[k - 1] = z[k - 1] / piv[k - 1];
  for (Index i = k - 2; i >= 0; --i) y[i] = z[i] / piv[i] - l[i] * y[i + 1];
  double u = y[0];
  q = u * u / piv[0];
  for (Index i = 0; i + 1 < k; ++i) {
    u = y[i + 1] - l[i] * u;
    q += u * u / piv[i + 1];
  }
  return std::isfinite(q);
}

Index count_below(const Vector& diag, const Vector& off, double x) {
  Index count = 0;
  double p = diag[0] - x;
  const double tiny = std::numeric_limits<double>::min();
  for (Index i = 0;; ++i) {
    if (p == 0.0) p = -tiny;
    if (p < 0.0) ++count;
    if (i + 1 >= diag.size()) break;
    p = diag[i + 1] - x - off[i] * off[i] / p;
  }
  return count;
}

double tridiagonal_norm(const Vector& diag, const Vector& off) {
  double norm = 0.0;
  for (Index i = 0; i < diag.size(); ++i) {
    double r = std::abs(diag[i]);
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < diag.size()) r += std::abs(off[i]);
    norm = std::max(norm, r);
  }
  return norm;
}

// Fallback through a full eigendecomposition of T: handles the hard case
// (e1 orthogonal to the leftmost eigenspace) and near-singular shifts.
TridiagonalCubicSolution eigen_cubic(const Vector& diag, const Vector& off, double gnorm, double sigma) {
  const Index k = diag.size();
  Matrix t = Matrix::Zero(k, k);
  t.diagonal() = diag;
  for (Index i = 0; i + 1 < k; ++i) t(i, i + 1) = t(i + 1, i) = off[i];
  Eigen::SelfAdjointEigenSolver<Matrix> es(t);
  const Vector& ev = es.eigenvalues();
  const Matrix& V = es.eigenvectors();
  const Vector c = gnorm * V.row(0).transpose();
  const double lam1 = ev[0];
  const double lo = std::max(0.0, -lam1);
  const double scale = std::max({1.0, tridiagonal_norm(diag, off), gnorm});
  const double gap_tol = 1e-12 * scale;

  auto norm_at = [&](double lambda, bool skip_leftmost) {
    double s = 0.0;
    for (Index i = 0; i < k; ++i) {
      const double den = ev[i] + lambda;
      if (skip_leftmost && ev[i] - lam1 <= gap_tol) continue;
      s += (c[i] / den) * (c[i] / den);
    }
    return std::sqrt(s);
  };
  auto y_at = [&](double lambda, bool skip_leftmost) {
    Vector y = Vector::Zero(k);
    for (Index i = 0; i < k; ++i) {
      if (skip_leftmost && ev[i] - lam1 <= gap_tol) continue;
      y -= (c[i] / (ev[i] + lambda)) * V.col(i);
    }
    return y;
  };

  TridiagonalCubicSolution sol;
  if (lam1 < 0.0 || gnorm == 0.0) {
    double c_left = 0.0;
    for (Index i = 0; i < k; ++i) {
      if (ev[i] - lam1 <= gap_tol) c_left = std::max(c_left, std::abs(c[i]));
    }
    if (c_left <= 1e-12 * std::max(gnorm, 1e-300) || gnorm == 0.0) {
      const double perp = norm_at(lo, true);
      if (perp <= lo / sigma) {
        sol.y = y_at(lo, true);
        const double tau = std::sqrt(std::max(0.0, (lo / sigma) * (lo / sigma) - perp * perp));
        sol.y += tau * V.col(0);
        sol.lambda = lo;
        sol.hard_case = true;
        return sol;
      }
    }
  }
  if (gnorm == 0.0) {
    sol.y = Vector::Zero(k);
    return sol;
  }
  // phi(lambda) = ||y(lambda)|| - lambda/sigma is decreasing on (lo, inf).
  double a = lo;
  double b = lo + std::sqrt(sigma * gnorm) + scale;
  while (norm_at(b, false) > b / sigma) b = lo + 2.0 * (b - lo);
  for (int it = 0; it < 400 && b - a > 4.0 * kEps * b; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= lo) break;
    if (norm_at(mid, false) > mid / sigma) a = mid; else b = mid;
  }
  sol.y = y_at(b, false);
  sol.lambda = sigma * sol.y.norm();
  return sol;
}

}  // namespace

double tridiagonal_min_eigenvalue(const Vector& diag, const Vector& off) {
  if (diag.size() < 1 || off.size() != diag.size() - 1) {
    throw std::invalid_argument("tridiagonal: need k diagonal and k-1 off-diagonal entries");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index i = 0; i < diag.size(); ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < diag.size()) r += std::abs(off[i]);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  const double pad = std::max(1.0, std::abs(lo) + std::abs(hi)) * 4.0 * kEps;
  lo -= pad;
  hi += pad;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_below(diag, off, mid) >= 1) hi = mid; else lo = mid;
    if (hi - lo <= 2.0 * kEps * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

TridiagonalCubicSolution solve_tridiagonal_cubic(const Vector& diag, const Vector& offdiag, double gnorm,
                                                 double sigma) {
  const Index k = diag.size();
  if (k < 1 || offdiag.size() != k - 1) {
    throw std::invalid_argument("tridiagonal: need k diagonal and k-1 off-diagonal entries");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
  if (!(gnorm >= 0.0) || !std::isfinite(gnorm)) throw std::invalid_argument("gnorm must be finite and >= 0");
  if (!diag.allFinite() || !offdiag.allFinite()) throw std::invalid_argument("tridiagonal entries must be finite");

  const double lam_min = tridiagonal_min_eigenvalue(diag, offdiag);
  if (gnorm == 0.0) {
    if (lam_min >= 0.0) return {Vector::Zero(k), 0.0, false};
    return eigen_cubic(diag, offdiag, gnorm, sigma);
  }
  const double lo = std::max(0.0, -lam_min);
  const double scale = std::max(tridiagonal_norm(diag, offdiag), 1e-300);

  // Upper end of the bracket: any lambda with ||y(lambda)|| <= lambda / sigma.
  double b = lo + std::sqrt(sigma * gnorm) + scale;
  Vector y;
  double q = 0.0;
  for (int it = 0; it < 200; ++it) {
    if (shifted_solve(diag, offdiag, b, gnorm, y, q) && y.norm() <= b / sigma) break;
    b = lo + 2.0 * (b - lo);
  }
  double a = lo;

  // h(lambda) = 1/||y|| - sigma/lambda is increasing and concave; Newton from
  // either side lands left of the root and then climbs monotonically.
  double lambda = b;
  bool converged = false;
  bool have_y = false;
  for (int it = 0; it < 200; ++it) {
    if (!shifted_solve(diag, offdiag, lambda, gnorm, y, q)) {
      a = std::max(a, lambda);
      lambda = 0.5 * (a + b);
      have_y = false;
      continue;
    }
    have_y = true;
    const double ny = y.norm();
    const double h = 1.0 / ny - sigma / lambda;
    if (h < 0.0) a = lambda; else b = lambda;
    if (std::abs(ny - lambda / sigma) <= 8.0 * kEps * ny) {
      converged = true;
      break;
    }
    if (b - a <= 4.0 * kEps * b) break;
    const double hp = q / (ny * ny * ny) + sigma / (lambda * lambda);
    double next = lambda - h / hp;
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    lambda = next;
  }
  if (!have_y || (!converged && std::abs(y.norm() - lambda / sigma) > 1e-10 * std::max(1.0, lambda / sigma))) {
    // The bracket collapsed onto the leftmost pole without a root: hard or
    // near-hard case.
    return eigen_cubic(diag, offdiag, gnorm, sigma);
  }
  TridiagonalCubicSolution sol;
  sol.y = std::move(y);
  sol.lambda = sigma * sol.y.norm();
  return sol;
}

namespace {

SubproblemResult gradient_descent_solve(const CubicModel& model, const TerminationSpec& spec, double grad_f_norm,
                                        const SubproblemOptions& options) {
  SubproblemResult res;
  const Vector& g = model.g;
  const double gnorm = g.norm();
  const double sigma = model.sigma;

  // Cauchy point along -g.
  const Vector Hg = model.H(g);
  res.hvp_count++;
  const double gHg = g.dot(Hg);
  const double g3 = gnorm * gnorm * gnorm;
  const double t = (-gHg + std::sqrt(gHg * gHg + 4.0 * sigma * g3 * gnorm * gnorm)) / (2.0 * sigma * g3);
  Vector s = -t * g;

  auto eval = [&](const Vector& step, Vector& Hs) {
    Hs = model.H(step);
    res.hvp_count++;
    const double ns = step.norm();
    return g.dot(step) + 0.5 * step.dot(Hs) + sigma / 3.0 * ns * ns * ns;
  };
  Vector Hs;
  double m = eval(s, Hs);
  double L = Hg.norm() / gnorm + 2.0 * sigma * s.norm() + 1e-12;
  for (Index it = 0; it < options.gd_max_iters; ++it) {
    const double ns = s.norm();
    Vector grad = g + Hs + (sigma * ns) * s;
    res.residual_norm = grad.norm();
    if (spec.satisfied(res.residual_norm, grad_f_norm, ns)) {
      res.met_condition = true;
      break;
    }
    const double gg = grad.squaredNorm();
    for (int bt = 0; bt < 60; ++bt) {
      Vector trial = s - grad / L;
      Vector Ht;
      const double mt = eval(trial, Ht);
      if (mt <= m - 0.5 * gg / L) {
        s = std::move(trial);
        Hs = std::move(Ht);
        m = mt;
        L = std::max(L * 0.5, 1e-12);
        break;
      }
      L *= 2.0;
    }
  }
  res.step_norm = s.norm();
  res.model_decrease = -m;
  res.s = std::move(s);
  res.exhausted = !res.met_condition;
  return res;
}

}  // namespace

SubproblemResult minimize_model(const CubicModel& model, const TerminationSpec& spec, double grad_f_norm,
                                const SubproblemOptions& options) {
  const Vector& g = model.g;
  const Index d = g.size();
  if (!g.allFinite()) throw std::invalid_argument("cubic model gradient must be finite");
  if (!(model.sigma > 0.0)) throw std::invalid_argument("cubic model sigma must be positive");
  const double gnorm = g.norm();

  SubproblemResult res;
  if (gnorm == 0.0) {
    res.s = Vector::Zero(d);
    res.met_condition = true;
    return res;
  }
  if (options.backend == SubproblemBackend::gradient_descent) {
    return gradient_descent_solve(model, spec, grad_f_norm, options);
  }

  const Index max_dim = options.max_dim > 0 ? std::min(options.max_dim, d) : d;
  const double sigma = model.sigma;
  std::vector<Vector> Q;
  Q.reserve(static_cast<std::size_t>(max_dim));
  std::vector<double> alphas, betas;
  Vector q = g / gnorm;
  Vector q_prev;
  double beta_prev = 0.0;
  double t_norm = 0.0;
  const double reorth_tol = std::sqrt(kEps);

  for (Index k = 1; k <= max_dim; ++k) {
    Q.push_back(q);
    Vector w = model.H(q);
    res.hvp_count++;
    const double alpha = q.dot(w);
    w -= alpha * q;
    if (k > 1) w -= beta_prev * q_prev;

    bool do_full = !options.selective_reorthogonalization;
    if (!do_full) {
      const double nw = w.norm();
      for (const Vector& qi : Q) {
        if (std::abs(qi.dot(w)) > reorth_tol * nw) {
          do_full = true;
          break;
        }
      }
    }
    if (do_full) {
      for (int pass = 0; pass < 2; ++pass) {
        for (const Vector& qi : Q) w -= qi.dot(w) * qi;
      }
    }
    const double beta = w.norm();
    alphas.push_back(alpha);
    t_norm = std::max(t_norm, std::abs(alpha) + beta + beta_prev);

    const Vector diag = Eigen::Map<const Vector>(alphas.data(), k);
    const Vector off = Eigen::Map<const Vector>(betas.data(), k - 1);
    const TridiagonalCubicSolution sub = solve_tridiagonal_cubic(diag, off, gnorm, sigma);

    Vector s = Vector::Zero(d);
    for (Index i = 0; i < k; ++i) s += sub.y[i] * Q[i];
    const Vector Hs = model.H(s);
    res.hvp_count++;
    const double ns = s.norm();
    const Vector grad_m = g + Hs + (sigma * ns) * s;
    const double m_rel = g.dot(s) + 0.5 * s.dot(Hs) + sigma / 3.0 * ns * ns * ns;

    res.s = s;
    res.step_norm = ns;
    res.residual_norm = grad_m.norm();
    res.model_decrease = -m_rel;
    res.krylov_dim = k;
    res.subspace_values.push_back(model.f0 + m_rel);

    if (spec.satisfied(res.residual_norm, grad_f_norm, ns)) {
      res.met_condition = true;
      break;
    }
    if (beta <= 1e-14 * std::max(t_norm, 1e-300)) {
      res.breakdown = true;
      break;
    }
    if (k == max_dim) {
      res.exhausted = true;
      break;
    }
    betas.push_back(beta);
    q_prev = std::move(q);
    q = w / beta;
    beta_prev = beta;
  }

  const Index k = static_cast<Index>(Q.size());
  Matrix basis(d, k);
  for (Index i = 0; i < k; ++i) basis.col(i) = Q[i];
  res.orthogonality_loss = (basis.transpose() * basis - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
  if (options.keep_basis) res.basis = std::move(basis);
  return res;
}

}  // namespace sarc
