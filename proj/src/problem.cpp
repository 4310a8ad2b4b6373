#include "sarc/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sarc/rng.hpp"

namespace sarc {

namespace {

double softplus(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double logistic(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

Dataset::Dataset(SparseRows rows, Vector labels) : rows_(std::move(rows)), labels_(std::move(labels)) {
  if (rows_.rows() < 1) throw std::invalid_argument("dataset needs at least one observation");
  if (rows_.cols() < 1) throw std::invalid_argument("dataset needs feature dimension >= 1");
  if (labels_.size() != rows_.rows()) {
    throw std::invalid_argument("label count " + std::to_string(labels_.size()) +
                                " does not match row count " + std::to_string(rows_.rows()));
  }
  if (!labels_.allFinite()) throw std::invalid_argument("labels must be finite");
  rows_.makeCompressed();
  row_norm_sq_.resize(rows_.rows());
  for (Index j = 0; j < rows_.rows(); ++j) {
    double s = 0.0;
    int prev = -1;
    for (SparseRows::InnerIterator it(rows_, j); it; ++it) {
      if (it.col() <= prev) throw std::invalid_argument("row indices must be strictly increasing");
      if (!std::isfinite(it.value())) throw std::invalid_argument("feature values must be finite");
      prev = it.col();
      s += it.value() * it.value();
    }
    row_norm_sq_[j] = s;
  }
}

Dataset Dataset::from_dense(const Matrix& rows, const Vector& labels) {
  SparseRows sparse = rows.sparseView();
  return Dataset(std::move(sparse), labels);
}

double Dataset::row_dot(Index j, const Vector& x) const {
  double s = 0.0;
  for (SparseRows::InnerIterator it(rows_, j); it; ++it) s += it.value() * x[it.col()];
  return s;
}

void Dataset::add_scaled_row(Index j, double alpha, Vector& out) const {
  for (SparseRows::InnerIterator it(rows_, j); it; ++it) out[it.col()] += alpha * it.value();
}

bool Dataset::has_binary_labels() const {
  return (labels_.array() == 1.0 || labels_.array() == -1.0).all();
}

std::string_view to_string(LossFamily family) {
  switch (family) {
    case LossFamily::ridge_least_squares: return "ridge_least_squares";
    case LossFamily::reg_logistic: return "reg_logistic";
    case LossFamily::nonconvex_svm: return "nonconvex_svm";
    case LossFamily::pca_quadratic: return "pca_quadratic";
  }
  return "unknown";
}

LossFamily loss_family_from_string(std::string_view name) {
  for (auto f : {LossFamily::ridge_least_squares, LossFamily::reg_logistic, LossFamily::nonconvex_svm,
                 LossFamily::pca_quadratic}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown loss family: " + std::string(name));
}

LossModel::LossModel(LossFamily family, std::shared_ptr<const Dataset> data, double lambda, double reg_factor)
    : LossModel(family, std::move(data), lambda, reg_factor, 0.0, Vector()) {
  if (family == LossFamily::pca_quadratic) {
    throw std::invalid_argument("use LossModel::pca for the pca_quadratic family");
  }
}

LossModel LossModel::pca(std::shared_ptr<const Dataset> data, double mu, Vector linear_term) {
  return LossModel(LossFamily::pca_quadratic, std::move(data), 0.0, 0.0, mu, std::move(linear_term));
}

LossModel::LossModel(LossFamily family, std::shared_ptr<const Dataset> data, double lambda, double reg_factor,
                     double mu, Vector linear_term)
    : family_(family),
      data_(std::move(data)),
      lambda_(lambda),
      reg_factor_(reg_factor),
      mu_(mu),
      linear_term_(std::move(linear_term)) {
  if (!data_) throw std::invalid_argument("loss model needs a dataset");
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) throw std::invalid_argument("lambda must be finite and >= 0");
  if (!(reg_factor_ >= 0.0) || !std::isfinite(reg_factor_)) throw std::invalid_argument("reg_factor must be >= 0");
  if (!std::isfinite(mu_)) throw std::invalid_argument("mu must be finite");
  if (family_ == LossFamily::pca_quadratic) {
    if (linear_term_.size() == 0) linear_term_ = Vector::Zero(data_->d());
    if (linear_term_.size() != data_->d()) throw std::invalid_argument("pca linear term has wrong dimension");
  }
  if ((family_ == LossFamily::reg_logistic || family_ == LossFamily::nonconvex_svm) &&
      !data_->has_binary_labels()) {
    throw std::invalid_argument(std::string(to_string(family_)) + " requires labels in {-1, +1}");
  }
}

void LossModel::check_index(Index j) const {
  if (j < 0 || j >= n()) {
    throw std::out_of_range("component index " + std::to_string(j) + " outside [0, " + std::to_string(n()) + ")");
  }
}

void LossModel::check_point(const Vector& x) const {
  if (x.size() != d()) {
    throw std::invalid_argument("dimension mismatch: got " + std::to_string(x.size()) + ", expected " +
                                std::to_string(d()));
  }
  if (!x.allFinite()) throw std::domain_error("non-finite entry in point");
}

double LossModel::scalar_value(Index j, double t) const {
  const double b = data_->label(j);
  switch (family_) {
    case LossFamily::ridge_least_squares: return (t - b) * (t - b);
    case LossFamily::reg_logistic: return softplus(-b * t);
    case LossFamily::nonconvex_svm: return 1.0 - std::tanh(b * t);
    case LossFamily::pca_quadratic: return -0.5 * t * t;
  }
  return 0.0;
}

double LossModel::scalar_first(Index j, double t) const {
  const double b = data_->label(j);
  switch (family_) {
    case LossFamily::ridge_least_squares: return 2.0 * (t - b);
    case LossFamily::reg_logistic: return -b * logistic(-b * t);
    case LossFamily::nonconvex_svm: {
      const double th = std::tanh(b * t);
      return -b * (1.0 - th * th);
    }
    case LossFamily::pca_quadratic: return -t;
  }
  return 0.0;
}

double LossModel::scalar_second(Index j, double t) const {
  const double b = data_->label(j);
  switch (family_) {
    case LossFamily::ridge_least_squares: return 2.0;
    case LossFamily::reg_logistic: {
      const double s = logistic(b * t);
      return b * b * s * (1.0 - s);
    }
    case LossFamily::nonconvex_svm: {
      const double th = std::tanh(b * t);
      return 2.0 * b * b * th * (1.0 - th * th);
    }
    case LossFamily::pca_quadratic: return -1.0;
  }
  return 0.0;
}

double LossModel::regularizer_value(const Vector& x) const {
  if (family_ == LossFamily::pca_quadratic) return 0.5 * mu_ * x.squaredNorm() + linear_term_.dot(x);
  return reg_factor_ * lambda_ * x.squaredNorm();
}

void LossModel::add_regularizer_gradient(const Vector& x, Vector& out) const {
  if (family_ == LossFamily::pca_quadratic) {
    out += mu_ * x + linear_term_;
  } else {
    out += (2.0 * reg_factor_ * lambda_) * x;
  }
}

double LossModel::regularizer_curvature() const {
  if (family_ == LossFamily::pca_quadratic) return mu_;
  return 2.0 * reg_factor_ * lambda_;
}

double LossModel::component_value(Index j, const Vector& x) const {
  check_index(j);
  check_point(x);
  return scalar_value(j, data_->row_dot(j, x)) + regularizer_value(x);
}

Vector LossModel::component_gradient(Index j, const Vector& x) const {
  check_index(j);
  check_point(x);
  Vector g = Vector::Zero(d());
  data_->add_scaled_row(j, scalar_first(j, data_->row_dot(j, x)), g);
  add_regularizer_gradient(x, g);
  return g;
}

Vector LossModel::component_hvp(Index j, const Vector& x, const Vector& v) const {
  check_index(j);
  check_point(x);
  if (v.size() != d()) throw std::invalid_argument("direction has wrong dimension");
  Vector out = regularizer_curvature() * v;
  const double c = scalar_second(j, data_->row_dot(j, x));
  data_->add_scaled_row(j, c * data_->row_dot(j, v), out);
  return out;
}

double LossModel::scalar_second_derivative(Index j, const Vector& x) const {
  check_index(j);
  check_point(x);
  return scalar_second(j, data_->row_dot(j, x));
}

double LossModel::full_value(const Vector& x) const {
  check_point(x);
  double s = 0.0;
  for (Index j = 0; j < n(); ++j) s += scalar_value(j, data_->row_dot(j, x));
  return s / static_cast<double>(n()) + regularizer_value(x);
}

Vector LossModel::full_gradient(const Vector& x) const {
  check_point(x);
  Vector g = Vector::Zero(d());
  for (Index j = 0; j < n(); ++j) data_->add_scaled_row(j, scalar_first(j, data_->row_dot(j, x)), g);
  g /= static_cast<double>(n());
  add_regularizer_gradient(x, g);
  return g;
}

Vector LossModel::full_hvp(const Vector& x, const Vector& v) const {
  check_point(x);
  if (v.size() != d()) throw std::invalid_argument("direction has wrong dimension");
  Vector out = Vector::Zero(d());
  for (Index j = 0; j < n(); ++j) {
    const double c = scalar_second(j, data_->row_dot(j, x));
    if (c != 0.0) data_->add_scaled_row(j, c * data_->row_dot(j, v), out);
  }
  out /= static_cast<double>(n());
  out += regularizer_curvature() * v;
  return out;
}

double LossModel::component_lipschitz(Index j) const {
  check_index(j);
  const double a2 = data_->row_norm_sq(j);
  switch (family_) {
    case LossFamily::ridge_least_squares: return 2.0 * a2 + regularizer_curvature();
    case LossFamily::reg_logistic: return 0.25 * a2 + regularizer_curvature();
    // Curvature bound of 1 - tanh(t) scaled by ||a_j||^2 (labels are +-1).
    case LossFamily::nonconvex_svm: return kTanhCurvatureBound * a2 + regularizer_curvature();
    // ||mu I - a a^T|| = max(|mu|, |mu - ||a||^2|)
    case LossFamily::pca_quadratic: return std::max(std::abs(mu_), std::abs(mu_ - a2));
  }
  return 0.0;
}

Matrix LossModel::dense_component_hessian(Index j, const Vector& x) const {
  check_index(j);
  check_point(x);
  Vector a = Vector::Zero(d());
  data_->add_scaled_row(j, 1.0, a);
  Matrix h = scalar_second(j, a.dot(x)) * (a * a.transpose());
  h.diagonal().array() += regularizer_curvature();
  return h;
}

Matrix LossModel::dense_hessian(const Vector& x) const {
  check_point(x);
  Matrix h = Matrix::Zero(d(), d());
  for (Index j = 0; j < n(); ++j) {
    const double c = scalar_second(j, data_->row_dot(j, x));
    if (c == 0.0) continue;
    for (SparseRows::InnerIterator p(data_->rows(), j); p; ++p) {
      for (SparseRows::InnerIterator q(data_->rows(), j); q; ++q) {
        h(p.col(), q.col()) += c * p.value() * q.value();
      }
    }
  }
  h /= static_cast<double>(n());
  h.diagonal().array() += regularizer_curvature();
  return h;
}

LipschitzInfo lipschitz_bounds(const LossModel& model) {
  LipschitzInfo info;
  double sum = 0.0;
  for (Index j = 0; j < model.n(); ++j) {
    const double lj = model.component_lipschitz(j);
    info.L = std::max(info.L, lj);
    sum += lj;
  }
  info.Lbar = std::min(info.L, sum / static_cast<double>(model.n()));
  info.source = LipschitzSource::analytic;
  if (!(info.Lbar > 0.0)) {
    // An all-zero dataset with no regularizer has no curvature at all; keep
    // the bounds strictly positive so sample-size formulas stay defined.
    info.L = std::max(info.L, 1e-12);
    info.Lbar = std::max(info.Lbar, 1e-12);
  }
  return info;
}

LipschitzInfo estimate_lipschitz_bounds(const LossModel& model, const Vector& x, int max_iters, std::uint64_t seed) {
  model.check_point(x);
  CounterRng rng(seed, 0x4c495053ULL);
  LipschitzInfo info;
  double sum = 0.0;
  for (Index j = 0; j < model.n(); ++j) {
    Vector v(model.d());
    for (Index i = 0; i < model.d(); ++i) v[i] = rng.normal();
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < max_iters; ++it) {
      Vector w = model.component_hvp(j, x, v);
      const double nw = w.norm();
      est = nw;
      if (nw == 0.0) break;
      v = w / nw;
    }
    info.L = std::max(info.L, est);
    sum += est;
  }
  info.Lbar = std::min(info.L, sum / static_cast<double>(model.n()));
  info.L = std::max(info.L, 1e-12);
  info.Lbar = std::max(info.Lbar, 1e-12);
  info.source = LipschitzSource::estimated;
  return info;
}

LipschitzInfo user_lipschitz(double L, double Lbar) {
  if (!(Lbar > 0.0) || !(Lbar <= L) || !std::isfinite(L)) {
    throw std::invalid_argument("Lipschitz bounds must satisfy 0 < Lbar <= L < inf");
  }
  return LipschitzInfo{L, Lbar, LipschitzSource::user_supplied};
}

}  // namespace sarc
