#include "sarc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace sarc {

std::string_view to_string(SamplingScheme scheme) {
  return scheme == SamplingScheme::uniform ? "uniform" : "nonuniform";
}

SamplingScheme sampling_scheme_from_string(std::string_view name) {
  if (name == "uniform") return SamplingScheme::uniform;
  if (name == "nonuniform") return SamplingScheme::nonuniform;
  throw std::invalid_argument("unknown sampling scheme: " + std::string(name));
}

double SizeBound::value() const { return std::max(first_branch, second_branch) * log_factor; }

namespace {

void check_probability_args(double eps, double per_iter_delta, Index d, Index n) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!(per_iter_delta > 0.0 && per_iter_delta < 1.0)) {
    throw std::invalid_argument("per-iteration delta must lie in (0, 1)");
  }
  if (d < 1 || n < 1) throw std::invalid_argument("d and n must be positive");
}

Index resolve(double value, Index n) {
  if (!(value < static_cast<double>(n))) return n;
  return std::clamp<Index>(static_cast<Index>(std::ceil(value)), 1, n);
}

}  // namespace

SizeBound uniform_size_bound(double eps, double per_iter_delta, double L, Index d) {
  check_probability_args(eps, per_iter_delta, d, 1);
  if (!(L > 0.0)) throw std::invalid_argument("L must be positive");
  SizeBound b;
  b.first_branch = 16.0 * L * L / (eps * eps);
  b.second_branch = 4.0 * L / eps;
  b.log_factor = std::log(2.0 * static_cast<double>(d) / per_iter_delta);
  return b;
}

SizeBound nonuniform_size_bound(double eps, double per_iter_delta, double L, double Lbar, double p_min, Index d,
                                Index n) {
  check_probability_args(eps, per_iter_delta, d, n);
  if (!(Lbar > 0.0) || !(Lbar <= L)) throw std::invalid_argument("need 0 < Lbar <= L");
  if (!(p_min > 0.0)) throw std::domain_error("p_min = 0: degenerate curvature distribution");
  if (p_min > 1.0) throw std::invalid_argument("p_min must lie in (0, 1]");
  const double nd = static_cast<double>(n);
  SizeBound b;
  b.first_branch = 4.0 * Lbar * Lbar / (eps * eps);
  b.second_branch = (2.0 * L / eps) * (nd + 1.0 / p_min - 2.0) / nd;
  b.log_factor = std::log(2.0 * static_cast<double>(d) / per_iter_delta);
  return b;
}

Index sample_size_uniform(double eps, double per_iter_delta, double L, Index d, Index n) {
  check_probability_args(eps, per_iter_delta, d, n);
  return resolve(uniform_size_bound(eps, per_iter_delta, L, d).value(), n);
}

Index sample_size_nonuniform(double eps, double per_iter_delta, double L, double Lbar, double p_min, Index d,
                             Index n) {
  return resolve(nonuniform_size_bound(eps, per_iter_delta, L, Lbar, p_min, d, n).value(), n);
}

double per_iteration_delta(double delta, double eps_target, double exponent) {
  return delta * std::pow(eps_target, exponent);
}

CurvatureDistribution nonuniform_distribution(const LossModel& model, const Vector& x) {
  model.check_point(x);
  const Dataset& data = model.dataset();
  CurvatureDistribution dist;
  dist.probabilities.resize(static_cast<std::size_t>(model.n()));
  double total = 0.0;
  for (Index j = 0; j < model.n(); ++j) {
    const double w = std::abs(model.scalar_second(j, data.row_dot(j, x))) * data.row_norm_sq(j);
    dist.probabilities[j] = w;
    total += w;
  }
  if (!(total > 0.0)) {
    dist.degenerate = true;
    std::fill(dist.probabilities.begin(), dist.probabilities.end(), 0.0);
    return dist;
  }
  double p_min = 1.0;
  for (double& p : dist.probabilities) {
    p /= total;
    if (p > 0.0) p_min = std::min(p_min, p);
  }
  dist.p_min = p_min;
  return dist;
}

SamplingPlan resolve_sampling_plan(const LossModel& model, const Vector& x, const LipschitzInfo& lip,
                                   SamplingScheme scheme, double eps_i, double per_iter_delta) {
  const Index n = model.n();
  const Index d = model.d();
  SamplingPlan plan;
  plan.scheme = scheme;
  plan.eps_i = eps_i;
  plan.per_iter_delta = per_iter_delta;
  plan.uniform_size = sample_size_uniform(eps_i, per_iter_delta, lip.L, d, n);
  plan.size = plan.uniform_size;

  if (scheme == SamplingScheme::nonuniform) {
    CurvatureDistribution dist =
        model.has_scalar_curvature() ? nonuniform_distribution(model, x) : CurvatureDistribution{{}, 0.0, true};
    if (dist.degenerate) {
      plan.scheme = SamplingScheme::uniform;
      plan.fell_back_to_uniform = true;
    } else {
      plan.nonuniform_size = sample_size_nonuniform(eps_i, per_iter_delta, lip.L, lip.Lbar, dist.p_min, d, n);
      if (plan.nonuniform_size <= plan.uniform_size) {
        plan.size = plan.nonuniform_size;
        plan.probabilities = std::move(dist.probabilities);
        plan.p_min = dist.p_min;
      } else {
        plan.scheme = SamplingScheme::uniform;
        plan.fell_back_to_uniform = true;
      }
    }
  }
  plan.exact = plan.size >= n;
  if (plan.exact) plan.probabilities.clear();
  return plan;
}

SamplingPlan exact_plan(Index n) {
  SamplingPlan plan;
  plan.size = n;
  plan.exact = true;
  plan.uniform_size = n;
  return plan;
}

SamplingPlan fixed_size_plan(const LossModel& model, const Vector& x, SamplingScheme scheme, Index size) {
  if (size < 1) throw std::invalid_argument("sample size must be positive");
  SamplingPlan plan;
  plan.scheme = scheme;
  plan.size = size;
  plan.uniform_size = size;
  if (scheme == SamplingScheme::nonuniform) {
    CurvatureDistribution dist = nonuniform_distribution(model, x);
    if (dist.degenerate) {
      plan.scheme = SamplingScheme::uniform;
      plan.fell_back_to_uniform = true;
    } else {
      plan.probabilities = std::move(dist.probabilities);
      plan.p_min = dist.p_min;
      plan.nonuniform_size = size;
    }
  }
  return plan;
}

void SubsampledHessian::finalize_rows(const LossModel& model, std::vector<std::pair<Index, double>> weighted) {
  const Dataset& data = model.dataset();
  rows_.clear();
  row_coeff_.clear();
  rows_.reserve(weighted.size());
  row_coeff_.reserve(weighted.size());
  double weight_sum = 0.0;
  for (const auto& [j, w] : weighted) {
    weight_sum += w;
    const double c = model.scalar_second(j, data.row_dot(j, base_point_));
    if (c == 0.0) continue;
    rows_.push_back(j);
    row_coeff_.push_back(w * c);
  }
  reg_diag_ = weight_sum * model.regularizer_curvature();
}

SubsampledHessian SubsampledHessian::build(const LossModel& model, const Vector& x, const SamplingPlan& plan,
                                           CounterRng& rng, double shift) {
  if (plan.exact || plan.size >= model.n()) return exact(model, x, shift);
  model.check_point(x);
  const Index n = model.n();
  const Index s = plan.size;
  SubsampledHessian op;
  op.model_ = &model;
  op.base_point_ = x;
  op.shift_ = shift;
  op.query_count_ = s;
  op.draws_.reserve(static_cast<std::size_t>(s));

  const bool weighted = plan.scheme == SamplingScheme::nonuniform && !plan.probabilities.empty();
  std::vector<double> cumulative;
  if (weighted) {
    if (static_cast<Index>(plan.probabilities.size()) != n) {
      throw std::invalid_argument("sampling plan probabilities have wrong length");
    }
    cumulative.resize(plan.probabilities.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < cumulative.size(); ++j) {
      acc += plan.probabilities[j];
      cumulative[j] = acc;
    }
  }
  for (Index k = 0; k < s; ++k) {
    Index j;
    if (weighted) {
      const double u = rng.uniform() * cumulative.back();
      j = std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
      j = std::min(j, n - 1);
      while (plan.probabilities[j] == 0.0 && j > 0) --j;  // land on the support
    } else {
      j = rng.uniform_index(n);
    }
    op.draws_.push_back(j);
  }

  // Each draw contributes weight 1/(n |S| p_j); repeated draws accumulate.
  std::map<Index, double> weights;
  const double base = 1.0 / (static_cast<double>(n) * static_cast<double>(s));
  for (Index j : op.draws_) {
    const double p = weighted ? plan.probabilities[j] : 1.0 / static_cast<double>(n);
    weights[j] += base / p;
  }
  op.finalize_rows(model, {weights.begin(), weights.end()});
  return op;
}

SubsampledHessian SubsampledHessian::exact(const LossModel& model, const Vector& x, double shift) {
  model.check_point(x);
  SubsampledHessian op;
  op.model_ = &model;
  op.base_point_ = x;
  op.shift_ = shift;
  op.exact_ = true;
  op.query_count_ = model.n();
  std::vector<std::pair<Index, double>> weighted;
  weighted.reserve(static_cast<std::size_t>(model.n()));
  const double w = 1.0 / static_cast<double>(model.n());
  for (Index j = 0; j < model.n(); ++j) weighted.emplace_back(j, w);
  op.finalize_rows(model, std::move(weighted));
  // Exact mode: the regularizer weights sum to one by construction.
  op.reg_diag_ = model.regularizer_curvature();
  return op;
}

Vector SubsampledHessian::apply_unshifted(const Vector& v) const {
  if (v.size() != dim()) throw std::invalid_argument("operator applied to vector of wrong dimension");
  const Dataset& data = model_->dataset();
  Vector out = reg_diag_ * v;
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    const Index j = rows_[k];
    data.add_scaled_row(j, row_coeff_[k] * data.row_dot(j, v), out);
  }
  return out;
}

Vector SubsampledHessian::apply(const Vector& v) const {
  Vector out = apply_unshifted(v);
  if (shift_ != 0.0) out += shift_ * v;
  return out;
}

Matrix SubsampledHessian::to_dense(bool include_shift) const {
  const Dataset& data = model_->dataset();
  Matrix h = Matrix::Zero(dim(), dim());
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    const Index j = rows_[k];
    for (SparseRows::InnerIterator p(data.rows(), j); p; ++p) {
      for (SparseRows::InnerIterator q(data.rows(), j); q; ++q) {
        h(p.col(), q.col()) += row_coeff_[k] * p.value() * q.value();
      }
    }
  }
  h.diagonal().array() += reg_diag_ + (include_shift ? shift_ : 0.0);
  return h;
}

double spectral_error(const SubsampledHessian& op, const Matrix& exact_hessian, Index dense_cap) {
  if (op.dim() > dense_cap) {
    throw std::invalid_argument("spectral_error: dimension " + std::to_string(op.dim()) + " exceeds dense cap " +
                                std::to_string(dense_cap));
  }
  const Matrix diff = op.to_dense(false) - exact_hessian;
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_error(const SubsampledHessian& op, const LossModel& model, const Vector& x, Index dense_cap) {
  if (op.dim() > dense_cap) {
    throw std::invalid_argument("spectral_error: dimension " + std::to_string(op.dim()) + " exceeds dense cap " +
                                std::to_string(dense_cap));
  }
  return spectral_error(op, model.dense_hessian(x), dense_cap);
}

}  // namespace sarc
