#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace sarc {

using Index = std::int64_t;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

// Observations (a_j, b_j) stored as sorted sparse rows. Immutable once built.
class Dataset {
 public:
  Dataset(SparseRows rows, Vector labels);

  // Builds from dense rows; zero entries are dropped.
  static Dataset from_dense(const Matrix& rows, const Vector& labels);

  Index n() const { return rows_.rows(); }
  Index d() const { return rows_.cols(); }
  const SparseRows& rows() const { return rows_; }
  const Vector& labels() const { return labels_; }
  double label(Index j) const { return labels_[j]; }

  double row_dot(Index j, const Vector& x) const;
  // out += alpha * a_j
  void add_scaled_row(Index j, double alpha, Vector& out) const;
  double row_norm_sq(Index j) const { return row_norm_sq_[j]; }
  const Vector& row_norms_sq() const { return row_norm_sq_; }
  Index nnz() const { return rows_.nonZeros(); }

  bool has_binary_labels() const;

 private:
  SparseRows rows_;
  Vector labels_;
  Vector row_norm_sq_;
};

enum class LossFamily { ridge_least_squares, reg_logistic, nonconvex_svm, pca_quadratic };

std::string_view to_string(LossFamily family);
LossFamily loss_family_from_string(std::string_view name);

enum class LipschitzSource { analytic, user_supplied, estimated };

struct LipschitzInfo {
  double L = 0.0;     // max_j L_j
  double Lbar = 0.0;  // (1/n) sum_j L_j
  LipschitzSource source = LipschitzSource::analytic;
};

// Finite-sum objective f(x) = (1/n) sum_j f_j(x) where every component has the
// shape f_j(x) = h_j(a_j^T x) + r(x), with r a ridge (or, for PCA, a shifted
// quadratic plus linear term) shared by all components.
//
//   ridge_least_squares  h_j(t) = (t - b_j)^2
//   reg_logistic         h_j(t) = ln(1 + exp(-b_j t))
//   nonconvex_svm        h_j(t) = 1 - tanh(b_j t)
//   pca_quadratic        h_j(t) = -t^2 / 2,  r(x) = (mu/2)||x||^2 + c^T x
//
// For the first three families r(x) = reg_factor * lambda * ||x||^2;
// reg_factor = 1 folds the ridge in as written for the component examples,
// reg_factor = 0.5 gives the (lambda/2)||x||^2 convention used by the
// logistic-regression benchmark.
class LossModel {
 public:
  LossModel(LossFamily family, std::shared_ptr<const Dataset> data, double lambda,
            double reg_factor = 1.0);

  // mu is not checked against lambda_max(A); the caller is responsible.
  static LossModel pca(std::shared_ptr<const Dataset> data, double mu, Vector linear_term);

  LossFamily family() const { return family_; }
  const Dataset& dataset() const { return *data_; }
  std::shared_ptr<const Dataset> dataset_ptr() const { return data_; }
  Index n() const { return data_->n(); }
  Index d() const { return data_->d(); }
  double lambda() const { return lambda_; }
  double reg_factor() const { return reg_factor_; }
  double mu() const { return mu_; }

  // Every supported family is a scalar function of a_j^T x plus a shared
  // regularizer, so curvature-proportional sampling is always available.
  bool has_scalar_curvature() const { return true; }

  // Scalar loss pieces at t = a_j^T x.
  double scalar_value(Index j, double t) const;
  double scalar_first(Index j, double t) const;
  double scalar_second(Index j, double t) const;

  // Shared regularizer r(x) and its constant curvature c (Hessian c*I).
  double regularizer_value(const Vector& x) const;
  void add_regularizer_gradient(const Vector& x, Vector& out) const;
  double regularizer_curvature() const;

  double component_value(Index j, const Vector& x) const;
  Vector component_gradient(Index j, const Vector& x) const;
  Vector component_hvp(Index j, const Vector& x, const Vector& v) const;
  double scalar_second_derivative(Index j, const Vector& x) const;

  double full_value(const Vector& x) const;
  Vector full_gradient(const Vector& x) const;
  Vector full_hvp(const Vector& x, const Vector& v) const;

  // Gradient of the average over a multiset of components.
  template <typename IndexRange>
  Vector batch_gradient(const IndexRange& indices, const Vector& x) const {
    check_point(x);
    Vector g = Vector::Zero(d());
    Index count = 0;
    for (Index j : indices) {
      data_->add_scaled_row(j, scalar_first(j, data_->row_dot(j, x)), g);
      ++count;
    }
    if (count > 0) g /= static_cast<double>(count);
    add_regularizer_gradient(x, g);
    return g;
  }

  // Per-component gradient-Lipschitz bound L_j.
  double component_lipschitz(Index j) const;

  // Dense Hessian; only meant for small-d reference checks.
  Matrix dense_hessian(const Vector& x) const;
  Matrix dense_component_hessian(Index j, const Vector& x) const;

  void check_point(const Vector& x) const;

 private:
  LossModel(LossFamily family, std::shared_ptr<const Dataset> data, double lambda,
            double reg_factor, double mu, Vector linear_term);
  void check_index(Index j) const;

  LossFamily family_;
  std::shared_ptr<const Dataset> data_;
  double lambda_;
  double reg_factor_;
  double mu_ = 0.0;
  Vector linear_term_;
};

// max |d^2/dt^2 (1 - tanh t)| = 4 / (3 sqrt 3), attained at tanh t = 1/sqrt 3.
inline constexpr double kTanhCurvatureBound = 0.769800358919501;

// Analytic L and Lbar for every supported family.
LipschitzInfo lipschitz_bounds(const LossModel& model);

// Power-iteration estimate of max/mean ||grad^2 f_j|| over the components at
// the given points. Always terminates after max_iters iterations per component.
LipschitzInfo estimate_lipschitz_bounds(const LossModel& model, const Vector& x,
                                        int max_iters = 50, std::uint64_t seed = 0);

LipschitzInfo user_lipschitz(double L, double Lbar);

}  // namespace sarc
