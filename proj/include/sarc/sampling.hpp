#pragma once

#include <vector>

#include "sarc/problem.hpp"
#include "sarc/rng.hpp"

namespace sarc {

enum class SamplingScheme { uniform, nonuniform };

std::string_view to_string(SamplingScheme scheme);
SamplingScheme sampling_scheme_from_string(std::string_view name);

// Real-valued pieces of a sample-size bound, before ceil and the cap at n.
struct SizeBound {
  double first_branch = 0.0;
  double second_branch = 0.0;
  double log_factor = 0.0;
  double value() const;
};

// max{16 L^2/eps^2, 4L/eps} * log(2d/delta)
SizeBound uniform_size_bound(double eps, double per_iter_delta, double L, Index d);
// max{4 Lbar^2/eps^2, (2L/eps) (n + 1/p_min - 2)/n} * log(2d/delta)
SizeBound nonuniform_size_bound(double eps, double per_iter_delta, double L, double Lbar, double p_min, Index d,
                                Index n);

// Resolved cardinalities, capped at n. A result of n means "use the exact Hessian".
Index sample_size_uniform(double eps, double per_iter_delta, double L, Index d, Index n);
Index sample_size_nonuniform(double eps, double per_iter_delta, double L, double Lbar, double p_min, Index d,
                             Index n);

// Per-iteration failure probability delta * eps_target^exponent, so that
// log(2d / per_iter) = log(2d eps_target^-exponent / delta).
double per_iteration_delta(double delta, double eps_target, double exponent);

// Curvature-proportional distribution p_j ∝ |h_j''(a_j^T x)| ||a_j||^2.
// p_min is the smallest nonzero entry (0/0 := 0 for rows with zero curvature).
struct CurvatureDistribution {
  std::vector<double> probabilities;
  double p_min = 0.0;
  bool degenerate = false;  // every weight is zero
};

CurvatureDistribution nonuniform_distribution(const LossModel& model, const Vector& x);

struct SamplingPlan {
  SamplingScheme scheme = SamplingScheme::uniform;
  double eps_i = 1.0;           // tolerance the sample size is computed for
  double per_iter_delta = 0.1;
  Index size = 1;
  bool exact = false;           // size reached n: use the deduplicated full Hessian
  std::vector<double> probabilities;  // empty for uniform
  double p_min = 0.0;
  // Bookkeeping about how the plan was resolved.
  Index uniform_size = 0;
  Index nonuniform_size = 0;
  bool fell_back_to_uniform = false;
};

// Resolves the sample size for tolerance eps_i. For the non-uniform scheme the
// smaller of the two resolved sizes wins; a degenerate curvature distribution
// falls back to uniform sampling.
SamplingPlan resolve_sampling_plan(const LossModel& model, const Vector& x, const LipschitzInfo& lip,
                                   SamplingScheme scheme, double eps_i, double per_iter_delta);

SamplingPlan exact_plan(Index n);
SamplingPlan fixed_size_plan(const LossModel& model, const Vector& x, SamplingScheme scheme, Index size);

// v -> (1/(n|S|)) sum_{j in S} (1/p_j) grad^2 f_j(x) v + shift v.
// Component Hessians are never formed: the operator keeps one curvature
// scalar per distinct sampled row. The model must outlive the operator.
class SubsampledHessian {
 public:
  static SubsampledHessian build(const LossModel& model, const Vector& x, const SamplingPlan& plan,
                                 CounterRng& rng, double shift);
  static SubsampledHessian exact(const LossModel& model, const Vector& x, double shift);

  Vector apply(const Vector& v) const;
  // Same operator without the shift.
  Vector apply_unshifted(const Vector& v) const;

  Index dim() const { return base_point_.size(); }
  double shift() const { return shift_; }
  const Vector& base_point() const { return base_point_; }
  // Indices in draw order (empty in exact mode).
  const std::vector<Index>& draws() const { return draws_; }
  // Component Hessian queries charged for this construction: |S|, or n in exact mode.
  Index query_count() const { return query_count_; }
  bool is_exact() const { return exact_; }

  Matrix to_dense(bool include_shift = true) const;

 private:
  SubsampledHessian() = default;
  void finalize_rows(const LossModel& model, std::vector<std::pair<Index, double>> weighted);

  const LossModel* model_ = nullptr;
  Vector base_point_;
  std::vector<Index> draws_;
  std::vector<Index> rows_;
  std::vector<double> row_coeff_;  // weight_j * h_j''(a_j^T x)
  double reg_diag_ = 0.0;          // (sum of weights) * regularizer curvature
  double shift_ = 0.0;
  Index query_count_ = 0;
  bool exact_ = false;
};

// ||H~ - grad^2 f(x)||_2 via a dense symmetric eigendecomposition. Test
// instrumentation; refuses dimensions above dense_cap.
double spectral_error(const SubsampledHessian& op, const LossModel& model, const Vector& x, Index dense_cap = 512);
double spectral_error(const SubsampledHessian& op, const Matrix& exact_hessian, Index dense_cap = 512);

}  // namespace sarc
