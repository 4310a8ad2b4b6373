#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "sarc/problem.hpp"

namespace sarc {

// Symmetric linear operator v -> H v.
using LinearOperator = std::function<Vector(const Vector&)>;

// m(s) = f0 + g^T s + 1/2 s^T H s + (sigma/3) ||s||^3
struct CubicModel {
  Vector g;
  LinearOperator H;
  double sigma = 1.0;
  double f0 = 0.0;

  double value(const Vector& s) const;
};

// g + H s + sigma ||s|| s, one operator application.
Vector model_gradient(const CubicModel& model, const Vector& s);

enum class TerminationKind {
  // ||grad m|| <= kappa * min(||grad f||, ||grad f||^3, ||s||^2), subspace optimal
  subspace_optimal,
  // ||grad m|| <= kappa * min(1, ||s||) * min(||s||, ||grad f||)
  accelerated,
};

struct TerminationSpec {
  TerminationKind kind = TerminationKind::subspace_optimal;
  double kappa_theta = 0.05;

  // The subspace-optimal rule needs 0 < kappa < min(1/2, 2 sigma_min / 3);
  // the accelerated rule needs kappa in (0, 1/2).
  void validate(double sigma_min) const;
  double bound(double grad_f_norm, double step_norm) const;
  bool satisfied(double residual, double grad_f_norm, double step_norm) const;
};

struct TridiagonalCubicSolution {
  Vector y;
  double lambda = 0.0;  // sigma ||y||
  bool hard_case = false;
};

// Global minimizer of y -> gnorm e1^T y + 1/2 y^T T y + (sigma/3)||y||^3 for
// the symmetric tridiagonal T with diagonal `diag` and off-diagonal `offdiag`
// (size k-1). Solves (T + lambda I) y = -gnorm e1, lambda = sigma ||y|| by a
// bracketed Newton iteration on the secular function, using LDL^T
// factorizations of the shifted tridiagonal.
TridiagonalCubicSolution solve_tridiagonal_cubic(const Vector& diag, const Vector& offdiag, double gnorm,
                                                 double sigma);

// Smallest eigenvalue of a symmetric tridiagonal matrix (Sturm bisection).
double tridiagonal_min_eigenvalue(const Vector& diag, const Vector& offdiag);

enum class SubproblemBackend { lanczos, gradient_descent };

struct SubproblemOptions {
  Index max_dim = 0;  // 0 means d
  SubproblemBackend backend = SubproblemBackend::lanczos;
  // Only re-orthogonalize when the local loss of orthogonality exceeds sqrt(eps).
  bool selective_reorthogonalization = false;
  bool keep_basis = false;
  Index gd_max_iters = 20000;
};

struct SubproblemResult {
  Vector s;
  double model_decrease = 0.0;  // f0 - m(s)
  double residual_norm = 0.0;   // ||grad m(s)||
  double step_norm = 0.0;
  Index krylov_dim = 0;
  Index hvp_count = 0;
  bool met_condition = false;
  bool exhausted = false;   // reached max_dim without meeting the rule
  bool breakdown = false;   // invariant Krylov space found
  double orthogonality_loss = 0.0;  // max |Q^T Q - I|, Lanczos only
  std::vector<double> subspace_values;  // optimal model value for k = 1, 2, ...
  Matrix basis;  // Q (d x k) when keep_basis is set
};

// Approximately minimizes the cubic model. The Lanczos backend grows a Krylov
// space from g one vector at a time, solves the projected cubic exactly and
// stops at the first step meeting `spec`; the returned step is optimal over
// the final subspace. A zero gradient returns s = 0.
SubproblemResult minimize_model(const CubicModel& model, const TerminationSpec& spec, double grad_f_norm,
                                const SubproblemOptions& options = {});

}  // namespace sarc
