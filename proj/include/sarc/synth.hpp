#pragma once

#include <cstdint>

#include "sarc/problem.hpp"

namespace sarc {

// Gaussian rows a_j ~ N(0, row_scale^2 I / d), with row 0 multiplied by
// skew. Labels are sign(a_j^T w) for a planted w ~ N(0, 4 I), with 10% of
// them flipped. Deterministic in (n, d, seed, skew, row_scale).
Dataset synth_logistic(Index n, Index d, std::uint64_t seed, double skew = 1.0, double row_scale = 1.0);

// Least-squares data whose objective (1/n) sum (a_j^T x - b_j)^2 has the
// Hessian diag(eigenvalues) and minimizer x_star. One row per coordinate.
Dataset synth_diagonal_quadratic(const Vector& eigenvalues, const Vector& x_star);

}  // namespace sarc
