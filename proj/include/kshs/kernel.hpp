#pragma once

#include "kshs/histogram.hpp"

#include <Eigen/Core>

namespace kshs {

/// Matrix of kernel evaluations between the columns of two histogram matrices.
using GramMatrix = Eigen::MatrixXd;

/// Product over subbands of the per-block Bhattacharyya coefficients
/// Σ_j √(a_j b_j). Accumulated in the log domain; a zero factor yields 0.
/// `a` and `b` must both have n_bands·n_bins entries.
double kernel_vec(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                  int n_bands, int n_bins);

/// Entry (i, j) is kernel_vec(H1.col(i), H2.col(j)).
GramMatrix kernel_matrix(const HistogramMatrix& H1, const HistogramMatrix& H2);

/// κ(H, H); exactly symmetric.
GramMatrix kernel_matrix(const HistogramMatrix& H);

} // namespace kshs
