#pragma once

#include <Eigen/Core>

namespace kshs::linalg {

/// Eigenvalues below this fraction of the largest one count as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Symmetric eigendecomposition with eigenvalues sorted descending
/// (stable, so equal eigenvalues keep solver order) and clamped at zero.
struct SymmetricEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;

    /// Number of eigenvalues above kRankTolerance · λ_max.
    Eigen::Index rank() const;
};

SymmetricEigen eigen_descending(const Eigen::MatrixXd& symmetric);

/// U_r Λ_r^{-1/2} over the numerically nonzero spectrum of a PSD Gram
/// matrix; its columns are an orthonormal basis of the feature span.
/// Throws RankDeficiency when fewer than `min_rank` eigenvalues survive.
Eigen::MatrixXd whitening_basis(const Eigen::MatrixXd& gram, Eigen::Index min_rank);

/// Q = V Uᵀ for M = U Σ Vᵀ, the orthogonal Q maximizing tr(M Q).
Eigen::MatrixXd orthogonal_polar(const Eigen::MatrixXd& M);

/// W = V Uᵀ for M = U Σ Vᵀ (M is n×r), the r×n matrix with orthonormal
/// columns maximizing tr(M W).
Eigen::MatrixXd procrustes_maximizer(const Eigen::MatrixXd& M);

Eigen::VectorXd singular_values(const Eigen::MatrixXd& M);

} // namespace kshs::linalg
