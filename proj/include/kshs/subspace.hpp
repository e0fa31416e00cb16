#pragma once

#include "kshs/fingerprint.hpp"
#include "kshs/histogram.hpp"
#include "kshs/kernel.hpp"

#include <Eigen/Core>

#include <vector>

namespace kshs {

/// Coefficients C (Ñ×n) and support histograms H (D×Ñ) describing an
/// orthonormal basis Φ(H)C of an n-dimensional kernel feature subspace.
struct KernelSubspace {
    Eigen::MatrixXd C;
    HistogramMatrix H;
    Fingerprint fingerprint{};

    Eigen::Index dim() const { return C.cols(); }
    Eigen::Index support() const { return C.rows(); }
};

/// max |Cᵀ κ(H,H) C − I|.
double orthogonality_residual(const Eigen::MatrixXd& C, const HistogramMatrix& H);
double orthogonality_residual(const KernelSubspace& s);

/// C = U_{:,1:n} Λ_{1:n}^{-1/2} of κ(H, H), eigenvalues descending.
/// Throws RankDeficiency if fewer than n eigenvalues exceed 1e-10·λ_max.
Eigen::MatrixXd kernel_pca(const HistogramMatrix& H, Eigen::Index n);

enum class SupportStrategy { UniformStride, KernelKMedoids };

/// Ñ distinct column indices of H, ascending. Uniform stride picks
/// ⌊(k + 0.5)·N/Ñ⌋; kernel k-medoids clusters in the kernel-induced
/// metric starting from the stride selection.
std::vector<Eigen::Index> support_indices(const HistogramMatrix& H, Eigen::Index support,
                                          SupportStrategy strategy = SupportStrategy::UniformStride);

HistogramMatrix subsample_support(const HistogramMatrix& H, Eigen::Index support,
                                  SupportStrategy strategy = SupportStrategy::UniformStride);

/// Squared-error basis distance √(n − tr(C₁ᵀκ(H₁,H₂)C₂)), radicand clamped
/// to [0, 2n]. Both inputs must be orthonormal (residual ≤ 1e-4) and share
/// dimension and fingerprint.
double d_se(const KernelSubspace& a, const KernelSubspace& b);

/// Coefficients on `support` closest in d_se to (C, H) among all bases
/// orthonormal with respect to κ(support, support).
Eigen::MatrixXd nystrom_reduce(const Eigen::MatrixXd& C, const HistogramMatrix& H, const HistogramMatrix& support);

struct SubspaceConfig {
    Eigen::Index dim = 5;
    Eigen::Index support = 15;
    SupportStrategy strategy = SupportStrategy::UniformStride;
};

/// Kernel PCA on all columns followed by Nyström reduction onto the support.
KernelSubspace descriptor_from_histograms(const HistogramMatrix& H, const SubspaceConfig& config,
                                          const Fingerprint& fingerprint);

struct DescriptorConfig {
    ScatteringConfig scattering;
    SubspaceConfig subspace;
    BinEdges edges;
    Fingerprint fingerprint{};
};

/// Scattering → histograms → kernel PCA → support selection → Nyström.
/// `bank` must match the frames' size and config.scattering's J, L.
KernelSubspace compute_descriptor(std::span<const FrameImage> frames, const FilterBank& bank,
                                  const DescriptorConfig& config);

} // namespace kshs
