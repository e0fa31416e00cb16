#include "kshs/subspace.hpp"

#include "kshs/error.hpp"
#include "kshs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace kshs {
namespace {

constexpr double kOrthogonalityGate = 1e-4;

std::vector<Eigen::Index> stride_indices(Eigen::Index total, Eigen::Index count) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(count));
    for (Eigen::Index k = 0; k < count; ++k) {
        // Integer form of floor((k + 0.5) * N / Ñ).
        idx[static_cast<std::size_t>(k)] = ((2 * k + 1) * total) / (2 * count);
    }
    return idx;
}

std::vector<Eigen::Index> kernel_kmedoids(const HistogramMatrix& H, Eigen::Index count) {
    const GramMatrix K = kernel_matrix(H);
    const Eigen::Index N = H.cols();
    auto dist = [&](Eigen::Index i, Eigen::Index j) { return std::max(0.0, K(i, i) + K(j, j) - 2.0 * K(i, j)); };

    std::vector<Eigen::Index> medoids = stride_indices(N, count);
    std::vector<Eigen::Index> assignment(static_cast<std::size_t>(N));
    for (int iter = 0; iter < 100; ++iter) {
        for (Eigen::Index i = 0; i < N; ++i) {
            Eigen::Index best = 0;
            for (Eigen::Index m = 1; m < count; ++m) {
                if (dist(i, medoids[static_cast<std::size_t>(m)]) < dist(i, medoids[static_cast<std::size_t>(best)])) best = m;
            }
            assignment[static_cast<std::size_t>(i)] = best;
        }
        bool changed = false;
        for (Eigen::Index m = 0; m < count; ++m) {
            Eigen::Index best = medoids[static_cast<std::size_t>(m)];
            double best_cost = std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < N; ++c) {
                if (assignment[static_cast<std::size_t>(c)] != m) continue;
                double cost = 0.0;
                for (Eigen::Index i = 0; i < N; ++i) {
                    if (assignment[static_cast<std::size_t>(i)] == m) cost += dist(c, i);
                }
                if (cost < best_cost) {
                    best_cost = cost;
                    best = c;
                }
            }
            if (best != medoids[static_cast<std::size_t>(m)]) {
                medoids[static_cast<std::size_t>(m)] = best;
                changed = true;
            }
        }
        if (!changed) break;
    }
    std::sort(medoids.begin(), medoids.end());
    return medoids;
}

void check_compatible(const KernelSubspace& a, const KernelSubspace& b) {
    if (a.fingerprint != b.fingerprint) throw FingerprintMismatch("descriptors come from different calibrations");
    if (a.dim() != b.dim()) {
        throw DimensionError("subspace dimensions differ: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    if (!a.H.same_layout(b.H)) throw StructureMismatch("descriptors have different histogram layouts");
}

} // namespace

double orthogonality_residual(const Eigen::MatrixXd& C, const HistogramMatrix& H) {
    if (C.rows() != H.cols()) throw DimensionError("coefficient rows do not match support columns");
    const Eigen::MatrixXd gram = C.transpose() * kernel_matrix(H) * C;
    return (gram - Eigen::MatrixXd::Identity(C.cols(), C.cols())).cwiseAbs().maxCoeff();
}

double orthogonality_residual(const KernelSubspace& s) { return orthogonality_residual(s.C, s.H); }

Eigen::MatrixXd kernel_pca(const HistogramMatrix& H, Eigen::Index n) {
    if (n < 1) throw InvalidArgument("subspace dimension must be at least 1");
    if (n > H.cols()) {
        throw DimensionError("subspace dimension " + std::to_string(n) + " exceeds column count " +
                             std::to_string(H.cols()));
    }
    return linalg::whitening_basis(kernel_matrix(H), n).leftCols(n);
}

std::vector<Eigen::Index> support_indices(const HistogramMatrix& H, Eigen::Index support, SupportStrategy strategy) {
    if (support < 1) throw InvalidArgument("support size must be at least 1");
    if (support > H.cols()) {
        throw DimensionError("support size " + std::to_string(support) + " exceeds column count " +
                             std::to_string(H.cols()));
    }
    if (strategy == SupportStrategy::KernelKMedoids) return kernel_kmedoids(H, support);
    return stride_indices(H.cols(), support);
}

HistogramMatrix subsample_support(const HistogramMatrix& H, Eigen::Index support, SupportStrategy strategy) {
    const auto idx = support_indices(H, support, strategy);
    return H.select(idx);
}

double d_se(const KernelSubspace& a, const KernelSubspace& b) {
    check_compatible(a, b);
    if (orthogonality_residual(a) > kOrthogonalityGate || orthogonality_residual(b) > kOrthogonalityGate) {
        throw InvalidArgument("d_se requires orthonormal bases");
    }
    const auto n = static_cast<double>(a.dim());
    const double trace = (a.C.transpose() * kernel_matrix(a.H, b.H) * b.C).trace();
    return std::sqrt(std::clamp(n - trace, 0.0, 2.0 * n));
}

Eigen::MatrixXd nystrom_reduce(const Eigen::MatrixXd& C, const HistogramMatrix& H, const HistogramMatrix& support) {
    const Eigen::Index n = C.cols();
    if (C.rows() != H.cols()) throw DimensionError("coefficient rows do not match histogram columns");
    if (support.cols() < n) throw DimensionError("support is smaller than the subspace dimension");
    // Ũ Λ̃^{-1/2}: every orthonormal basis on the support is this times some W with WᵀW = I.
    const Eigen::MatrixXd whiten = linalg::whitening_basis(kernel_matrix(support), n);
    const Eigen::MatrixXd cross = C.transpose() * kernel_matrix(H, support) * whiten;
    return whiten * linalg::procrustes_maximizer(cross);
}

KernelSubspace descriptor_from_histograms(const HistogramMatrix& H, const SubspaceConfig& config,
                                          const Fingerprint& fingerprint) {
    H.validate();
    if (!(config.dim >= 1 && config.dim <= config.support && config.support <= H.cols())) {
        throw DimensionError("need N >= support >= dim >= 1 (N = " + std::to_string(H.cols()) +
                             ", support = " + std::to_string(config.support) + ", dim = " +
                             std::to_string(config.dim) + ")");
    }
    const Eigen::MatrixXd C = kernel_pca(H, config.dim);
    HistogramMatrix support = subsample_support(H, config.support, config.strategy);
    Eigen::MatrixXd reduced = nystrom_reduce(C, H, support);
    return KernelSubspace{std::move(reduced), std::move(support), fingerprint};
}

KernelSubspace compute_descriptor(std::span<const FrameImage> frames, const FilterBank& bank,
                                  const DescriptorConfig& config) {
    if (bank.J() != config.scattering.J || bank.L() != config.scattering.L) {
        throw StructureMismatch("filter bank does not match the scattering configuration");
    }
    const HistogramMatrix H =
        build_histogram_matrix(frames, bank, config.edges, config.scattering.normalized, config.scattering.M);
    return descriptor_from_histograms(H, config.subspace, config.fingerprint);
}

} // namespace kshs
