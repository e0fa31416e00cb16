#pragma once

#include "kshs/subspace.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace kshs {

enum class MeanClustering { EuclideanKMeans, KernelKMedoids };

struct FrechetOptions {
    Eigen::Index support = 15;
    std::uint64_t seed = 7;
    int max_iter = 50;
    double tol = 1e-7;
    MeanClustering clustering = MeanClustering::EuclideanKMeans;
};

struct FrechetMeanResult {
    KernelSubspace mean;
    /// Objective Σ d²_ncl(mean, member) at initialization and after every iteration.
    std::vector<double> loss_trace;
    int iterations = 0;
    bool converged = false;
};

/// Support histograms of the mean: `support` k-means centroids (k-means++
/// seeding, at most 100 Lloyd iterations) of all members' pooled support
/// columns, each block renormalized onto the simplex.
HistogramMatrix build_mean_support(std::span<const KernelSubspace> members, Eigen::Index support, std::uint64_t seed,
                                   MeanClustering clustering = MeanClustering::EuclideanKMeans);

/// Q_i = polar factor aligning member i to the mean, so that
/// d²_ncl(mean, member_i) = d²_se(mean; C_i Q_i, H_i).
std::vector<Eigen::MatrixXd> align_members(const KernelSubspace& mean, std::span<const KernelSubspace> members);

/// Coefficients on `support` minimizing Σ d²_se(·; C_i Q_i, H_i) subject
/// to orthonormality with respect to κ(support, support).
Eigen::MatrixXd update_basis(const HistogramMatrix& support, std::span<const KernelSubspace> members,
                             std::span<const Eigen::MatrixXd> rotations);

/// Σ_i d²_ncl(mean, member_i).
double frechet_loss(const KernelSubspace& mean, std::span<const KernelSubspace> members);

/// Alternates alignment and basis updates from the support's own principal
/// subspace until the loss changes by less than `tol` or `max_iter` is hit.
/// Each iteration also tries an extrapolated basis along the update
/// direction and keeps it only when it lowers the loss further.
FrechetMeanResult frechet_mean(std::span<const KernelSubspace> members, const FrechetOptions& options = {});

} // namespace kshs
