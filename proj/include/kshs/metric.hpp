#pragma once

#include "kshs/subspace.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace kshs {

/// Basis-invariant distance √(n − ‖C₁ᵀκ(H₁,H₂)C₂‖_*). Singular values are
/// clamped to [0, 1] before summation, so the result lies in [0, √n] and
/// is exactly zero for identical inputs up to rounding of the SVD.
double nuclear_distance(const KernelSubspace& a, const KernelSubspace& b);

/// Brute-force minimum of d_se over O(n) for n ∈ {1, 2}: both signs for
/// n = 1, a 1e-3 rad grid of rotations and reflections for n = 2.
double nuclear_distance_oracle(const KernelSubspace& a, const KernelSubspace& b);

/// Symmetric matrix of pairwise nuclear distances.
struct DistanceMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> ids;
    std::vector<std::string> labels;

    Eigen::Index size() const { return values.rows(); }
};

/// D(i, j) = nuclear_distance(i, j), upper triangle computed and mirrored.
/// `ids` and `labels` may be empty; otherwise they must match in length.
DistanceMatrix pairwise_distances(std::span<const KernelSubspace> descriptors, std::vector<std::string> ids = {},
                                  std::vector<std::string> labels = {});

} // namespace kshs
