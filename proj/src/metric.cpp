#include "kshs/metric.hpp"

#include "kshs/error.hpp"
#include "kshs/linalg.hpp"
#include "kshs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace kshs {
namespace {

void check_pair(const KernelSubspace& a, const KernelSubspace& b) {
    if (a.fingerprint != b.fingerprint) throw FingerprintMismatch("descriptors come from different calibrations");
    if (a.dim() != b.dim()) throw DimensionError("descriptors have different subspace dimensions");
    if (!a.H.same_layout(b.H)) throw StructureMismatch("descriptors have different histogram layouts");
}

Eigen::MatrixXd cross_coefficients(const KernelSubspace& a, const KernelSubspace& b) {
    return a.C.transpose() * kernel_matrix(a.H, b.H) * b.C;
}

} // namespace

double nuclear_distance(const KernelSubspace& a, const KernelSubspace& b) {
    check_pair(a, b);
    const Eigen::VectorXd sv = linalg::singular_values(cross_coefficients(a, b));
    const double nuclear = sv.cwiseMax(0.0).cwiseMin(1.0).sum();
    const auto n = static_cast<double>(a.dim());
    return std::sqrt(std::clamp(n - nuclear, 0.0, n));
}

double nuclear_distance_oracle(const KernelSubspace& a, const KernelSubspace& b) {
    check_pair(a, b);
    const Eigen::Index n = a.dim();
    if (n == 1) {
        KernelSubspace flipped = b;
        flipped.C = -b.C;
        return std::min(d_se(a, b), d_se(a, flipped));
    }
    if (n != 2) throw InvalidArgument("the brute-force oracle supports n = 1 and n = 2 only");

    const Eigen::MatrixXd m = cross_coefficients(a, b);
    constexpr double kStep = 1e-3;
    const auto steps = static_cast<long>(std::ceil(2.0 * std::numbers::pi / kStep));
    double best = -std::numeric_limits<double>::infinity();
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * kStep;
        const double c = std::cos(t);
        const double s = std::sin(t);
        // tr(m·Q) for Q = [[c, −s], [s, c]] and Q = [[c, s], [s, −c]].
        const double rotation = m(0, 0) * c + m(0, 1) * s - m(1, 0) * s + m(1, 1) * c;
        const double reflection = m(0, 0) * c + m(0, 1) * s + m(1, 0) * s - m(1, 1) * c;
        best = std::max({best, rotation, reflection});
    }
    return std::sqrt(std::clamp(2.0 - best, 0.0, 4.0));
}

DistanceMatrix pairwise_distances(std::span<const KernelSubspace> descriptors, std::vector<std::string> ids,
                                  std::vector<std::string> labels) {
    const auto K = static_cast<Eigen::Index>(descriptors.size());
    if (!ids.empty() && ids.size() != descriptors.size()) throw DimensionError("id count does not match descriptors");
    if (!labels.empty() && labels.size() != descriptors.size()) {
        throw DimensionError("label count does not match descriptors");
    }
    for (const auto& d : descriptors) {
        if (d.fingerprint != descriptors.front().fingerprint) {
            throw FingerprintMismatch("descriptor set mixes calibrations");
        }
        if (d.dim() != descriptors.front().dim()) throw DimensionError("descriptor set mixes subspace dimensions");
    }

    DistanceMatrix out{Eigen::MatrixXd::Zero(K, K), std::move(ids), std::move(labels)};
    // Row-major enumeration of the upper triangle including the diagonal.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    pairs.reserve(static_cast<std::size_t>(K * (K + 1) / 2));
    for (Eigen::Index i = 0; i < K; ++i) {
        for (Eigen::Index j = i; j < K; ++j) pairs.emplace_back(i, j);
    }
    parallel_for(pairs.size(), [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        out.values(i, j) = nuclear_distance(descriptors[static_cast<std::size_t>(i)], descriptors[static_cast<std::size_t>(j)]);
    });
    out.values.triangularView<Eigen::StrictlyLower>() = out.values.transpose();
    return out;
}

} // namespace kshs
