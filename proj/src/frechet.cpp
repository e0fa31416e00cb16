#include "kshs/frechet.hpp"

#include "kshs/error.hpp"
#include "kshs/linalg.hpp"
#include "kshs/metric.hpp"
#include "kshs/parallel.hpp"
#include "kshs/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kshs {
namespace {

void check_members(std::span<const KernelSubspace> members) {
    if (members.empty()) throw InvalidArgument("Frechet mean of an empty set");
    const auto& first = members.front();
    for (const auto& m : members) {
        if (m.fingerprint != first.fingerprint) throw FingerprintMismatch("members come from different calibrations");
        if (m.dim() != first.dim()) throw DimensionError("members have different subspace dimensions");
        if (!m.H.same_layout(first.H)) throw StructureMismatch("members have different histogram layouts");
    }
}

Eigen::MatrixXd pooled_columns(std::span<const KernelSubspace> members) {
    Eigen::Index total = 0;
    for (const auto& m : members) total += m.H.cols();
    Eigen::MatrixXd pooled(members.front().H.dim(), total);
    Eigen::Index offset = 0;
    for (const auto& m : members) {
        pooled.middleCols(offset, m.H.cols()) = m.H.values;
        offset += m.H.cols();
    }
    return pooled;
}

std::vector<Eigen::Index> assign_nearest(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                                         Eigen::VectorXd& best_dist) {
    std::vector<Eigen::Index> assignment(static_cast<std::size_t>(points.cols()));
    best_dist.resize(points.cols());
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
        Eigen::Index best = 0;
        double d = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centers.cols(); ++c) {
            const double dc = (points.col(i) - centers.col(c)).squaredNorm();
            if (dc < d) {
                d = dc;
                best = c;
            }
        }
        assignment[static_cast<std::size_t>(i)] = best;
        best_dist(i) = d;
    }
    return assignment;
}

Eigen::MatrixXd kmeans(const Eigen::MatrixXd& points, Eigen::Index k, std::uint64_t seed) {
    const Eigen::Index N = points.cols();
    Rng rng(seed);

    // k-means++ seeding.
    std::vector<Eigen::Index> chosen;
    chosen.push_back(static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(N))));
    Eigen::VectorXd d2 = (points.colwise() - points.col(chosen[0])).colwise().squaredNorm().transpose();
    while (static_cast<Eigen::Index>(chosen.size()) < k) {
        const double total = d2.sum();
        Eigen::Index next = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < N; ++i) {
                acc += d2(i);
                if (d2(i) > 0.0 && acc > target) {
                    next = i;
                    break;
                }
            }
            if (next < 0) {
                for (Eigen::Index i = N - 1; i >= 0; --i) {
                    if (d2(i) > 0.0) {
                        next = i;
                        break;
                    }
                }
            }
        } else {
            // All remaining points coincide with a chosen center.
            for (Eigen::Index i = 0; i < N && next < 0; ++i) {
                if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) next = i;
            }
        }
        chosen.push_back(next);
        d2 = d2.cwiseMin((points.colwise() - points.col(next)).colwise().squaredNorm().transpose());
    }

    Eigen::MatrixXd centers(points.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) centers.col(c) = points.col(chosen[static_cast<std::size_t>(c)]);

    std::vector<Eigen::Index> previous;
    Eigen::VectorXd dist;
    for (int iter = 0; iter < 100; ++iter) {
        auto assignment = assign_nearest(points, centers, dist);
        if (assignment == previous) break;
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(points.rows(), k);
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < N; ++i) {
            sums.col(assignment[static_cast<std::size_t>(i)]) += points.col(i);
            ++counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
        }
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            } else {
                // Re-seed an empty cluster at the worst-fit point.
                Eigen::Index far = 0;
                dist.maxCoeff(&far);
                centers.col(c) = points.col(far);
                dist(far) = 0.0;
            }
        }
        previous = std::move(assignment);
    }
    return centers;
}

void renormalize_blocks(HistogramMatrix& H) {
    for (Eigen::Index c = 0; c < H.cols(); ++c) {
        for (int b = 0; b < H.n_bands; ++b) {
            auto block = H.values.col(c).segment(static_cast<Eigen::Index>(b) * H.n_bins, H.n_bins);
            block = block.cwiseMax(0.0);
            const double s = block.sum();
            if (s > 0.0) {
                block /= s;
            } else {
                block.setZero();
                block(0) = 1.0;
            }
        }
    }
}

} // namespace

HistogramMatrix build_mean_support(std::span<const KernelSubspace> members, Eigen::Index support, std::uint64_t seed,
                                   MeanClustering clustering) {
    check_members(members);
    if (support < members.front().dim()) throw DimensionError("mean support is smaller than the subspace dimension");
    const auto& layout = members.front().H;
    HistogramMatrix pooled{pooled_columns(members), layout.n_bands, layout.n_bins, layout.normalized_scattering};
    if (pooled.cols() < support) {
        throw DimensionError("only " + std::to_string(pooled.cols()) + " pooled columns for a support of " +
                             std::to_string(support));
    }
    if (clustering == MeanClustering::KernelKMedoids) {
        return subsample_support(pooled, support, SupportStrategy::KernelKMedoids);
    }
    HistogramMatrix out{kmeans(pooled.values, support, seed), layout.n_bands, layout.n_bins,
                        layout.normalized_scattering};
    renormalize_blocks(out);
    return out;
}

std::vector<Eigen::MatrixXd> align_members(const KernelSubspace& mean, std::span<const KernelSubspace> members) {
    std::vector<Eigen::MatrixXd> rotations(members.size());
    parallel_for(members.size(), [&](std::size_t i) {
        const auto& m = members[i];
        if (m.dim() != mean.dim()) throw DimensionError("member dimension differs from the mean");
        rotations[i] = linalg::orthogonal_polar(mean.C.transpose() * kernel_matrix(mean.H, m.H) * m.C);
    });
    return rotations;
}

Eigen::MatrixXd update_basis(const HistogramMatrix& support, std::span<const KernelSubspace> members,
                             std::span<const Eigen::MatrixXd> rotations) {
    check_members(members);
    if (rotations.size() != members.size()) throw DimensionError("one rotation per member is required");
    const Eigen::Index n = members.front().dim();
    const Eigen::MatrixXd whiten = linalg::whitening_basis(kernel_matrix(support), n);
    Eigen::MatrixXd target = Eigen::MatrixXd::Zero(support.cols(), n);
    for (std::size_t i = 0; i < members.size(); ++i) {
        target += kernel_matrix(support, members[i].H) * members[i].C * rotations[i];
    }
    // tr(Cᵀ target) = tr((targetᵀ whiten) W), maximized by the polar factor.
    return whiten * linalg::procrustes_maximizer(target.transpose() * whiten);
}

double frechet_loss(const KernelSubspace& mean, std::span<const KernelSubspace> members) {
    std::vector<double> terms(members.size());
    parallel_for(members.size(), [&](std::size_t i) {
        const double d = nuclear_distance(mean, members[i]);
        terms[i] = d * d;
    });
    double loss = 0.0;
    for (double t : terms) loss += t;
    return loss;
}

FrechetMeanResult frechet_mean(std::span<const KernelSubspace> members, const FrechetOptions& options) {
    check_members(members);
    const Eigen::Index n = members.front().dim();

    FrechetMeanResult result;
    result.mean.fingerprint = members.front().fingerprint;
    result.mean.H = build_mean_support(members, options.support, options.seed, options.clustering);
    const Eigen::MatrixXd gram = kernel_matrix(result.mean.H);
    const Eigen::MatrixXd whiten = linalg::whitening_basis(gram, n);
    result.mean.C = whiten.leftCols(n);
    result.loss_trace.push_back(frechet_loss(result.mean, members));

    // Nearest basis orthonormal with respect to the mean support's Gram matrix.
    const auto feasible = [&](const Eigen::MatrixXd& C) {
        const Eigen::MatrixXd W = whiten.transpose() * gram * C;
        return Eigen::MatrixXd(whiten * linalg::procrustes_maximizer(W.transpose()));
    };

    double step = 1.0;
    for (int iter = 0; iter < options.max_iter; ++iter) {
        const auto rotations = align_members(result.mean, members);
        KernelSubspace next = result.mean;
        next.C = update_basis(result.mean.H, members, rotations);
        double loss = frechet_loss(next, members);

        // Extrapolate along this move, measured after rotating the new basis onto
        // the current one; kept only if it lowers the loss further.
        {
            const Eigen::MatrixXd moved =
                next.C * linalg::orthogonal_polar(result.mean.C.transpose() * gram * next.C);
            KernelSubspace ahead = next;
            ahead.C = feasible(moved + step * (moved - result.mean.C));
            const double ahead_loss = frechet_loss(ahead, members);
            if (ahead_loss < loss) {
                next = std::move(ahead);
                loss = ahead_loss;
                step = std::min(2.0 * step, 16.0);
            } else {
                step = std::max(1.0, 0.5 * step);
            }
        }
        result.mean = std::move(next);

        const double delta = std::abs(result.loss_trace.back() - loss);
        result.loss_trace.push_back(loss);
        result.iterations = iter + 1;
        if (delta < options.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

} // namespace kshs
