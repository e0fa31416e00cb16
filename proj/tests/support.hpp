#pragma once

// Random fixtures shared by the unit and acceptance suites.

#include "kshs/histogram.hpp"
#include "kshs/random.hpp"
#include "kshs/subspace.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <filesystem>
#include <string>

namespace kshs::testing {

inline Fingerprint test_fingerprint() {
    Fingerprint fp{};
    fp[0] = 0x4b;
    fp[31] = 0x53;
    return fp;
}

/// Probability vector of length `bins` concentrated around a random mode.
inline Eigen::VectorXd random_block(Rng& rng, int bins, double spread) {
    Eigen::VectorXd p(bins);
    for (int j = 0; j < bins; ++j) p(j) = -std::log(1.0 - rng.uniform()) * spread + 1e-3;
    return p / p.sum();
}

using BlockBase = std::vector<Eigen::VectorXd>;

inline BlockBase random_base(Rng& rng, int bands, int bins) {
    BlockBase base;
    for (int b = 0; b < bands; ++b) base.push_back(random_block(rng, bins, 1.0));
    return base;
}

/// Columns jittered around per-block base distributions.
inline HistogramMatrix histograms_around(Rng& rng, const BlockBase& base, Eigen::Index columns, double jitter) {
    const auto bands = static_cast<int>(base.size());
    const auto bins = static_cast<int>(base.front().size());
    HistogramMatrix H{Eigen::MatrixXd(static_cast<Eigen::Index>(bands) * bins, columns), bands, bins, false};
    for (Eigen::Index c = 0; c < columns; ++c) {
        for (int b = 0; b < bands; ++b) {
            Eigen::VectorXd block = base[static_cast<std::size_t>(b)] + jitter * random_block(rng, bins, 1.0);
            H.values.col(c).segment(static_cast<Eigen::Index>(b) * bins, bins) = block / block.sum();
        }
    }
    return H;
}

/// Columns jittered around a common per-block "video" distribution, so
/// kernel values within a matrix are well away from both 0 and 1.
inline HistogramMatrix random_histograms(Rng& rng, Eigen::Index columns, int bands = 4, int bins = 6,
                                         double jitter = 0.6) {
    const BlockBase base = random_base(rng, bands, bins);
    return histograms_around(rng, base, columns, jitter);
}

inline KernelSubspace random_descriptor(Rng& rng, Eigen::Index n, Eigen::Index columns = 20, Eigen::Index support = 10,
                                        int bands = 4, int bins = 6) {
    const HistogramMatrix H = random_histograms(rng, columns, bands, bins);
    return descriptor_from_histograms(H, SubspaceConfig{n, support, SupportStrategy::UniformStride},
                                      test_fingerprint());
}

/// Descriptors of one "class": every member's histograms scatter around a
/// shared base, each member adding its own base offset.
inline std::vector<KernelSubspace> random_class(Rng& rng, std::size_t count, Eigen::Index n, Eigen::Index columns = 20,
                                                Eigen::Index support = 10, int bands = 4, int bins = 6) {
    const BlockBase shared = random_base(rng, bands, bins);
    std::vector<KernelSubspace> out;
    for (std::size_t i = 0; i < count; ++i) {
        BlockBase own = shared;
        for (auto& block : own) {
            block += 0.3 * random_block(rng, bins, 1.0);
            block /= block.sum();
        }
        out.push_back(descriptor_from_histograms(histograms_around(rng, own, columns, 0.6),
                                                 SubspaceConfig{n, support, SupportStrategy::UniformStride},
                                                 test_fingerprint()));
    }
    return out;
}

inline Eigen::MatrixXd random_gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
    return m;
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
inline Eigen::MatrixXd random_orthogonal(Rng& rng, Eigen::Index n) {
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_gaussian(rng, n, n));
    Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (R(i, i) < 0) Q.col(i) *= -1.0;
    }
    return Q;
}

inline KernelSubspace rotated(const KernelSubspace& s, const Eigen::MatrixXd& Q) {
    KernelSubspace out = s;
    out.C = s.C * Q;
    return out;
}

/// Uniform-stride positions ⌊(k + 0.5)·n/m⌋ for k < m.
inline std::vector<Eigen::Index> stride_positions(Eigen::Index n, Eigen::Index m) {
    std::vector<Eigen::Index> out;
    for (Eigen::Index k = 0; k < m; ++k) out.push_back((2 * k + 1) * n / (2 * m));
    return out;
}

/// Nested supports of sizes 5 ⊂ 10 ⊂ 15 ⊂ N (requires N ≥ 15): 15 by
/// uniform stride over N, 5 by stride within those, 10 adds a stride pick
/// of the remaining ten.
inline std::vector<std::vector<Eigen::Index>> nested_supports(Eigen::Index N) {
    std::vector<Eigen::Index> s15;
    for (Eigen::Index p : stride_positions(N, 15)) s15.push_back(p);
    std::vector<Eigen::Index> s5;
    std::vector<Eigen::Index> rest;
    const auto pick5 = stride_positions(15, 5);
    for (Eigen::Index i = 0; i < 15; ++i) {
        if (std::find(pick5.begin(), pick5.end(), i) != pick5.end()) {
            s5.push_back(s15[static_cast<std::size_t>(i)]);
        } else {
            rest.push_back(s15[static_cast<std::size_t>(i)]);
        }
    }
    std::vector<Eigen::Index> s10 = s5;
    for (Eigen::Index p : stride_positions(10, 5)) s10.push_back(rest[static_cast<std::size_t>(p)]);
    std::sort(s10.begin(), s10.end());
    std::vector<Eigen::Index> all(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) all[static_cast<std::size_t>(i)] = i;
    return {s5, s10, s15, all};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("kshs_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace kshs::testing
