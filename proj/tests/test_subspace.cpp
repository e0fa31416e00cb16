#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kshs/error.hpp"
#include "kshs/metric.hpp"
#include "kshs/subspace.hpp"
#include "kshs/synth.hpp"
#include "support.hpp"

#include <Eigen/Cholesky>

#include <cmath>

using namespace kshs;
using namespace kshs::testing;

namespace {

// Feature-space energy Σ_i ‖P φ(h_i)‖² captured by the orthonormal basis Φ(H)A.
double captured_energy(const Eigen::MatrixXd& A, const Eigen::MatrixXd& K) {
    return (A.transpose() * K).squaredNorm();
}

// Makes Φ(H)A orthonormal: A (AᵀKA)^{-1/2} via a Cholesky factor.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& K) {
    const Eigen::LLT<Eigen::MatrixXd> llt(A.transpose() * K * A);
    const Eigen::MatrixXd Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(A.cols(), A.cols()));
    return A * Linv.transpose();
}

std::vector<FrameImage> video_frames(int count, Eigen::Index size, std::uint64_t seed, int family = 0) {
    std::vector<FrameImage> frames;
    for (auto& g : synthetic_video(family, count, WorkingSize{size, size}, seed)) frames.emplace_back(std::move(g));
    return frames;
}

// Histogram matrix of a synthetic video with edges calibrated on its own frames.
HistogramMatrix video_histograms(int count, std::uint64_t seed) {
    const auto frames = video_frames(count, 32, seed);
    const FilterBank bank = build_filter_bank(3, 4, 32, 32);
    std::vector<ScatteringMaps> sample;
    for (const auto& f : frames) sample.push_back(frame_scattering(f, bank, 2, true));
    return build_histogram_matrix(frames, bank, calibrate_bins(sample, 20, 0.99), true);
}

} // namespace

TEST_CASE("kernel_pca on a single column") {
    Rng rng(1);
    const HistogramMatrix H = random_histograms(rng, 1);
    const Eigen::MatrixXd C = kernel_pca(H, 1);
    REQUIRE(C.rows() == 1);
    REQUIRE(C.cols() == 1);
    CHECK(std::abs(C(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kernel_pca output is orthonormal and maximizes captured energy") {
    Rng rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const HistogramMatrix H = random_histograms(rng, 20);
        const Eigen::MatrixXd C = kernel_pca(H, 5);
        CHECK(C.rows() == 20);
        CHECK(C.cols() == 5);
        CHECK(orthogonality_residual(C, H) < 1e-8);

        const Eigen::MatrixXd K = kernel_matrix(H);
        const double best = captured_energy(C, K);
        for (int alt = 0; alt < 100; ++alt) {
            const Eigen::MatrixXd A = orthonormalize(random_gaussian(rng, 20, 5), K);
            CHECK(captured_energy(A, K) <= best * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("kernel_pca rank deficiency") {
    Rng rng(3);
    const HistogramMatrix one = random_histograms(rng, 1);
    HistogramMatrix H{one.values.replicate(1, 6), one.n_bands, one.n_bins, false};
    CHECK_THROWS_AS(kernel_pca(H, 2), RankDeficiency);
    CHECK_THROWS_AS(kernel_pca(H, 7), DimensionError);
    CHECK_THROWS_AS(kernel_pca(H, 0), InvalidArgument);
}

TEST_CASE("uniform-stride support indices") {
    Rng rng(4);
    const HistogramMatrix H = random_histograms(rng, 50);
    const std::vector<Eigen::Index> expected{1, 5, 8, 11, 15, 18, 21, 25, 28, 31, 35, 38, 41, 45, 48};
    CHECK(support_indices(H, 15) == expected);
    CHECK(support_indices(H, 1) == std::vector<Eigen::Index>{25});

    const auto all = support_indices(H, 50);
    for (Eigen::Index i = 0; i < 50; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
    CHECK(subsample_support(H, 50).values == H.values);

    const HistogramMatrix odd = random_histograms(rng, 7);
    CHECK(support_indices(odd, 1) == std::vector<Eigen::Index>{3});
    CHECK_THROWS_AS(support_indices(H, 51), DimensionError);
    CHECK_THROWS_AS(support_indices(H, 0), InvalidArgument);
}

TEST_CASE("kernel k-medoids support") {
    Rng rng(5);
    const HistogramMatrix H = random_histograms(rng, 40);
    const auto a = support_indices(H, 8, SupportStrategy::KernelKMedoids);
    const auto b = support_indices(H, 8, SupportStrategy::KernelKMedoids);
    CHECK(a == b);
    REQUIRE(a.size() == 8);
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1] < a[i]);
    CHECK(a.front() >= 0);
    CHECK(a.back() < 40);
    const auto full = support_indices(H, 40, SupportStrategy::KernelKMedoids);
    CHECK(full.size() == 40);
}

TEST_CASE("d_se examples") {
    Rng rng(6);
    for (Eigen::Index n : {1, 3, 5}) {
        const KernelSubspace s = random_descriptor(rng, n);
        CHECK(d_se(s, s) < 1e-6);
        KernelSubspace neg = s;
        neg.C = -s.C;
        CHECK(std::pow(d_se(s, neg), 2) == doctest::Approx(2.0 * static_cast<double>(n)).epsilon(1e-9));
    }
}

TEST_CASE("d_se of disjoint-support histograms is sqrt(n)") {
    Rng rng(7);
    HistogramMatrix A = random_histograms(rng, 12);
    HistogramMatrix B = random_histograms(rng, 12);
    // Band 0 of A lives on bins 0..2, of B on bins 3..5.
    for (Eigen::Index c = 0; c < 12; ++c) {
        A.values.col(c).segment(3, 3).setZero();
        B.values.col(c).segment(0, 3).setZero();
        A.values.col(c).head(6) /= A.values.col(c).head(6).sum();
        B.values.col(c).head(6) /= B.values.col(c).head(6).sum();
    }
    const SubspaceConfig config{3, 8, SupportStrategy::UniformStride};
    const KernelSubspace a = descriptor_from_histograms(A, config, test_fingerprint());
    const KernelSubspace b = descriptor_from_histograms(B, config, test_fingerprint());
    CHECK(std::abs(std::pow(d_se(a, b), 2) - 3.0) < 1e-9);
}

TEST_CASE("d_se errors") {
    Rng rng(8);
    const KernelSubspace a = random_descriptor(rng, 2);
    KernelSubspace other = random_descriptor(rng, 2);
    other.fingerprint[5] ^= 1;
    CHECK_THROWS_AS(d_se(a, other), FingerprintMismatch);
    CHECK_THROWS_AS(d_se(a, random_descriptor(rng, 3)), DimensionError);
    KernelSubspace skew = a;
    skew.C *= 1.1;
    CHECK_THROWS_AS(d_se(a, skew), InvalidArgument);
    CHECK_THROWS_AS(d_se(a, random_descriptor(rng, 2, 20, 10, 3, 6)), StructureMismatch);
}

TEST_CASE("Nystrom reduction with full support recovers the subspace") {
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const HistogramMatrix H = random_histograms(rng, 20);
        const KernelSubspace full{kernel_pca(H, 5), H, test_fingerprint()};
        const KernelSubspace reduced{nystrom_reduce(full.C, H, H), H, test_fingerprint()};
        CHECK(d_se(full, reduced) < 1e-6);
        CHECK(orthogonality_residual(reduced) < 1e-6);
    }
}

TEST_CASE("Nystrom output is orthonormal and optimal among orthonormal candidates") {
    Rng rng(10);
    const HistogramMatrix H = random_histograms(rng, 30);
    const KernelSubspace full{kernel_pca(H, 4), H, test_fingerprint()};
    const HistogramMatrix S = subsample_support(H, 9);
    const KernelSubspace reduced{nystrom_reduce(full.C, H, S), S, test_fingerprint()};
    CHECK(reduced.C.rows() == 9);
    CHECK(reduced.C.cols() == 4);
    CHECK(orthogonality_residual(reduced) < 1e-6);
    const double best = d_se(full, reduced);
    const Eigen::MatrixXd Ks = kernel_matrix(S);
    for (int alt = 0; alt < 100; ++alt) {
        const KernelSubspace candidate{orthonormalize(random_gaussian(rng, 9, 4), Ks), S, test_fingerprint()};
        CHECK(best <= d_se(full, candidate) + 1e-9);
    }
}

TEST_CASE("d_se to the full descriptor is nonincreasing over nested supports") {
    const HistogramMatrix H = video_histograms(40, 12);
    const KernelSubspace full{kernel_pca(H, 5), H, test_fingerprint()};
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& support : nested_supports(H.cols())) {
        const HistogramMatrix S = H.select(support);
        const KernelSubspace reduced{nystrom_reduce(full.C, H, S), S, test_fingerprint()};
        const double d = d_se(full, reduced);
        CHECK(d <= previous + 1e-9);
        previous = d;
    }
    CHECK(previous < 1e-6);
}

TEST_CASE("descriptor of a 50-frame video has the default shapes") {
    const auto frames = video_frames(50, 32, 3, 2);
    const FilterBank bank = build_filter_bank(4, 4, 32, 32);
    std::vector<ScatteringMaps> sample;
    for (std::size_t t = 0; t < frames.size(); t += 10) sample.push_back(frame_scattering(frames[t], bank, 2, false));
    DescriptorConfig config;
    config.edges = calibrate_bins(sample, 20, 0.99);
    config.fingerprint = test_fingerprint();
    const KernelSubspace d = compute_descriptor(frames, bank, config);
    CHECK(d.C.rows() == 15);
    CHECK(d.C.cols() == 5);
    CHECK(d.H.dim() == 2260);
    CHECK(d.H.cols() == 15);
    CHECK(d.fingerprint == test_fingerprint());
    CHECK(orthogonality_residual(d) < 1e-6);

    const KernelSubspace again = compute_descriptor(frames, bank, config);
    CHECK(again.C == d.C);
    CHECK(again.H.values == d.H.values);

    const std::vector<FrameImage> five(frames.begin(), frames.begin() + 5);
    config.subspace = SubspaceConfig{5, 5, SupportStrategy::UniformStride};
    const KernelSubspace square = compute_descriptor(five, bank, config);
    CHECK(square.C.rows() == 5);
    CHECK(square.C.cols() == 5);
    CHECK(orthogonality_residual(square) < 1e-6);

    config.subspace = SubspaceConfig{5, 15, SupportStrategy::UniformStride};
    CHECK_THROWS_AS(compute_descriptor(five, bank, config), DimensionError);
    CHECK_THROWS_AS(compute_descriptor(frames, build_filter_bank(3, 4, 32, 32), config), StructureMismatch);
}

TEST_CASE("frame order does not change the full-support descriptor") {
    // Needs a clear eigen-gap at n; a degenerate spectrum has no unique top-n subspace.
    Rng rng(21);
    const HistogramMatrix H = random_histograms(rng, 12);
    std::vector<Eigen::Index> order{5, 0, 11, 3, 8, 1, 10, 2, 7, 4, 9, 6};
    const HistogramMatrix P = H.select(order);
    const SubspaceConfig config{4, 12, SupportStrategy::UniformStride};
    const KernelSubspace a = descriptor_from_histograms(H, config, test_fingerprint());
    const KernelSubspace b = descriptor_from_histograms(P, config, test_fingerprint());
    CHECK(nuclear_distance(a, b) < 1e-6);
}

TEST_CASE("every emitted descriptor is orthonormal") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const KernelSubspace d = random_descriptor(rng, 1 + static_cast<Eigen::Index>(rng.index(5)), 25, 12);
        CHECK(orthogonality_residual(d) < 1e-6);
        CHECK_NOTHROW(d.H.validate());
    }
}
