#include "kshs/kernel.hpp"

#include "kshs/error.hpp"
#include "kshs/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace kshs {
namespace {

// Both inputs are elementwise square roots of histogram vectors.
double kernel_from_roots(const double* a, const double* b, int n_bands, int n_bins) {
    double log_sum = 0.0;
    for (int band = 0; band < n_bands; ++band) {
        const double* pa = a + static_cast<std::ptrdiff_t>(band) * n_bins;
        const double* pb = b + static_cast<std::ptrdiff_t>(band) * n_bins;
        double coefficient = 0.0;
        for (int j = 0; j < n_bins; ++j) coefficient += pa[j] * pb[j];
        if (coefficient <= 0.0) return 0.0;
        log_sum += std::log(std::min(coefficient, 1.0));
    }
    return std::exp(log_sum);
}

Eigen::MatrixXd roots(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0).cwiseSqrt(); }

void check_layout(const HistogramMatrix& H1, const HistogramMatrix& H2) {
    if (!H1.same_layout(H2) || H1.dim() != H2.dim() ||
        H1.dim() != static_cast<Eigen::Index>(H1.n_bands) * H1.n_bins) {
        throw StructureMismatch("histogram matrices have different band/bin structure");
    }
}

} // namespace

double kernel_vec(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                  int n_bands, int n_bins) {
    const Eigen::Index dim = static_cast<Eigen::Index>(n_bands) * n_bins;
    if (n_bands < 1 || n_bins < 1 || a.size() != dim || b.size() != dim) {
        throw StructureMismatch("histogram vectors do not match the band/bin structure");
    }
    const Eigen::VectorXd ra = a.cwiseMax(0.0).cwiseSqrt();
    const Eigen::VectorXd rb = b.cwiseMax(0.0).cwiseSqrt();
    return kernel_from_roots(ra.data(), rb.data(), n_bands, n_bins);
}

GramMatrix kernel_matrix(const HistogramMatrix& H1, const HistogramMatrix& H2) {
    check_layout(H1, H2);
    const Eigen::MatrixXd r1 = roots(H1.values);
    const Eigen::MatrixXd r2 = roots(H2.values);
    GramMatrix K(H1.cols(), H2.cols());
    parallel_for(static_cast<std::size_t>(H2.cols()), [&](std::size_t jj) {
        const auto j = static_cast<Eigen::Index>(jj);
        for (Eigen::Index i = 0; i < H1.cols(); ++i) {
            K(i, j) = kernel_from_roots(r1.col(i).data(), r2.col(j).data(), H1.n_bands, H1.n_bins);
        }
    });
    return K;
}

GramMatrix kernel_matrix(const HistogramMatrix& H) {
    check_layout(H, H);
    const Eigen::MatrixXd r = roots(H.values);
    const Eigen::Index n = H.cols();
    GramMatrix K(n, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t jj) {
        const auto j = static_cast<Eigen::Index>(jj);
        for (Eigen::Index i = 0; i <= j; ++i) {
            K(i, j) = kernel_from_roots(r.col(i).data(), r.col(j).data(), H.n_bands, H.n_bins);
        }
    });
    K.triangularView<Eigen::StrictlyLower>() = K.transpose();
    return K;
}

} // namespace kshs
