#include "kshs/histogram.hpp"

#include "kshs/error.hpp"
#include "kshs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kshs {

void BinEdges::validate() const {
    if (n_bins < 2) throw InvalidArgument("histograms need at least 2 bins");
    if (upper.empty()) throw InvalidArgument("bin edges are empty");
    for (double r : upper) {
        if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("bin upper edges must be positive and finite");
    }
}

HistogramMatrix HistogramMatrix::select(std::span<const Eigen::Index> columns) const {
    HistogramMatrix out{Eigen::MatrixXd(dim(), static_cast<Eigen::Index>(columns.size())), n_bands, n_bins,
                        normalized_scattering};
    for (std::size_t k = 0; k < columns.size(); ++k) out.values.col(static_cast<Eigen::Index>(k)) = values.col(columns[k]);
    return out;
}

void HistogramMatrix::validate() const {
    if (n_bands < 1 || n_bins < 2) throw StructureMismatch("histogram matrix has invalid band/bin counts");
    if (values.rows() != static_cast<Eigen::Index>(n_bands) * n_bins) {
        throw StructureMismatch("histogram matrix row count does not equal n_bands * n_bins");
    }
    if (values.cols() < 1) throw DimensionError("histogram matrix has no columns");
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        for (int b = 0; b < n_bands; ++b) {
            const auto block = values.col(c).segment(static_cast<Eigen::Index>(b) * n_bins, n_bins);
            if (!block.allFinite() || block.minCoeff() < 0.0 || std::abs(block.sum() - 1.0) > 1e-9) {
                throw InvalidArgument("histogram column " + std::to_string(c) + " block " + std::to_string(b) +
                                      " is not a probability vector");
            }
        }
    }
}

ScatteringMaps frame_scattering(const FrameImage& frame, const FilterBank& bank, int M, bool normalized) {
    ScatteringMaps s = scattering_transform(frame, bank, M);
    if (!normalized) return s;
    return normalize_subbands(s, frame.mean(), normalization_eps(frame));
}

BinEdges calibrate_bins(std::span<const ScatteringMaps> sample_maps, int n_bins, double quantile) {
    if (sample_maps.empty()) throw InvalidArgument("calibration sample is empty");
    if (!(quantile > 0.0 && quantile <= 1.0)) throw InvalidArgument("quantile must lie in (0, 1]");
    if (n_bins < 2) throw InvalidArgument("histograms need at least 2 bins");
    const auto& reference = sample_maps.front().paths;
    for (const auto& s : sample_maps) {
        if (s.paths != reference || s.maps.size() != reference.size()) {
            throw StructureMismatch("calibration sample maps have different path structures");
        }
    }

    BinEdges edges;
    edges.n_bins = n_bins;
    edges.upper.resize(reference.size());
    std::vector<double> pooled;
    for (std::size_t band = 0; band < reference.size(); ++band) {
        pooled.clear();
        for (const auto& s : sample_maps) {
            const Grid& m = s.maps[band];
            pooled.insert(pooled.end(), m.data(), m.data() + m.size());
        }
        if (pooled.empty()) throw InvalidArgument("calibration subband has no coefficients");
        std::sort(pooled.begin(), pooled.end());
        const double pos = quantile * static_cast<double>(pooled.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, pooled.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        const double value = pooled[lo] + frac * (pooled[hi] - pooled[lo]);
        edges.upper[band] = std::max(value, kMinBinUpper);
    }
    return edges;
}

Eigen::VectorXd subband_histograms(const ScatteringMaps& s, const BinEdges& edges) {
    if (static_cast<int>(s.maps.size()) != edges.n_bands()) {
        throw StructureMismatch("scattering has " + std::to_string(s.maps.size()) + " subbands but edges have " +
                                std::to_string(edges.n_bands()));
    }
    const int bins = edges.n_bins;
    Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(edges.n_bands()) * bins);
    for (int band = 0; band < edges.n_bands(); ++band) {
        const Grid& m = s.maps[static_cast<std::size_t>(band)];
        if (m.size() == 0) throw StructureMismatch("empty subband map");
        const double scale = bins / edges.upper[static_cast<std::size_t>(band)];
        auto block = h.segment(static_cast<Eigen::Index>(band) * bins, bins);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            const double pos = std::max(0.0, m(i)) * scale;
            const int bin = pos >= bins ? bins - 1 : static_cast<int>(pos);
            block(bin) += 1.0;
        }
        block /= static_cast<double>(m.size());
    }
    return h;
}

HistogramMatrix build_histogram_matrix(std::span<const FrameImage> frames, const FilterBank& bank,
                                       const BinEdges& edges, bool normalized, int M) {
    if (frames.empty()) throw InvalidArgument("video has no frames");
    edges.validate();
    if (edges.n_bands() != band_count(bank.J(), bank.L(), M)) {
        throw StructureMismatch("bin edges do not match the scattering configuration");
    }
    HistogramMatrix H{Eigen::MatrixXd(static_cast<Eigen::Index>(edges.n_bands()) * edges.n_bins,
                                      static_cast<Eigen::Index>(frames.size())),
                      edges.n_bands(), edges.n_bins, normalized};
    parallel_for(frames.size(), [&](std::size_t t) {
        H.values.col(static_cast<Eigen::Index>(t)) =
            subband_histograms(frame_scattering(frames[t], bank, M, normalized), edges);
    });
    return H;
}

} // namespace kshs
