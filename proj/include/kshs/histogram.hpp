#pragma once

#include "kshs/scattering.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace kshs {

inline constexpr double kMinBinUpper = 1e-12;

/// Per-subband histogram ranges: subband i is binned on [0, upper[i]].
struct BinEdges {
    std::vector<double> upper;
    int n_bins = 20;

    int n_bands() const { return static_cast<int>(upper.size()); }
    /// Throws InvalidArgument if any range is non-positive or n_bins < 2.
    void validate() const;

    friend bool operator==(const BinEdges&, const BinEdges&) = default;
};

/// D×N matrix of per-frame histogram vectors, D = n_bands·n_bins. Every
/// n_bins-block of every column is a probability vector.
struct HistogramMatrix {
    Eigen::MatrixXd values;
    int n_bands = 0;
    int n_bins = 0;
    bool normalized_scattering = false;

    Eigen::Index dim() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    bool same_layout(const HistogramMatrix& other) const {
        return n_bands == other.n_bands && n_bins == other.n_bins;
    }
    /// Subset of columns in the given order, same layout.
    HistogramMatrix select(std::span<const Eigen::Index> columns) const;
    /// Checks shape, nonnegativity and block sums (tolerance 1e-9).
    void validate() const;
};

/// Scatters one frame and, if requested, normalizes with the frame mean
/// and the default division guard.
ScatteringMaps frame_scattering(const FrameImage& frame, const FilterBank& bank, int M, bool normalized);

/// Upper range per subband = `quantile` level (linear interpolation) of the
/// pooled coefficients of that subband over all sample maps, floored at 1e-12.
BinEdges calibrate_bins(std::span<const ScatteringMaps> sample_maps, int n_bins, double quantile);

/// Concatenated per-subband histograms of one frame. Values above the
/// upper range fall into the last bin.
Eigen::VectorXd subband_histograms(const ScatteringMaps& s, const BinEdges& edges);

/// Column t is the histogram vector of frame t.
HistogramMatrix build_histogram_matrix(std::span<const FrameImage> frames, const FilterBank& bank,
                                       const BinEdges& edges, bool normalized, int M = 2);

} // namespace kshs
