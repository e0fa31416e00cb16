#pragma once

#include "kshs/fft.hpp"
#include "kshs/frame.hpp"

#include <memory>
#include <vector>

namespace kshs {

/// Order-2 paths are restricted to j2 > j1 and depth to at most 2.
inline constexpr int kMaxDepth = 2;

/// Number of retained subbands: 1 + J·L for depth 1, plus L²·J(J−1)/2
/// frequency-decreasing order-2 paths for depth 2.
int band_count(int J, int L, int M);

/// Frequency-domain Morlet filter bank for frames of one fixed size.
///
/// Bandpass (j, l) is a Gabor at center frequency (3π/4)/2^j along angle
/// πl/L with its DC leakage removed (Morlet), periodized over the 2π grid.
/// The lowpass is a Gaussian normalized to unit DC gain. Bandpass filters
/// are jointly rescaled so that |φ̂|² + Σ|ψ̂|² never exceeds one, which
/// makes the decomposition non-expansive.
class FilterBank {
public:
    FilterBank(int J, int L, Eigen::Index height, Eigen::Index width);

    int J() const { return J_; }
    int L() const { return L_; }
    Eigen::Index height() const { return height_; }
    Eigen::Index width() const { return width_; }

    const Grid& lowpass() const { return lowpass_; }
    const Grid& bandpass(int j, int l) const { return bandpass_[static_cast<std::size_t>(j * L_ + l)]; }
    const std::vector<Grid>& bandpass() const { return bandpass_; }
    double littlewood_paley_bound() const { return lp_bound_; }

    /// Center frequency magnitude (rad/sample) of scale j.
    double center_frequency(int j) const;
    /// Orientation (rad) of orientation index l.
    double orientation(int l) const;

    const Fft2d& fft() const { return *fft_; }

    /// Output grid of the scattering maps: (H/2^J)×(W/2^J).
    Eigen::Index pooled_height() const { return height_ >> J_; }
    Eigen::Index pooled_width() const { return width_ >> J_; }

    /// Lowpass followed by 2^J×2^J average pooling, from a full-resolution
    /// spectrum to the pooled grid. Negative rounding residue is clipped.
    Grid lowpass_pooled(const ComplexGrid& spectrum) const;

private:
    int J_;
    int L_;
    Eigen::Index height_;
    Eigen::Index width_;
    Grid lowpass_;
    std::vector<Grid> bandpass_;
    double lp_bound_ = 0.0;
    std::shared_ptr<const Fft2d> fft_;
    // φ̂ times the spectrum of the pooling box; set when 2^J divides H and W.
    ComplexGrid pool_response_;
    std::shared_ptr<const Fft2d> pooled_fft_;
};

FilterBank build_filter_bank(int J, int L, Eigen::Index height, Eigen::Index width);

/// One application of the decomposition operator: lowpass output without
/// modulus, followed by the J·L rectified bandpass outputs in (j, l) order.
/// All outputs are at full input resolution.
struct PsiOutput {
    Grid lowpass;
    std::vector<Grid> rectified;
};

PsiOutput psi_decompose(const Grid& x, const FilterBank& bank);

struct ScatteringPath {
    int order = 0;
    int j1 = -1;
    int l1 = -1;
    int j2 = -1;
    int l2 = -1;
    /// Index of the order-1 parent map for order-2 paths, otherwise -1.
    int parent = -1;

    friend bool operator==(const ScatteringPath&, const ScatteringPath&) = default;
};

/// Path list in canonical order: order 0, order 1 by (j1, l1), order 2 by (j1, l1, j2, l2).
std::vector<ScatteringPath> enumerate_paths(int J, int L, int M);

struct ScatteringMaps {
    std::vector<ScatteringPath> paths;
    /// One (H/2^J)×(W/2^J) map per path.
    std::vector<Grid> maps;
    bool normalized = false;

    std::size_t size() const { return maps.size(); }
};

ScatteringMaps scattering_transform(const FrameImage& frame, const FilterBank& bank, int M);

/// Order-1 maps are divided by max(frame_avg, eps), order-2 maps
/// elementwise by max(parent order-1 map, eps). Order 0 is unchanged.
ScatteringMaps normalize_subbands(const ScatteringMaps& s, double frame_avg, double eps);

/// Division guard used by the pipeline: 1e-12 times the frame's dynamic
/// range (or times one for a flat frame).
double normalization_eps(const FrameImage& frame);

} // namespace kshs
