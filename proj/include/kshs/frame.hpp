#pragma once

#include <Eigen/Core>

namespace kshs {

/// Real 2D grid, rows = image height, cols = image width.
using Grid = Eigen::ArrayXXd;

/// One grayscale frame with intensities in [0, 1].
class FrameImage {
public:
    /// Throws InvalidArgument on non-finite or out-of-range values, or an empty grid.
    explicit FrameImage(Grid pixels);

    const Grid& pixels() const { return pixels_; }
    Eigen::Index height() const { return pixels_.rows(); }
    Eigen::Index width() const { return pixels_.cols(); }
    double mean() const { return pixels_.mean(); }
    double dynamic_range() const { return pixels_.maxCoeff() - pixels_.minCoeff(); }

private:
    Grid pixels_;
};

} // namespace kshs
