#pragma once

#include <Eigen/Core>

#include <complex>
#include <memory>

namespace kshs {

using ComplexGrid = Eigen::Array<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;

/// 2D complex FFT of a fixed size. Plans are created once with an
/// estimate-only strategy so repeated runs produce bit-identical output.
/// forward/inverse are safe to call concurrently on one instance.
class Fft2d {
public:
    Fft2d(Eigen::Index rows, Eigen::Index cols);
    ~Fft2d();
    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;
    Fft2d(Fft2d&&) noexcept;
    Fft2d& operator=(Fft2d&&) noexcept;

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }

    ComplexGrid forward(const ComplexGrid& x) const;
    ComplexGrid forward(const Eigen::ArrayXXd& x) const;
    /// Normalized inverse: inverse(forward(x)) == x up to rounding.
    ComplexGrid inverse(const ComplexGrid& x) const;

    void forward_inplace(ComplexGrid& x) const;
    void inverse_inplace(ComplexGrid& x) const;

private:
    struct Plans;
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    std::unique_ptr<Plans> plans_;
};

} // namespace kshs
