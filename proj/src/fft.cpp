#include "kshs/fft.hpp"

#include "kshs/error.hpp"

#include <fftw3.h>

#include <mutex>

namespace kshs {
namespace {

// The FFTW planner is not thread-safe; execution with the new-array
// interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

void check_shape(const ComplexGrid& x, Eigen::Index rows, Eigen::Index cols) {
    if (x.rows() != rows || x.cols() != cols) throw DimensionError("FFT input does not match the planned size");
}

} // namespace

struct Fft2d::Plans {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
    fftw_plan forward_inplace = nullptr;
    fftw_plan inverse_inplace = nullptr;

    ~Plans() {
        std::lock_guard lock(planner_mutex());
        for (fftw_plan p : {forward, inverse, forward_inplace, inverse_inplace}) {
            if (p) fftw_destroy_plan(p);
        }
    }
};

Fft2d::Fft2d(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), plans_(std::make_unique<Plans>()) {
    ComplexGrid in(rows, cols);
    ComplexGrid out(rows, cols);
    // Column-major rows x cols is row-major cols x rows in memory.
    const int n0 = static_cast<int>(cols);
    const int n1 = static_cast<int>(rows);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    plans_->forward = fftw_plan_dft_2d(n0, n1, as_fftw(in.data()), as_fftw(out.data()), FFTW_FORWARD, flags);
    plans_->inverse = fftw_plan_dft_2d(n0, n1, as_fftw(in.data()), as_fftw(out.data()), FFTW_BACKWARD, flags);
    plans_->forward_inplace = fftw_plan_dft_2d(n0, n1, as_fftw(in.data()), as_fftw(in.data()), FFTW_FORWARD, flags);
    plans_->inverse_inplace = fftw_plan_dft_2d(n0, n1, as_fftw(in.data()), as_fftw(in.data()), FFTW_BACKWARD, flags);
}

Fft2d::~Fft2d() = default;
Fft2d::Fft2d(Fft2d&&) noexcept = default;
Fft2d& Fft2d::operator=(Fft2d&&) noexcept = default;

// Out-of-place complex transforms preserve their input, so the const_cast is safe.
ComplexGrid Fft2d::forward(const ComplexGrid& x) const {
    check_shape(x, rows_, cols_);
    ComplexGrid out(rows_, cols_);
    fftw_execute_dft(plans_->forward, as_fftw(const_cast<std::complex<double>*>(x.data())), as_fftw(out.data()));
    return out;
}

ComplexGrid Fft2d::forward(const Eigen::ArrayXXd& x) const {
    return forward(ComplexGrid(x.cast<std::complex<double>>()));
}

ComplexGrid Fft2d::inverse(const ComplexGrid& x) const {
    check_shape(x, rows_, cols_);
    ComplexGrid out(rows_, cols_);
    fftw_execute_dft(plans_->inverse, as_fftw(const_cast<std::complex<double>*>(x.data())), as_fftw(out.data()));
    out /= static_cast<double>(rows_ * cols_);
    return out;
}

void Fft2d::forward_inplace(ComplexGrid& x) const {
    check_shape(x, rows_, cols_);
    fftw_execute_dft(plans_->forward_inplace, as_fftw(x.data()), as_fftw(x.data()));
}

void Fft2d::inverse_inplace(ComplexGrid& x) const {
    check_shape(x, rows_, cols_);
    fftw_execute_dft(plans_->inverse_inplace, as_fftw(x.data()), as_fftw(x.data()));
    x /= static_cast<double>(rows_ * cols_);
}

} // namespace kshs
