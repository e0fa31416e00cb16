#include "kshs/scattering.hpp"

#include "kshs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace kshs {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPeriodization = 2;

// Angular frequency of DFT bin k out of n, in [-π, π).
double bin_frequency(Eigen::Index k, Eigen::Index n) {
    const Eigen::Index shifted = (2 * k < n) ? k : k - n;
    return 2.0 * kPi * static_cast<double>(shifted) / static_cast<double>(n);
}

// Anisotropic Gaussian in frequency centered at `center` along `theta`,
// periodized over neighbouring 2π cells.
double periodized_gaussian(double wy, double wx, double sigma, double slant, double theta, double center) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    double acc = 0.0;
    for (int ky = -kPeriodization; ky <= kPeriodization; ++ky) {
        for (int kx = -kPeriodization; kx <= kPeriodization; ++kx) {
            const double ux = wx + 2.0 * kPi * kx - center * c;
            const double uy = wy + 2.0 * kPi * ky - center * s;
            const double along = ux * c + uy * s;
            const double across = -ux * s + uy * c;
            acc += std::exp(-0.5 * sigma * sigma * (along * along + across * across / (slant * slant)));
        }
    }
    return acc;
}

Grid pool(const Grid& x, int J) {
    const Eigen::Index block = Eigen::Index{1} << J;
    const Eigen::Index rows = x.rows() / block;
    const Eigen::Index cols = x.cols() / block;
    Grid out(rows, cols);
    const double scale = 1.0 / static_cast<double>(block * block);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            out(r, c) = x.block(r * block, c * block, block, block).sum() * scale;
        }
    }
    return out;
}

Grid rectify(const ComplexGrid& spectrum, const Grid& filter, const Fft2d& fft) {
    return fft.inverse(spectrum * filter.cast<std::complex<double>>()).abs();
}

// Spectrum of |IFFT(spectrum · filter)|, computed in one buffer.
void rectified_spectrum(const ComplexGrid& spectrum, const Grid& filter, const Fft2d& fft, ComplexGrid& out) {
    out.resize(spectrum.rows(), spectrum.cols());
    const Eigen::Index n = spectrum.size();
    const std::complex<double>* in = spectrum.data();
    const double* h = filter.data();
    std::complex<double>* o = out.data();
    for (Eigen::Index i = 0; i < n; ++i) o[i] = in[i] * h[i];
    fft.inverse_inplace(out);
    for (Eigen::Index i = 0; i < n; ++i) o[i] = std::sqrt(o[i].real() * o[i].real() + o[i].imag() * o[i].imag());
    fft.forward_inplace(out);
}

// DFT of the causal D-tap averaging window, one axis.
Eigen::ArrayXcd box_response(Eigen::Index n, Eigen::Index taps) {
    Eigen::ArrayXcd r(n);
    for (Eigen::Index q = 0; q < n; ++q) {
        std::complex<double> acc = 0.0;
        for (Eigen::Index s = 0; s < taps; ++s) {
            const double angle = 2.0 * kPi * static_cast<double>(q * s % n) / static_cast<double>(n);
            acc += std::polar(1.0, angle);
        }
        r(q) = acc / static_cast<double>(taps);
    }
    return r;
}

void check_frame(const Grid& x, const FilterBank& bank) {
    if (x.rows() != bank.height() || x.cols() != bank.width()) {
        throw DimensionError("input grid " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                             " does not match filter bank " + std::to_string(bank.height()) + "x" +
                             std::to_string(bank.width()));
    }
}

} // namespace

int band_count(int J, int L, int M) {
    if (M < 1 || M > kMaxDepth) throw InvalidArgument("scattering depth must be 1 or 2");
    int count = 1 + J * L;
    if (M == 2) count += L * L * J * (J - 1) / 2;
    return count;
}

FilterBank::FilterBank(int J, int L, Eigen::Index height, Eigen::Index width)
    : J_(J), L_(L), height_(height), width_(width) {
    if (J < 1 || L < 1) throw InvalidArgument("filter bank needs J >= 1 and L >= 1");
    if (J > 30) throw InvalidArgument("scale count too large");
    const Eigen::Index min_size = Eigen::Index{1} << J;
    if (height < min_size || width < min_size) {
        throw DimensionError("frame " + std::to_string(height) + "x" + std::to_string(width) +
                             " is smaller than 2^J = " + std::to_string(min_size));
    }

    const double slant = 4.0 / static_cast<double>(L);
    const double sigma_phi = 0.8 * std::pow(2.0, J - 1);

    lowpass_.resize(height, width);
    for (Eigen::Index c = 0; c < width; ++c) {
        const double wx = bin_frequency(c, width);
        for (Eigen::Index r = 0; r < height; ++r) {
            lowpass_(r, c) = periodized_gaussian(bin_frequency(r, height), wx, sigma_phi, 1.0, 0.0, 0.0);
        }
    }
    lowpass_ /= lowpass_(0, 0);

    bandpass_.reserve(static_cast<std::size_t>(J * L));
    for (int j = 0; j < J; ++j) {
        const double sigma = 0.8 * std::pow(2.0, j);
        const double xi = center_frequency(j);
        for (int l = 0; l < L; ++l) {
            const double theta = orientation(l);
            const double dc_gabor = periodized_gaussian(0.0, 0.0, sigma, slant, theta, xi);
            const double dc_envelope = periodized_gaussian(0.0, 0.0, sigma, slant, theta, 0.0);
            const double beta = dc_gabor / dc_envelope;
            Grid psi(height, width);
            for (Eigen::Index c = 0; c < width; ++c) {
                const double wx = bin_frequency(c, width);
                for (Eigen::Index r = 0; r < height; ++r) {
                    const double wy = bin_frequency(r, height);
                    psi(r, c) = periodized_gaussian(wy, wx, sigma, slant, theta, xi) -
                                beta * periodized_gaussian(wy, wx, sigma, slant, theta, 0.0);
                }
            }
            psi(0, 0) = 0.0;
            bandpass_.push_back(std::move(psi));
        }
    }

    // Largest uniform bandpass gain keeping |φ̂|² + s²Σ|ψ̂|² <= 1 everywhere.
    const Grid low_energy = lowpass_.square();
    Grid band_energy = Grid::Zero(height, width);
    for (const auto& psi : bandpass_) band_energy += psi.square();
    double gain_sq = 1.0;
    for (Eigen::Index i = 0; i < band_energy.size(); ++i) {
        if (band_energy(i) > 0.0) {
            gain_sq = std::min(gain_sq, std::max(0.0, 1.0 - low_energy(i)) / band_energy(i));
        }
    }
    const double gain = std::sqrt(gain_sq);
    for (auto& psi : bandpass_) psi *= gain;
    lp_bound_ = (low_energy + gain_sq * band_energy).maxCoeff();

    fft_ = std::make_shared<const Fft2d>(height, width);

    const Eigen::Index block = Eigen::Index{1} << J;
    if (height % block == 0 && width % block == 0) {
        const Eigen::ArrayXcd by = box_response(height, block);
        const Eigen::ArrayXcd bx = box_response(width, block);
        pool_response_.resize(height, width);
        for (Eigen::Index c = 0; c < width; ++c) {
            for (Eigen::Index r = 0; r < height; ++r) pool_response_(r, c) = lowpass_(r, c) * by(r) * bx(c);
        }
        pooled_fft_ = std::make_shared<const Fft2d>(height / block, width / block);
    }
}

Grid FilterBank::lowpass_pooled(const ComplexGrid& spectrum) const {
    if (!pooled_fft_) {
        const Grid spatial = fft_->inverse(spectrum * lowpass_.cast<std::complex<double>>()).real().max(0.0);
        return pool(spatial, J_);
    }
    // Decimating the box-filtered signal by D folds its spectrum onto the
    // coarse grid: Z(k) = D^-2 Σ_{a,b} X(k + (a, b)·N/D).
    const Eigen::Index rows = pooled_height();
    const Eigen::Index cols = pooled_width();
    const Eigen::Index block = Eigen::Index{1} << J_;
    const ComplexGrid filtered = spectrum * pool_response_;
    ComplexGrid folded = ComplexGrid::Zero(rows, cols);
    for (Eigen::Index b = 0; b < block; ++b) {
        for (Eigen::Index a = 0; a < block; ++a) folded += filtered.block(a * rows, b * cols, rows, cols);
    }
    folded /= static_cast<double>(block * block);
    pooled_fft_->inverse_inplace(folded);
    return folded.real().max(0.0);
}

double FilterBank::center_frequency(int j) const { return 0.75 * kPi / std::pow(2.0, j); }

double FilterBank::orientation(int l) const { return kPi * static_cast<double>(l) / static_cast<double>(L_); }

FilterBank build_filter_bank(int J, int L, Eigen::Index height, Eigen::Index width) {
    return FilterBank(J, L, height, width);
}

PsiOutput psi_decompose(const Grid& x, const FilterBank& bank) {
    check_frame(x, bank);
    if (!x.allFinite()) throw InvalidArgument("psi_decompose input contains non-finite values");
    const ComplexGrid spectrum = bank.fft().forward(x);
    PsiOutput out;
    out.lowpass = bank.fft().inverse(spectrum * bank.lowpass().cast<std::complex<double>>()).real();
    out.rectified.reserve(bank.bandpass().size());
    for (const auto& psi : bank.bandpass()) out.rectified.push_back(rectify(spectrum, psi, bank.fft()));
    return out;
}

std::vector<ScatteringPath> enumerate_paths(int J, int L, int M) {
    if (M < 1 || M > kMaxDepth) throw InvalidArgument("scattering depth must be 1 or 2");
    std::vector<ScatteringPath> paths;
    paths.push_back(ScatteringPath{});
    for (int j1 = 0; j1 < J; ++j1) {
        for (int l1 = 0; l1 < L; ++l1) paths.push_back({1, j1, l1, -1, -1, -1});
    }
    if (M == 2) {
        for (int j1 = 0; j1 < J; ++j1) {
            for (int l1 = 0; l1 < L; ++l1) {
                const int parent = 1 + j1 * L + l1;
                for (int j2 = j1 + 1; j2 < J; ++j2) {
                    for (int l2 = 0; l2 < L; ++l2) paths.push_back({2, j1, l1, j2, l2, parent});
                }
            }
        }
    }
    return paths;
}

ScatteringMaps scattering_transform(const FrameImage& frame, const FilterBank& bank, int M) {
    if (M < 1 || M > kMaxDepth) {
        throw InvalidArgument("unsupported scattering depth " + std::to_string(M) + " (supported: 1, 2)");
    }
    check_frame(frame.pixels(), bank);

    const Fft2d& fft = bank.fft();
    const int J = bank.J();
    const int L = bank.L();

    ScatteringMaps out;
    out.paths = enumerate_paths(J, L, M);
    out.maps.resize(out.paths.size());

    const ComplexGrid spectrum = fft.forward(frame.pixels());
    out.maps[0] = bank.lowpass_pooled(spectrum);

    std::vector<ComplexGrid> first_order(static_cast<std::size_t>(J * L));
    for (int j1 = 0; j1 < J; ++j1) {
        for (int l1 = 0; l1 < L; ++l1) {
            const std::size_t k = static_cast<std::size_t>(j1 * L + l1);
            rectified_spectrum(spectrum, bank.bandpass(j1, l1), fft, first_order[k]);
            out.maps[1 + k] = bank.lowpass_pooled(first_order[k]);
        }
    }

    if (M == 2) {
        std::size_t index = static_cast<std::size_t>(1 + J * L);
        ComplexGrid second;
        for (int j1 = 0; j1 < J; ++j1) {
            for (int l1 = 0; l1 < L; ++l1) {
                const ComplexGrid& first = first_order[static_cast<std::size_t>(j1 * L + l1)];
                for (int j2 = j1 + 1; j2 < J; ++j2) {
                    for (int l2 = 0; l2 < L; ++l2) {
                        rectified_spectrum(first, bank.bandpass(j2, l2), fft, second);
                        out.maps[index++] = bank.lowpass_pooled(second);
                    }
                }
            }
        }
    }
    return out;
}

ScatteringMaps normalize_subbands(const ScatteringMaps& s, double frame_avg, double eps) {
    if (s.normalized) throw InvalidArgument("scattering maps are already normalized");
    if (!(eps > 0.0)) throw InvalidArgument("normalization eps must be positive");
    ScatteringMaps out = s;
    const double denom = std::max(frame_avg, eps);
    for (std::size_t i = 0; i < s.paths.size(); ++i) {
        const ScatteringPath& p = s.paths[i];
        if (p.order == 1) {
            out.maps[i] = s.maps[i] / denom;
        } else if (p.order == 2) {
            out.maps[i] = s.maps[i] / s.maps[static_cast<std::size_t>(p.parent)].max(eps);
        }
    }
    out.normalized = true;
    return out;
}

double normalization_eps(const FrameImage& frame) {
    const double range = frame.dynamic_range();
    return 1e-12 * (range > 0.0 ? range : 1.0);
}

} // namespace kshs
