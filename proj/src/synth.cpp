#include "kshs/synth.hpp"

#include "kshs/error.hpp"
#include "kshs/fft.hpp"
#include "kshs/random.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace kshs {
namespace {

struct Family {
    const char* label;
    double frequency;  // rad/sample
    double angle;      // rad
    double bandwidth;  // rad
    double contrast;   // intensity std
};

// Distinct orientation, scale and contrast per family; beyond the third,
// families rotate through further orientations.
Family family_params(int family) {
    static constexpr Family kBase[] = {
        {"stripes", 0.9, 0.0, 0.15, 0.16},
        {"waves", 0.45, std::numbers::pi / 2, 0.10, 0.12},
        {"blobs", 0.18, std::numbers::pi / 4, 0.12, 0.20},
    };
    const int k = family % 3;
    Family f = kBase[k];
    f.angle += (family / 3) * std::numbers::pi / 7;
    return f;
}

std::string family_label(int family) {
    const Family f = family_params(family);
    if (family < 3) return f.label;
    return std::string(f.label) + std::to_string(family / 3);
}

double bin_frequency(Eigen::Index k, Eigen::Index n) {
    const Eigen::Index shifted = (2 * k < n) ? k : k - n;
    return 2.0 * std::numbers::pi * static_cast<double>(shifted) / static_cast<double>(n);
}

Grid to_intensity(const Grid& field, double contrast) { return (0.5 + contrast * field).max(0.0).min(1.0); }

Grid circular_shift(const Grid& g, Eigen::Index dy, Eigen::Index dx) {
    Grid out(g.rows(), g.cols());
    const Eigen::Index R = g.rows();
    const Eigen::Index C = g.cols();
    for (Eigen::Index c = 0; c < C; ++c) {
        const Eigen::Index sc = ((c - dx) % C + C) % C;
        for (Eigen::Index r = 0; r < R; ++r) out(r, c) = g(((r - dy) % R + R) % R, sc);
    }
    return out;
}

} // namespace

Grid texture_field(int family, Eigen::Index height, Eigen::Index width, Rng& rng) {
    const Family f = family_params(family);
    Grid noise(height, width);
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = rng.normal();
    const Fft2d fft(height, width);
    ComplexGrid spec = fft.forward(noise);
    const double cx = f.frequency * std::cos(f.angle);
    const double cy = f.frequency * std::sin(f.angle);
    for (Eigen::Index c = 0; c < width; ++c) {
        const double wx = bin_frequency(c, width);
        for (Eigen::Index r = 0; r < height; ++r) {
            const double wy = bin_frequency(r, height);
            const double a = (wx - cx) * (wx - cx) + (wy - cy) * (wy - cy);
            const double b = (wx + cx) * (wx + cx) + (wy + cy) * (wy + cy);
            const double s2 = 2.0 * f.bandwidth * f.bandwidth;
            spec(r, c) *= std::exp(-a / s2) + std::exp(-b / s2);
        }
    }
    Grid field = fft.inverse(spec).real();
    field -= field.mean();
    const double sd = std::sqrt(field.square().mean());
    if (sd > 0.0) field /= sd;
    return field;
}

std::vector<Grid> synthetic_video(int family, int frames, WorkingSize size, std::uint64_t seed) {
    if (frames < 1) throw InvalidArgument("synthetic video needs at least one frame");
    Rng rng(seed);
    const Family f = family_params(family);
    const Grid base = texture_field(family, size.height, size.width, rng);
    const double heading = 2.0 * std::numbers::pi * rng.uniform();
    const double speed = 0.75 + 1.5 * rng.uniform();
    constexpr double kInnovation = 0.35;
    std::vector<Grid> out;
    out.reserve(static_cast<std::size_t>(frames));
    for (int t = 0; t < frames; ++t) {
        const auto dy = static_cast<Eigen::Index>(std::lround(speed * t * std::sin(heading)));
        const auto dx = static_cast<Eigen::Index>(std::lround(speed * t * std::cos(heading)));
        const Grid fresh = texture_field(family, size.height, size.width, rng);
        const Grid mixed = (circular_shift(base, dy, dx) + kInnovation * fresh) / std::sqrt(1.0 + kInnovation * kInnovation);
        out.push_back(to_intensity(mixed, f.contrast));
    }
    return out;
}

DatasetManifest generate_synthetic_corpus(const std::filesystem::path& out_dir, const SynthOptions& options) {
    if (options.classes < 1 || options.videos_per_class < 1) throw InvalidArgument("corpus needs classes and videos");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    DatasetManifest manifest;
    manifest.working_size = options.size;
    Rng seeder(options.seed);
    for (int c = 0; c < options.classes; ++c) {
        const std::string label = family_label(c);
        for (int v = 0; v < options.videos_per_class; ++v) {
            char id[64];
            std::snprintf(id, sizeof(id), "%s_%02d", label.c_str(), v);
            const auto dir = out_dir / id;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
            const auto frames = synthetic_video(c, options.frames, options.size, seeder.index(~std::uint64_t{0}));
            for (std::size_t t = 0; t < frames.size(); ++t) {
                char name[32];
                std::snprintf(name, sizeof(name), "frame_%04zu.pgm", t);
                write_pgm(dir / name, frames[t]);
            }
            manifest.entries.push_back({id, dir, label});
        }
    }
    write_manifest(out_dir / "manifest.json", manifest);
    return manifest;
}

} // namespace kshs
