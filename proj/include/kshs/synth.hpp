#pragma once

#include "kshs/manifest.hpp"
#include "kshs/random.hpp"

#include <cstdint>
#include <filesystem>

namespace kshs {

struct SynthOptions {
    int classes = 3;
    int videos_per_class = 10;
    int frames = 40;
    std::uint64_t seed = 7;
    WorkingSize size{128, 128};
};

/// Oriented band-pass noise texture of family `family`: a periodic field
/// whose spectrum is concentrated at a family-specific frequency and angle.
/// Returned with zero mean and unit standard deviation.
Grid texture_field(int family, Eigen::Index height, Eigen::Index width, Rng& rng);

/// Frames of one synthetic video: a texture field translating at a constant
/// per-video velocity, mixed with a fresh field of the same family per frame.
std::vector<Grid> synthetic_video(int family, int frames, WorkingSize size, std::uint64_t seed);

/// Writes <out>/<label>_<k>/frame_NNNN.pgm for every video plus
/// <out>/manifest.json, and returns the manifest.
DatasetManifest generate_synthetic_corpus(const std::filesystem::path& out_dir, const SynthOptions& options = {});

} // namespace kshs
