#pragma once

#include "kshs/frame.hpp"

#include <filesystem>
#include <vector>

namespace kshs {

struct WorkingSize {
    Eigen::Index height = 128;
    Eigen::Index width = 128;

    friend bool operator==(const WorkingSize&, const WorkingSize&) = default;
};

double luminance(double r, double g, double b);

/// Bilinear resampling with pixel-center alignment and edge clamping.
Grid resize_bilinear(const Grid& src, Eigen::Index height, Eigen::Index width);

/// Decodes an 8-bit PGM (P5) or PNG into [0, 1] luminance.
Grid read_image(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Grid& pixels);

/// PGM/PNG files in `dir`, sorted by file name.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

/// Loads every frame of `dir` in file-name order, resized to `size`.
std::vector<FrameImage> load_frames(const std::filesystem::path& dir, WorkingSize size);

} // namespace kshs
