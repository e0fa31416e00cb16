#include "kshs/frames.hpp"

#include "kshs/error.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

namespace kshs {

FrameImage::FrameImage(Grid pixels) : pixels_(std::move(pixels)) {
    if (pixels_.size() == 0) throw InvalidArgument("frame is empty");
    if (!pixels_.allFinite()) throw InvalidArgument("frame contains non-finite values");
    if (pixels_.minCoeff() < 0.0 || pixels_.maxCoeff() > 1.0) {
        throw InvalidArgument("frame intensities must lie in [0, 1]");
    }
}

namespace {

bool has_extension(const std::filesystem::path& p, std::string_view ext) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e == ext;
}

// Skips whitespace and '#' comments between PNM header tokens.
void skip_pnm_space(std::istream& in) {
    while (in) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

Grid read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw FormatError(path.string() + ": only binary PGM (P5) is supported");
    long width = 0, height = 0, maxval = 0;
    skip_pnm_space(in);
    in >> width;
    skip_pnm_space(in);
    in >> height;
    skip_pnm_space(in);
    in >> maxval;
    if (!in || width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
        throw FormatError(path.string() + ": malformed or non-8-bit PGM header");
    }
    in.get();
    std::vector<unsigned char> buf(static_cast<std::size_t>(width * height));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw FormatError(path.string() + ": truncated PGM");
    Grid g(height, width);
    for (long r = 0; r < height; ++r) {
        for (long c = 0; c < width; ++c) g(r, c) = buf[static_cast<std::size_t>(r * width + c)] / static_cast<double>(maxval);
    }
    return g;
}

Grid read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw IoError(path.string() + ": " + image.message);
    }
    // Read as 8-bit RGB so color and gray sources share one luminance path.
    image.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw IoError(path.string() + ": " + msg);
    }
    const auto height = static_cast<Eigen::Index>(image.height);
    const auto width = static_cast<Eigen::Index>(image.width);
    Grid g(height, width);
    for (Eigen::Index r = 0; r < height; ++r) {
        for (Eigen::Index c = 0; c < width; ++c) {
            const std::size_t o = static_cast<std::size_t>((r * width + c) * 3);
            g(r, c) = luminance(buf[o] / 255.0, buf[o + 1] / 255.0, buf[o + 2] / 255.0);
        }
    }
    return g.max(0.0).min(1.0);
}

} // namespace

double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

Grid resize_bilinear(const Grid& src, Eigen::Index height, Eigen::Index width) {
    if (height <= 0 || width <= 0) throw DimensionError("resize target must be positive");
    if (src.rows() == height && src.cols() == width) return src;
    Grid out(height, width);
    const double sy = static_cast<double>(src.rows()) / static_cast<double>(height);
    const double sx = static_cast<double>(src.cols()) / static_cast<double>(width);
    const Eigen::Index max_r = src.rows() - 1;
    const Eigen::Index max_c = src.cols() - 1;
    for (Eigen::Index c = 0; c < width; ++c) {
        const double fx = std::clamp((static_cast<double>(c) + 0.5) * sx - 0.5, 0.0, static_cast<double>(max_c));
        const auto x0 = static_cast<Eigen::Index>(std::floor(fx));
        const Eigen::Index x1 = std::min(x0 + 1, max_c);
        const double ax = fx - static_cast<double>(x0);
        for (Eigen::Index r = 0; r < height; ++r) {
            const double fy = std::clamp((static_cast<double>(r) + 0.5) * sy - 0.5, 0.0, static_cast<double>(max_r));
            const auto y0 = static_cast<Eigen::Index>(std::floor(fy));
            const Eigen::Index y1 = std::min(y0 + 1, max_r);
            const double ay = fy - static_cast<double>(y0);
            out(r, c) = (1 - ay) * ((1 - ax) * src(y0, x0) + ax * src(y0, x1)) +
                        ay * ((1 - ax) * src(y1, x0) + ax * src(y1, x1));
        }
    }
    return out;
}

Grid read_image(const std::filesystem::path& path) {
    if (has_extension(path, ".pgm")) return read_pgm(path);
    if (has_extension(path, ".png")) return read_png(path);
    throw FormatError(path.string() + ": unsupported image type (expected .pgm or .png)");
}

void write_pgm(const std::filesystem::path& path, const Grid& pixels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
    std::vector<unsigned char> buf(static_cast<std::size_t>(pixels.size()));
    for (Eigen::Index r = 0; r < pixels.rows(); ++r) {
        for (Eigen::Index c = 0; c < pixels.cols(); ++c) {
            const double v = std::clamp(pixels(r, c), 0.0, 1.0);
            buf[static_cast<std::size_t>(r * pixels.cols() + c)] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (has_extension(entry.path(), ".pgm") || has_extension(entry.path(), ".png")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

std::vector<FrameImage> load_frames(const std::filesystem::path& dir, WorkingSize size) {
    const auto files = list_frame_files(dir);
    if (files.empty()) throw IoError("no PGM/PNG frames in " + dir.string());
    std::vector<FrameImage> frames;
    frames.reserve(files.size());
    for (const auto& f : files) frames.emplace_back(resize_bilinear(read_image(f), size.height, size.width));
    return frames;
}

} // namespace kshs
