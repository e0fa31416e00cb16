#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kshs/error.hpp"
#include "kshs/frames.hpp"
#include "kshs/manifest.hpp"
#include "kshs/parallel.hpp"
#include "kshs/serialize.hpp"
#include "kshs/synth.hpp"
#include "support.hpp"

#include <png.h>

#include <atomic>
#include <cstring>
#include <fstream>
#include <set>

using namespace kshs;
using namespace kshs::testing;
namespace fs = std::filesystem;

namespace {

// Binary PGM written byte by byte, independent of the library writer.
void raw_pgm(const fs::path& path, int width, int height, std::uint8_t value) {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# test\n" << width << ' ' << height << "\n255\n";
    const std::string body(static_cast<std::size_t>(width * height), static_cast<char>(value));
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
}

std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
           static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

double le_f64(const std::vector<std::uint8_t>& b, std::size_t at) {
    std::uint64_t bits = 0;
    for (int k = 7; k >= 0; --k) bits = bits << 8 | b[at + static_cast<std::size_t>(k)];
    double v = 0.0;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

DescriptorFile random_file(Rng& rng, Eigen::Index n, std::uint32_t flags) {
    DescriptorFile f;
    f.subspace = random_descriptor(rng, n, 20, 10, 4, 6);
    for (int b = 0; b < 4; ++b) f.edges.upper.push_back(0.1 + rng.uniform());
    f.edges.n_bins = 6;
    f.subspace.fingerprint = calibration_fingerprint(ScatteringConfig{}, WorkingSize{}, f.edges);
    f.flags = flags;
    return f;
}

} // namespace

TEST_CASE("PGM frames load scaled to [0, 1]") {
    const fs::path dir = scratch_dir("pgm");
    for (int i = 0; i < 3; ++i) raw_pgm(dir / ("f" + std::to_string(i) + ".pgm"), 16, 12, 128);
    const auto frames = load_frames(dir, WorkingSize{12, 16});
    REQUIRE(frames.size() == 3);
    for (const auto& f : frames) {
        CHECK(f.height() == 12);
        CHECK(f.width() == 16);
        CHECK((f.pixels() == 128.0 / 255.0).all());
    }
}

TEST_CASE("empty and missing directories are errors") {
    const fs::path dir = scratch_dir("empty");
    CHECK_THROWS_AS(load_frames(dir, WorkingSize{}), IoError);
    CHECK_THROWS_AS(load_frames(dir / "missing", WorkingSize{}), IoError);
    std::ofstream(dir / "notes.txt") << "not a frame";
    CHECK_THROWS_AS(load_frames(dir, WorkingSize{}), IoError);
}

TEST_CASE("mixed frame sizes are resized to the working size in name order") {
    const fs::path dir = scratch_dir("mixed");
    raw_pgm(dir / "b.pgm", 100, 80, 10);
    raw_pgm(dir / "a.pgm", 200, 160, 200);
    raw_pgm(dir / "c.pgm", 100, 80, 90);
    const auto files = list_frame_files(dir);
    REQUIRE(files.size() == 3);
    CHECK(files[0].filename() == "a.pgm");
    CHECK(files[2].filename() == "c.pgm");
    const auto frames = load_frames(dir, WorkingSize{128, 128});
    REQUIRE(frames.size() == 3);
    for (const auto& f : frames) {
        CHECK(f.height() == 128);
        CHECK(f.width() == 128);
    }
    CHECK(frames[0].pixels()(5, 5) == doctest::Approx(200.0 / 255.0));
    CHECK(frames[1].pixels()(5, 5) == doctest::Approx(10.0 / 255.0));
}

TEST_CASE("malformed PGM files are rejected") {
    const fs::path dir = scratch_dir("badpgm");
    std::ofstream(dir / "ascii.pgm") << "P2\n2 2\n255\n0 0 0 0\n";
    CHECK_THROWS_AS(read_image(dir / "ascii.pgm"), FormatError);
    {
        std::ofstream out(dir / "short.pgm", std::ios::binary);
        out << "P5\n4 4\n255\n" << "abc";
    }
    CHECK_THROWS_AS(read_image(dir / "short.pgm"), FormatError);
    std::ofstream(dir / "deep.pgm") << "P5\n2 2\n65535\n";
    CHECK_THROWS_AS(read_image(dir / "deep.pgm"), FormatError);
}

TEST_CASE("color PNG frames are converted to luminance") {
    const fs::path dir = scratch_dir("png");
    std::vector<std::uint8_t> rgb;
    for (int i = 0; i < 6 * 4; ++i) rgb.insert(rgb.end(), {200, 100, 50});
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = 6;
    image.height = 4;
    image.format = PNG_FORMAT_RGB;
    REQUIRE(png_image_write_to_file(&image, (dir / "frame.png").c_str(), 0, rgb.data(), 0, nullptr) != 0);
    const Grid g = read_image(dir / "frame.png");
    CHECK(g.rows() == 4);
    CHECK(g.cols() == 6);
    const double expected = (0.299 * 200 + 0.587 * 100 + 0.114 * 50) / 255.0;
    CHECK((g - expected).abs().maxCoeff() < 1e-12);
}

TEST_CASE("bilinear resize") {
    Grid row(1, 4);
    row << 0.0, 1.0, 2.0, 3.0;
    const Grid half = resize_bilinear(row, 1, 2);
    CHECK(half(0, 0) == doctest::Approx(0.5));
    CHECK(half(0, 1) == doctest::Approx(2.5));
    CHECK((resize_bilinear(row, 1, 4) == row).all());
    const Grid flat = resize_bilinear(Grid::Constant(7, 5, 0.25), 13, 11);
    CHECK((flat - 0.25).abs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(resize_bilinear(row, 0, 4), DimensionError);
    CHECK(luminance(1.0, 1.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("PGM writer round trip") {
    const fs::path dir = scratch_dir("pgmrt");
    Grid g(3, 5);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = static_cast<double>(i * 17 % 256) / 255.0;
    write_pgm(dir / "x.pgm", g);
    CHECK((read_image(dir / "x.pgm") - g).abs().maxCoeff() < 1e-12);
}

TEST_CASE("descriptor file layout") {
    Rng rng(1);
    const DescriptorFile f = random_file(rng, 3, kFlagNormalizedScattering);
    const auto bytes = encode_descriptor(f);
    const std::size_t D = 24;
    const std::size_t S = 10;
    const std::size_t n = 3;
    REQUIRE(bytes.size() == 5 + 2 + 4 + 5 * 4 + 32 + 8 * (4 + D * S + S * n));
    CHECK(std::string(bytes.begin(), bytes.begin() + 5) == "KSHS1");
    CHECK((bytes[5] | bytes[6] << 8) == 1);
    CHECK(le32(bytes, 7) == kFlagNormalizedScattering);
    CHECK(le32(bytes, 11) == D);
    CHECK(le32(bytes, 15) == S);
    CHECK(le32(bytes, 19) == n);
    CHECK(le32(bytes, 23) == 4);
    CHECK(le32(bytes, 27) == 6);
    CHECK(std::equal(f.subspace.fingerprint.begin(), f.subspace.fingerprint.end(), bytes.begin() + 31));
    CHECK(le_f64(bytes, 63) == f.edges.upper[0]);
    const std::size_t h0 = 63 + 8 * 4;
    CHECK(le_f64(bytes, h0) == f.subspace.H.values(0, 0));
    CHECK(le_f64(bytes, h0 + 8) == f.subspace.H.values(1, 0));
    const std::size_t c0 = h0 + 8 * D * S;
    CHECK(le_f64(bytes, c0) == f.subspace.C(0, 0));
    CHECK(le_f64(bytes, c0 + 8) == f.subspace.C(1, 0));
}

TEST_CASE("descriptor round trip is bit-exact") {
    Rng rng(2);
    const fs::path dir = scratch_dir("desc");
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t flags = static_cast<std::uint32_t>(rng.index(4));
        const DescriptorFile f = random_file(rng, 1 + static_cast<Eigen::Index>(rng.index(5)), flags);
        const auto bytes = encode_descriptor(f);
        const DescriptorFile g = decode_descriptor(bytes);
        CHECK(g.subspace.C == f.subspace.C);
        CHECK(g.subspace.H.values == f.subspace.H.values);
        CHECK(g.subspace.H.n_bands == f.subspace.H.n_bands);
        CHECK(g.subspace.H.n_bins == f.subspace.H.n_bins);
        CHECK(g.subspace.fingerprint == f.subspace.fingerprint);
        CHECK(g.edges == f.edges);
        CHECK(g.flags == flags);
        CHECK(encode_descriptor(g) == bytes);

        write_descriptor(dir / "d.kshs", f);
        const DescriptorFile h = read_descriptor(dir / "d.kshs", f.subspace.fingerprint);
        CHECK(encode_descriptor(h) == bytes);
    }
}

TEST_CASE("descriptor load errors") {
    Rng rng(3);
    const fs::path dir = scratch_dir("descerr");
    const DescriptorFile f = random_file(rng, 2, 0);
    write_descriptor(dir / "d.kshs", f);
    Fingerprint other = f.subspace.fingerprint;
    other[0] ^= 1;
    CHECK_THROWS_AS(read_descriptor(dir / "d.kshs", other), FingerprintMismatch);

    auto bytes = encode_descriptor(f);
    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    CHECK_THROWS_AS(decode_descriptor(truncated), FormatError);
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_descriptor(trailing), FormatError);
    auto magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(decode_descriptor(magic), FormatError);
    auto version = bytes;
    version[5] = 9;
    CHECK_THROWS_AS(decode_descriptor(version), FormatError);
    CHECK_THROWS_AS(read_descriptor(dir / "missing.kshs"), IoError);
}

TEST_CASE("calibration round trip and tamper detection") {
    Calibration cal;
    cal.scattering = ScatteringConfig{3, 6, 2, true};
    cal.working_size = WorkingSize{96, 64};
    cal.edges = BinEdges{{0.5, 1e-12, 3.25}, 12};
    cal.quantile = 0.95;
    const auto bytes = encode_calibration(cal);
    const Calibration back = decode_calibration(bytes);
    CHECK(back.scattering == cal.scattering);
    CHECK(back.working_size == cal.working_size);
    CHECK(back.edges == cal.edges);
    CHECK(back.quantile == cal.quantile);
    CHECK(back.fingerprint() == cal.fingerprint());
    CHECK(encode_calibration(back) == bytes);

    const fs::path dir = scratch_dir("cal");
    write_calibration(dir / "edges.bin", cal);
    CHECK(encode_calibration(read_calibration(dir / "edges.bin")) == bytes);

    auto tampered = bytes;
    tampered[tampered.size() - 1] ^= 0x01;
    CHECK_THROWS_AS(decode_calibration(tampered), FingerprintMismatch);
}

TEST_CASE("calibration fingerprint covers every field") {
    const ScatteringConfig sc{};
    const WorkingSize ws{};
    const BinEdges e{{0.5, 0.25}, 20};
    const Fingerprint base = calibration_fingerprint(sc, ws, e);
    CHECK(calibration_fingerprint(sc, ws, e) == base);
    std::set<Fingerprint> seen{base};
    seen.insert(calibration_fingerprint(ScatteringConfig{3, 4, 2, false}, ws, e));
    seen.insert(calibration_fingerprint(ScatteringConfig{4, 5, 2, false}, ws, e));
    seen.insert(calibration_fingerprint(ScatteringConfig{4, 4, 1, false}, ws, e));
    seen.insert(calibration_fingerprint(ScatteringConfig{4, 4, 2, true}, ws, e));
    seen.insert(calibration_fingerprint(sc, WorkingSize{128, 64}, e));
    seen.insert(calibration_fingerprint(sc, ws, BinEdges{{0.5, 0.25}, 21}));
    seen.insert(calibration_fingerprint(sc, ws, BinEdges{{0.5, std::nextafter(0.25, 1.0)}, 20}));
    CHECK(seen.size() == 8);

    const std::string abc = "abc";
    const std::vector<std::uint8_t> msg(abc.begin(), abc.end());
    CHECK(to_hex(sha256(msg)) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("distance CSV round trip") {
    Rng rng(4);
    std::vector<KernelSubspace> set;
    for (int i = 0; i < 5; ++i) set.push_back(random_descriptor(rng, 2));
    const DistanceMatrix D = pairwise_distances(set, {"a", "b", "c", "d", "e"});
    const fs::path dir = scratch_dir("csv");
    write_distance_csv(dir / "dist.csv", D);
    std::ifstream in(dir / "dist.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "a,b,c,d,e");
    const DistanceMatrix back = read_distance_csv(dir / "dist.csv");
    CHECK(back.ids == D.ids);
    CHECK((back.values - D.values).cwiseAbs().maxCoeff() < 1e-12);

    const DistanceMatrix bad = pairwise_distances(std::span(set).first(1), {"x,y"});
    CHECK_THROWS_AS(write_distance_csv(dir / "bad.csv", bad), FormatError);
}

TEST_CASE("manifest is order preserving") {
    const fs::path dir = scratch_dir("manifest");
    DatasetManifest m;
    m.working_size = WorkingSize{64, 96};
    m.entries = {{"zeta", dir / "z", "b"}, {"alpha", dir / "a", "a"}, {"mid", "/abs/elsewhere", "b"}};
    write_manifest(dir / "manifest.json", m);
    const DatasetManifest back = read_manifest(dir / "manifest.json");
    REQUIRE(back.entries.size() == 3);
    CHECK(back.entries[0].id == "zeta");
    CHECK(back.entries[1].id == "alpha");
    CHECK(back.entries[2].id == "mid");
    CHECK(fs::weakly_canonical(back.entries[0].frames_dir) == fs::weakly_canonical(dir / "z"));
    CHECK(back.entries[2].frames_dir == fs::path("/abs/elsewhere"));
    CHECK(back.entries[1].label == "a");
    CHECK(back.working_size == m.working_size);

    m.entries.push_back({"zeta", dir / "again", "c"});
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
    std::ofstream(dir / "broken.json") << "{\"entries\": [";
    CHECK_THROWS_AS(read_manifest(dir / "broken.json"), FormatError);
    CHECK_THROWS_AS(read_manifest(dir / "nothing.json"), IoError);
}

TEST_CASE("descriptor index round trip") {
    const fs::path dir = scratch_dir("index");
    const DescriptorIndex index{"00ff", {{"v1", "x", "v1.kshs"}, {"v0", "y", "v0.kshs"}}};
    write_descriptor_index(dir, index);
    const DescriptorIndex back = read_descriptor_index(dir);
    CHECK(back.fingerprint_hex == "00ff");
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[0].id == "v1");
    CHECK(back.entries[1].label == "y");
    CHECK(back.entries[1].file == "v0.kshs");
}

TEST_CASE("synthetic corpus with defaults") {
    const fs::path dir = scratch_dir("synth");
    const DatasetManifest m = generate_synthetic_corpus(dir);
    CHECK(m.entries.size() == 30);
    std::set<std::string> labels;
    for (const auto& e : m.entries) {
        labels.insert(e.label);
        CHECK(list_frame_files(e.frames_dir).size() == 40);
    }
    CHECK(labels.size() == 3);
    const DatasetManifest back = read_manifest(dir / "manifest.json");
    REQUIRE(back.entries.size() == 30);
    CHECK(back.entries.front().id == m.entries.front().id);
    const auto frames = load_frames(back.entries.front().frames_dir, back.working_size);
    CHECK(frames.size() == 40);
    CHECK(frames.front().height() == 128);
}

TEST_CASE("synthetic corpus is deterministic per seed") {
    SynthOptions options;
    options.videos_per_class = 2;
    options.frames = 3;
    options.size = WorkingSize{32, 48};
    const fs::path a = scratch_dir("synth_a");
    const fs::path b = scratch_dir("synth_b");
    const fs::path c = scratch_dir("synth_c");
    const DatasetManifest ma = generate_synthetic_corpus(a, options);
    generate_synthetic_corpus(b, options);
    options.seed = 8;
    generate_synthetic_corpus(c, options);
    bool any_different = false;
    for (const auto& e : ma.entries) {
        const fs::path rel = fs::relative(e.frames_dir, a);
        for (const auto& file : list_frame_files(e.frames_dir)) {
            const auto bytes = read_file_bytes(file);
            CHECK(bytes == read_file_bytes(b / rel / file.filename()));
            if (bytes != read_file_bytes(c / rel / file.filename())) any_different = true;
        }
    }
    CHECK(any_different);

    const auto v1 = synthetic_video(1, 4, WorkingSize{16, 16}, 99);
    const auto v2 = synthetic_video(1, 4, WorkingSize{16, 16}, 99);
    for (std::size_t t = 0; t < v1.size(); ++t) {
        CHECK((v1[t] == v2[t]).all());
        CHECK((v1[t] >= 0.0).all());
        CHECK((v1[t] <= 1.0).all());
    }
}

TEST_CASE("parallel_for covers every index once and propagates errors") {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10,
                                 [](std::size_t i) {
                                     if (i == 7) throw InvalidArgument("boom");
                                 }),
                    InvalidArgument);
    std::atomic<int> inner{0};
    parallel_for(4, [&](std::size_t) { parallel_for(3, [&](std::size_t) { inner.fetch_add(1); }); });
    CHECK(inner.load() == 12);
    CHECK(worker_count() >= 1);
}
