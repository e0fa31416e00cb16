// Command-line front end: synth, calibrate, extract, dist, classify, mean.

#include "kshs/error.hpp"
#include "kshs/eval.hpp"
#include "kshs/frechet.hpp"
#include "kshs/histogram.hpp"
#include "kshs/manifest.hpp"
#include "kshs/metric.hpp"
#include "kshs/parallel.hpp"
#include "kshs/serialize.hpp"
#include "kshs/subspace.hpp"
#include "kshs/synth.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace kshs;

namespace {

struct SynthArgs {
    fs::path out;
    std::uint64_t seed = 7;
    int classes = 3;
    int videos = 10;
    int frames = 40;
    int size = 128;
};

struct CalibrateArgs {
    fs::path manifest;
    fs::path out;
    int bins = 20;
    double quantile = 0.99;
    int stride = 10;
    int J = 4;
    int L = 4;
    bool normalized = false;
};

struct ExtractArgs {
    fs::path manifest;
    fs::path edges;
    fs::path out;
    long dim = 5;
    long support = 15;
    bool normalized = false;
    std::string strategy = "stride";
};

struct DistArgs {
    fs::path descriptors;
    fs::path out;
};

struct ClassifyArgs {
    fs::path descriptors;
    fs::path out;
    std::string mode = "1nn";
    long support_mean = 15;
    std::uint64_t seed = 7;
};

struct MeanArgs {
    fs::path descriptors;
    fs::path out;
    std::string label;
    long support_mean = 15;
    std::uint64_t seed = 7;
};

struct LoadedSet {
    DescriptorIndex index;
    std::vector<DescriptorFile> files;
};

LoadedSet load_descriptor_dir(const fs::path& dir) {
    LoadedSet set;
    set.index = read_descriptor_index(dir);
    if (set.index.entries.empty()) throw InvalidArgument("descriptor index " + dir.string() + " lists no entries");
    for (const auto& e : set.index.entries) {
        set.files.push_back(read_descriptor(dir / e.file));
        if (to_hex(set.files.back().subspace.fingerprint) != set.index.fingerprint_hex) {
            throw FingerprintMismatch(e.file + ": fingerprint differs from the descriptor index");
        }
    }
    return set;
}

int run_synth(const SynthArgs& a) {
    SynthOptions opt;
    opt.seed = a.seed;
    opt.classes = a.classes;
    opt.videos_per_class = a.videos;
    opt.frames = a.frames;
    opt.size = {a.size, a.size};
    const auto m = generate_synthetic_corpus(a.out, opt);
    std::cout << "wrote " << m.entries.size() << " videos to " << (a.out / "manifest.json").string() << '\n';
    return 0;
}

int run_calibrate(const CalibrateArgs& a) {
    const DatasetManifest manifest = read_manifest(a.manifest);
    if (manifest.entries.empty()) throw InvalidArgument("manifest has no entries");
    if (a.stride < 1) throw InvalidArgument("--stride must be positive");
    Calibration cal;
    cal.scattering = {a.J, a.L, 2, a.normalized};
    cal.working_size = manifest.working_size;
    cal.quantile = a.quantile;
    const FilterBank bank = build_filter_bank(a.J, a.L, manifest.working_size.height, manifest.working_size.width);

    std::vector<FrameImage> sample;
    for (const auto& e : manifest.entries) {
        auto frames = load_frames(e.frames_dir, manifest.working_size);
        for (std::size_t t = 0; t < frames.size(); t += static_cast<std::size_t>(a.stride)) sample.push_back(std::move(frames[t]));
    }
    std::vector<ScatteringMaps> maps(sample.size());
    parallel_for(sample.size(), [&](std::size_t i) { maps[i] = frame_scattering(sample[i], bank, 2, a.normalized); });
    cal.edges = calibrate_bins(maps, a.bins, a.quantile);
    write_calibration(a.out, cal);
    std::cout << "calibrated " << cal.edges.n_bands() << " subbands from " << sample.size() << " frames, fingerprint "
              << to_hex(cal.fingerprint()) << '\n';
    return 0;
}

int run_extract(const ExtractArgs& a) {
    const DatasetManifest manifest = read_manifest(a.manifest);
    const Calibration cal = read_calibration(a.edges);
    if (cal.scattering.normalized != a.normalized) {
        throw InvalidArgument(std::string("--normalized ") + (a.normalized ? "set" : "unset") +
                              " but the calibration was made " + (cal.scattering.normalized ? "with" : "without") +
                              " normalized scattering");
    }
    if (!(cal.working_size == manifest.working_size)) {
        throw StructureMismatch("manifest working size differs from the calibration");
    }
    if (a.strategy != "stride" && a.strategy != "kmedoids") throw InvalidArgument("--strategy must be stride or kmedoids");

    DescriptorConfig config;
    config.scattering = cal.scattering;
    config.subspace = {a.dim, a.support,
                       a.strategy == "kmedoids" ? SupportStrategy::KernelKMedoids : SupportStrategy::UniformStride};
    config.edges = cal.edges;
    config.fingerprint = cal.fingerprint();
    std::uint32_t flags = cal.scattering.normalized ? kFlagNormalizedScattering : 0u;
    if (config.subspace.strategy == SupportStrategy::KernelKMedoids) flags |= kFlagKMedoidsSupport;

    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw IoError("cannot create " + a.out.string() + ": " + ec.message());
    const FilterBank bank =
        build_filter_bank(cal.scattering.J, cal.scattering.L, cal.working_size.height, cal.working_size.width);

    DescriptorIndex index{to_hex(config.fingerprint), {}};
    for (const auto& e : manifest.entries) index.entries.push_back({e.id, e.label, e.id + ".kshs"});

    std::atomic<std::size_t> done{0};
    parallel_for(manifest.entries.size(), [&](std::size_t i) {
        const auto& e = manifest.entries[i];
        const auto frames = load_frames(e.frames_dir, manifest.working_size);
        DescriptorFile file{compute_descriptor(frames, bank, config), cal.edges, flags};
        write_descriptor(a.out / index.entries[i].file, file);
        ++done;
    });
    write_descriptor_index(a.out, index);
    std::cout << "extracted " << done.load() << " descriptors to " << a.out.string() << '\n';
    return 0;
}

int run_dist(const DistArgs& a) {
    const LoadedSet set = load_descriptor_dir(a.descriptors);
    std::vector<KernelSubspace> descriptors;
    std::vector<std::string> ids, labels;
    for (std::size_t i = 0; i < set.files.size(); ++i) {
        descriptors.push_back(set.files[i].subspace);
        ids.push_back(set.index.entries[i].id);
        labels.push_back(set.index.entries[i].label);
    }
    write_distance_csv(a.out, pairwise_distances(descriptors, ids, labels));
    std::cout << "wrote " << ids.size() << "x" << ids.size() << " distance matrix to " << a.out.string() << '\n';
    return 0;
}

int run_classify(const ClassifyArgs& a) {
    if (a.mode != "1nn" && a.mode != "ncc") throw InvalidArgument("--mode must be 1nn or ncc");
    const LoadedSet loaded = load_descriptor_dir(a.descriptors);
    std::vector<KernelSubspace> descriptors;
    std::vector<std::string> ids, labels;
    for (std::size_t i = 0; i < loaded.files.size(); ++i) {
        descriptors.push_back(loaded.files[i].subspace);
        ids.push_back(loaded.index.entries[i].id);
        labels.push_back(loaded.index.entries[i].label);
    }
    const LabeledDescriptorSet set(std::move(descriptors), std::move(labels), std::move(ids));
    EvalReport report;
    if (a.mode == "1nn") {
        report = one_nn_loo(set);
    } else {
        FrechetOptions opt;
        opt.support = a.support_mean;
        opt.seed = a.seed;
        report = ncc_loo(set, opt);
    }
    report.config.emplace_back("fingerprint", loaded.index.fingerprint_hex);
    std::ofstream out(a.out);
    if (!out) throw IoError("cannot write " + a.out.string());
    out << report_json(report);
    std::cout << report_table(report);
    return 0;
}

int run_mean(const MeanArgs& a) {
    const LoadedSet loaded = load_descriptor_dir(a.descriptors);
    std::vector<KernelSubspace> members;
    const DescriptorFile* reference = nullptr;
    for (std::size_t i = 0; i < loaded.files.size(); ++i) {
        if (loaded.index.entries[i].label != a.label) continue;
        members.push_back(loaded.files[i].subspace);
        reference = &loaded.files[i];
    }
    if (members.empty()) throw InvalidArgument("no descriptors with label '" + a.label + "'");
    FrechetOptions opt;
    opt.support = a.support_mean;
    opt.seed = a.seed;
    const FrechetMeanResult result = frechet_mean(members, opt);
    DescriptorFile file{result.mean, reference->edges, reference->flags & kFlagNormalizedScattering};
    write_descriptor(a.out, file);
    std::cout << "mean of " << members.size() << " descriptors: loss " << result.loss_trace.back() << " after "
              << result.iterations << " iterations" << (result.converged ? "" : " (not converged)") << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernelized scattering-histogram subspaces for dynamic texture recognition"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "Generate the seeded synthetic texture corpus");
    cmd_synth->add_option("--out", synth.out, "Output directory")->required();
    cmd_synth->add_option("--seed", synth.seed, "Random seed");
    cmd_synth->add_option("--classes", synth.classes, "Number of texture families")->check(CLI::PositiveNumber);
    cmd_synth->add_option("--videos", synth.videos, "Videos per class")->check(CLI::PositiveNumber);
    cmd_synth->add_option("--frames", synth.frames, "Frames per video")->check(CLI::PositiveNumber);
    cmd_synth->add_option("--size", synth.size, "Frame edge length in pixels")->check(CLI::PositiveNumber);

    CalibrateArgs cal;
    auto* cmd_cal = app.add_subcommand("calibrate", "Compute dataset-wide histogram bin edges");
    cmd_cal->add_option("--manifest", cal.manifest, "Dataset manifest JSON")->required()->check(CLI::ExistingFile);
    cmd_cal->add_option("--out", cal.out, "Output calibration file")->required();
    cmd_cal->add_option("--bins", cal.bins, "Histogram bins per subband");
    cmd_cal->add_option("--quantile", cal.quantile, "Pooled quantile used as upper edge");
    cmd_cal->add_option("--stride", cal.stride, "Use every k-th frame of each video");
    cmd_cal->add_option("--J", cal.J, "Dyadic scales");
    cmd_cal->add_option("--L", cal.L, "Orientations");
    cmd_cal->add_flag("--normalized", cal.normalized, "Calibrate on normalized scattering");

    ExtractArgs ext;
    auto* cmd_ext = app.add_subcommand("extract", "Compute one kernel-subspace descriptor per video");
    cmd_ext->add_option("--manifest", ext.manifest, "Dataset manifest JSON")->required()->check(CLI::ExistingFile);
    cmd_ext->add_option("--edges", ext.edges, "Calibration file")->required()->check(CLI::ExistingFile);
    cmd_ext->add_option("--out", ext.out, "Output descriptor directory")->required();
    cmd_ext->add_option("--dim", ext.dim, "Subspace dimension n");
    cmd_ext->add_option("--support", ext.support, "Support columns kept by the Nystrom step");
    cmd_ext->add_option("--strategy", ext.strategy, "Support selection: stride or kmedoids");
    cmd_ext->add_flag("--normalized", ext.normalized, "Use normalized scattering (must match calibration)");

    DistArgs dist;
    auto* cmd_dist = app.add_subcommand("dist", "Pairwise nuclear distances as CSV");
    cmd_dist->add_option("--descriptors", dist.descriptors, "Descriptor directory")->required()->check(CLI::ExistingDirectory);
    cmd_dist->add_option("--out", dist.out, "Output CSV")->required();

    ClassifyArgs cls;
    auto* cmd_cls = app.add_subcommand("classify", "Leave-one-out 1-NN or NCC evaluation");
    cmd_cls->add_option("--descriptors", cls.descriptors, "Descriptor directory")->required()->check(CLI::ExistingDirectory);
    cmd_cls->add_option("--out", cls.out, "Output report JSON")->required();
    cmd_cls->add_option("--mode", cls.mode, "1nn or ncc");
    cmd_cls->add_option("--support-mean", cls.support_mean, "Support size of class means");
    cmd_cls->add_option("--seed", cls.seed, "k-means seed");

    MeanArgs mean;
    auto* cmd_mean = app.add_subcommand("mean", "Frechet mean of one class");
    cmd_mean->add_option("--descriptors", mean.descriptors, "Descriptor directory")->required()->check(CLI::ExistingDirectory);
    cmd_mean->add_option("--label", mean.label, "Class label")->required();
    cmd_mean->add_option("--out", mean.out, "Output descriptor file")->required();
    cmd_mean->add_option("--support-mean", mean.support_mean, "Support size of the mean");
    cmd_mean->add_option("--seed", mean.seed, "k-means seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_synth) return run_synth(synth);
        if (*cmd_cal) return run_calibrate(cal);
        if (*cmd_ext) return run_extract(ext);
        if (*cmd_dist) return run_dist(dist);
        if (*cmd_cls) return run_classify(cls);
        if (*cmd_mean) return run_mean(mean);
    } catch (const std::exception& e) {
        std::cerr << "kshs: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
