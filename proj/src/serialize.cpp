#include "kshs/serialize.hpp"

#include "kshs/error.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace kshs {
namespace {

constexpr char kDescriptorMagic[5] = {'K', 'S', 'H', 'S', '1'};
constexpr char kCalibrationMagic[5] = {'K', 'S', 'H', 'E', '1'};

class Writer {
public:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes_.insert(bytes_.end(), b, b + n);
    }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    void matrix(const Eigen::MatrixXd& m) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) f64(m(r, c));
        }
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void raw(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, bytes_.data() + pos_, n);
        pos_ += n;
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v = static_cast<std::uint16_t>(v | (std::uint16_t{bytes_[pos_ + i]} << (8 * i)));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
        pos_ += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(v);
    }
    Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols) {
        need(static_cast<std::size_t>(rows * cols) * 8);
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = f64();
        }
        return m;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError("file is truncated");
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

void check_magic(Reader& r, const char (&magic)[5], const char* what) {
    char got[5];
    r.raw(got, 5);
    if (std::memcmp(got, magic, 5) != 0) throw FormatError(std::string("not a ") + what + " file (bad magic)");
    const std::uint16_t version = r.u16();
    if (version != kFormatVersion) throw FormatError(std::string("unsupported ") + what + " version " + std::to_string(version));
}

std::string fmt17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

std::vector<std::uint8_t> encode_descriptor(const DescriptorFile& file) {
    const KernelSubspace& s = file.subspace;
    if (s.H.cols() != s.C.rows()) throw DimensionError("descriptor support does not match coefficient rows");
    if (file.edges.n_bands() != s.H.n_bands || file.edges.n_bins != s.H.n_bins) {
        throw StructureMismatch("bin edges do not match the descriptor's histogram layout");
    }
    Writer w;
    w.raw(kDescriptorMagic, 5);
    w.u16(kFormatVersion);
    w.u32(file.flags);
    w.u32(static_cast<std::uint32_t>(s.H.dim()));
    w.u32(static_cast<std::uint32_t>(s.C.rows()));
    w.u32(static_cast<std::uint32_t>(s.C.cols()));
    w.u32(static_cast<std::uint32_t>(s.H.n_bands));
    w.u32(static_cast<std::uint32_t>(s.H.n_bins));
    w.raw(s.fingerprint.data(), s.fingerprint.size());
    for (double r : file.edges.upper) w.f64(r);
    w.matrix(s.H.values);
    w.matrix(s.C);
    return w.take();
}

DescriptorFile decode_descriptor(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    check_magic(r, kDescriptorMagic, "descriptor");
    DescriptorFile f;
    f.flags = r.u32();
    const std::uint32_t D = r.u32();
    const std::uint32_t support = r.u32();
    const std::uint32_t n = r.u32();
    const std::uint32_t bands = r.u32();
    const std::uint32_t bins = r.u32();
    if (bands == 0 || bins == 0 || std::uint64_t{bands} * bins != D) throw FormatError("inconsistent descriptor dimensions");
    r.raw(f.subspace.fingerprint.data(), f.subspace.fingerprint.size());
    f.edges.n_bins = static_cast<int>(bins);
    f.edges.upper.resize(bands);
    for (auto& e : f.edges.upper) e = r.f64();
    f.subspace.H.n_bands = static_cast<int>(bands);
    f.subspace.H.n_bins = static_cast<int>(bins);
    f.subspace.H.normalized_scattering = (f.flags & kFlagNormalizedScattering) != 0;
    f.subspace.H.values = r.matrix(D, support);
    f.subspace.C = r.matrix(support, n);
    if (!r.done()) throw FormatError("trailing bytes after descriptor payload");
    return f;
}

void write_descriptor(const std::filesystem::path& path, const DescriptorFile& file) {
    write_file_bytes(path, encode_descriptor(file));
}

DescriptorFile read_descriptor(const std::filesystem::path& path, std::optional<Fingerprint> expected) {
    DescriptorFile f;
    try {
        f = decode_descriptor(read_file_bytes(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    if (expected && *expected != f.subspace.fingerprint) {
        throw FingerprintMismatch(path.string() + ": calibration fingerprint " + to_hex(f.subspace.fingerprint) +
                                  " does not match " + to_hex(*expected));
    }
    return f;
}

std::vector<std::uint8_t> encode_calibration(const Calibration& cal) {
    cal.edges.validate();
    Writer w;
    w.raw(kCalibrationMagic, 5);
    w.u16(kFormatVersion);
    w.u32(cal.scattering.normalized ? kFlagNormalizedScattering : 0u);
    w.u32(static_cast<std::uint32_t>(cal.scattering.J));
    w.u32(static_cast<std::uint32_t>(cal.scattering.L));
    w.u32(static_cast<std::uint32_t>(cal.scattering.M));
    w.u32(static_cast<std::uint32_t>(cal.working_size.height));
    w.u32(static_cast<std::uint32_t>(cal.working_size.width));
    w.u32(static_cast<std::uint32_t>(cal.edges.n_bins));
    w.u32(static_cast<std::uint32_t>(cal.edges.upper.size()));
    w.f64(cal.quantile);
    const Fingerprint fp = cal.fingerprint();
    w.raw(fp.data(), fp.size());
    for (double r : cal.edges.upper) w.f64(r);
    return w.take();
}

Calibration decode_calibration(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    check_magic(r, kCalibrationMagic, "calibration");
    Calibration cal;
    cal.scattering.normalized = (r.u32() & kFlagNormalizedScattering) != 0;
    cal.scattering.J = static_cast<int>(r.u32());
    cal.scattering.L = static_cast<int>(r.u32());
    cal.scattering.M = static_cast<int>(r.u32());
    cal.working_size.height = r.u32();
    cal.working_size.width = r.u32();
    cal.edges.n_bins = static_cast<int>(r.u32());
    const std::uint32_t bands = r.u32();
    cal.quantile = r.f64();
    Fingerprint stored{};
    r.raw(stored.data(), stored.size());
    cal.edges.upper.resize(bands);
    for (auto& e : cal.edges.upper) e = r.f64();
    if (!r.done()) throw FormatError("trailing bytes after calibration payload");
    if (stored != cal.fingerprint()) throw FingerprintMismatch("calibration file fingerprint does not match its contents");
    return cal;
}

void write_calibration(const std::filesystem::path& path, const Calibration& cal) {
    write_file_bytes(path, encode_calibration(cal));
}

Calibration read_calibration(const std::filesystem::path& path) {
    try {
        return decode_calibration(read_file_bytes(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_distance_csv(const std::filesystem::path& path, const DistanceMatrix& d) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    std::vector<std::string> ids = d.ids;
    if (ids.empty()) {
        for (Eigen::Index i = 0; i < d.size(); ++i) ids.push_back(std::to_string(i));
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i].find_first_of(",\n\"") != std::string::npos) throw FormatError("id '" + ids[i] + "' is not CSV-safe");
        out << (i ? "," : "") << ids[i];
    }
    out << '\n';
    for (Eigen::Index r = 0; r < d.size(); ++r) {
        for (Eigen::Index c = 0; c < d.size(); ++c) out << (c ? "," : "") << fmt17(d.values(r, c));
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

DistanceMatrix read_distance_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": empty CSV");
    DistanceMatrix d;
    d.ids = split_csv_line(line);
    const auto K = static_cast<Eigen::Index>(d.ids.size());
    d.values.resize(K, K);
    for (Eigen::Index r = 0; r < K; ++r) {
        if (!std::getline(in, line)) throw FormatError(path.string() + ": missing matrix rows");
        const auto cells = split_csv_line(line);
        if (static_cast<Eigen::Index>(cells.size()) != K) throw FormatError(path.string() + ": ragged matrix row");
        for (Eigen::Index c = 0; c < K; ++c) {
            const std::string& s = cells[static_cast<std::size_t>(c)];
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size()) throw FormatError(path.string() + ": bad number '" + s + "'");
            d.values(r, c) = v;
        }
    }
    return d;
}

std::string report_json(const EvalReport& report) {
    nlohmann::ordered_json doc;
    doc["mode"] = to_string(report.mode);
    doc["accuracy"] = report.accuracy;
    doc["classes"] = report.classes;
    nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < report.classes.size(); ++c) per_class[report.classes[c]] = report.per_class_accuracy[c];
    doc["per_class_accuracy"] = per_class;
    doc["confusion"] = report.confusion;
    doc["predictions"] = nlohmann::ordered_json::array();
    for (const auto& p : report.predictions) {
        doc["predictions"].push_back({{"id", p.id}, {"label", p.truth}, {"predicted", p.predicted}, {"distance", p.distance}});
    }
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.config) config[k] = v;
    doc["config"] = config;
    return doc.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
    std::ostringstream os;
    std::size_t width = 8;
    for (const auto& c : report.classes) width = std::max(width, c.size() + 2);
    os << "mode: " << to_string(report.mode) << "   accuracy: " << std::fixed << std::setprecision(4)
       << report.accuracy << "\n\n";
    os << std::left << std::setw(static_cast<int>(width)) << "class" << std::right << std::setw(10) << "accuracy";
    for (const auto& c : report.classes) os << std::setw(static_cast<int>(width)) << c;
    os << '\n';
    for (std::size_t r = 0; r < report.classes.size(); ++r) {
        os << std::left << std::setw(static_cast<int>(width)) << report.classes[r] << std::right << std::setw(10)
           << std::setprecision(4) << report.per_class_accuracy[r];
        for (long v : report.confusion[r]) os << std::setw(static_cast<int>(width)) << v;
        os << '\n';
    }
    return os.str();
}

void write_descriptor_index(const std::filesystem::path& dir, const DescriptorIndex& index) {
    nlohmann::ordered_json doc;
    doc["fingerprint"] = index.fingerprint_hex;
    doc["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : index.entries) doc["entries"].push_back({{"id", e.id}, {"label", e.label}, {"file", e.file}});
    std::ofstream out(dir / kIndexFileName);
    if (!out) throw IoError("cannot write " + (dir / kIndexFileName).string());
    out << doc.dump(2) << '\n';
}

DescriptorIndex read_descriptor_index(const std::filesystem::path& dir) {
    const auto path = dir / kIndexFileName;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open descriptor index " + path.string());
    DescriptorIndex index;
    try {
        nlohmann::ordered_json doc;
        in >> doc;
        index.fingerprint_hex = doc.at("fingerprint").get<std::string>();
        for (const auto& e : doc.at("entries")) {
            index.entries.push_back(
                {e.at("id").get<std::string>(), e.at("label").get<std::string>(), e.at("file").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return index;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace kshs
