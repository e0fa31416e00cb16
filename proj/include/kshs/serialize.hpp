#pragma once

#include "kshs/eval.hpp"
#include "kshs/fingerprint.hpp"
#include "kshs/metric.hpp"
#include "kshs/subspace.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kshs {

inline constexpr std::uint16_t kFormatVersion = 1;

/// Flag bits stored in descriptor and calibration files.
enum DescriptorFlags : std::uint32_t {
    kFlagNormalizedScattering = 1u << 0,
    kFlagKMedoidsSupport = 1u << 1,
};

/// Persisted calibration: scattering setup, working size, bin edges and
/// the fingerprint derived from them.
struct Calibration {
    ScatteringConfig scattering;
    WorkingSize working_size;
    BinEdges edges;
    double quantile = 0.99;

    Fingerprint fingerprint() const { return calibration_fingerprint(scattering, working_size, edges); }
};

/// Binary descriptor ("KSHS1"): magic, u16 version, u32 flags, u32 D, Ñ,
/// n, N_Bands, N_bins, 32-byte fingerprint, N_Bands f64 edges, H̃ then C̃
/// column-major f64. Little-endian throughout.
struct DescriptorFile {
    KernelSubspace subspace;
    BinEdges edges;
    std::uint32_t flags = 0;
};

std::vector<std::uint8_t> encode_descriptor(const DescriptorFile& file);
DescriptorFile decode_descriptor(std::span<const std::uint8_t> bytes);

void write_descriptor(const std::filesystem::path& path, const DescriptorFile& file);
/// Throws FingerprintMismatch if `expected` is given and differs.
DescriptorFile read_descriptor(const std::filesystem::path& path, std::optional<Fingerprint> expected = std::nullopt);

/// Binary calibration ("KSHE1"): magic, u16 version, u32 flags, u32 J, L,
/// M, H, W, N_bins, N_Bands, f64 quantile, 32-byte fingerprint, edges.
std::vector<std::uint8_t> encode_calibration(const Calibration& cal);
/// Verifies the stored fingerprint against the decoded contents.
Calibration decode_calibration(std::span<const std::uint8_t> bytes);
void write_calibration(const std::filesystem::path& path, const Calibration& cal);
Calibration read_calibration(const std::filesystem::path& path);

/// Header row of ids, then one row of 17-significant-digit values per id.
void write_distance_csv(const std::filesystem::path& path, const DistanceMatrix& d);
DistanceMatrix read_distance_csv(const std::filesystem::path& path);

std::string report_json(const EvalReport& report);
/// Fixed-width text table of per-class accuracy and confusion counts.
std::string report_table(const EvalReport& report);

/// Listing of a descriptor directory: index.json with ordered {id, label, file} entries.
struct DescriptorIndexEntry {
    std::string id;
    std::string label;
    std::string file;
};

struct DescriptorIndex {
    std::string fingerprint_hex;
    std::vector<DescriptorIndexEntry> entries;
};

inline constexpr const char* kIndexFileName = "index.json";

void write_descriptor_index(const std::filesystem::path& dir, const DescriptorIndex& index);
DescriptorIndex read_descriptor_index(const std::filesystem::path& dir);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace kshs
