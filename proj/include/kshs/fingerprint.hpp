#pragma once

#include "kshs/frames.hpp"
#include "kshs/histogram.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kshs {

/// SHA-256 digest identifying a calibration (scattering setup + bin edges).
using Fingerprint = std::array<std::uint8_t, 32>;

struct ScatteringConfig {
    int J = 4;
    int L = 4;
    int M = 2;
    bool normalized = false;

    friend bool operator==(const ScatteringConfig&, const ScatteringConfig&) = default;
};

/// Hash over J, L, M, the normalization flag, working size, bin count and
/// the raw bytes of every upper edge.
Fingerprint calibration_fingerprint(const ScatteringConfig& scattering, WorkingSize size, const BinEdges& edges);

Fingerprint sha256(std::span<const std::uint8_t> bytes);

std::string to_hex(const Fingerprint& fp);

} // namespace kshs
