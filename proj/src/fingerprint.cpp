#include "kshs/fingerprint.hpp"

#include "kshs/error.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>

namespace kshs {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

} // namespace

Fingerprint sha256(std::span<const std::uint8_t> bytes) {
    Fingerprint out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size()) {
        throw Error("SHA-256 digest failed");
    }
    return out;
}

Fingerprint calibration_fingerprint(const ScatteringConfig& scattering, WorkingSize size, const BinEdges& edges) {
    std::vector<std::uint8_t> buf;
    constexpr char kDomain[] = "kshs-calibration-v1";
    buf.insert(buf.end(), kDomain, kDomain + sizeof(kDomain) - 1);
    put_u32(buf, static_cast<std::uint32_t>(scattering.J));
    put_u32(buf, static_cast<std::uint32_t>(scattering.L));
    put_u32(buf, static_cast<std::uint32_t>(scattering.M));
    put_u32(buf, scattering.normalized ? 1u : 0u);
    put_u32(buf, static_cast<std::uint32_t>(size.height));
    put_u32(buf, static_cast<std::uint32_t>(size.width));
    put_u32(buf, static_cast<std::uint32_t>(edges.n_bins));
    put_u32(buf, static_cast<std::uint32_t>(edges.upper.size()));
    for (double r : edges.upper) put_f64(buf, r);
    return sha256(buf);
}

std::string to_hex(const Fingerprint& fp) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (auto b : fp) {
        s.push_back(kDigits[b >> 4]);
        s.push_back(kDigits[b & 0xf]);
    }
    return s;
}

} // namespace kshs
