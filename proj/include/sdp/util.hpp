#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "sdp/error.hpp"

// Seeded randomness and hashing are hand-rolled so that artifacts are
// bit-identical across platforms and standard library versions. The std::
// distributions are implementation-defined and must not appear on any
// seeded path.

namespace sdp {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = kFnvOffset) {
    for (unsigned char byte : data) {
        h ^= byte;
        h *= kFnvPrime;
    }
    return h;
}

// SplitMix64 (Steele, Lea, Flood 2014). Small state, passes BigCrush, and the
// output function is fully specified, unlike std::mt19937's distributions.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n) via multiply-shift on the high 64 bits. Slight modulo
    // bias is below 2^-53 for the ranges used here and identical everywhere.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform double in (0, 1]; never returns 0 so it is log-safe.
    double next_unit() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. One value per call, cache unused half.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Mix two seeds into one stream seed; golden-ratio stride keeps adjacent
// indexes decorrelated.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    return seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
}

// Deterministic unit vector derived from text content and a seed. Used as the
// noise term of the synthetic embedder: same text, same vector, everywhere.
inline std::vector<double> unit_noise_vector(std::string_view text, std::uint64_t seed, int dim) {
    if (dim <= 0) fail(errc::invalid_spec, "noise vector dimension must be positive");
    SplitMix64 rng(mix_seed(seed, fnv1a64(text)));
    std::vector<double> v(static_cast<std::size_t>(dim));
    double norm_sq = 0.0;
    do {
        norm_sq = 0.0;
        for (auto& x : v) {
            x = rng.next_gaussian();
            norm_sq += x * x;
        }
        // A zero draw is astronomically unlikely; loop keeps the contract airtight.
    } while (norm_sq == 0.0);
    double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& x : v) x *= inv;
    return v;
}

// Write-then-rename so readers never observe a half-written artifact.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(errc::io_error, "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) fail(errc::io_error, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(errc::io_error, "cannot move temporary file onto " + path);
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_error, "cannot open " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(errc::io_error, "read failure on " + path);
    return content;
}

}  // namespace sdp
