// Shared scalar helpers: dB conversion, log-domain arithmetic, seed derivation.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace turboeq {

using cxd = std::complex<double>;
using LlrBlock = std::vector<double>;

inline constexpr double kDefaultLlrClip = 40.0;     // LLR magnitude cap
inline constexpr double kEpVarianceGuard = 0.999;   // max posterior/extrinsic variance ratio

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

/// max*(a,b) = log(e^a + e^b), exact form.
inline double max_star(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double hi = std::max(a, b);
    return hi + std::log1p(std::exp(-std::abs(a - b)));
}

/// log(sum_i e^{v_i}) over a span, shifted by the maximum for stability.
inline double log_sum_exp(std::span<const double> v) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : v) hi = std::max(hi, x);
    if (hi == -std::numeric_limits<double>::infinity()) return hi;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

inline double clip_llr(double l, double clip = kDefaultLlrClip) {
    if (l > clip) return clip;
    if (l < -clip) return -clip;
    return l;
}

/// splitmix64 step; used to derive statistically independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic per-(stream, substream) seed from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    std::uint64_t z = splitmix64(s);
    s ^= z + 0x9e3779b97f4a7c15ull * (a + 1);
    z = splitmix64(s);
    s ^= z + 0xc2b2ae3d27d4eb4full * (b + 1);
    return splitmix64(s);
}

/// FNV-1a over bytes; stable content hash for file naming and manifests.
inline std::uint64_t fnv1a64(std::span<const char> bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(std::span<const char>(s.data(), s.size()));
}

struct Counters {
    long ep_guard_clamps = 0;   // Gaussian-division denominators clamped
    long cholesky_jitters = 0;  // factorizations that needed a jitter retry

    Counters& operator+=(const Counters& o) {
        ep_guard_clamps += o.ep_guard_clamps;
        cholesky_jitters += o.cholesky_jitters;
        return *this;
    }
};

}  // namespace turboeq
