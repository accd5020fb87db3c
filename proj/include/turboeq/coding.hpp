// Rate-1/2 feedforward convolutional code with puncturing, random
// interleaving, and a log-domain BCJR decoder.
#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "turboeq/common.hpp"

namespace turboeq {

/// Periodic puncturing table; keep[2*phase + stream] selects survivors of the
/// two coded streams, serialized column-major per trellis step.
struct PuncturePattern {
    int period = 1;
    std::vector<std::uint8_t> keep = {1, 1};

    int kept_per_period() const {
        return static_cast<int>(std::accumulate(keep.begin(), keep.end(), 0));
    }
    void validate() const {
        if (period < 1 || static_cast<int>(keep.size()) != 2 * period)
            throw std::invalid_argument("puncture: malformed table");
        if (kept_per_period() == 0) throw std::invalid_argument("puncture: keeps nothing");
    }
};

inline PuncturePattern puncture_rate_half() { return {1, {1, 1}}; }
inline PuncturePattern puncture_rate_two_thirds() { return {2, {1, 0, 1, 1}}; }
inline PuncturePattern puncture_rate_five_sixths() {
    return {5, {1, 0, 0, 1, 0, 1, 0, 1, 1, 1}};
}

/// Feedforward binary convolutional code, two generator polynomials in octal,
/// most significant bit tapping the newest input.
struct CodeSpec {
    unsigned g1 = 07;
    unsigned g2 = 05;
    int constraint_length = 3;
    PuncturePattern puncture = puncture_rate_half();
    bool terminated = true;

    int memory() const { return constraint_length - 1; }
    int n_states() const { return 1 << memory(); }

    void validate() const {
        if (constraint_length < 1 || constraint_length > 16)
            throw std::invalid_argument("code: bad constraint length");
        unsigned mask = (1u << constraint_length) - 1;
        if ((g1 | g2) > mask || g1 == 0 || g2 == 0)
            throw std::invalid_argument("code: generator outside register");
        puncture.validate();
    }
};

inline PuncturePattern make_puncture(const std::string& rate) {
    if (rate == "1/2") return puncture_rate_half();
    if (rate == "2/3") return puncture_rate_two_thirds();
    if (rate == "5/6") return puncture_rate_five_sixths();
    throw std::invalid_argument("unknown code rate: " + rate);
}

namespace detail {

inline int parity(unsigned v) { return __builtin_popcount(v) & 1; }

struct Trellis {
    int n_states;
    int memory;
    std::array<std::vector<int>, 2> next;      // [input][state]
    std::array<std::vector<int>, 2> out1, out2;

    explicit Trellis(const CodeSpec& code) {
        code.validate();
        memory = code.memory();
        n_states = code.n_states();
        for (int u = 0; u < 2; ++u) {
            next[u].resize(n_states);
            out1[u].resize(n_states);
            out2[u].resize(n_states);
            for (int s = 0; s < n_states; ++s) {
                unsigned reg = (static_cast<unsigned>(u) << memory) | s;
                out1[u][s] = parity(reg & code.g1);
                out2[u][s] = parity(reg & code.g2);
                next[u][s] = static_cast<int>(reg >> 1);
            }
        }
    }
};

}  // namespace detail

/// Number of trellis steps (input bits incl. tail) for a given info length.
inline int code_steps(const CodeSpec& code, int n_info) {
    return n_info + (code.terminated ? code.memory() : 0);
}

/// Info length that produces exactly n_coded surviving bits, or -1 if the
/// pattern cannot hit that length.
inline int info_len_for_coded(const CodeSpec& code, int n_coded) {
    const auto& p = code.puncture;
    long num = static_cast<long>(n_coded) * p.period;
    if (num % p.kept_per_period() != 0) return -1;
    long steps = num / p.kept_per_period();
    if (steps % p.period != 0) return -1;
    long info = steps - (code.terminated ? code.memory() : 0);
    return info > 0 ? static_cast<int>(info) : -1;
}

/// Encode (with zero tail if terminated); output is the unpunctured coded
/// stream, two bits per step.
inline std::vector<std::uint8_t> conv_encode(std::span<const std::uint8_t> info,
                                             const CodeSpec& code) {
    detail::Trellis tr(code);
    const int steps = code_steps(code, static_cast<int>(info.size()));
    std::vector<std::uint8_t> out(2 * steps);
    int s = 0;
    for (int t = 0; t < steps; ++t) {
        int u = t < static_cast<int>(info.size()) ? info[t] : 0;
        out[2 * t] = static_cast<std::uint8_t>(tr.out1[u][s]);
        out[2 * t + 1] = static_cast<std::uint8_t>(tr.out2[u][s]);
        s = tr.next[u][s];
    }
    return out;
}

template <typename T>
std::vector<T> puncture(std::span<const T> full, const PuncturePattern& p) {
    std::vector<T> out;
    out.reserve(full.size());
    const int steps = static_cast<int>(full.size()) / 2;
    for (int t = 0; t < steps; ++t) {
        int phase = t % p.period;
        if (p.keep[2 * phase]) out.push_back(full[2 * t]);
        if (p.keep[2 * phase + 1]) out.push_back(full[2 * t + 1]);
    }
    return out;
}

/// Reinsert neutral values (zero LLRs) at punctured positions.
inline std::vector<double> depuncture(std::span<const double> kept, const PuncturePattern& p,
                                      int steps) {
    std::vector<double> out(2 * steps, 0.0);
    std::size_t r = 0;
    for (int t = 0; t < steps; ++t) {
        int phase = t % p.period;
        if (p.keep[2 * phase]) {
            if (r >= kept.size()) throw std::invalid_argument("depuncture: input too short");
            out[2 * t] = kept[r++];
        }
        if (p.keep[2 * phase + 1]) {
            if (r >= kept.size()) throw std::invalid_argument("depuncture: input too short");
            out[2 * t + 1] = kept[r++];
        }
    }
    if (r != kept.size()) throw std::invalid_argument("depuncture: length mismatch");
    return out;
}

/// Seeded uniform random permutation; interleave gathers, deinterleave scatters.
struct Interleaver {
    std::vector<int> perm;

    static Interleaver make(int len, std::uint64_t seed) {
        Interleaver il;
        il.perm.resize(len);
        std::iota(il.perm.begin(), il.perm.end(), 0);
        std::mt19937_64 rng(seed);
        std::shuffle(il.perm.begin(), il.perm.end(), rng);
        return il;
    }

    template <typename T>
    std::vector<T> interleave(std::span<const T> x) const {
        std::vector<T> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[perm[i]];
        return out;
    }

    template <typename T>
    std::vector<T> deinterleave(std::span<const T> y) const {
        std::vector<T> out(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) out[perm[i]] = y[i];
        return out;
    }
};

struct BcjrResult {
    LlrBlock coded_extrinsic;   // one per unpunctured coded bit
    LlrBlock info_posterior;    // one per info bit
    std::vector<std::uint8_t> info_hard;
};

/// Log-MAP decoder over the unpunctured coded-bit LLRs (2 per step).
/// Tail steps admit only the zero input when the code is terminated.
inline BcjrResult bcjr_decode(std::span<const double> coded_llrs, int n_info,
                              const CodeSpec& code, double clip = kDefaultLlrClip) {
    detail::Trellis tr(code);
    const int steps = code_steps(code, n_info);
    if (static_cast<int>(coded_llrs.size()) != 2 * steps)
        throw std::invalid_argument("bcjr: LLR length mismatch");
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const int ns = tr.n_states;

    // Branch log-weights: log P(c) up to a per-bit constant is -c * L.
    auto branch = [&](int t, int u, int s) {
        double l1 = clip_llr(coded_llrs[2 * t], clip);
        double l2 = clip_llr(coded_llrs[2 * t + 1], clip);
        return -(tr.out1[u][s] * l1 + tr.out2[u][s] * l2);
    };
    auto inputs_at = [&](int t) { return (code.terminated && t >= n_info) ? 1 : 2; };

    std::vector<std::vector<double>> alpha(steps + 1, std::vector<double>(ns, neg_inf));
    alpha[0][0] = 0.0;
    for (int t = 0; t < steps; ++t) {
        for (int s = 0; s < ns; ++s) {
            if (alpha[t][s] == neg_inf) continue;
            for (int u = 0; u < inputs_at(t); ++u) {
                double m = alpha[t][s] + branch(t, u, s);
                double& slot = alpha[t + 1][tr.next[u][s]];
                slot = max_star(slot, m);
            }
        }
        double hi = *std::max_element(alpha[t + 1].begin(), alpha[t + 1].end());
        for (double& a : alpha[t + 1]) a -= hi;
    }

    std::vector<std::vector<double>> beta(steps + 1, std::vector<double>(ns, 0.0));
    if (code.terminated) {
        std::fill(beta[steps].begin(), beta[steps].end(), neg_inf);
        beta[steps][0] = 0.0;
    }
    for (int t = steps - 1; t >= 0; --t) {
        for (int s = 0; s < ns; ++s) {
            double acc = neg_inf;
            for (int u = 0; u < inputs_at(t); ++u)
                acc = max_star(acc, branch(t, u, s) + beta[t + 1][tr.next[u][s]]);
            beta[t][s] = acc;
        }
        double hi = *std::max_element(beta[t].begin(), beta[t].end());
        if (hi != neg_inf)
            for (double& b : beta[t]) b -= hi;
    }

    BcjrResult res;
    res.coded_extrinsic.resize(2 * steps);
    res.info_posterior.resize(n_info);
    res.info_hard.resize(n_info);
    for (int t = 0; t < steps; ++t) {
        double c0[2] = {neg_inf, neg_inf};  // per coded stream, class bit=0
        double c1[2] = {neg_inf, neg_inf};
        double u0 = neg_inf, u1 = neg_inf;
        for (int s = 0; s < ns; ++s) {
            if (alpha[t][s] == neg_inf) continue;
            for (int u = 0; u < inputs_at(t); ++u) {
                double m = alpha[t][s] + branch(t, u, s) + beta[t + 1][tr.next[u][s]];
                (u ? u1 : u0) = max_star(u ? u1 : u0, m);
                (tr.out1[u][s] ? c1[0] : c0[0]) = max_star(tr.out1[u][s] ? c1[0] : c0[0], m);
                (tr.out2[u][s] ? c1[1] : c0[1]) = max_star(tr.out2[u][s] ? c1[1] : c0[1], m);
            }
        }
        for (int i = 0; i < 2; ++i) {
            double post;
            if (c0[i] == neg_inf) post = -2.0 * clip;
            else if (c1[i] == neg_inf) post = 2.0 * clip;
            else post = c0[i] - c1[i];
            res.coded_extrinsic[2 * t + i] =
                clip_llr(post - clip_llr(coded_llrs[2 * t + i], clip), clip);
        }
        if (t < n_info) {
            double post = (u1 == neg_inf) ? 2.0 * clip : (u0 == neg_inf ? -2.0 * clip : u0 - u1);
            res.info_posterior[t] = clip_llr(post, clip);
            res.info_hard[t] = post < 0.0 ? 1 : 0;
        }
    }
    return res;
}

}  // namespace turboeq
