// Soft symbol mapping and demapping between bit LLRs and symbol statistics.
//
// LLR convention: positive means bit 0 is more likely, i.e.
// L = log P(b=0) - log P(b=1), and log P(b) = -b*L up to normalization.
#pragma once

#include <algorithm>
#include <cassert>
#include <vector>

#include "turboeq/common.hpp"
#include "turboeq/constellation.hpp"

namespace turboeq {

/// Per-symbol pmf over constellation labels.
struct SymbolPmf {
    std::vector<double> p;  // indexed by label
};

/// First- and second-order statistics of a block of symbol beliefs.
struct SoftSymbolBlock {
    std::vector<cxd> mean;
    std::vector<double> var;

    std::size_t size() const { return mean.size(); }
    double mean_var() const {
        if (var.empty()) return 0.0;
        double s = 0.0;
        for (double v : var) s += v;
        return s / static_cast<double>(var.size());
    }
};

/// Symbol priors in both pmf and moment form; the pmfs are what demappers
/// consume, the moments are what filters consume.
struct PriorBlock {
    std::vector<SymbolPmf> pmf;
    std::vector<std::vector<double>> log_pmf;  // log of pmf entries, for log-domain demapping
    SoftSymbolBlock moments;

    std::size_t size() const { return pmf.size(); }
};

namespace detail {

/// Per-bit log-weights (lw0, lw1), each <= 0 and at least one equal to 0.
/// Infinite LLRs yield a hard bit without producing +inf anywhere.
inline std::pair<double, double> bit_log_weights(double llr) {
    if (llr >= 0.0) return {0.0, -llr};
    return {llr, 0.0};
}

}  // namespace detail

/// Prior pmf of one symbol from the LLRs of its label bits.
inline SymbolPmf symbol_prior(std::span<const double> llrs, const Constellation& c) {
    const int q_bits = c.bits_per_symbol;
    assert(static_cast<int>(llrs.size()) == q_bits);
    std::vector<double> lw0(q_bits), lw1(q_bits);
    for (int q = 0; q < q_bits; ++q)
        std::tie(lw0[q], lw1[q]) = detail::bit_log_weights(llrs[q]);

    SymbolPmf pmf;
    pmf.p.resize(c.size());
    double total = 0.0;
    for (int w = 0; w < c.size(); ++w) {
        double lp = 0.0;
        for (int q = 0; q < q_bits; ++q)
            lp += c.bit(w, q + 1) ? lw1[q] : lw0[q];
        pmf.p[w] = std::exp(lp);
        total += pmf.p[w];
    }
    for (double& v : pmf.p) v /= total;
    return pmf;
}

inline void pmf_moments(const SymbolPmf& pmf, const Constellation& c, cxd& mean, double& var) {
    cxd m(0.0, 0.0);
    double e2 = 0.0;
    for (int w = 0; w < c.size(); ++w) {
        m += pmf.p[w] * c.points[w];
        e2 += pmf.p[w] * std::norm(c.points[w]);
    }
    mean = m;
    var = std::max(0.0, e2 - std::norm(m));
}

/// Map a block of bit LLRs (Q per symbol, transmission order) to symbol priors.
inline PriorBlock soft_map(const LlrBlock& llrs, const Constellation& c) {
    const int q_bits = c.bits_per_symbol;
    if (llrs.size() % q_bits != 0)
        throw std::invalid_argument("soft_map: LLR count not a multiple of bits per symbol");
    const std::size_t n = llrs.size() / q_bits;

    PriorBlock out;
    out.pmf.resize(n);
    out.log_pmf.resize(n);
    out.moments.mean.resize(n);
    out.moments.var.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.pmf[k] = symbol_prior({llrs.data() + k * q_bits, static_cast<std::size_t>(q_bits)}, c);
        out.log_pmf[k].resize(c.size());
        for (int w = 0; w < c.size(); ++w)
            out.log_pmf[k][w] = std::log(out.pmf[k].p[w]);
        pmf_moments(out.pmf[k], c, out.moments.mean[k], out.moments.var[k]);
    }
    return out;
}

/// Hard-map a bit block to symbols.
inline std::vector<cxd> map_bits(std::span<const std::uint8_t> bits, const Constellation& c) {
    const int q_bits = c.bits_per_symbol;
    if (bits.size() % q_bits != 0)
        throw std::invalid_argument("map_bits: bit count not a multiple of bits per symbol");
    std::vector<cxd> x(bits.size() / q_bits);
    for (std::size_t k = 0; k < x.size(); ++k) {
        int w = 0;
        for (int q = 0; q < q_bits; ++q) w = (w << 1) | bits[k * q_bits + q];
        x[k] = c.points[w];
    }
    return x;
}

/// Log-domain symbol posterior from a Gaussian extrinsic observation
/// x_e ~ CN(symbol, v_e) combined with a log prior; returns unnormalized
/// log-posterior in `logd`.
inline void demap_log_posterior(std::span<const double> log_prior, cxd x_e, double v_e,
                                const Constellation& c, std::span<double> logd) {
    assert(v_e > 0.0);
    const double inv_ve = 1.0 / v_e;
    for (int w = 0; w < c.size(); ++w)
        logd[w] = log_prior[w] - std::norm(x_e - c.points[w]) * inv_ve;
}

/// Normalized symbol posterior (linear domain).
inline SymbolPmf demap_posterior(const SymbolPmf& prior, cxd x_e, double v_e,
                                 const Constellation& c) {
    std::vector<double> lp(c.size());
    for (int w = 0; w < c.size(); ++w)
        lp[w] = prior.p[w] > 0.0 ? std::log(prior.p[w]) : -std::numeric_limits<double>::infinity();
    std::vector<double> logd(c.size());
    demap_log_posterior(lp, x_e, v_e, c, logd);
    double hi = *std::max_element(logd.begin(), logd.end());
    SymbolPmf post;
    post.p.resize(c.size());
    double total = 0.0;
    for (int w = 0; w < c.size(); ++w) {
        post.p[w] = std::exp(logd[w] - hi);
        total += post.p[w];
    }
    for (double& v : post.p) v /= total;
    return post;
}

/// Posterior mean and variance of a symbol belief.
inline void posterior_moments(const SymbolPmf& post, const Constellation& c,
                              cxd& mu, double& gamma) {
    pmf_moments(post, c, mu, gamma);
}

/// Extrinsic bit LLRs from a symbol posterior: the full bit LLR (label-class
/// log-sum split) minus the prior LLR, clipped.
inline void extrinsic_llrs(const SymbolPmf& post, std::span<const double> prior_llrs,
                           const Constellation& c, std::span<double> out,
                           double clip = kDefaultLlrClip) {
    const int q_bits = c.bits_per_symbol;
    std::vector<double> logd(c.size());
    for (int w = 0; w < c.size(); ++w)
        logd[w] = post.p[w] > 0.0 ? std::log(post.p[w]) : -std::numeric_limits<double>::infinity();
    for (int q = 1; q <= q_bits; ++q) {
        double s0 = -std::numeric_limits<double>::infinity();
        double s1 = s0;
        for (int w = 0; w < c.size(); ++w) {
            if (c.bit(w, q)) s1 = max_star(s1, logd[w]);
            else s0 = max_star(s0, logd[w]);
        }
        double l_app;
        if (s0 == -std::numeric_limits<double>::infinity()) l_app = -2.0 * clip;
        else if (s1 == -std::numeric_limits<double>::infinity()) l_app = 2.0 * clip;
        else l_app = s0 - s1;
        out[q - 1] = clip_llr(l_app - prior_llrs[q - 1], clip);
    }
}

/// Gaussian division: extrinsic belief CN(x_e, v_e) combined with posterior
/// moments (mu_d, gamma_d) yields the soft decision CN(x_d, v_d).  The division
/// has a pole at gamma_d = v_e, so gamma_d is clamped to rho*v_e (a clamp
/// increments the counter), which bounds the mean amplification at 1/(1-rho).
/// The amplified mean is kept deliberately: it still points away from the
/// extrinsic in the direction the posterior moved, and the matching variance
/// v_d = rho/(1-rho)*v_e is so large that any receiver weighting slots by
/// their variance all but ignores the slot -- the pair stays informative where
/// it is trusted and harmless where it is not.  Replacing the mean with a
/// bounded surrogate measurably degrades time-varying EP feedback.
inline void ep_soft_decision(cxd mu_d, double gamma_d, cxd x_e, double v_e,
                             cxd& x_d, double& v_d, Counters* counters = nullptr,
                             double rho = kEpVarianceGuard) {
    assert(v_e > 0.0 && gamma_d >= 0.0);
    if (gamma_d > rho * v_e) {
        if (counters) ++counters->ep_guard_clamps;
        const double g = rho * v_e;
        const double denom = v_e - g;
        x_d = (mu_d * v_e - x_e * g) / denom;
        v_d = v_e * g / denom;
        return;
    }
    const double denom = v_e - gamma_d;
    x_d = (mu_d * v_e - x_e * gamma_d) / denom;
    v_d = v_e * gamma_d / denom;
}

/// Block-level extrinsic demapping: for each symbol, posterior from
/// (x_e, v_e) and the stored log-priors, then extrinsic LLRs.
inline LlrBlock demap_block_extrinsic(const SoftSymbolBlock& est, const PriorBlock& priors,
                                      const LlrBlock& prior_llrs, const Constellation& c,
                                      double clip = kDefaultLlrClip) {
    const int q_bits = c.bits_per_symbol;
    const std::size_t n = est.size();
    assert(priors.size() == n && prior_llrs.size() == n * q_bits);
    LlrBlock out(n * q_bits);
    std::vector<double> logd(c.size());
    for (std::size_t k = 0; k < n; ++k) {
        demap_log_posterior(priors.log_pmf[k], est.mean[k], est.var[k], c, logd);
        for (int q = 1; q <= q_bits; ++q) {
            double s0 = -std::numeric_limits<double>::infinity();
            double s1 = s0;
            for (int w = 0; w < c.size(); ++w) {
                if (c.bit(w, q)) s1 = max_star(s1, logd[w]);
                else s0 = max_star(s0, logd[w]);
            }
            double l_app = s0 - s1;  // +-inf survives the clip below
            out[k * q_bits + q - 1] =
                clip_llr(l_app - prior_llrs[k * q_bits + q - 1], clip);
        }
    }
    return out;
}

/// Hard symbol decisions (max-posterior label) unpacked to bits.
inline std::vector<std::uint8_t> hard_decide_bits(const SoftSymbolBlock& est,
                                                  const PriorBlock& priors,
                                                  const Constellation& c) {
    const int q_bits = c.bits_per_symbol;
    std::vector<std::uint8_t> bits(est.size() * q_bits);
    std::vector<double> logd(c.size());
    for (std::size_t k = 0; k < est.size(); ++k) {
        demap_log_posterior(priors.log_pmf[k], est.mean[k], est.var[k], c, logd);
        int best = 0;
        for (int w = 1; w < c.size(); ++w)
            if (logd[w] > logd[best]) best = w;
        c.unpack_label(best, {bits.data() + k * q_bits, static_cast<std::size_t>(q_bits)});
    }
    return bits;
}

}  // namespace turboeq
