// Mutual-information tooling: the consistent-Gaussian J-function relating an
// LLR mean to mutual information, synthetic prior generation, and a
// histogram-based MI estimator for measured LLRs.
#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "turboeq/common.hpp"

namespace turboeq {

/// J(mu): mutual information of a consistent Gaussian LLR, L ~ N(+-mu, 2 mu)
/// conditioned on the bit.  Tabulated once on a quadratic grid and
/// interpolated linearly in both directions.
class JTable {
  public:
    static const JTable& instance() {
        static JTable t;
        return t;
    }

    double mi_from_mean(double mu) const {
        if (mu <= 0.0) return 0.0;
        if (mu >= mu_[n_ - 1]) return 1.0;
        std::size_t i = locate(mu_, mu);
        double f = (mu - mu_[i]) / (mu_[i + 1] - mu_[i]);
        return ia_[i] + f * (ia_[i + 1] - ia_[i]);
    }

    double mean_from_mi(double ia) const {
        if (ia <= 0.0) return 0.0;
        if (ia >= 1.0) return mu_[n_ - 1];
        std::size_t i = locate(ia_, ia);
        while (ia_[i + 1] == ia_[i]) ++i;  // saturated tail
        double f = (ia - ia_[i]) / (ia_[i + 1] - ia_[i]);
        return mu_[i] + f * (mu_[i + 1] - mu_[i]);
    }

    double max_mean() const { return mu_[n_ - 1]; }

  private:
    static constexpr std::size_t n_ = 600;
    static constexpr double mu_max_ = 300.0;
    std::vector<double> mu_, ia_;

    JTable() : mu_(n_), ia_(n_) {
        for (std::size_t i = 0; i < n_; ++i) {
            double f = static_cast<double>(i) / (n_ - 1);
            mu_[i] = mu_max_ * f * f;
            ia_[i] = integrate(mu_[i]);
        }
        ia_[0] = 0.0;
    }

    // I = 1 - E[log2(1 + e^{-L})], L ~ N(mu, 2 mu); Simpson on +-10 sigma.
    static double integrate(double mu) {
        if (mu <= 0.0) return 0.0;
        const double sd = std::sqrt(2.0 * mu);
        const int n_seg = 2000;
        const double lo = mu - 10.0 * sd, hi = mu + 10.0 * sd;
        const double h = (hi - lo) / n_seg;
        auto f = [&](double l) {
            double z = (l - mu) / sd;
            double pdf = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::acos(-1.0)));
            double loss = l > 0 ? std::log1p(std::exp(-l)) : -l + std::log1p(std::exp(l));
            return pdf * loss / std::log(2.0);
        };
        double acc = f(lo) + f(hi);
        for (int i = 1; i < n_seg; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
        double expected_loss = acc * h / 3.0;
        return std::clamp(1.0 - expected_loss, 0.0, 1.0);
    }

    static std::size_t locate(const std::vector<double>& xs, double x) {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs.begin());
        if (i == 0) return 0;
        if (i >= xs.size()) return xs.size() - 2;
        return i - 1;
    }
};

inline double mi_to_llr_mean(double ia) { return JTable::instance().mean_from_mi(ia); }
inline double llr_mean_to_mi(double mu) { return JTable::instance().mi_from_mean(mu); }

/// Synthetic prior LLRs for known bits: L ~ N((1-2b) mu, eta * mu).  eta = 2
/// is the consistent case.
inline LlrBlock draw_prior_llrs(std::span<const std::uint8_t> bits, double mu, double eta,
                                std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, std::sqrt(std::max(0.0, eta * mu)));
    LlrBlock out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        out[i] = (bits[i] ? -mu : mu) + n(rng);
    return out;
}

/// Histogram estimate of I(b; L) from paired samples, binning tanh(L/2).
inline double estimate_mi_hist(std::span<const std::uint8_t> bits, std::span<const double> llrs,
                               int n_bins = 64) {
    if (bits.size() != llrs.size() || bits.empty())
        throw std::invalid_argument("estimate_mi_hist: bad sample set");
    std::vector<double> h0(n_bins, 0.0), h1(n_bins, 0.0);
    double n0 = 0.0, n1 = 0.0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        double t = std::tanh(llrs[i] / 2.0);
        int b = std::clamp(static_cast<int>((t + 1.0) / 2.0 * n_bins), 0, n_bins - 1);
        if (bits[i]) {
            h1[b] += 1.0;
            n1 += 1.0;
        } else {
            h0[b] += 1.0;
            n0 += 1.0;
        }
    }
    if (n0 == 0.0 || n1 == 0.0) return 0.0;
    double mi = 0.0;
    for (int b = 0; b < n_bins; ++b) {
        double p0 = h0[b] / n0, p1 = h1[b] / n1;
        double pm = 0.5 * (p0 + p1);
        if (p0 > 0.0) mi += 0.5 * p0 * std::log2(p0 / pm);
        if (p1 > 0.0) mi += 0.5 * p1 * std::log2(p1 / pm);
    }
    return std::clamp(mi, 0.0, 1.0);
}

}  // namespace turboeq
