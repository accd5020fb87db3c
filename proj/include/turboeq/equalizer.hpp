// Windowed MMSE turbo equalizers with soft interference cancellation.
//
// All variants share one cancellation structure: the window estimate is
//   x_e[k] = prior_mean[k] + f^H y_win
//            - g_c^H (causal means) - ct * prior_mean[k] - g_a^H (future prior means)
// where [g_c; ct; g_a] = H^H f split around the detected symbol's column.
// In exact arithmetic ct = 1, so the explicit +prior_mean[k] term and the
// center product cancel; keeping both preserves the identity under rounding.
// Linear variants feed prior means through the causal slots; decision-feedback
// variants feed soft decisions (posterior means, or their Gaussian-division
// counterparts in the EP variants).
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "turboeq/channel.hpp"
#include "turboeq/mapping.hpp"

namespace turboeq {

inline constexpr double kMinExtrinsicVar = 1e-30;

enum class Structure { kLinear, kDecisionFeedback };
enum class Feedback { kApp, kEp };

/// MMSE window filter and its interference-cancellation split.
struct FilterSet {
    Eigen::VectorXcd forward;       // f, length N
    Eigen::VectorXcd g_causal;      // taps on past symbols
    cxd center_tap;                 // tap on the detected symbol (== 1 analytically)
    Eigen::VectorXcd g_anticausal;  // taps on future symbols
    double xi = 0.0;                // h_c^H Sigma^{-1} h_c

    double extrinsic_var(double center_prior_var) const {
        return std::max(kMinExtrinsicVar, 1.0 / xi - center_prior_var);
    }
};

/// Slot variance profile [v_causal x n_causal, v_other x (n_post+1)].
inline Eigen::VectorXd dfe_variance_profile(const WindowConfig& w, double v_causal,
                                            double v_other) {
    Eigen::VectorXd vars(w.n_input());
    vars.head(w.n_causal()).setConstant(v_causal);
    vars.tail(w.n_input() - w.n_causal()).setConstant(v_other);
    return vars;
}

/// MMSE filter for a window covariance built from per-slot symbol variances.
/// Sigma = sigma_w2 I + H diag(slot_vars) H^H, factorized by Cholesky with a
/// single jittered retry on numerical failure.
inline FilterSet compute_filters(const ToeplitzChannel& t, const Eigen::VectorXd& slot_vars,
                                 Counters* counters = nullptr) {
    const int n = t.n_obs();
    if (slot_vars.size() != t.n_sym())
        throw std::invalid_argument("compute_filters: slot variance length mismatch");

    // Sigma is banded with bandwidth spread-1: row r of the convolution
    // matrix only touches columns [r, r+spread).
    const int spread = t.window.spread;
    Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = r; c < std::min(n, r + spread); ++c) {
            cxd acc(0.0, 0.0);
            for (int j = c; j < r + spread; ++j)
                acc += slot_vars(j) * t.conv(r, j) * std::conj(t.conv(c, j));
            sigma(r, c) = acc;
            sigma(c, r) = std::conj(acc);
        }
    }
    sigma.diagonal().array() += t.sigma_w2;

    Eigen::LLT<Eigen::MatrixXcd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        double jitter = 1e-12 * sigma.trace().real() / n;
        sigma.diagonal().array() += jitter;
        llt.compute(sigma);
        if (counters) ++counters->cholesky_jitters;
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("compute_filters: covariance not positive definite");
    }

    FilterSet fs;
    Eigen::VectorXcd s = llt.solve(t.center_col);
    fs.xi = t.center_col.dot(s).real();
    if (!(fs.xi > 0.0))
        throw std::runtime_error("compute_filters: nonpositive filter gain");
    fs.forward = s / fs.xi;
    Eigen::VectorXcd g = t.conv.adjoint() * fs.forward;
    const int ctr = t.window.center();
    fs.g_causal = g.head(ctr);
    fs.center_tap = g(ctr);
    fs.g_anticausal = g.tail(t.n_sym() - ctr - 1);
    return fs;
}

/// Iteration-varying filter from a two-level variance profile: v_causal on
/// past slots, v_prior on the detected and future slots.
inline FilterSet compute_iv_filters(const ToeplitzChannel& t, double v_causal, double v_prior,
                                    Counters* counters = nullptr) {
    return compute_filters(t, dfe_variance_profile(t.window, v_causal, v_prior), counters);
}

/// Extrinsic symbol estimates plus the feedback statistics that produced them.
struct EqualizeResult {
    SoftSymbolBlock extrinsic;  // x_e, v_e
    SoftSymbolBlock decisions;  // causal feedback means/variances (DFE only)
    Counters counters;
};

namespace detail {

inline cxd prior_mean_at(const PriorBlock& priors, int i) {
    return (i >= 0 && i < static_cast<int>(priors.size())) ? priors.moments.mean[i]
                                                           : cxd(0.0, 0.0);
}

/// Interference-cancelled filter output for symbol k.
inline cxd cancelled_estimate(const FilterSet& fs, const Eigen::VectorXcd& y_win,
                              const PriorBlock& priors,
                              const std::vector<cxd>& causal_means, int k,
                              const WindowConfig& w) {
    cxd est = priors.moments.mean[k] + fs.forward.dot(y_win);
    const int n_c = static_cast<int>(fs.g_causal.size());
    for (int m = 0; m < n_c; ++m) {
        int i = k - n_c + m;
        cxd mean = (i >= 0) ? causal_means[i] : cxd(0.0, 0.0);
        est -= std::conj(fs.g_causal(m)) * mean;
    }
    est -= std::conj(fs.center_tap) * priors.moments.mean[k];
    for (int j = 0; j < fs.g_anticausal.size(); ++j)
        est -= std::conj(fs.g_anticausal(j)) * prior_mean_at(priors, k + 1 + j);
    return est;
}

struct DemapScratch {
    std::vector<double> logd;
};

/// Posterior moments of symbol k given the Gaussian extrinsic (x_e, v_e).
inline void posterior_from_extrinsic(const PriorBlock& priors, int k, cxd x_e, double v_e,
                                     const Constellation& c, DemapScratch& scratch,
                                     cxd& mu, double& gamma) {
    scratch.logd.resize(c.size());
    demap_log_posterior(priors.log_pmf[k], x_e, v_e, c, scratch.logd);
    double hi = *std::max_element(scratch.logd.begin(), scratch.logd.end());
    double total = 0.0;
    cxd m(0.0, 0.0);
    double e2 = 0.0;
    for (int w = 0; w < c.size(); ++w) {
        double p = std::exp(scratch.logd[w] - hi);
        total += p;
        m += p * c.points[w];
        e2 += p * std::norm(c.points[w]);
    }
    mu = m / total;
    gamma = std::max(0.0, e2 / total - std::norm(mu));
}

}  // namespace detail

/// Iteration-varying equalization with precomputed filters.  The extrinsic
/// variance is constant over the block; decision-feedback variants demap and
/// refeed each symbol in sequence.  For EP feedback, ep_posterior_var is the
/// block-constant posterior variance the Gaussian division assumes.
inline EqualizeResult equalize_iv(std::span<const cxd> y, const PriorBlock& priors,
                                  const ToeplitzChannel& t, const FilterSet& fs,
                                  Structure structure, Feedback feedback,
                                  double ep_posterior_var, const Constellation& c) {
    const int len = static_cast<int>(priors.size());
    EqualizeResult res;
    res.extrinsic.mean.resize(len);
    res.extrinsic.var.resize(len);

    const double v_prior = priors.moments.mean_var();
    const double v_e = fs.extrinsic_var(v_prior);
    const bool dfe = structure == Structure::kDecisionFeedback;

    std::vector<cxd> causal(dfe ? len : 0);
    if (dfe) {
        res.decisions.mean.resize(len);
        res.decisions.var.resize(len);
    }
    const std::vector<cxd>& causal_means = dfe ? causal : priors.moments.mean;

    detail::DemapScratch scratch;
    for (int k = 0; k < len; ++k) {
        Eigen::VectorXcd y_win = observation_window(y, k, t.window);
        cxd x_e = detail::cancelled_estimate(fs, y_win, priors, causal_means, k, t.window);
        res.extrinsic.mean[k] = x_e;
        res.extrinsic.var[k] = v_e;
        if (!dfe) continue;

        cxd mu;
        double gamma;
        detail::posterior_from_extrinsic(priors, k, x_e, v_e, c, scratch, mu, gamma);
        if (feedback == Feedback::kApp) {
            causal[k] = mu;
            res.decisions.mean[k] = mu;
            res.decisions.var[k] = gamma;
        } else {
            cxd x_d;
            double v_d;
            ep_soft_decision(mu, ep_posterior_var, x_e, v_e, x_d, v_d, &res.counters);
            causal[k] = x_d;
            res.decisions.mean[k] = x_d;
            res.decisions.var[k] = v_d;
        }
    }
    return res;
}

/// Time-varying equalization: filters are recomputed for every symbol from
/// the instantaneous slot variances (prior variances ahead of the symbol,
/// decision variances behind it for DFE).  Slots outside the block are guard
/// zeros -- known silence, variance 0 -- so edge windows sharpen instead of
/// hedging against interference that cannot exist.
inline EqualizeResult equalize_tv(std::span<const cxd> y, const PriorBlock& priors,
                                  const ToeplitzChannel& t, Structure structure,
                                  Feedback feedback, const Constellation& c) {
    const int len = static_cast<int>(priors.size());
    const WindowConfig& w = t.window;
    EqualizeResult res;
    res.extrinsic.mean.resize(len);
    res.extrinsic.var.resize(len);

    const bool dfe = structure == Structure::kDecisionFeedback;

    std::vector<cxd> causal(dfe ? len : 0);
    std::vector<double> causal_var(dfe ? len : 0);
    if (dfe) {
        res.decisions.mean.resize(len);
        res.decisions.var.resize(len);
    }
    const std::vector<cxd>& causal_means = dfe ? causal : priors.moments.mean;

    auto slot_var = [&](int i, int k) {
        if (i < 0 || i >= len) return 0.0;  // guard symbols
        if (dfe && i < k) return causal_var[i];
        return priors.moments.var[i];
    };

    detail::DemapScratch scratch;
    Eigen::VectorXd vars(t.n_sym());
    for (int k = 0; k < len; ++k) {
        for (int j = 0; j < t.n_sym(); ++j)
            vars(j) = slot_var(k - w.n_causal() + j, k);
        FilterSet fs = compute_filters(t, vars, &res.counters);

        Eigen::VectorXcd y_win = observation_window(y, k, w);
        cxd x_e = detail::cancelled_estimate(fs, y_win, priors, causal_means, k, w);
        double v_e = fs.extrinsic_var(priors.moments.var[k]);
        res.extrinsic.mean[k] = x_e;
        res.extrinsic.var[k] = v_e;
        if (!dfe) continue;

        cxd mu;
        double gamma;
        detail::posterior_from_extrinsic(priors, k, x_e, v_e, c, scratch, mu, gamma);
        if (feedback == Feedback::kApp) {
            causal[k] = mu;
            causal_var[k] = gamma;
        } else {
            cxd x_d;
            double v_d;
            ep_soft_decision(mu, gamma, x_e, v_e, x_d, v_d, &res.counters);
            causal[k] = x_d;
            causal_var[k] = v_d;
        }
        res.decisions.mean[k] = causal[k];
        res.decisions.var[k] = causal_var[k];
    }
    return res;
}

}  // namespace turboeq
