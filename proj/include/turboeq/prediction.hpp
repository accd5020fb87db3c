// Semi-analytic prediction of decision-feedback reliability.
//
// The iteration-varying DFE needs the average variance of its own soft
// decisions before equalizing.  That variance solves a scalar fixed point:
// an analytic map from an assumed causal variance to the extrinsic variance
// the filters would deliver, composed with a tabulated demapper response
// mapping extrinsic variance and prior quality to the resulting posterior
// (or EP) variance.  The tables are measured offline per constellation by
// Monte Carlo over synthetic consistent-Gaussian priors.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "turboeq/equalizer.hpp"
#include "turboeq/mutual_info.hpp"

namespace turboeq {

/// Analytic extrinsic variance of the iteration-varying DFE for an assumed
/// causal decision variance v_causal and prior variance v_prior.
inline double predict_extrinsic_var(const ToeplitzChannel& t, double v_prior, double v_causal,
                                    Counters* counters = nullptr) {
    FilterSet fs = compute_iv_filters(t, v_causal, v_prior, counters);
    return fs.extrinsic_var(v_prior);
}

enum class MuPFormula { kMean, kSum };

/// Prior LLR mean estimate under the consistent-Gaussian model, from the
/// observed LLR magnitudes.
inline double estimate_llr_mean(std::span<const double> llrs, MuPFormula formula) {
    double acc = 0.0;
    for (double l : llrs) acc += l * l;
    if (formula == MuPFormula::kMean && !llrs.empty())
        acc /= static_cast<double>(llrs.size());
    return std::sqrt(1.0 + acc) - 1.0;
}

/// Posterior-variance -> EP-decision-variance transform at extrinsic
/// variance v_e (variance of the Gaussian quotient).
inline double ep_variance_from_app(double gamma, double v_e, Counters* counters = nullptr,
                                   double rho = kEpVarianceGuard) {
    double g = gamma;
    if (g > rho * v_e) {
        g = rho * v_e;
        if (counters) ++counters->ep_guard_clamps;
    }
    return g * v_e / (v_e - g);
}

/// Inverse transform: posterior variance implied by an EP decision variance.
inline double app_variance_from_ep(double v_d, double v_e) {
    if (v_d <= 0.0) return 0.0;
    return v_d * v_e / (v_d + v_e);
}

enum class LutScheme { kBinary, kSymbolWise };
enum class LutFeedback { kApp, kEp };

inline std::string to_string(LutScheme s) {
    return s == LutScheme::kBinary ? "binary" : "symbolwise";
}
inline std::string to_string(LutFeedback f) { return f == LutFeedback::kApp ? "app" : "ep"; }

/// Measured demapper response table.  Rows are prior-quality levels (the row
/// coordinate is the prior LLR mean for the binary scheme, the mean prior
/// symbol variance for the symbol-wise scheme), columns are extrinsic
/// variances in dB.  Lookup is bilinear with saturating extrapolation.
struct DemapperLut {
    std::string constellation;
    LutScheme scheme = LutScheme::kBinary;
    LutFeedback feedback = LutFeedback::kApp;
    double eta_p = 2.0;
    int block_len = 0;
    int samples_per_cell = 0;
    std::uint64_t seed = 0;
    std::vector<double> ve_db;                // ascending
    std::vector<double> prior_axis;           // ascending
    std::vector<std::vector<double>> values;  // [prior row][ve column]

    bool empty() const { return values.empty(); }
};

namespace detail {

inline double interp_axis(const std::vector<double>& axis, double x, std::size_t& i) {
    if (x <= axis.front()) {
        i = 0;
        return 0.0;
    }
    if (x >= axis.back()) {
        i = axis.size() - 2;
        return 1.0;
    }
    std::size_t lo = 0, hi = axis.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        (axis[mid] <= x ? lo : hi) = mid;
    }
    i = lo;
    double span = axis[lo + 1] - axis[lo];
    return span > 0.0 ? (x - axis[lo]) / span : 0.0;
}

}  // namespace detail

inline double lut_lookup(const DemapperLut& lut, double v_e, double prior_coord) {
    if (lut.empty()) throw std::invalid_argument("lut_lookup: empty table");
    double x = lin_to_db(std::max(v_e, kMinExtrinsicVar));
    std::size_t i, j;
    double fx = detail::interp_axis(lut.ve_db, x, j);
    double fy = detail::interp_axis(lut.prior_axis, prior_coord, i);
    const auto& v = lut.values;
    double lo = v[i][j] + fx * (v[i][j + 1] - v[i][j]);
    double hi = v[i + 1][j] + fx * (v[i + 1][j + 1] - v[i + 1][j]);
    return lo + fy * (hi - lo);
}

struct LutGenParams {
    double eta_p = 2.0;
    int block_len = 1024;
    int samples_per_cell = 102400;  // symbols per cell; draws = samples / block_len
    std::uint64_t seed = 0x5eed;
    std::vector<double> ve_db;  // defaults to -15..15 dB step 1
    std::vector<double> ia;     // prior information levels, defaults to 0..1 step 0.05

    void fill_defaults() {
        if (ve_db.empty())
            for (int d = -15; d <= 15; ++d) ve_db.push_back(d);
        if (ia.empty())
            for (int i = 0; i <= 20; ++i) ia.push_back(i / 20.0);
    }
};

/// The four tables produced by one measurement pass.
struct LutSet {
    DemapperLut binary_app, binary_ep, symbol_app, symbol_ep;
};

namespace detail {

struct LutAccumulator {
    std::vector<std::vector<double>> app, ep;  // [ia row][ve col] sums of block means
    std::vector<double> v_p_mean;              // per ia row

    LutAccumulator(std::size_t rows, std::size_t cols)
        : app(rows, std::vector<double>(cols, 0.0)),
          ep(rows, std::vector<double>(cols, 0.0)),
          v_p_mean(rows, 0.0) {}
};

/// One measurement pass.  Noise realizations are shared across the v_e axis
/// (scaled per column), which makes each row smooth in v_e by construction.
inline LutAccumulator measure_demapper(const Constellation& c, const LutGenParams& p,
                                       int n_draws, std::uint64_t seed) {
    const std::size_t rows = p.ia.size(), cols = p.ve_db.size();
    LutAccumulator acc(rows, cols);
    const int q_bits = c.bits_per_symbol;
    const int len = p.block_len;

    std::vector<double> ve_lin(cols);
    for (std::size_t j = 0; j < cols; ++j) ve_lin[j] = db_to_lin(p.ve_db[j]);

    std::vector<std::uint8_t> bits(static_cast<std::size_t>(len) * q_bits);
    std::vector<cxd> noise(len);
    DemapScratch scratch;
    for (std::size_t r = 0; r < rows; ++r) {
        const double mu_p = mi_to_llr_mean(p.ia[r]);
        for (int d = 0; d < n_draws; ++d) {
            std::mt19937_64 rng(derive_seed(seed, r, static_cast<std::uint64_t>(d)));
            std::uniform_int_distribution<int> coin(0, 1);
            for (auto& b : bits) b = static_cast<std::uint8_t>(coin(rng));
            std::vector<cxd> x = map_bits(bits, c);
            LlrBlock llrs = draw_prior_llrs(bits, mu_p, p.eta_p, rng);
            PriorBlock priors = soft_map(llrs, c);
            std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
            for (auto& w : noise) w = cxd(n01(rng), n01(rng));

            acc.v_p_mean[r] += priors.moments.mean_var() / n_draws;
            for (std::size_t j = 0; j < cols; ++j) {
                const double ve = ve_lin[j];
                const double sd = std::sqrt(ve);
                double block_gamma = 0.0;
                for (int k = 0; k < len; ++k) {
                    cxd mu;
                    double gamma;
                    posterior_from_extrinsic(priors, k, x[k] + sd * noise[k], ve, c, scratch,
                                             mu, gamma);
                    block_gamma += gamma;
                }
                block_gamma /= len;
                acc.app[r][j] += block_gamma / n_draws;
                acc.ep[r][j] += ep_variance_from_app(block_gamma, ve) / n_draws;
            }
        }
    }
    return acc;
}

/// Rows must be nondecreasing in v_e up to 2% relative slack.  Cells far
/// below the recursion tolerance are exempt: they are rare-event dominated
/// and their wiggle is immaterial to any consumer.
inline bool rows_monotone(const std::vector<std::vector<double>>& values) {
    for (const auto& row : values)
        for (std::size_t j = 0; j + 1 < row.size(); ++j)
            if (row[j + 1] < row[j] * 0.98 - 1e-4) return false;
    return true;
}

}  // namespace detail

/// Measure all four demapper tables for one constellation.  Rows with
/// non-monotone response trigger one regeneration at four times the sample
/// budget; persistent failure is an error.
inline LutSet generate_luts(const Constellation& c, LutGenParams params) {
    params.fill_defaults();
    if (params.block_len < 1 || params.samples_per_cell < params.block_len)
        throw std::invalid_argument("generate_luts: sample budget below one block");
    if (params.ia.size() < 2 || params.ve_db.size() < 2)
        throw std::invalid_argument("generate_luts: need at least a 2x2 grid");

    int n_draws = std::max(1, params.samples_per_cell / params.block_len);
    detail::LutAccumulator acc = detail::measure_demapper(c, params, n_draws, params.seed);
    if (!detail::rows_monotone(acc.app)) {
        n_draws *= 4;
        acc = detail::measure_demapper(c, params, n_draws, derive_seed(params.seed, 0xa11a));
        if (!detail::rows_monotone(acc.app))
            throw std::runtime_error("generate_luts: non-monotone demapper response");
    }

    auto base = [&](LutScheme s, LutFeedback f) {
        DemapperLut lut;
        lut.constellation = c.name;
        lut.scheme = s;
        lut.feedback = f;
        lut.eta_p = params.eta_p;
        lut.block_len = params.block_len;
        lut.samples_per_cell = n_draws * params.block_len;
        lut.seed = params.seed;
        lut.ve_db = params.ve_db;
        return lut;
    };

    LutSet out;
    out.binary_app = base(LutScheme::kBinary, LutFeedback::kApp);
    out.binary_ep = base(LutScheme::kBinary, LutFeedback::kEp);
    out.symbol_app = base(LutScheme::kSymbolWise, LutFeedback::kApp);
    out.symbol_ep = base(LutScheme::kSymbolWise, LutFeedback::kEp);

    // Binary rows are keyed by the synthetic prior LLR mean, already ascending.
    for (std::size_t r = 0; r < params.ia.size(); ++r) {
        double mu = mi_to_llr_mean(params.ia[r]);
        out.binary_app.prior_axis.push_back(mu);
        out.binary_app.values.push_back(acc.app[r]);
        out.binary_ep.prior_axis.push_back(mu);
        out.binary_ep.values.push_back(acc.ep[r]);
    }
    // Symbol-wise rows are keyed by the measured mean prior variance, which
    // decreases with prior information; store them reversed so the axis ascends.
    for (std::size_t rr = params.ia.size(); rr-- > 0;) {
        out.symbol_app.prior_axis.push_back(acc.v_p_mean[rr]);
        out.symbol_app.values.push_back(acc.app[rr]);
        out.symbol_ep.prior_axis.push_back(acc.v_p_mean[rr]);
        out.symbol_ep.values.push_back(acc.ep[rr]);
    }
    return out;
}

inline const DemapperLut& select_lut(const LutSet& set, LutScheme s, LutFeedback f) {
    if (s == LutScheme::kBinary)
        return f == LutFeedback::kApp ? set.binary_app : set.binary_ep;
    return f == LutFeedback::kApp ? set.symbol_app : set.symbol_ep;
}

struct PredictionConfig {
    int max_iters = 3;
    double tol = 1e-4;
    bool init_heuristic = true;
    double beta = 0.2;  // calibration floor, fraction of the prior variance
};

struct FixedPointResult {
    double v_causal = 0.0;
    double v_extrinsic = 0.0;
    int iters = 0;
    bool converged = false;
    std::vector<double> trajectory;  // iterates, starting at the init value
};

/// Solve v_c = lut(phi(v_c)) by plain iteration from a noise-level-aware
/// init: a poor prior starts the recursion at min(1, sigma_w), a strong one
/// at zero.
inline FixedPointResult predict_causal_variance(const ToeplitzChannel& t, double v_prior,
                                                double prior_coord, const DemapperLut& lut,
                                                const PredictionConfig& cfg,
                                                Counters* counters = nullptr) {
    FixedPointResult res;
    double v_c = 0.0;
    if (cfg.init_heuristic && v_prior > 0.5)
        v_c = std::min(1.0, std::sqrt(t.sigma_w2));
    res.trajectory.push_back(v_c);
    for (int n = 0; n < cfg.max_iters; ++n) {
        double v_e = predict_extrinsic_var(t, v_prior, v_c, counters);
        double v_next = lut_lookup(lut, v_e, prior_coord);
        res.trajectory.push_back(v_next);
        ++res.iters;
        bool done = std::abs(v_next - v_c) < cfg.tol;
        v_c = v_next;
        if (done) {
            res.converged = true;
            break;
        }
    }
    res.v_causal = v_c;
    res.v_extrinsic = predict_extrinsic_var(t, v_prior, v_c, counters);
    return res;
}

/// Guard against over-optimistic predictions: never trust the causal variance
/// below a fixed fraction of the prior variance.
inline double calibrate_causal_variance(double v_causal, double v_prior, double beta) {
    return std::max(v_causal, beta * v_prior);
}

}  // namespace turboeq
