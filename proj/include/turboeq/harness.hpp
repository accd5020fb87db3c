// Monte Carlo harness: uncoded and turbo-coded BER sweeps, EXIT measurement,
// and the prediction-accuracy study.  Runs are deterministic for a given
// master seed: every block draws from a seed derived from (sweep index,
// block index), and batches are reduced in block order, so results do not
// depend on the number of worker threads.
#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <thread>

#include "turboeq/coding.hpp"
#include "turboeq/lut_cache.hpp"
#include "turboeq/prediction.hpp"

namespace turboeq {

enum class ReceiverKind {
    kTvLe,
    kIvLe,
    kTvDfeApp,
    kTvDfeEp,
    kIvDfeApp,
    kIvDfeEp,
    kIvDfePerfect,
};

inline std::string to_string(ReceiverKind r) {
    switch (r) {
        case ReceiverKind::kTvLe: return "tv-le";
        case ReceiverKind::kIvLe: return "iv-le";
        case ReceiverKind::kTvDfeApp: return "tv-dfe-app";
        case ReceiverKind::kTvDfeEp: return "tv-dfe-ep";
        case ReceiverKind::kIvDfeApp: return "iv-dfe-app";
        case ReceiverKind::kIvDfeEp: return "iv-dfe-ep";
        case ReceiverKind::kIvDfePerfect: return "iv-dfe-perfect";
    }
    return "?";
}

inline ReceiverKind parse_receiver(const std::string& s) {
    for (ReceiverKind r : {ReceiverKind::kTvLe, ReceiverKind::kIvLe, ReceiverKind::kTvDfeApp,
                           ReceiverKind::kTvDfeEp, ReceiverKind::kIvDfeApp,
                           ReceiverKind::kIvDfeEp, ReceiverKind::kIvDfePerfect})
        if (to_string(r) == s) return r;
    throw std::invalid_argument("unknown receiver: " + s);
}

inline bool receiver_needs_lut(ReceiverKind r) {
    return r == ReceiverKind::kIvDfeApp || r == ReceiverKind::kIvDfeEp;
}

/// Everything a receiver invocation needs besides the block data.
struct ReceiverContext {
    ReceiverKind kind = ReceiverKind::kIvLe;
    const Constellation* constellation = nullptr;
    const ToeplitzChannel* toep = nullptr;
    const DemapperLut* lut = nullptr;  // predictive IV variants only
    PredictionConfig pred;
    MuPFormula mu_formula = MuPFormula::kMean;
};

/// Per-invocation prediction telemetry.
struct PredictionRecord {
    double v_causal = std::numeric_limits<double>::quiet_NaN();
    double v_causal_calibrated = std::numeric_limits<double>::quiet_NaN();
    double v_extrinsic = std::numeric_limits<double>::quiet_NaN();
    int iters = 0;
    bool converged = true;
};

struct ReceiverOutput {
    SoftSymbolBlock extrinsic;
    Counters counters;
    PredictionRecord prediction;
};

inline double prior_coordinate(const DemapperLut& lut, const PriorBlock& priors,
                               std::span<const double> prior_llrs, MuPFormula formula) {
    if (lut.scheme == LutScheme::kBinary) return estimate_llr_mean(prior_llrs, formula);
    return priors.moments.mean_var();
}

/// One equalizer invocation, including reliability prediction for the
/// iteration-varying decision-feedback variants.
inline ReceiverOutput run_receiver(std::span<const cxd> y, const PriorBlock& priors,
                                   std::span<const double> prior_llrs,
                                   const ReceiverContext& ctx) {
    const Constellation& c = *ctx.constellation;
    const ToeplitzChannel& t = *ctx.toep;
    ReceiverOutput out;
    const double v_prior = priors.moments.mean_var();

    switch (ctx.kind) {
        case ReceiverKind::kTvLe:
        case ReceiverKind::kTvDfeApp:
        case ReceiverKind::kTvDfeEp: {
            Structure st = ctx.kind == ReceiverKind::kTvLe ? Structure::kLinear
                                                           : Structure::kDecisionFeedback;
            Feedback fb =
                ctx.kind == ReceiverKind::kTvDfeEp ? Feedback::kEp : Feedback::kApp;
            EqualizeResult r = equalize_tv(y, priors, t, st, fb, c);
            out.extrinsic = std::move(r.extrinsic);
            out.counters = r.counters;
            return out;
        }
        case ReceiverKind::kIvLe: {
            FilterSet fs = compute_iv_filters(t, v_prior, v_prior, &out.counters);
            EqualizeResult r =
                equalize_iv(y, priors, t, fs, Structure::kLinear, Feedback::kApp, 0.0, c);
            out.extrinsic = std::move(r.extrinsic);
            out.counters += r.counters;
            return out;
        }
        case ReceiverKind::kIvDfePerfect: {
            FilterSet fs = compute_iv_filters(t, 0.0, v_prior, &out.counters);
            EqualizeResult r = equalize_iv(y, priors, t, fs, Structure::kDecisionFeedback,
                                           Feedback::kApp, 0.0, c);
            out.extrinsic = std::move(r.extrinsic);
            out.counters += r.counters;
            return out;
        }
        case ReceiverKind::kIvDfeApp:
        case ReceiverKind::kIvDfeEp: {
            if (!ctx.lut) throw std::invalid_argument("run_receiver: predictive variant needs a table");
            double coord = prior_coordinate(*ctx.lut, priors, prior_llrs, ctx.mu_formula);
            FixedPointResult fp =
                predict_causal_variance(t, v_prior, coord, *ctx.lut, ctx.pred, &out.counters);
            double v_cal = calibrate_causal_variance(fp.v_causal, v_prior, ctx.pred.beta);
            out.prediction = {fp.v_causal, v_cal, fp.v_extrinsic, fp.iters, fp.converged};

            FilterSet fs = compute_iv_filters(t, v_cal, v_prior, &out.counters);
            double v_e = fs.extrinsic_var(v_prior);
            EqualizeResult r;
            if (ctx.kind == ReceiverKind::kIvDfeApp) {
                r = equalize_iv(y, priors, t, fs, Structure::kDecisionFeedback, Feedback::kApp,
                                0.0, c);
            } else {
                double gamma_bar = app_variance_from_ep(v_cal, v_e);
                r = equalize_iv(y, priors, t, fs, Structure::kDecisionFeedback, Feedback::kEp,
                                gamma_bar, c);
            }
            out.extrinsic = std::move(r.extrinsic);
            out.counters += r.counters;
            return out;
        }
    }
    throw std::logic_error("run_receiver: unhandled receiver");
}

// --------------------------------------------------------------------------
// Deterministic batched block loop.

namespace detail {

/// Runs blocks in batches; each batch may be filled by several threads but is
/// reduced strictly in block order.  Returns the number of blocks consumed.
template <typename BlockResult>
long run_batched(long max_blocks, int batch, int n_threads,
                 const std::function<BlockResult(long)>& body,
                 const std::function<bool(long, const BlockResult&)>& reduce_and_continue) {
    long issued = 0, reduced = 0;
    bool go = true;
    while (go && issued < max_blocks) {
        long n = std::min<long>(batch, max_blocks - issued);
        std::vector<BlockResult> results(n);
        if (n_threads <= 1) {
            for (long i = 0; i < n; ++i) results[i] = body(issued + i);
        } else {
            std::vector<std::thread> pool;
            std::atomic<long> cursor{0};
            for (int w = 0; w < n_threads; ++w)
                pool.emplace_back([&] {
                    for (long i; (i = cursor.fetch_add(1)) < n;)
                        results[i] = body(issued + i);
                });
            for (auto& th : pool) th.join();
        }
        for (long i = 0; i < n && go; ++i) {
            go = reduce_and_continue(issued + i, results[i]);
            ++reduced;
        }
        issued += n;
    }
    return reduced;
}

}  // namespace detail

// --------------------------------------------------------------------------
// BER sweeps.

struct BerConfig {
    std::string constellation = "qpsk";
    std::vector<cxd> taps;  // defaults to the severe 5-tap test channel
    ReceiverKind receiver = ReceiverKind::kIvDfeEp;
    LutScheme scheme = LutScheme::kSymbolWise;
    MuPFormula mu_formula = MuPFormula::kMean;
    PredictionConfig pred;
    LutGenParams lut_params;  // eta_p et al. for table acquisition
    int block_len = 256;
    std::vector<double> snr_db;
    long min_errors = 200;
    long max_blocks = 10000;
    int batch = 32;
    int n_threads = 1;
    std::uint64_t seed = 1;

    bool coded = false;
    std::string rate = "1/2";
    unsigned code_g1 = 07;
    unsigned code_g2 = 05;
    int code_constraint = 3;
    std::uint64_t interleaver_seed = 0x1ea4e;
    int turbo_iters = 4;
};

struct BerPoint {
    double snr_db = 0.0;
    int iteration = 0;
    long blocks = 0;
    long bits = 0;
    long errors = 0;
    double ber = 0.0;
    double mean_v_causal = std::numeric_limits<double>::quiet_NaN();
    double mean_v_causal_calibrated = std::numeric_limits<double>::quiet_NaN();
    Counters counters;
};

namespace detail {

struct UncodedBlockResult {
    long errors = 0;
    Counters counters;
    PredictionRecord prediction;
};

struct CodedBlockResult {
    std::vector<long> errors_per_iter;
    std::vector<PredictionRecord> prediction_per_iter;
    Counters counters;
};

inline ChannelModel channel_at_snr(const std::vector<cxd>& taps, double snr_db) {
    ChannelModel ch = taps.empty() ? make_proakis_c() : ChannelModel{taps, 1.0};
    ch.sigma_w2 = ch.noise_var_for_snr_db(snr_db);
    return ch;
}

}  // namespace detail

/// Uncoded BER: hard symbol decisions from the equalizer posterior, uniform
/// priors, one pass.
inline std::vector<BerPoint> run_uncoded_ber(const BerConfig& cfg,
                                             const LutSet* luts = nullptr) {
    Constellation c = make_constellation(cfg.constellation);
    const int q_bits = c.bits_per_symbol;
    const int len = cfg.block_len;

    LlrBlock zero_llrs(static_cast<std::size_t>(len) * q_bits, 0.0);
    PriorBlock uniform = soft_map(zero_llrs, c);

    std::vector<BerPoint> out;
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
        ChannelModel ch = detail::channel_at_snr(cfg.taps, cfg.snr_db[si]);
        ToeplitzChannel toep = build_toeplitz(ch, default_window(ch.spread()));

        ReceiverContext ctx;
        ctx.kind = cfg.receiver;
        ctx.constellation = &c;
        ctx.toep = &toep;
        ctx.pred = cfg.pred;
        ctx.mu_formula = cfg.mu_formula;
        if (receiver_needs_lut(cfg.receiver)) {
            if (!luts) throw std::invalid_argument("run_uncoded_ber: receiver needs tables");
            ctx.lut = &select_lut(*luts, cfg.scheme,
                                  cfg.receiver == ReceiverKind::kIvDfeEp ? LutFeedback::kEp
                                                                         : LutFeedback::kApp);
        }

        BerPoint pt;
        pt.snr_db = cfg.snr_db[si];
        double v_sum = 0.0, v_cal_sum = 0.0;
        long v_count = 0;

        std::function<detail::UncodedBlockResult(long)> body = [&](long b) {
            std::mt19937_64 rng(derive_seed(cfg.seed, si, static_cast<std::uint64_t>(b)));
            std::uniform_int_distribution<int> coin(0, 1);
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(len) * q_bits);
            for (auto& v : bits) v = static_cast<std::uint8_t>(coin(rng));
            std::vector<cxd> x = map_bits(bits, c);
            std::vector<cxd> y = transmit(x, ch, rng);

            ReceiverOutput ro = run_receiver(y, uniform, zero_llrs, ctx);
            std::vector<std::uint8_t> hard = hard_decide_bits(ro.extrinsic, uniform, c);
            detail::UncodedBlockResult r;
            for (std::size_t i = 0; i < bits.size(); ++i) r.errors += bits[i] != hard[i];
            r.counters = ro.counters;
            r.prediction = ro.prediction;
            return r;
        };
        std::function<bool(long, const detail::UncodedBlockResult&)> reduce =
            [&](long, const detail::UncodedBlockResult& r) {
                pt.errors += r.errors;
                pt.bits += static_cast<long>(len) * q_bits;
                pt.counters += r.counters;
                if (std::isfinite(r.prediction.v_causal)) {
                    v_sum += r.prediction.v_causal;
                    v_cal_sum += r.prediction.v_causal_calibrated;
                    ++v_count;
                }
                return pt.errors < cfg.min_errors;
            };
        pt.blocks = detail::run_batched<detail::UncodedBlockResult>(
            cfg.max_blocks, cfg.batch, cfg.n_threads, body, reduce);
        pt.ber = pt.bits > 0 ? static_cast<double>(pt.errors) / pt.bits : 0.0;
        if (v_count > 0) {
            pt.mean_v_causal = v_sum / v_count;
            pt.mean_v_causal_calibrated = v_cal_sum / v_count;
        }
        out.push_back(pt);
    }
    return out;
}

/// Turbo-coded BER: equalize, demap, decode, feed decoder extrinsics back as
/// symbol priors.  One record per (SNR, iteration); iteration 0 is the first
/// pass.  The stop rule watches the final iteration's error count.
inline std::vector<BerPoint> run_coded_ber(const BerConfig& cfg, const LutSet* luts = nullptr) {
    Constellation c = make_constellation(cfg.constellation);
    const int q_bits = c.bits_per_symbol;
    const int len = cfg.block_len;
    const int n_coded = len * q_bits;

    CodeSpec code;
    code.g1 = cfg.code_g1;
    code.g2 = cfg.code_g2;
    code.constraint_length = cfg.code_constraint;
    code.puncture = make_puncture(cfg.rate);
    const int n_info = info_len_for_coded(code, n_coded);
    if (n_info <= 0)
        throw std::invalid_argument("run_coded_ber: puncturing cannot fill the block");
    const int steps = code_steps(code, n_info);
    Interleaver il = Interleaver::make(n_coded, cfg.interleaver_seed);
    const int n_iters = cfg.turbo_iters + 1;

    std::vector<BerPoint> out;
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
        ChannelModel ch = detail::channel_at_snr(cfg.taps, cfg.snr_db[si]);
        ToeplitzChannel toep = build_toeplitz(ch, default_window(ch.spread()));

        ReceiverContext ctx;
        ctx.kind = cfg.receiver;
        ctx.constellation = &c;
        ctx.toep = &toep;
        ctx.pred = cfg.pred;
        ctx.mu_formula = cfg.mu_formula;
        if (receiver_needs_lut(cfg.receiver)) {
            if (!luts) throw std::invalid_argument("run_coded_ber: receiver needs tables");
            ctx.lut = &select_lut(*luts, cfg.scheme,
                                  cfg.receiver == ReceiverKind::kIvDfeEp ? LutFeedback::kEp
                                                                         : LutFeedback::kApp);
        }

        std::vector<BerPoint> pts(n_iters);
        std::vector<double> v_sum(n_iters, 0.0), v_cal_sum(n_iters, 0.0);
        std::vector<long> v_count(n_iters, 0);

        std::function<detail::CodedBlockResult(long)> body = [&](long b) {
            std::mt19937_64 rng(derive_seed(cfg.seed, si, static_cast<std::uint64_t>(b)));
            std::uniform_int_distribution<int> coin(0, 1);
            std::vector<std::uint8_t> info(n_info);
            for (auto& v : info) v = static_cast<std::uint8_t>(coin(rng));
            std::vector<std::uint8_t> coded = conv_encode(info, code);
            std::vector<std::uint8_t> kept =
                puncture<std::uint8_t>(coded, code.puncture);
            std::vector<std::uint8_t> tx_bits = il.interleave<std::uint8_t>(kept);
            std::vector<cxd> x = map_bits(tx_bits, c);
            std::vector<cxd> y = transmit(x, ch, rng);

            detail::CodedBlockResult r;
            r.errors_per_iter.resize(n_iters, 0);
            r.prediction_per_iter.resize(n_iters);
            LlrBlock prior_llrs(n_coded, 0.0);
            for (int it = 0; it < n_iters; ++it) {
                PriorBlock priors = soft_map(prior_llrs, c);
                ReceiverOutput ro = run_receiver(y, priors, prior_llrs, ctx);
                r.counters += ro.counters;
                r.prediction_per_iter[it] = ro.prediction;

                LlrBlock eq_ext = demap_block_extrinsic(ro.extrinsic, priors, prior_llrs, c);
                LlrBlock deint = il.deinterleave<double>(eq_ext);
                LlrBlock full = depuncture(deint, code.puncture, steps);
                BcjrResult dec = bcjr_decode(full, n_info, code);
                for (int i = 0; i < n_info; ++i)
                    r.errors_per_iter[it] += dec.info_hard[i] != info[i];
                if (it + 1 < n_iters) {
                    LlrBlock dec_kept = puncture<double>(dec.coded_extrinsic, code.puncture);
                    prior_llrs = il.interleave<double>(dec_kept);
                }
            }
            return r;
        };
        std::function<bool(long, const detail::CodedBlockResult&)> reduce =
            [&](long, const detail::CodedBlockResult& r) {
                for (int it = 0; it < n_iters; ++it) {
                    pts[it].errors += r.errors_per_iter[it];
                    pts[it].bits += n_info;
                    ++pts[it].blocks;
                    const PredictionRecord& pr = r.prediction_per_iter[it];
                    if (std::isfinite(pr.v_causal)) {
                        v_sum[it] += pr.v_causal;
                        v_cal_sum[it] += pr.v_causal_calibrated;
                        ++v_count[it];
                    }
                }
                pts[0].counters += r.counters;
                return pts[n_iters - 1].errors < cfg.min_errors;
            };
        detail::run_batched<detail::CodedBlockResult>(cfg.max_blocks, cfg.batch, cfg.n_threads,
                                                      body, reduce);
        for (int it = 0; it < n_iters; ++it) {
            pts[it].snr_db = cfg.snr_db[si];
            pts[it].iteration = it;
            pts[it].ber = pts[it].bits > 0
                              ? static_cast<double>(pts[it].errors) / pts[it].bits
                              : 0.0;
            if (v_count[it] > 0) {
                pts[it].mean_v_causal = v_sum[it] / v_count[it];
                pts[it].mean_v_causal_calibrated = v_cal_sum[it] / v_count[it];
            }
            out.push_back(pts[it]);
        }
    }
    return out;
}

// --------------------------------------------------------------------------
// EXIT measurement.

struct ExitPoint {
    double ia = 0.0;
    double ie = 0.0;
};

struct ExitCurve {
    ReceiverKind receiver;
    double snr_db = 0.0;
    std::vector<ExitPoint> pts;
};

struct ExitConfig {
    std::string constellation = "8psk";
    std::vector<cxd> taps;
    ReceiverKind receiver = ReceiverKind::kIvDfeEp;
    LutScheme scheme = LutScheme::kSymbolWise;
    MuPFormula mu_formula = MuPFormula::kMean;
    PredictionConfig pred;
    LutGenParams lut_params;
    int block_len = 256;
    std::vector<double> snr_db;
    std::vector<double> ia_grid;  // defaults to 0..1 step 0.125
    int n_blocks = 40;
    double eta_p = 2.0;
    std::uint64_t seed = 1;

    void fill_defaults() {
        if (ia_grid.empty())
            for (int i = 0; i <= 8; ++i) ia_grid.push_back(i / 8.0);
    }
};

/// Detector transfer curve I_E(I_A) at one SNR.
inline ExitCurve measure_exit(const ExitConfig& cfg, double snr_db,
                              const LutSet* luts = nullptr) {
    Constellation c = make_constellation(cfg.constellation);
    const int q_bits = c.bits_per_symbol;
    const int len = cfg.block_len;
    ChannelModel ch = detail::channel_at_snr(cfg.taps, snr_db);
    ToeplitzChannel toep = build_toeplitz(ch, default_window(ch.spread()));

    ReceiverContext ctx;
    ctx.kind = cfg.receiver;
    ctx.constellation = &c;
    ctx.toep = &toep;
    ctx.pred = cfg.pred;
    ctx.mu_formula = cfg.mu_formula;

    ExitCurve curve;
    curve.receiver = cfg.receiver;
    curve.snr_db = snr_db;

    for (std::size_t ii = 0; ii < cfg.ia_grid.size(); ++ii) {
        const double ia = cfg.ia_grid[ii];
        const double mu = mi_to_llr_mean(ia);
        std::vector<std::uint8_t> all_bits;
        std::vector<double> all_llrs;
        all_bits.reserve(static_cast<std::size_t>(cfg.n_blocks) * len * q_bits);
        all_llrs.reserve(all_bits.capacity());

        ReceiverContext block_ctx = ctx;
        if (receiver_needs_lut(cfg.receiver)) {
            if (!luts) throw std::invalid_argument("measure_exit: receiver needs tables");
            block_ctx.lut = &select_lut(*luts, cfg.scheme,
                                        cfg.receiver == ReceiverKind::kIvDfeEp
                                            ? LutFeedback::kEp
                                            : LutFeedback::kApp);
        }

        for (int b = 0; b < cfg.n_blocks; ++b) {
            std::mt19937_64 rng(derive_seed(cfg.seed, ii, static_cast<std::uint64_t>(b)));
            std::uniform_int_distribution<int> coin(0, 1);
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(len) * q_bits);
            for (auto& v : bits) v = static_cast<std::uint8_t>(coin(rng));
            std::vector<cxd> x = map_bits(bits, c);
            std::vector<cxd> y = transmit(x, ch, rng);
            LlrBlock prior_llrs = draw_prior_llrs(bits, mu, cfg.eta_p, rng);
            for (double& l : prior_llrs) l = clip_llr(l);
            PriorBlock priors = soft_map(prior_llrs, c);

            ReceiverOutput ro = run_receiver(y, priors, prior_llrs, block_ctx);
            LlrBlock ext = demap_block_extrinsic(ro.extrinsic, priors, prior_llrs, c);
            all_bits.insert(all_bits.end(), bits.begin(), bits.end());
            all_llrs.insert(all_llrs.end(), ext.begin(), ext.end());
        }
        curve.pts.push_back({ia, estimate_mi_hist(all_bits, all_llrs)});
    }
    return curve;
}

/// Area under the transfer curve times bits per symbol: the BICM achievable
/// rate proxy for this detector.
inline double achievable_rate(const ExitCurve& curve, int bits_per_symbol) {
    if (curve.pts.size() < 5)
        throw std::invalid_argument("achievable_rate: need at least 5 grid points");
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < curve.pts.size(); ++i) {
        const auto& a = curve.pts[i];
        const auto& b = curve.pts[i + 1];
        if (b.ia <= a.ia) throw std::invalid_argument("achievable_rate: grid not increasing");
        area += 0.5 * (a.ie + b.ie) * (b.ia - a.ia);
    }
    return bits_per_symbol * area;
}

// --------------------------------------------------------------------------
// Prediction-accuracy study.

struct StudyConfig {
    std::string constellation = "16qam";
    std::vector<double> ve_db;            // defaults to the table axis
    std::vector<double> ia;               // defaults to the table axis
    std::vector<double> etas = {1.0, 2.0, 3.0};
    int block_len = 1024;
    int n_draws = 24;
    MuPFormula mu_formula = MuPFormula::kMean;
    std::uint64_t seed = 77;
};

struct StudyPoint {
    LutScheme scheme;
    LutFeedback feedback;
    double eta = 0.0;
    double ve_db = 0.0;
    double ia = 0.0;
    double mse = 0.0;     // squared prediction error, averaged over draws
    double floor2 = 0.0;  // squared difference of disjoint truth pairs
    long draws = 0;
};

/// Compare table predictions driven by estimated prior coordinates against
/// per-block measured truth, across prior-consistency mismatch eta.
inline std::vector<StudyPoint> run_prediction_study(const StudyConfig& cfg, const LutSet& luts) {
    Constellation c = make_constellation(cfg.constellation);
    const int q_bits = c.bits_per_symbol;
    const int len = cfg.block_len;
    std::vector<double> ve_db = cfg.ve_db.empty() ? luts.binary_app.ve_db : cfg.ve_db;
    std::vector<double> ia_grid = cfg.ia;
    if (ia_grid.empty())
        for (int i = 0; i <= 20; ++i) ia_grid.push_back(i / 20.0);

    std::vector<StudyPoint> out;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(len) * q_bits);
    std::vector<cxd> noise(len);
    detail::DemapScratch scratch;

    for (std::size_t ei = 0; ei < cfg.etas.size(); ++ei) {
        for (std::size_t ii = 0; ii < ia_grid.size(); ++ii) {
            const double mu_p = mi_to_llr_mean(ia_grid[ii]);
            for (std::size_t ji = 0; ji < ve_db.size(); ++ji) {
                const double ve = db_to_lin(ve_db[ji]);
                const double sd = std::sqrt(ve);

                double se[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // [scheme][feedback]
                double floor_acc[2] = {0.0, 0.0};            // [feedback]
                double prev_truth[2] = {0.0, 0.0};
                long pairs = 0;

                for (int d = 0; d < cfg.n_draws; ++d) {
                    std::mt19937_64 rng(
                        derive_seed(cfg.seed, (ei * ia_grid.size() + ii) * ve_db.size() + ji,
                                    static_cast<std::uint64_t>(d)));
                    std::uniform_int_distribution<int> coin(0, 1);
                    for (auto& b : bits) b = static_cast<std::uint8_t>(coin(rng));
                    std::vector<cxd> x = map_bits(bits, c);
                    LlrBlock llrs = draw_prior_llrs(bits, mu_p, cfg.etas[ei], rng);
                    PriorBlock priors = soft_map(llrs, c);
                    std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
                    for (auto& w : noise) w = cxd(n01(rng), n01(rng));

                    double truth_app = 0.0;
                    for (int k = 0; k < len; ++k) {
                        cxd mu;
                        double gamma;
                        detail::posterior_from_extrinsic(priors, k, x[k] + sd * noise[k], ve,
                                                         c, scratch, mu, gamma);
                        truth_app += gamma;
                    }
                    truth_app /= len;
                    double truth_ep = ep_variance_from_app(truth_app, ve);

                    double mu_hat = estimate_llr_mean(llrs, cfg.mu_formula);
                    double v_hat = priors.moments.mean_var();
                    double truth[2] = {truth_app, truth_ep};
                    double pred[2][2] = {
                        {lut_lookup(luts.binary_app, ve, mu_hat),
                         lut_lookup(luts.binary_ep, ve, mu_hat)},
                        {lut_lookup(luts.symbol_app, ve, v_hat),
                         lut_lookup(luts.symbol_ep, ve, v_hat)},
                    };
                    for (int s = 0; s < 2; ++s)
                        for (int f = 0; f < 2; ++f) {
                            double e = pred[s][f] - truth[f];
                            se[s][f] += e * e;
                        }
                    if (d % 2 == 1) {
                        for (int f = 0; f < 2; ++f) {
                            double diff = truth[f] - prev_truth[f];
                            floor_acc[f] += diff * diff;
                        }
                        ++pairs;
                    }
                    prev_truth[0] = truth[0];
                    prev_truth[1] = truth[1];
                }

                for (int s = 0; s < 2; ++s)
                    for (int f = 0; f < 2; ++f) {
                        StudyPoint sp;
                        sp.scheme = s == 0 ? LutScheme::kBinary : LutScheme::kSymbolWise;
                        sp.feedback = f == 0 ? LutFeedback::kApp : LutFeedback::kEp;
                        sp.eta = cfg.etas[ei];
                        sp.ve_db = ve_db[ji];
                        sp.ia = ia_grid[ii];
                        sp.mse = se[s][f] / cfg.n_draws;
                        sp.floor2 = pairs > 0 ? floor_acc[f] / pairs : 0.0;
                        sp.draws = cfg.n_draws;
                        out.push_back(sp);
                    }
            }
        }
    }
    return out;
}

}  // namespace turboeq
