// Acceptance gate: one criterion per number, each printing a single
// [PASS]/[FAIL] line.  Run with --criterion N for one, --prepare-luts to
// warm the table cache, or no arguments for the full battery.
#include <chrono>
#include <cstring>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "turboeq/turboeq.hpp"

using namespace turboeq;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int prec = 3) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

LutGenParams acceptance_lut_params() {
    LutGenParams p;
    p.block_len = 1024;
    p.samples_per_cell = 32768;
    p.seed = 0x5eed;
    p.fill_defaults();
    return p;
}

LutSet acceptance_luts(const std::string& name) {
    return load_or_generate_luts(make_constellation(name), acceptance_lut_params());
}

// ---------------------------------------------------------------------------
// 1. Equalizer outputs against the dense-matrix reference.

struct RandomInstance {
    ChannelModel ch;
    Constellation c;
    WindowConfig w;
    std::vector<cxd> y;
    LlrBlock llrs;
    PriorBlock priors;
};

RandomInstance draw_instance(std::mt19937_64& rng) {
    RandomInstance in;
    std::uniform_int_distribution<int> spread_d(1, 3), len_d(4, 16), mod_d(0, 3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> gn(0.0, 1.0);

    const int spread = spread_d(rng);
    double energy = 0.0;
    do {
        in.ch.taps.resize(spread);
        energy = 0.0;
        for (auto& h : in.ch.taps) {
            h = cxd(gn(rng), gn(rng)) / std::sqrt(2.0);
            energy += std::norm(h);
        }
    } while (energy < 0.25 || energy > 4.0);
    in.ch.sigma_w2 = std::pow(10.0, -2.0 * u(rng));

    const char* mods[] = {"bpsk", "qpsk", "8psk", "16qam"};
    in.c = make_constellation(mods[mod_d(rng)]);

    if (rng() % 3 == 0) {
        in.w.spread = spread;
        in.w.n_pre = spread + static_cast<int>(rng() % 3);
        in.w.n_post = spread + static_cast<int>(rng() % 3);
    } else {
        in.w = default_window(spread);
    }

    const int len = len_d(rng);
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(len) * in.c.bits_per_symbol);
    for (auto& b : bits) b = static_cast<std::uint8_t>(coin(rng));
    in.y = transmit(map_bits(bits, in.c), in.ch, rng);
    std::normal_distribution<double> ln(0.0, 0.5 + 2.5 * u(rng));
    in.llrs.resize(bits.size());
    for (auto& l : in.llrs) l = ln(rng);
    in.priors = soft_map(in.llrs, in.c);
    return in;
}

double max_deviation(const EqualizeResult& got, const oracle::EqOracleResult& want) {
    double dev = 0.0;
    for (std::size_t k = 0; k < want.x_e.size(); ++k) {
        dev = std::max(dev, std::abs(got.extrinsic.mean[k] - want.x_e[k]) /
                                (1.0 + std::abs(want.x_e[k])));
        dev = std::max(dev,
                       std::abs(got.extrinsic.var[k] - want.v_e[k]) / (1.0 + want.v_e[k]));
    }
    return dev;
}

Outcome criterion_1() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double tol = 1e-9;
    double worst = 0.0;
    int checked = 0;

    for (int rep = 0; rep < 200; ++rep) {
        RandomInstance in = draw_instance(rng);
        ToeplitzChannel t = build_toeplitz(in.ch, in.w);
        const double v_bar = in.priors.moments.mean_var();
        oracle::EqOracleConfig ocfg;

        {  // iteration-varying linear
            FilterSet fs = compute_iv_filters(t, v_bar, v_bar);
            auto got = equalize_iv(in.y, in.priors, t, fs, Structure::kLinear,
                                   Feedback::kApp, 0.0, in.c);
            ocfg = {};
            auto want =
                oracle::equalize_reference(in.y, in.llrs, in.ch.taps, in.ch.sigma_w2,
                                           in.w.n_pre, in.w.n_post, in.c, ocfg);
            worst = std::max(worst, max_deviation(got, want));
        }
        {  // iteration-varying DFE, posterior feedback
            double v_c = u(rng);
            FilterSet fs = compute_iv_filters(t, v_c, v_bar);
            auto got = equalize_iv(in.y, in.priors, t, fs, Structure::kDecisionFeedback,
                                   Feedback::kApp, 0.0, in.c);
            ocfg = {};
            ocfg.dfe = true;
            ocfg.v_causal = v_c;
            auto want =
                oracle::equalize_reference(in.y, in.llrs, in.ch.taps, in.ch.sigma_w2,
                                           in.w.n_pre, in.w.n_post, in.c, ocfg);
            worst = std::max(worst, max_deviation(got, want));
        }
        {  // iteration-varying DFE, divided feedback
            double v_c = u(rng);
            FilterSet fs = compute_iv_filters(t, v_c, v_bar);
            double gamma_bar = u(rng) * 0.9 * fs.extrinsic_var(v_bar);
            auto got = equalize_iv(in.y, in.priors, t, fs, Structure::kDecisionFeedback,
                                   Feedback::kEp, gamma_bar, in.c);
            ocfg = {};
            ocfg.dfe = true;
            ocfg.ep = true;
            ocfg.v_causal = v_c;
            ocfg.gamma_bar = gamma_bar;
            auto want =
                oracle::equalize_reference(in.y, in.llrs, in.ch.taps, in.ch.sigma_w2,
                                           in.w.n_pre, in.w.n_post, in.c, ocfg);
            worst = std::max(worst, max_deviation(got, want));
        }
        for (int mode = 0; mode < 3; ++mode) {  // time-varying trio
            Structure st = mode == 0 ? Structure::kLinear : Structure::kDecisionFeedback;
            Feedback fb = mode == 2 ? Feedback::kEp : Feedback::kApp;
            auto got = equalize_tv(in.y, in.priors, t, st, fb, in.c);
            ocfg = {};
            ocfg.time_varying = true;
            ocfg.dfe = mode != 0;
            ocfg.ep = mode == 2;
            auto want =
                oracle::equalize_reference(in.y, in.llrs, in.ch.taps, in.ch.sigma_w2,
                                           in.w.n_pre, in.w.n_post, in.c, ocfg);
            worst = std::max(worst, max_deviation(got, want));
        }
        checked += 6;
    }

    Outcome o;
    o.pass = worst < tol;
    o.detail = "max relative deviation " + fmt(worst) + " over " + std::to_string(checked) +
               " equalizer invocations (tol 1e-9)";
    return o;
}

// ---------------------------------------------------------------------------
// 2. Analytic reliability response is monotone in the causal variance.

Outcome criterion_2() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> gn(0.0, 1.0);
    double worst_drop = 0.0;
    int cells = 0;

    for (int chan = 0; chan < 100; ++chan) {
        int spread = 1 + static_cast<int>(rng() % 4);
        std::vector<cxd> taps(spread);
        double energy = 0.0;
        do {
            energy = 0.0;
            for (auto& h : taps) {
                h = cxd(gn(rng), gn(rng)) / std::sqrt(2.0);
                energy += std::norm(h);
            }
        } while (energy < 0.25 || energy > 4.0);

        for (int pair = 0; pair < 10; ++pair) {
            ChannelModel ch{taps, std::pow(10.0, -3.0 * u(rng))};
            ToeplitzChannel t = build_toeplitz(ch, default_window(spread));
            double v_p = 0.05 + 0.95 * u(rng);
            double prev = -1.0;
            for (int i = 0; i <= 20; ++i) {
                double v_c = i / 20.0;
                double v_e = predict_extrinsic_var(t, v_p, v_c);
                if (prev >= 0.0) worst_drop = std::min(worst_drop, v_e - prev);
                prev = v_e;
                ++cells;
            }
        }
    }

    Outcome o;
    o.pass = worst_drop > -1e-12;
    o.detail = "worst successive difference " + fmt(worst_drop) + " over " +
               std::to_string(cells) + " grid points (must exceed -1e-12)";
    return o;
}

// ---------------------------------------------------------------------------
// 3. Fixed point: init independence and empirical contraction.

Outcome criterion_3() {
    LutSet set = acceptance_luts("16qam");
    const DemapperLut& lut = select_lut(set, LutScheme::kSymbolWise, LutFeedback::kApp);

    double worst_gap = 0.0, worst_lip = 0.0;
    std::string worst_at;
    for (double snr = -5.0; snr <= 25.0; snr += 5.0) {
        ChannelModel ch = make_proakis_c();
        ch.sigma_w2 = ch.noise_var_for_snr_db(snr);
        ToeplitzChannel t = build_toeplitz(ch, default_window(ch.spread()));

        for (double v_p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            auto step = [&](double v) {
                return lut_lookup(lut, predict_extrinsic_var(t, v_p, v), v_p);
            };

            double finals[3];
            const double inits[3] = {0.0, 0.5, 1.0};
            for (int i = 0; i < 3; ++i) {
                double v = inits[i];
                for (int n = 0; n < 50; ++n) {
                    double vn = step(v);
                    bool done = std::abs(vn - v) < 1e-12;
                    v = vn;
                    if (done) break;
                }
                finals[i] = v;
            }
            worst_gap = std::max({worst_gap, std::abs(finals[0] - finals[1]),
                                  std::abs(finals[1] - finals[2]),
                                  std::abs(finals[0] - finals[2])});

            for (double v = 0.0; v < 0.999; v += 0.1) {
                double ratio = std::abs(step(v + 0.1) - step(v)) / 0.1;
                if (ratio > worst_lip) {
                    worst_lip = ratio;
                    worst_at = fmt(snr, 3) + " dB, v_p " + fmt(v_p, 3) + ", v_c " +
                               fmt(v, 2) + "-" + fmt(v + 0.1, 2);
                }
            }
        }
    }

    Outcome o;
    o.pass = worst_gap < 1e-3 && worst_lip < 1.0;
    o.detail = "max init disagreement " + fmt(worst_gap) + " (tol 1e-3); max slope ratio " +
               fmt(worst_lip) + " at " + worst_at + " (must stay below 1)";
    return o;
}

// ---------------------------------------------------------------------------
// 4. Prediction robustness across prior-consistency mismatch.

Outcome criterion_4() {
    LutSet set = acceptance_luts("16qam");
    StudyConfig cfg;
    cfg.constellation = "16qam";
    cfg.etas = {1.0, 2.0, 3.0};
    cfg.block_len = 1024;
    cfg.n_draws = 24;
    cfg.seed = 77;
    std::vector<StudyPoint> rows = run_prediction_study(cfg, set);

    // grid-mean MSE and noise floor per (eta, scheme, feedback)
    auto mean_of = [&](double eta, LutScheme s, LutFeedback f, bool floor) {
        double acc = 0.0;
        long n = 0;
        for (const StudyPoint& r : rows)
            if (r.eta == eta && r.scheme == s && r.feedback == f) {
                acc += floor ? r.floor2 : r.mse;
                ++n;
            }
        return n ? acc / n : 0.0;
    };

    std::ostringstream os;
    bool pass = true;
    for (LutFeedback f : {LutFeedback::kApp, LutFeedback::kEp}) {
        double sym2 = mean_of(2.0, LutScheme::kSymbolWise, f, false);
        double bin2 = mean_of(2.0, LutScheme::kBinary, f, false);
        double floor2 = 0.5 * (mean_of(2.0, LutScheme::kSymbolWise, f, true) +
                               mean_of(2.0, LutScheme::kBinary, f, true));
        bool matched_ok = sym2 <= 2.0 * floor2 && bin2 <= 2.0 * floor2;
        pass = pass && matched_ok;
        os << " " << to_string(f) << ": eta2 mse sym/bin/floor " << fmt(sym2) << "/"
           << fmt(bin2) << "/" << fmt(floor2) << (matched_ok ? "" : " [exceeds 2x floor]");
        for (double eta : {1.0, 3.0}) {
            double sym = mean_of(eta, LutScheme::kSymbolWise, f, false);
            double bin = mean_of(eta, LutScheme::kBinary, f, false);
            bool order_ok = sym <= bin;
            pass = pass && order_ok;
            os << "; eta" << fmt(eta, 1) << " sym " << fmt(sym) << (order_ok ? " <= " : " > ")
               << fmt(bin) << " bin";
        }
    }

    Outcome o;
    o.pass = pass;
    o.detail = "grid-mean prediction MSE:" + os.str();
    return o;
}

// ---------------------------------------------------------------------------
// 5. Decoder exactness and the AWGN closed form.

Outcome criterion_5() {
    std::mt19937_64 rng(505);
    std::uniform_int_distribution<int> coin(0, 1);
    std::normal_distribution<double> ln(0.0, 2.0);
    CodeSpec code;  // rate-1/2 memory-2 default

    double worst = 0.0;
    for (int rep = 0; rep < 30; ++rep) {
        int n_info = 4 + static_cast<int>(rng() % 9);  // up to 12
        std::vector<std::uint8_t> info(n_info);
        for (auto& b : info) b = static_cast<std::uint8_t>(coin(rng));
        int n_coded = 2 * code_steps(code, n_info);
        LlrBlock llrs(n_coded);
        for (auto& l : llrs) l = ln(rng);
        if (rep % 2)  // zeroed positions mimic depunctured slots
            for (std::size_t i = 0; i < llrs.size(); ++i)
                if (rng() % 3 == 0) llrs[i] = 0.0;

        BcjrResult got = bcjr_decode(llrs, n_info, code);
        oracle::MapOracleResult want = oracle::map_reference(llrs, n_info, code);
        for (int i = 0; i < n_coded; ++i)
            worst = std::max(worst, std::abs(clip_llr(got.coded_extrinsic[i]) -
                                             clip_llr(want.coded_post[i] - llrs[i])));
        for (int i = 0; i < n_info; ++i)
            worst = std::max(worst,
                             std::abs(clip_llr(got.info_posterior[i]) -
                                      clip_llr(want.info_post[i])));
    }
    bool bcjr_ok = worst < 1e-9;

    BerConfig cfg;
    cfg.constellation = "bpsk";
    cfg.taps = {cxd(1.0, 0.0)};
    cfg.receiver = ReceiverKind::kIvLe;
    cfg.snr_db = {4.0};
    cfg.min_errors = 600;
    cfg.max_blocks = 6000;
    cfg.seed = 55;
    BerPoint pt = run_uncoded_ber(cfg)[0];
    double p = oracle::q_func(std::sqrt(2.0 * db_to_lin(4.0)));
    double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(pt.bits));
    bool awgn_ok = std::abs(pt.ber - p) <= 3.0 * sigma;

    Outcome o;
    o.pass = bcjr_ok && awgn_ok;
    o.detail = "max decoder LLR deviation " + fmt(worst) + " (tol 1e-9); AWGN ber " +
               fmt(pt.ber) + " vs " + fmt(p) + " +- " + fmt(3.0 * sigma) + " (3 sigma, " +
               std::to_string(pt.bits) + " bits)";
    return o;
}

// ---------------------------------------------------------------------------
// 6. Uncoded receiver ordering at the 1e-3 operating point.

double one_sided_z(double p_lo, long n_lo, double p_hi, long n_hi) {
    double var = p_lo * (1.0 - p_lo) / n_lo + p_hi * (1.0 - p_hi) / n_hi;
    if (var <= 0.0) return 0.0;
    return (p_hi - p_lo) / std::sqrt(var);
}

Outcome criterion_6() {
    BerConfig sweep;
    sweep.constellation = "qpsk";
    sweep.receiver = ReceiverKind::kTvDfeEp;
    sweep.block_len = 256;
    sweep.min_errors = 150;
    sweep.max_blocks = 400;
    sweep.seed = 66;
    // single-pass use case: raw fixed-point prediction, no calibration floor
    // (the floor is a turbo-loop heuristic; at uniform priors it would pin
    // the causal variance to beta and cripple the predictive receiver)
    sweep.pred.beta = 0.0;
    // run the recursion to its fixed point: prediction happens once per block
    // here, and near the waterfall the map's slope is close to one, so the
    // three-step default (a per-turbo-iteration budget) stops far above the
    // fixed point; 50 matches the uniqueness criterion's convergence budget
    sweep.pred.max_iters = 50;

    // locate the SNR where the reference receiver crosses 1e-3
    double prev_snr = 0.0, prev_ber = -1.0, snr_star = 24.0;
    bool bracketed = false;
    for (double snr = 14.0; snr <= 24.0; snr += 1.0) {
        sweep.snr_db = {snr};
        double ber = run_uncoded_ber(sweep)[0].ber;
        std::cout << "  sweep tv-dfe-ep " << snr << " dB: ber " << fmt(ber) << std::endl;
        if (ber < 1e-3) {
            if (prev_ber > 1e-3) {
                double la = std::log10(std::max(prev_ber, 1e-8));
                double lb = std::log10(std::max(ber, 1e-8));
                snr_star = prev_snr + (la - (-3.0)) / (la - lb) * (snr - prev_snr);
            } else {
                snr_star = snr;
            }
            bracketed = true;
            break;
        }
        prev_snr = snr;
        prev_ber = ber;
    }

    BerConfig heavy = sweep;
    heavy.snr_db = {snr_star};
    // the middle gap is one to two percent at this operating point (the
    // perfect-decision assumption pays almost no error-propagation penalty
    // when fewer than 3% of feedback windows hold a wrong decision), so the
    // error budget is sized for 90% power on a 1.5% one-sided gap
    heavy.min_errors = 80000;
    heavy.max_blocks = 320000;

    struct Meas {
        double ber;
        long bits;
    };
    auto measure = [&](ReceiverKind r, const LutSet* luts) {
        BerConfig cfg = heavy;
        cfg.receiver = r;
        BerPoint pt = run_uncoded_ber(cfg, luts)[0];
        std::cout << "  " << to_string(r) << " at " << fmt(snr_star, 4)
                  << " dB: ber " << fmt(pt.ber) << " (" << pt.bits << " bits)" << std::endl;
        return Meas{pt.ber, pt.bits};
    };

    // the predictive arm runs APP feedback: in the uncoded single pass the two
    // feedback rules are equivalent at low BER, and the EP mean extrapolation
    // buys nothing once the predicted decision variance is this small
    LutSet luts = acceptance_luts("qpsk");
    Meas tv = measure(ReceiverKind::kTvDfeEp, nullptr);
    Meas iv = measure(ReceiverKind::kIvDfeApp, &luts);
    Meas pf = measure(ReceiverKind::kIvDfePerfect, nullptr);

    double z1 = one_sided_z(tv.ber, tv.bits, iv.ber, iv.bits);
    double z2 = one_sided_z(iv.ber, iv.bits, pf.ber, pf.bits);
    bool ordered = tv.ber <= iv.ber && iv.ber <= pf.ber;
    bool significant = z1 > 1.645 && z2 > 1.645;

    Outcome o;
    o.pass = bracketed && ordered && significant;
    o.detail = "at " + fmt(snr_star, 4) + " dB: tv " + fmt(tv.ber) + " <= predictive iv " +
               fmt(iv.ber) + " <= naive iv " + fmt(pf.ber) + ", z-scores " + fmt(z1, 3) +
               "/" + fmt(z2, 3) + " (need > 1.645)" +
               (bracketed ? "" : "; reference never reached 1e-3 by 24 dB");
    return o;
}

// ---------------------------------------------------------------------------
// 7. Coded waterfall gap and the calibration floor.

double crossing_snr(const std::vector<std::pair<double, double>>& pts, double target) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double a = pts[i].second, b = pts[i + 1].second;
        if (a >= target && b < target) {
            double la = std::log10(std::max(a, 1e-8));
            double lb = std::log10(std::max(b, 1e-8));
            double lt = std::log10(target);
            return pts[i].first +
                   (la - lt) / (la - lb) * (pts[i + 1].first - pts[i].first);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

Outcome criterion_7() {
    LutSet luts = acceptance_luts("8psk");

    auto final_ber = [&](ReceiverKind r, double snr, double beta, long max_blocks) {
        BerConfig cfg;
        cfg.constellation = "8psk";
        cfg.receiver = r;
        cfg.block_len = 256;
        cfg.coded = true;
        cfg.rate = "1/2";
        cfg.turbo_iters = 4;
        cfg.pred.beta = beta;
        cfg.min_errors = 120;
        cfg.max_blocks = max_blocks;
        cfg.seed = 707;
        cfg.snr_db = {snr};
        std::vector<BerPoint> pts = run_coded_ber(cfg, &luts);
        return pts.back().ber;  // final turbo iteration
    };

    auto sweep = [&](ReceiverKind r, double lo, double hi, long max_blocks) {
        std::vector<std::pair<double, double>> pts;
        for (double snr = lo; snr <= hi + 1e-9; snr += 1.0) {
            double ber = final_ber(r, snr, 0.2, max_blocks);
            std::cout << "  " << to_string(r) << " " << snr << " dB: final ber "
                      << fmt(ber) << std::endl;
            pts.push_back({snr, ber});
            if (ber < 2e-4) break;
        }
        return pts;
    };

    auto tv_pts = sweep(ReceiverKind::kTvDfeEp, 7.0, 17.0, 700);
    auto iv_pts = sweep(ReceiverKind::kIvDfeEp, 7.0, 17.0, 1500);
    double tv_cross = crossing_snr(tv_pts, 1e-3);
    double iv_cross = crossing_snr(iv_pts, 1e-3);
    bool crossings = std::isfinite(tv_cross) && std::isfinite(iv_cross);
    double gap = iv_cross - tv_cross;
    bool gap_ok = crossings && std::abs(gap) <= 2.0;

    // calibration: above 15 dB the floored variant must beat beta = 0; past
    // the waterfall errors are rare events, so give the comparison room
    double acc_cal = 0.0, acc_raw = 0.0;
    for (double snr : {16.0, 17.0, 18.0}) {
        double b_cal = final_ber(ReceiverKind::kIvDfeEp, snr, 0.2, 10000);
        double b_raw = final_ber(ReceiverKind::kIvDfeEp, snr, 0.0, 10000);
        std::cout << "  beta study " << snr << " dB: calibrated " << fmt(b_cal)
                  << " vs uncalibrated " << fmt(b_raw) << std::endl;
        acc_cal += b_cal / 3.0;
        acc_raw += b_raw / 3.0;
    }
    bool beta_ok = acc_cal < acc_raw;

    Outcome o;
    o.pass = gap_ok && beta_ok;
    o.detail = "1e-3 crossings: tv " + fmt(tv_cross, 4) + " dB, predictive iv " +
               fmt(iv_cross, 4) + " dB, gap " + fmt(gap, 3) +
               " dB (tol 2); mean final ber above 15 dB: calibrated " + fmt(acc_cal) +
               " vs uncalibrated " + fmt(acc_raw) +
               (crossings ? "" : "; a receiver never crossed 1e-3");
    return o;
}

// ---------------------------------------------------------------------------
// 8. Transfer-curve achievable rates.

Outcome criterion_8() {
    LutSet luts = acceptance_luts("8psk");
    ExitConfig cfg;
    cfg.constellation = "8psk";
    cfg.block_len = 256;
    cfg.n_blocks = 24;
    cfg.seed = 88;
    cfg.fill_defaults();

    std::ostringstream os;
    bool gap_ok = true, le_ok = true;
    for (double snr : {4.0, 8.0, 12.0, 16.0, 20.0}) {
        auto rate_of = [&](ReceiverKind r) {
            ExitConfig c2 = cfg;
            c2.receiver = r;
            ExitCurve curve = measure_exit(c2, snr, &luts);
            return achievable_rate(curve, 3);
        };
        double r_iv = rate_of(ReceiverKind::kIvDfeEp);
        double r_tv = rate_of(ReceiverKind::kTvDfeEp);
        double r_le = rate_of(ReceiverKind::kIvLe);
        std::cout << "  " << snr << " dB: rates iv-dfe " << fmt(r_iv, 4) << ", tv-dfe "
                  << fmt(r_tv, 4) << ", iv-le " << fmt(r_le, 4) << std::endl;
        if (std::abs(r_iv - r_tv) > 0.2) gap_ok = false;
        if (r_iv > 1.5 && r_iv <= r_le) le_ok = false;
        os << " " << fmt(snr, 2) << "dB:" << fmt(r_iv, 3) << "/" << fmt(r_tv, 3) << "/"
           << fmt(r_le, 3);
    }

    Outcome o;
    o.pass = gap_ok && le_ok;
    o.detail = "rates iv-dfe/tv-dfe/iv-le:" + os.str() +
               (gap_ok ? "" : "; iv vs tv gap exceeds 0.2 b/s/Hz") +
               (le_ok ? "" : "; dfe rate not above le rate past 1.5 b/s/Hz");
    return o;
}

// ---------------------------------------------------------------------------
// 9. Algebraic identity battery.

Outcome criterion_9() {
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> gn(0.0, 1.0);
    long failures = 0, checks = 0;

    // Gaussian division / recombination round trip
    for (int rep = 0; rep < 200; ++rep) {
        cxd x_e(gn(rng), gn(rng)), mu(gn(rng), gn(rng));
        double v_e = 0.1 + u(rng);
        double gamma = u(rng) * 0.9 * v_e;
        cxd x_d;
        double v_d;
        ep_soft_decision(mu, gamma, x_e, v_e, x_d, v_d);
        double v_back = v_d * v_e / (v_d + v_e);
        cxd m_back = v_back * (x_d / v_d + x_e / v_e);
        checks += 2;
        if (std::abs(v_back - gamma) > 1e-12) ++failures;
        if (std::abs(m_back - mu) > 1e-10) ++failures;
    }

    // prior moments against the probability-domain reference
    for (const char* name : {"bpsk", "qpsk", "8psk", "16qam"}) {
        Constellation c = make_constellation(name);
        for (int rep = 0; rep < 50; ++rep) {
            LlrBlock llrs(c.bits_per_symbol);
            for (auto& l : llrs) l = 4.0 * gn(rng);
            PriorBlock pb = soft_map(llrs, c);
            std::vector<double> ref = oracle::prior_pmf(llrs, c);
            double psum = 0.0;
            cxd mean(0.0, 0.0);
            double e2 = 0.0;
            for (int w = 0; w < c.size(); ++w) {
                psum += ref[w];
                mean += ref[w] * c.points[w];
                e2 += ref[w] * std::norm(c.points[w]);
            }
            double var = e2 - std::norm(mean);
            checks += 3;
            if (std::abs(psum - 1.0) > 1e-12) ++failures;
            if (std::abs(pb.moments.mean[0] - mean) > 1e-11) ++failures;
            if (std::abs(pb.moments.var[0] - var) > 1e-11) ++failures;
        }
    }

    // puncturing round trips
    for (const char* rate : {"1/2", "2/3", "5/6"}) {
        PuncturePattern pat = make_puncture(rate);
        for (int rep = 0; rep < 20; ++rep) {
            int steps = pat.period * (2 + static_cast<int>(rng() % 8));
            LlrBlock full(static_cast<std::size_t>(steps) * 2);
            for (auto& v : full) v = gn(rng);
            LlrBlock kept = puncture<double>(full, pat);
            LlrBlock back = depuncture(kept, pat, steps);
            LlrBlock again = puncture<double>(back, pat);
            ++checks;
            if (again != kept) ++failures;
            // erased positions come back as neutral values
            std::size_t nz = 0;
            for (double v : back) nz += v != 0.0;
            ++checks;
            if (nz != kept.size()) ++failures;
        }
    }

    // interleaver bijectivity
    for (int len : {7, 64, 257, 768}) {
        Interleaver il = Interleaver::make(len, derive_seed(909, len));
        std::vector<std::uint8_t> x(len);
        for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 0xff);
        auto y = il.interleave<std::uint8_t>(x);
        auto z = il.deinterleave<std::uint8_t>(y);
        ++checks;
        if (z != x) ++failures;
        std::vector<int> sorted = il.perm;
        std::sort(sorted.begin(), sorted.end());
        ++checks;
        for (int i = 0; i < len; ++i)
            if (sorted[i] != i) {
                ++failures;
                break;
            }
    }

    Outcome o;
    o.pass = failures == 0;
    o.detail = std::to_string(checks - failures) + "/" + std::to_string(checks) +
               " identity checks passed";
    return o;
}

// ---------------------------------------------------------------------------

const char* kDescriptions[9] = {
    "equalizer outputs match the dense reference within 1e-9",
    "analytic reliability response monotone in the causal variance",
    "fixed point unique across inits and empirically contractive",
    "symbol-wise prediction at least as robust as binary under prior mismatch",
    "decoder exact vs exhaustive MAP; AWGN error rate matches the closed form",
    "uncoded ordering tv <= predictive iv <= naive iv, significant at 95%",
    "coded 1e-3 crossing gap within 2 dB; calibration beats beta = 0 above 15 dB",
    "achievable-rate gap iv vs tv within 0.2 b/s/Hz; dfe above le past 1.5 b/s/Hz",
    "algebraic identity battery (division, moments, puncturing, interleaving)",
};

Outcome (*kCriteria[9])() = {criterion_1, criterion_2, criterion_3, criterion_4,
                             criterion_5, criterion_6, criterion_7, criterion_8,
                             criterion_9};

int run_criterion(int n) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o = kCriteria[n - 1]();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " C" << n << ": " << kDescriptions[n - 1]
              << " -- " << o.detail << " [" << fmt(secs, 3) << " s]" << std::endl;
    return o.pass ? 0 : 1;
}

int prepare_luts() {
    for (const char* name : {"qpsk", "8psk", "16qam"}) {
        auto t0 = std::chrono::steady_clock::now();
        LutSet set = acceptance_luts(name);
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "tables ready: " << name << " (symbol-wise app hash "
                  << lut_content_hash(set.symbol_app) << ", " << fmt(secs, 3) << " s)"
                  << std::endl;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--prepare-luts")) return prepare_luts();
        if (!std::strcmp(argv[i], "--list")) {
            for (int n = 1; n <= 9; ++n)
                std::cout << "C" << n << ": " << kDescriptions[n - 1] << "\n";
            return 0;
        }
        if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) {
            only = std::atoi(argv[++i]);
            if (only < 1 || only > 9) {
                std::cerr << "criterion number must be 1..9\n";
                return 2;
            }
        }
    }
    if (only) return run_criterion(only);
    int rc = 0;
    for (int n = 1; n <= 9; ++n) rc |= run_criterion(n);
    return rc;
}
