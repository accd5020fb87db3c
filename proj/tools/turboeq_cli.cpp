// Command-line front end: BER sweeps, table generation, reliability
// prediction, EXIT measurement, and the prediction-accuracy study.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "turboeq/turboeq.hpp"

namespace {

using turboeq::cxd;

std::vector<double> parse_range(const std::string& s) {
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        double a, b, step;
        char c1, c2;
        std::istringstream is(s);
        if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0)
            throw CLI::ValidationError("range", "expected a:b:step with step > 0");
        for (double v = a; v <= b + 1e-9; v += step) out.push_back(v);
        return out;
    }
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    if (out.empty()) throw CLI::ValidationError("range", "no values in " + s);
    return out;
}

std::vector<cxd> parse_taps(const std::string& s) {
    std::vector<cxd> taps;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        double re = 0.0, im = 0.0;
        std::size_t pos = 0;
        re = std::stod(tok, &pos);
        if (pos < tok.size() && (tok[pos] == '+' || tok[pos] == '-')) {
            std::string rest = tok.substr(pos);
            if (!rest.empty() && (rest.back() == 'j' || rest.back() == 'i'))
                rest.pop_back();
            im = std::stod(rest);
        }
        taps.emplace_back(re, im);
    }
    if (taps.empty()) throw CLI::ValidationError("taps", "no taps in " + s);
    return taps;
}

std::vector<cxd> resolve_channel(const std::string& channel, const std::string& taps) {
    if (!taps.empty()) return parse_taps(taps);
    if (channel == "proakis-c") return turboeq::make_proakis_c().taps;
    throw CLI::ValidationError("channel", "unknown channel: " + channel);
}

turboeq::MuPFormula parse_mu_formula(const std::string& s) {
    if (s == "paper") return turboeq::MuPFormula::kSum;
    if (s == "mean") return turboeq::MuPFormula::kMean;
    throw CLI::ValidationError("mu-p-formula", "expected paper or mean");
}

turboeq::LutScheme parse_scheme(const std::string& s) {
    if (s == "binary") return turboeq::LutScheme::kBinary;
    if (s == "symbolwise") return turboeq::LutScheme::kSymbolWise;
    throw CLI::ValidationError("lut-scheme", "expected binary or symbolwise");
}

void apply_code_option(turboeq::CodeSpec& code, const std::string& gens) {
    if (gens.empty()) return;
    auto comma = gens.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("code", "expected two octal generators, e.g. 7,5");
    code.g1 = static_cast<unsigned>(std::stoul(gens.substr(0, comma), nullptr, 8));
    code.g2 = static_cast<unsigned>(std::stoul(gens.substr(comma + 1), nullptr, 8));
    unsigned widest = std::max(code.g1, code.g2);
    code.constraint_length = 1;
    while ((1u << code.constraint_length) <= widest) ++code.constraint_length;
}

/// Expands --config FILE into plain options: any key in the JSON object that
/// was not given explicitly on the command line is appended as --key=value.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;

    std::ifstream is(config_path);
    if (!is) throw std::runtime_error("cannot open config file: " + config_path);
    nlohmann::json j = nlohmann::json::parse(is);
    for (auto& [key, value] : j.items()) {
        std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (given) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
        } else if (value.is_string()) {
            args.push_back(flag + "=" + value.get<std::string>());
        } else {
            args.push_back(flag + "=" + value.dump());
        }
    }
    return args;
}

struct CommonOptions {
    std::string mod = "qpsk";
    std::string channel = "proakis-c";
    std::string taps;
    std::string receiver = "iv-dfe-ep";
    std::string snr = "0:20:2";
    std::string rate;
    std::string code_gens;
    std::string mu_formula = "mean";
    std::string lut_scheme = "symbolwise";
    double eta_p = 2.0;
    double beta = 0.2;
    int pred_iters = 3;
    bool no_init_heuristic = false;
    std::uint64_t seed = 1;
    std::uint64_t interleaver_seed = 0x1ea4e;
    std::uint64_t lut_seed = 0x5eed;
    int lut_samples = 102400;
    int lut_block_len = 1024;
    int block_len = 256;
    long min_errors = 200;
    long max_blocks = 10000;
    int threads = 1;
    int turbo_iters = 4;
    std::string out = "ber.csv";
    std::string manifest;
    std::string config;  // consumed by expand_config; registered so CLI11 accepts it

    void add_model_flags(CLI::App* app) {
        app->add_option("--mod", mod, "constellation")
            ->check(CLI::IsMember({"bpsk", "qpsk", "8psk", "16qam"}));
        app->add_option("--channel", channel, "named channel");
        app->add_option("--taps", taps, "explicit taps, comma separated (a or a+bj)");
        app->add_option("--eta-p", eta_p, "prior LLR consistency ratio for table generation");
        app->add_option("--seed", seed, "master seed");
        app->add_option("--config", config, "JSON file supplying any flag");
    }

    void add_receiver_flags(CLI::App* app) {
        app->add_option("--receiver", receiver, "equalizer variant")
            ->check(CLI::IsMember({"tv-le", "iv-le", "tv-dfe-app", "tv-dfe-ep", "iv-dfe-app",
                                   "iv-dfe-ep", "iv-dfe-perfect"}));
        app->add_option("--lut-scheme", lut_scheme, "prediction table scheme")
            ->check(CLI::IsMember({"binary", "symbolwise"}));
        app->add_option("--mu-p-formula", mu_formula, "prior LLR mean estimator form")
            ->check(CLI::IsMember({"paper", "mean"}));
        app->add_option("--beta", beta, "calibration floor factor");
        app->add_option("--pred-iters", pred_iters, "fixed-point iterations");
        app->add_flag("--no-init-heuristic", no_init_heuristic,
                      "start the fixed point at zero");
        app->add_option("--lut-samples", lut_samples, "symbols per table cell");
        app->add_option("--lut-seed", lut_seed, "table generation seed");
        app->add_option("--lut-block-len", lut_block_len, "symbols per table draw");
    }

    turboeq::PredictionConfig prediction() const {
        turboeq::PredictionConfig p;
        p.max_iters = pred_iters;
        p.beta = beta;
        p.init_heuristic = !no_init_heuristic;
        return p;
    }

    turboeq::LutGenParams lut_params() const {
        turboeq::LutGenParams p;
        p.eta_p = eta_p;
        p.block_len = lut_block_len;
        p.samples_per_cell = lut_samples;
        p.seed = lut_seed;
        return p;
    }

    nlohmann::json to_json() const {
        return {
            {"mod", mod},
            {"channel", channel},
            {"taps", taps},
            {"receiver", receiver},
            {"snr-db", snr},
            {"rate", rate},
            {"code", code_gens.empty() ? "7,5" : code_gens},
            {"mu-p-formula", mu_formula},
            {"lut-scheme", lut_scheme},
            {"eta-p", eta_p},
            {"beta", beta},
            {"pred-iters", pred_iters},
            {"no-init-heuristic", no_init_heuristic},
            {"seed", seed},
            {"interleaver-seed", interleaver_seed},
            {"lut-seed", lut_seed},
            {"lut-samples", lut_samples},
            {"lut-block-len", lut_block_len},
            {"block-len", block_len},
            {"min-errors", min_errors},
            {"max-blocks", max_blocks},
            {"threads", threads},
            {"turbo-iters", turbo_iters},
        };
    }
};

std::vector<std::pair<std::string, std::string>> lut_hash_list(const turboeq::LutSet& set) {
    return {
        {"binary_app", turboeq::lut_content_hash(set.binary_app)},
        {"binary_ep", turboeq::lut_content_hash(set.binary_ep)},
        {"symbolwise_app", turboeq::lut_content_hash(set.symbol_app)},
        {"symbolwise_ep", turboeq::lut_content_hash(set.symbol_ep)},
    };
}

int cmd_ber(CommonOptions& opt) {
    turboeq::BerConfig cfg;
    cfg.constellation = opt.mod;
    cfg.taps = resolve_channel(opt.channel, opt.taps);
    cfg.receiver = turboeq::parse_receiver(opt.receiver);
    cfg.scheme = parse_scheme(opt.lut_scheme);
    cfg.mu_formula = parse_mu_formula(opt.mu_formula);
    cfg.pred = opt.prediction();
    cfg.lut_params = opt.lut_params();
    cfg.block_len = opt.block_len;
    cfg.snr_db = parse_range(opt.snr);
    cfg.min_errors = opt.min_errors;
    cfg.max_blocks = opt.max_blocks;
    cfg.n_threads = opt.threads;
    cfg.seed = opt.seed;
    cfg.coded = !opt.rate.empty();
    cfg.rate = opt.rate.empty() ? "1/2" : opt.rate;
    cfg.interleaver_seed = opt.interleaver_seed;
    cfg.turbo_iters = opt.turbo_iters;

    std::vector<std::pair<std::string, std::string>> hashes;
    turboeq::LutSet luts;
    const turboeq::LutSet* luts_ptr = nullptr;
    if (turboeq::receiver_needs_lut(cfg.receiver)) {
        luts = turboeq::load_or_generate_luts(turboeq::make_constellation(cfg.constellation),
                                              cfg.lut_params);
        luts_ptr = &luts;
        hashes = lut_hash_list(luts);
    }

    std::vector<turboeq::BerPoint> pts;
    if (cfg.coded) {
        turboeq::CodeSpec code;
        apply_code_option(code, opt.code_gens);
        cfg.code_g1 = code.g1;
        cfg.code_g2 = code.g2;
        cfg.code_constraint = code.constraint_length;
        pts = turboeq::run_coded_ber(cfg, luts_ptr);
    } else {
        pts = turboeq::run_uncoded_ber(cfg, luts_ptr);
    }

    std::ofstream os(opt.out);
    if (!os) throw std::runtime_error("cannot write " + opt.out);
    turboeq::write_ber_csv(os, pts);
    std::string manifest = opt.manifest.empty() ? opt.out + ".manifest.json" : opt.manifest;
    turboeq::write_manifest(manifest, opt.to_json(), hashes, opt.out);
    std::cout << "wrote " << pts.size() << " rows to " << opt.out << "\n";
    return 0;
}

int cmd_lut_gen(CommonOptions& opt) {
    turboeq::Constellation c = turboeq::make_constellation(opt.mod);
    turboeq::LutGenParams params = opt.lut_params();
    turboeq::LutSet set = turboeq::load_or_generate_luts(c, params);
    std::cout << "cache dir: " << turboeq::lut_cache_dir().string() << "\n";
    for (const auto& [name, hash] : lut_hash_list(set))
        std::cout << name << " " << hash << "\n";
    return 0;
}

int cmd_predict(CommonOptions& opt, double snr_db, double ia, int trajectory_max) {
    turboeq::Constellation c = turboeq::make_constellation(opt.mod);
    turboeq::ChannelModel ch{resolve_channel(opt.channel, opt.taps), 1.0};
    ch.sigma_w2 = ch.noise_var_for_snr_db(snr_db);
    turboeq::ToeplitzChannel toep =
        turboeq::build_toeplitz(ch, turboeq::default_window(ch.spread()));
    turboeq::LutSet luts = turboeq::load_or_generate_luts(c, opt.lut_params());

    turboeq::LutScheme scheme = parse_scheme(opt.lut_scheme);
    double mu_p = turboeq::mi_to_llr_mean(ia);
    double v_p = 1.0, coord = mu_p;
    {
        // Prior variance consistent with the requested information level,
        // measured on a synthetic block.
        std::mt19937_64 rng(opt.seed);
        std::uniform_int_distribution<int> coin(0, 1);
        std::vector<std::uint8_t> bits(4096 * c.bits_per_symbol);
        for (auto& b : bits) b = static_cast<std::uint8_t>(coin(rng));
        turboeq::LlrBlock llrs = turboeq::draw_prior_llrs(bits, mu_p, opt.eta_p, rng);
        turboeq::PriorBlock priors = turboeq::soft_map(llrs, c);
        v_p = priors.moments.mean_var();
        coord = scheme == turboeq::LutScheme::kBinary
                    ? turboeq::estimate_llr_mean(llrs, parse_mu_formula(opt.mu_formula))
                    : v_p;
    }

    turboeq::PredictionConfig pred = opt.prediction();
    pred.max_iters = trajectory_max > 0 ? trajectory_max : pred.max_iters;
    turboeq::Counters counters;
    const turboeq::DemapperLut& lut_app =
        select_lut(luts, scheme, turboeq::LutFeedback::kApp);
    const turboeq::DemapperLut& lut_ep = select_lut(luts, scheme, turboeq::LutFeedback::kEp);
    turboeq::FixedPointResult app =
        turboeq::predict_causal_variance(toep, v_p, coord, lut_app, pred, &counters);
    turboeq::FixedPointResult ep =
        turboeq::predict_causal_variance(toep, v_p, coord, lut_ep, pred, &counters);

    nlohmann::json j{
        {"snr_db", snr_db},
        {"ia", ia},
        {"mu_p", mu_p},
        {"v_p", v_p},
        {"prior_coordinate", coord},
        {"scheme", turboeq::to_string(scheme)},
        {"app",
         {{"v_causal", app.v_causal},
          {"v_causal_calibrated",
           turboeq::calibrate_causal_variance(app.v_causal, v_p, pred.beta)},
          {"v_extrinsic", app.v_extrinsic},
          {"iters", app.iters},
          {"converged", app.converged},
          {"trajectory", app.trajectory}}},
        {"ep",
         {{"v_causal", ep.v_causal},
          {"v_causal_calibrated",
           turboeq::calibrate_causal_variance(ep.v_causal, v_p, pred.beta)},
          {"v_extrinsic", ep.v_extrinsic},
          {"gamma_bar", turboeq::app_variance_from_ep(
                            turboeq::calibrate_causal_variance(ep.v_causal, v_p, pred.beta),
                            ep.v_extrinsic)},
          {"iters", ep.iters},
          {"converged", ep.converged},
          {"trajectory", ep.trajectory}}},
    };
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_exit(CommonOptions& opt, int n_blocks, double ia_step) {
    turboeq::ExitConfig cfg;
    cfg.constellation = opt.mod;
    cfg.taps = resolve_channel(opt.channel, opt.taps);
    cfg.receiver = turboeq::parse_receiver(opt.receiver);
    cfg.scheme = parse_scheme(opt.lut_scheme);
    cfg.mu_formula = parse_mu_formula(opt.mu_formula);
    cfg.pred = opt.prediction();
    cfg.lut_params = opt.lut_params();
    cfg.block_len = opt.block_len;
    cfg.snr_db = parse_range(opt.snr);
    cfg.n_blocks = n_blocks;
    cfg.eta_p = 2.0;
    cfg.seed = opt.seed;
    if (ia_step > 0.0)
        for (double v = 0.0; v <= 1.0 + 1e-9; v += ia_step) cfg.ia_grid.push_back(v);
    cfg.fill_defaults();

    std::vector<std::pair<std::string, std::string>> hashes;
    turboeq::LutSet luts;
    const turboeq::LutSet* luts_ptr = nullptr;
    if (turboeq::receiver_needs_lut(cfg.receiver)) {
        luts = turboeq::load_or_generate_luts(turboeq::make_constellation(cfg.constellation),
                                              cfg.lut_params);
        luts_ptr = &luts;
        hashes = lut_hash_list(luts);
    }

    std::vector<turboeq::ExitCurve> curves;
    for (double snr : cfg.snr_db) {
        turboeq::ExitCurve curve = turboeq::measure_exit(cfg, snr, luts_ptr);
        double rate = turboeq::achievable_rate(
            curve, turboeq::make_constellation(cfg.constellation).bits_per_symbol);
        std::cout << "snr " << snr << " dB: achievable rate " << rate << " bits/s/Hz\n";
        curves.push_back(std::move(curve));
    }

    std::ofstream os(opt.out);
    if (!os) throw std::runtime_error("cannot write " + opt.out);
    turboeq::write_exit_csv(os, curves);
    std::string manifest = opt.manifest.empty() ? opt.out + ".manifest.json" : opt.manifest;
    turboeq::write_manifest(manifest, opt.to_json(), hashes, opt.out);
    return 0;
}

int cmd_study(CommonOptions& opt, const std::string& etas, int draws) {
    turboeq::StudyConfig cfg;
    cfg.constellation = opt.mod;
    cfg.etas = parse_range(etas);
    cfg.n_draws = draws;
    cfg.block_len = opt.lut_block_len;
    cfg.mu_formula = parse_mu_formula(opt.mu_formula);
    cfg.seed = opt.seed;

    turboeq::LutSet luts = turboeq::load_or_generate_luts(
        turboeq::make_constellation(cfg.constellation), opt.lut_params());
    std::vector<turboeq::StudyPoint> pts = turboeq::run_prediction_study(cfg, luts);

    std::ofstream os(opt.out);
    if (!os) throw std::runtime_error("cannot write " + opt.out);
    turboeq::write_study_csv(os, pts);
    std::string manifest = opt.manifest.empty() ? opt.out + ".manifest.json" : opt.manifest;
    turboeq::write_manifest(manifest, opt.to_json(), lut_hash_list(luts), opt.out);
    std::cout << "wrote " << pts.size() << " rows to " << opt.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soft-feedback MMSE turbo equalization toolkit"};
    app.require_subcommand(1);
    CommonOptions opt;

    CLI::App* ber = app.add_subcommand("ber", "Monte Carlo BER sweep");
    opt.add_model_flags(ber);
    opt.add_receiver_flags(ber);
    ber->add_option("--snr-db", opt.snr, "SNR sweep, a:b:step or comma list");
    ber->add_option("--rate", opt.rate, "code rate; empty for uncoded")
        ->check(CLI::IsMember({"", "1/2", "2/3", "5/6"}));
    ber->add_option("--code", opt.code_gens, "generator polynomials, octal pair");
    ber->add_option("--interleaver-seed", opt.interleaver_seed, "interleaver seed");
    ber->add_option("--turbo-iters", opt.turbo_iters, "feedback passes");
    ber->add_option("--block-len", opt.block_len, "symbols per block");
    ber->add_option("--min-errors", opt.min_errors, "stop after this many errors");
    ber->add_option("--max-blocks", opt.max_blocks, "block cap per SNR point");
    ber->add_option("--threads", opt.threads, "worker threads");
    ber->add_option("--out", opt.out, "CSV output path");
    ber->add_option("--manifest", opt.manifest, "manifest path");

    CLI::App* lut = app.add_subcommand("lut-gen", "generate and cache demapper tables");
    opt.add_model_flags(lut);
    lut->add_option("--lut-samples", opt.lut_samples, "symbols per table cell");
    lut->add_option("--lut-seed", opt.lut_seed, "table generation seed");
    lut->add_option("--lut-block-len", opt.lut_block_len, "symbols per table draw");

    double predict_snr = 10.0, predict_ia = 0.5;
    int predict_iters = 0;
    CLI::App* predict = app.add_subcommand("predict", "run the reliability fixed point");
    opt.add_model_flags(predict);
    opt.add_receiver_flags(predict);
    predict->add_option("--snr-db", predict_snr, "operating SNR");
    predict->add_option("--ia", predict_ia, "prior information level");
    predict->add_option("--trajectory-iters", predict_iters,
                        "override iteration count for the printed trajectory");

    int exit_blocks = 40;
    double exit_ia_step = 0.0;
    CLI::App* exit_cmd = app.add_subcommand("exit", "measure detector transfer curves");
    opt.add_model_flags(exit_cmd);
    opt.add_receiver_flags(exit_cmd);
    exit_cmd->add_option("--snr-db", opt.snr, "SNR list, a:b:step or comma list");
    exit_cmd->add_option("--blocks", exit_blocks, "blocks per prior level");
    exit_cmd->add_option("--ia-step", exit_ia_step, "prior information grid step");
    exit_cmd->add_option("--block-len", opt.block_len, "symbols per block");
    exit_cmd->add_option("--out", opt.out, "CSV output path");
    exit_cmd->add_option("--manifest", opt.manifest, "manifest path");

    std::string study_etas = "1,2,3";
    int study_draws = 24;
    CLI::App* study = app.add_subcommand("study", "prediction accuracy vs measured truth");
    opt.add_model_flags(study);
    study->add_option("--etas", study_etas, "prior consistency ratios");
    study->add_option("--draws", study_draws, "blocks per grid cell");
    study->add_option("--mu-p-formula", opt.mu_formula, "prior LLR mean estimator form")
        ->check(CLI::IsMember({"paper", "mean"}));
    study->add_option("--lut-samples", opt.lut_samples, "symbols per table cell");
    study->add_option("--lut-seed", opt.lut_seed, "table generation seed");
    study->add_option("--lut-block-len", opt.lut_block_len, "symbols per table draw");
    study->add_option("--out", opt.out, "CSV output path");
    study->add_option("--manifest", opt.manifest, "manifest path");

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::vector<const char*> cargs;
        cargs.push_back(argv[0]);
        for (const auto& a : args) cargs.push_back(a.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());

        if (*ber) return cmd_ber(opt);
        if (*lut) return cmd_lut_gen(opt);
        if (*predict) return cmd_predict(opt, predict_snr, predict_ia, predict_iters);
        if (*exit_cmd) return cmd_exit(opt, exit_blocks, exit_ia_step);
        if (*study) return cmd_study(opt, study_etas, study_draws);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
