// Demapper-table persistence: one file per table, a JSON metadata line
// followed by CSV rows.  Tables are cached on disk keyed by their generation
// parameters; the cache directory comes from TURBOEQ_LUT_DIR.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "turboeq/prediction.hpp"

namespace turboeq {

inline std::filesystem::path lut_cache_dir() {
    if (const char* env = std::getenv("TURBOEQ_LUT_DIR"); env && *env)
        return std::filesystem::path(env);
    return std::filesystem::path("turboeq_luts");
}

namespace detail {

inline std::string lut_param_digest(const std::string& constellation, const LutGenParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << constellation << '|' << p.eta_p << '|' << p.block_len << '|' << p.samples_per_cell
       << '|' << p.seed;
    for (double v : p.ve_db) os << ',' << v;
    os << '|';
    for (double v : p.ia) os << ',' << v;
    std::ostringstream hex;
    hex << std::hex << fnv1a64(os.str());
    return hex.str();
}

}  // namespace detail

inline std::string lut_filename(const std::string& constellation, LutScheme s, LutFeedback f,
                                const LutGenParams& params) {
    return constellation + "_" + to_string(s) + "_" + to_string(f) + "_" +
           detail::lut_param_digest(constellation, params) + ".lut";
}

inline void save_lut(const DemapperLut& lut, const std::filesystem::path& path) {
    nlohmann::json meta{
        {"constellation", lut.constellation},
        {"scheme", to_string(lut.scheme)},
        {"feedback", to_string(lut.feedback)},
        {"eta_p", lut.eta_p},
        {"block_len", lut.block_len},
        {"samples_per_cell", lut.samples_per_cell},
        {"seed", lut.seed},
        {"ve_db", lut.ve_db},
        {"prior_axis", lut.prior_axis},
    };
    std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("save_lut: cannot write " + tmp.string());
        os.precision(17);
        os << meta.dump() << '\n';
        for (const auto& row : lut.values) {
            for (std::size_t j = 0; j < row.size(); ++j)
                os << (j ? "," : "") << row[j];
            os << '\n';
        }
    }
    std::filesystem::rename(tmp, path);
}

inline DemapperLut load_lut(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_lut: cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("load_lut: empty file");
    nlohmann::json meta = nlohmann::json::parse(line);

    DemapperLut lut;
    lut.constellation = meta.at("constellation").get<std::string>();
    lut.scheme = meta.at("scheme").get<std::string>() == "binary" ? LutScheme::kBinary
                                                                  : LutScheme::kSymbolWise;
    lut.feedback =
        meta.at("feedback").get<std::string>() == "app" ? LutFeedback::kApp : LutFeedback::kEp;
    lut.eta_p = meta.at("eta_p").get<double>();
    lut.block_len = meta.at("block_len").get<int>();
    lut.samples_per_cell = meta.at("samples_per_cell").get<int>();
    lut.seed = meta.at("seed").get<std::uint64_t>();
    lut.ve_db = meta.at("ve_db").get<std::vector<double>>();
    lut.prior_axis = meta.at("prior_axis").get<std::vector<double>>();

    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        lut.values.push_back(std::move(row));
    }
    if (lut.values.size() != lut.prior_axis.size())
        throw std::runtime_error("load_lut: row count mismatch in " + path.string());
    for (const auto& row : lut.values)
        if (row.size() != lut.ve_db.size())
            throw std::runtime_error("load_lut: column count mismatch in " + path.string());
    return lut;
}

/// Content hash recorded in run manifests so results can be traced to the
/// exact tables used.
inline std::string lut_content_hash(const DemapperLut& lut) {
    std::ostringstream os;
    os.precision(17);
    os << lut.constellation << '|' << to_string(lut.scheme) << '|' << to_string(lut.feedback);
    for (const auto& row : lut.values)
        for (double v : row) os << ',' << v;
    std::ostringstream hex;
    hex << std::hex << fnv1a64(os.str());
    return hex.str();
}

/// Load the four tables for one constellation from the cache, generating and
/// saving them on a miss.
inline LutSet load_or_generate_luts(const Constellation& c, LutGenParams params) {
    params.fill_defaults();
    const std::filesystem::path dir = lut_cache_dir();
    auto path_for = [&](LutScheme s, LutFeedback f) {
        return dir / lut_filename(c.name, s, f, params);
    };
    const std::filesystem::path pba = path_for(LutScheme::kBinary, LutFeedback::kApp);
    const std::filesystem::path pbe = path_for(LutScheme::kBinary, LutFeedback::kEp);
    const std::filesystem::path psa = path_for(LutScheme::kSymbolWise, LutFeedback::kApp);
    const std::filesystem::path pse = path_for(LutScheme::kSymbolWise, LutFeedback::kEp);
    namespace fs = std::filesystem;
    if (fs::exists(pba) && fs::exists(pbe) && fs::exists(psa) && fs::exists(pse)) {
        LutSet set;
        set.binary_app = load_lut(pba);
        set.binary_ep = load_lut(pbe);
        set.symbol_app = load_lut(psa);
        set.symbol_ep = load_lut(pse);
        return set;
    }
    LutSet set = generate_luts(c, params);
    save_lut(set.binary_app, pba);
    save_lut(set.binary_ep, pbe);
    save_lut(set.symbol_app, psa);
    save_lut(set.symbol_ep, pse);
    return set;
}

}  // namespace turboeq
