// CSV and run-manifest output.
#pragma once

#include <fstream>
#include <iomanip>

#include <nlohmann/json.hpp>

#include "turboeq/harness.hpp"

namespace turboeq {

inline void write_ber_csv(std::ostream& os, const std::vector<BerPoint>& pts) {
    os << "snr_db,iteration,blocks,bits,errors,ber,mean_v_causal,mean_v_causal_calibrated,"
          "ep_guard_clamps,cholesky_jitters\n";
    os << std::setprecision(10);
    for (const auto& p : pts) {
        os << p.snr_db << ',' << p.iteration << ',' << p.blocks << ',' << p.bits << ','
           << p.errors << ',' << p.ber << ',';
        if (std::isfinite(p.mean_v_causal))
            os << p.mean_v_causal << ',' << p.mean_v_causal_calibrated;
        else
            os << ',';
        os << ',' << p.counters.ep_guard_clamps << ',' << p.counters.cholesky_jitters << '\n';
    }
}

inline void write_exit_csv(std::ostream& os, const std::vector<ExitCurve>& curves) {
    os << "receiver,snr_db,ia,ie\n";
    os << std::setprecision(10);
    for (const auto& c : curves)
        for (const auto& p : c.pts)
            os << to_string(c.receiver) << ',' << c.snr_db << ',' << p.ia << ',' << p.ie
               << '\n';
}

inline void write_study_csv(std::ostream& os, const std::vector<StudyPoint>& pts) {
    os << "scheme,feedback,eta,ve_db,ia,draws,mse,noise_floor\n";
    os << std::setprecision(10);
    for (const auto& p : pts)
        os << to_string(p.scheme) << ',' << to_string(p.feedback) << ',' << p.eta << ','
           << p.ve_db << ',' << p.ia << ',' << p.draws << ',' << p.mse << ',' << p.floor2
           << '\n';
}

/// Run manifest: full configuration, seeds, and table hashes next to every
/// result file, so any CSV can be regenerated bit-for-bit.
inline void write_manifest(const std::filesystem::path& path, const nlohmann::json& config,
                           const std::vector<std::pair<std::string, std::string>>& lut_hashes,
                           const std::string& output_file) {
    nlohmann::json m{
        {"tool", "turboeq"},
        {"snr_definition", "10*log10(sigma_x^2 * ||h||^2 / sigma_w^2), unit symbol power"},
        {"llr_convention", "positive means bit 0 more likely"},
        {"config", config},
        {"output", output_file},
    };
    nlohmann::json luts = nlohmann::json::object();
    for (const auto& [name, hash] : lut_hashes) luts[name] = hash;
    m["lut_hashes"] = luts;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_manifest: cannot write " + path.string());
    os << m.dump(2) << '\n';
}

}  // namespace turboeq
