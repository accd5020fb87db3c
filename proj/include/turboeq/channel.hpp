// Linear ISI channel model, sliding-window geometry, and the windowed
// convolution matrix used by the filter computations.
#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "turboeq/common.hpp"

namespace turboeq {

/// FIR channel h[0..L) with circularly-symmetric complex AWGN of total
/// variance sigma_w2 per sample.
struct ChannelModel {
    std::vector<cxd> taps;
    double sigma_w2 = 1.0;

    int spread() const { return static_cast<int>(taps.size()); }

    double tap_energy() const {
        double e = 0.0;
        for (const auto& h : taps) e += std::norm(h);
        return e;
    }

    void validate() const {
        if (taps.empty()) throw std::invalid_argument("channel: no taps");
        if (!(sigma_w2 > 0.0) || !std::isfinite(sigma_w2))
            throw std::invalid_argument("channel: invalid noise variance");
        double e = tap_energy();
        if (!(e > 0.0) || !std::isfinite(e))
            throw std::invalid_argument("channel: invalid taps");
    }

    /// SNR = sigma_x^2 * ||h||^2 / sigma_w^2 with unit symbol power.
    double snr_db() const { return lin_to_db(tap_energy() / sigma_w2); }

    /// Noise variance realizing a given SNR for these taps, unit symbol power.
    double noise_var_for_snr_db(double snr_db) const {
        return tap_energy() / db_to_lin(snr_db);
    }
};

inline ChannelModel make_proakis_c(double sigma_w2 = 1.0) {
    const double s = 1.0 / std::sqrt(19.0);
    return {{cxd(1 * s), cxd(2 * s), cxd(3 * s), cxd(2 * s), cxd(1 * s)}, sigma_w2};
}

/// Noisy channel output over the full dispersion span: blocks are framed by
/// guard intervals of zero symbols, and the receiver observes the dispersed
/// tail, so y has length K + L - 1.  Dropping the tail instead would starve
/// the last L - 1 symbols of most of their energy and floor the block error
/// rate no matter how good the equalizer is.
inline std::vector<cxd> transmit(std::span<const cxd> x, const ChannelModel& ch,
                                 std::mt19937_64& rng) {
    const int len = static_cast<int>(x.size());
    const int spread = ch.spread();
    std::normal_distribution<double> n(0.0, std::sqrt(ch.sigma_w2 / 2.0));
    std::vector<cxd> y(len + spread - 1);
    for (int k = 0; k < static_cast<int>(y.size()); ++k) {
        cxd acc(0.0, 0.0);
        for (int l = 0; l < spread; ++l)
            if (k - l >= 0 && k - l < len) acc += ch.taps[l] * x[k - l];
        y[k] = acc + cxd(n(rng), n(rng));
    }
    return y;
}

/// Sliding-window geometry around the detected symbol: n_pre observations
/// before the symbol of interest, n_post after, covering n_causal past
/// symbols and n_post future symbols in the window input vector.
struct WindowConfig {
    int n_pre = 0;     // observations strictly before the current one
    int n_post = 0;    // observations strictly after
    int spread = 1;    // channel spread L

    int length() const { return n_pre + n_post + 1; }        // N
    int n_causal() const { return n_pre + spread - 1; }      // past symbols in window
    int n_input() const { return length() + spread - 1; }    // symbols touching the window
    int center() const { return n_causal(); }                // index of the detected symbol

    void validate() const {
        if (n_pre < 0 || n_post < 0 || spread < 1)
            throw std::invalid_argument("window: negative dimension");
        if (length() < 1) throw std::invalid_argument("window: empty");
    }
};

/// Default geometry: window length 3L+2 with 2L future observations.
inline WindowConfig default_window(int spread) {
    WindowConfig w;
    w.spread = spread;
    w.n_post = 2 * spread;
    w.n_pre = spread + 1;  // N - n_post - 1 with N = 3L+2
    return w;
}

/// Windowed convolution matrix and derived quantities.  Rows are window
/// observations; columns are the symbols x_{k-n_causal} .. x_{k+n_post}.
struct ToeplitzChannel {
    Eigen::MatrixXcd conv;     // N x (N+L-1)
    Eigen::VectorXcd center_col;  // column of the detected symbol
    WindowConfig window;
    double sigma_w2 = 1.0;

    int n_obs() const { return static_cast<int>(conv.rows()); }
    int n_sym() const { return static_cast<int>(conv.cols()); }
};

inline ToeplitzChannel build_toeplitz(const ChannelModel& ch, const WindowConfig& w) {
    ch.validate();
    w.validate();
    if (w.spread != ch.spread())
        throw std::invalid_argument("window/channel spread mismatch");
    const int n = w.length();
    const int spread = ch.spread();
    ToeplitzChannel t;
    t.conv = Eigen::MatrixXcd::Zero(n, n + spread - 1);
    for (int r = 0; r < n; ++r)
        for (int l = 0; l < spread; ++l)
            t.conv(r, r + spread - 1 - l) = ch.taps[l];
    t.center_col = t.conv.col(w.center());
    t.window = w;
    t.sigma_w2 = ch.sigma_w2;
    return t;
}

/// Window of observations around index k, zero-padded outside the block.
inline Eigen::VectorXcd observation_window(std::span<const cxd> y, int k, const WindowConfig& w) {
    Eigen::VectorXcd win(w.length());
    const int len = static_cast<int>(y.size());
    for (int r = 0; r < w.length(); ++r) {
        int idx = k - w.n_pre + r;
        win(r) = (idx >= 0 && idx < len) ? y[idx] : cxd(0.0, 0.0);
    }
    return win;
}

}  // namespace turboeq
