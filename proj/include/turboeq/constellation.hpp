// Gray-labeled constellations, points indexed by label value.
#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "turboeq/common.hpp"

namespace turboeq {

/// A unit-power constellation with an implicit labeling: points[w] is the
/// symbol whose Q-bit label is w, bit 1 being the most significant.
struct Constellation {
    std::string name;
    int bits_per_symbol = 0;
    std::vector<cxd> points;

    int size() const { return static_cast<int>(points.size()); }

    /// Bit q (1-based, MSB first) of label w.
    static int label_bit(int w, int q, int n_bits) { return (w >> (n_bits - q)) & 1; }
    int bit(int w, int q) const { return label_bit(w, q, bits_per_symbol); }

    /// Label of the bit group d[0..Q), d[0] = bit 1.
    template <typename Bits>
    int pack_label(const Bits& d) const {
        int w = 0;
        for (int q = 0; q < bits_per_symbol; ++q) w = (w << 1) | (d[q] & 1);
        return w;
    }

    void unpack_label(int w, std::span<std::uint8_t> d) const {
        for (int q = 0; q < bits_per_symbol; ++q)
            d[q] = static_cast<std::uint8_t>(bit(w, q + 1));
    }
};

inline Constellation make_bpsk() {
    return {"bpsk", 1, {cxd(1.0, 0.0), cxd(-1.0, 0.0)}};
}

inline Constellation make_qpsk() {
    const double s = 1.0 / std::sqrt(2.0);
    Constellation c{"qpsk", 2, std::vector<cxd>(4)};
    for (int w = 0; w < 4; ++w) {
        int d1 = (w >> 1) & 1, d2 = w & 1;
        c.points[w] = cxd((1 - 2 * d1) * s, (1 - 2 * d2) * s);
    }
    return c;
}

inline Constellation make_8psk() {
    Constellation c{"8psk", 3, std::vector<cxd>(8)};
    for (int m = 0; m < 8; ++m) {
        int w = m ^ (m >> 1);  // Gray label of the m-th point on the circle
        double ang = 2.0 * std::numbers::pi * m / 8.0;
        c.points[w] = cxd(std::cos(ang), std::sin(ang));
    }
    return c;
}

inline Constellation make_16qam() {
    // Per-axis Gray mapping of two bits to PAM levels; first bit pair drives
    // the in-phase axis, second pair the quadrature axis.
    auto pam = [](int b1, int b2) {
        static const double lvl[4] = {-3.0, -1.0, +3.0, +1.0};  // index b1b2
        return lvl[(b1 << 1) | b2];
    };
    const double s = 1.0 / std::sqrt(10.0);
    Constellation c{"16qam", 4, std::vector<cxd>(16)};
    for (int w = 0; w < 16; ++w) {
        int d1 = (w >> 3) & 1, d2 = (w >> 2) & 1, d3 = (w >> 1) & 1, d4 = w & 1;
        c.points[w] = cxd(pam(d1, d2) * s, pam(d3, d4) * s);
    }
    return c;
}

inline Constellation make_constellation(const std::string& name) {
    if (name == "bpsk") return make_bpsk();
    if (name == "qpsk") return make_qpsk();
    if (name == "8psk") return make_8psk();
    if (name == "16qam") return make_16qam();
    throw std::invalid_argument("unknown constellation: " + name);
}

}  // namespace turboeq
