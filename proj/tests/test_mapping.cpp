#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "turboeq/mapping.hpp"

using namespace turboeq;

namespace {

int hamming(int a, int b) { return __builtin_popcount(static_cast<unsigned>(a ^ b)); }

}  // namespace

TEST_CASE("constellations are unit power, zero mean, bijectively labeled", "[mapping]") {
    for (const char* name : {"bpsk", "qpsk", "8psk", "16qam"}) {
        Constellation c = make_constellation(name);
        INFO(name);
        REQUIRE(c.size() == (1 << c.bits_per_symbol));
        cxd mean(0.0, 0.0);
        double power = 0.0;
        for (const auto& p : c.points) {
            mean += p;
            power += std::norm(p);
        }
        CHECK(std::abs(mean) < 1e-12);
        CHECK(power / c.size() == Catch::Approx(1.0).epsilon(1e-12));
        // distinct points
        for (int i = 0; i < c.size(); ++i)
            for (int j = i + 1; j < c.size(); ++j)
                CHECK(std::abs(c.points[i] - c.points[j]) > 1e-9);
    }
}

TEST_CASE("labelings are Gray: nearest neighbors differ in one bit", "[mapping]") {
    for (const char* name : {"qpsk", "8psk", "16qam"}) {
        Constellation c = make_constellation(name);
        INFO(name);
        // minimum distance over the constellation
        double dmin = 1e9;
        for (int i = 0; i < c.size(); ++i)
            for (int j = i + 1; j < c.size(); ++j)
                dmin = std::min(dmin, std::abs(c.points[i] - c.points[j]));
        for (int i = 0; i < c.size(); ++i)
            for (int j = i + 1; j < c.size(); ++j)
                if (std::abs(c.points[i] - c.points[j]) < dmin * 1.001)
                    CHECK(hamming(i, j) == 1);
    }
}

TEST_CASE("fixed labeling anchors", "[mapping]") {
    CHECK(make_bpsk().points[0] == cxd(1.0, 0.0));
    CHECK(std::abs(make_qpsk().points[0] - cxd(1.0, 1.0) / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(make_8psk().points[0] - cxd(1.0, 0.0)) < 1e-15);
    // first 16-QAM label: both axes at the most negative level
    CHECK(std::abs(make_16qam().points[0] - cxd(-3.0, -3.0) / std::sqrt(10.0)) < 1e-15);
}

TEST_CASE("soft mapping matches the closed BPSK form", "[mapping]") {
    Constellation c = make_bpsk();
    for (double l : {-7.0, -2.0, 0.0, 1.0, 2.0, 5.5}) {
        LlrBlock llrs{l};
        PriorBlock pb = soft_map(llrs, c);
        CHECK(pb.moments.mean[0].real() == Catch::Approx(std::tanh(l / 2.0)).margin(1e-14));
        CHECK(pb.moments.var[0] ==
              Catch::Approx(1.0 - std::pow(std::tanh(l / 2.0), 2)).margin(1e-14));
    }
    // frozen values
    PriorBlock pb = soft_map(LlrBlock{2.0}, c);
    CHECK(pb.moments.mean[0].real() == Catch::Approx(0.7615941559557649).epsilon(1e-15));
    CHECK(pb.moments.var[0] == Catch::Approx(0.41997434161402614).epsilon(1e-13));
}

TEST_CASE("soft mapping agrees with probability-domain reference", "[mapping]") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> ln(0.0, 3.0);
    for (const char* name : {"qpsk", "8psk", "16qam"}) {
        Constellation c = make_constellation(name);
        for (int rep = 0; rep < 20; ++rep) {
            LlrBlock llrs(c.bits_per_symbol);
            for (auto& l : llrs) l = ln(rng);
            PriorBlock pb = soft_map(llrs, c);
            std::vector<double> ref = oracle::prior_pmf(llrs, c);
            for (int w = 0; w < c.size(); ++w)
                CHECK(pb.pmf[0].p[w] == Catch::Approx(ref[w]).margin(1e-12));
        }
    }
}

TEST_CASE("extreme LLRs produce a one-hot prior without overflow", "[mapping]") {
    Constellation c = make_qpsk();
    double inf = std::numeric_limits<double>::infinity();
    PriorBlock pb = soft_map(LlrBlock{inf, -inf}, c);  // bit1 = 0, bit2 = 1
    int label = 0b01;
    for (int w = 0; w < 4; ++w)
        CHECK(pb.pmf[0].p[w] == (w == label ? 1.0 : 0.0));
    CHECK(std::abs(pb.moments.mean[0] - c.points[label]) < 1e-15);
    CHECK(pb.moments.var[0] == 0.0);
}

TEST_CASE("posterior ratio and extrinsic for a BPSK observation", "[mapping]") {
    Constellation c = make_bpsk();
    SymbolPmf uniform{{0.5, 0.5}};
    cxd x_e(0.5, 0.0);
    double v_e = 1.0;
    SymbolPmf post = demap_posterior(uniform, x_e, v_e, c);
    // exp(-|0.5-1|^2) / exp(-|0.5+1|^2) = e^2
    CHECK(post.p[0] / post.p[1] == Catch::Approx(std::exp(2.0)).epsilon(1e-12));

    double l[1] = {0.0};
    double out[1];
    extrinsic_llrs(post, {l, 1}, c, {out, 1});
    CHECK(out[0] == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(out[0] == Catch::Approx(4.0 * x_e.real() / v_e).epsilon(1e-12));
}

TEST_CASE("posterior moments of a two-point pmf", "[mapping]") {
    Constellation c = make_bpsk();
    SymbolPmf p{{0.9, 0.1}};
    cxd mu;
    double gamma;
    posterior_moments(p, c, mu, gamma);
    CHECK(mu.real() == Catch::Approx(0.8).margin(1e-15));
    CHECK(gamma == Catch::Approx(0.36).margin(1e-15));
}

TEST_CASE("Gaussian division recovers the factor and counts clamps", "[mapping]") {
    // Combining CN(x_d, v_d) with CN(x_e, v_e) gives posterior moments; the
    // division must invert that combination.
    cxd x_e(0.3, -0.2);
    double v_e = 0.8, v_d_true = 0.5;
    cxd x_d_true(-0.1, 0.4);
    double gamma = 1.0 / (1.0 / v_e + 1.0 / v_d_true);
    cxd mu = gamma * (x_e / v_e + x_d_true / v_d_true);
    cxd x_d;
    double v_d;
    Counters counters;
    ep_soft_decision(mu, gamma, x_e, v_e, x_d, v_d, &counters);
    CHECK(std::abs(x_d - x_d_true) < 1e-12);
    CHECK(v_d == Catch::Approx(v_d_true).epsilon(1e-12));
    CHECK(counters.ep_guard_clamps == 0);

    // gamma >= v_e must clamp, not blow up
    ep_soft_decision(mu, v_e * 1.5, x_e, v_e, x_d, v_d, &counters);
    CHECK(counters.ep_guard_clamps == 1);
    CHECK(std::isfinite(v_d));
    CHECK(v_d > 0.0);

    // gamma == 0 collapses onto the posterior mean
    ep_soft_decision(mu, 0.0, x_e, v_e, x_d, v_d, &counters);
    CHECK(std::abs(x_d - mu) < 1e-15);
    CHECK(v_d == 0.0);
}

TEST_CASE("block extrinsic demap is consistent with the scalar path", "[mapping]") {
    Constellation c = make_8psk();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> ln(0.0, 2.0);
    const int len = 5;
    LlrBlock llrs(len * 3);
    for (auto& l : llrs) l = ln(rng);
    PriorBlock pb = soft_map(llrs, c);
    SoftSymbolBlock est;
    est.mean.resize(len);
    est.var.resize(len);
    std::normal_distribution<double> gn(0.0, 0.5);
    for (int k = 0; k < len; ++k) {
        est.mean[k] = pb.moments.mean[k] + cxd(gn(rng), gn(rng));
        est.var[k] = 0.4 + 0.1 * k;
    }
    LlrBlock ext = demap_block_extrinsic(est, pb, llrs, c);
    for (int k = 0; k < len; ++k) {
        SymbolPmf post = demap_posterior(pb.pmf[k], est.mean[k], est.var[k], c);
        double out[3];
        extrinsic_llrs(post, {llrs.data() + k * 3, 3}, c, {out, 3});
        for (int q = 0; q < 3; ++q)
            CHECK(ext[k * 3 + q] == Catch::Approx(out[q]).margin(1e-9));
    }
}

TEST_CASE("hard decisions pick the max-posterior label", "[mapping]") {
    Constellation c = make_qpsk();
    LlrBlock zero(2, 0.0);
    PriorBlock pb = soft_map(zero, c);
    SoftSymbolBlock est;
    est.mean = {c.points[2] * 0.9};
    est.var = {0.3};
    auto bits = hard_decide_bits(est, pb, c);
    REQUIRE(bits.size() == 2);
    CHECK(bits[0] == 1);
    CHECK(bits[1] == 0);
}
