#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "setml/oracle.hpp"

using namespace setml;

namespace {

std::vector<double> uniform_grid(double t_end, int n) {
    std::vector<double> g;
    for (int k = 0; k <= n; ++k) g.push_back(t_end * k / n);
    return g;
}

// Simpson quadrature over a uniform grid (n even).
double integrate_current(double let, double vd, const OracleParams& p, double t_end, int n) {
    const double h = t_end / n;
    double acc = set_current(0.0, let, vd, p) + set_current(t_end, let, vd, p);
    for (int k = 1; k < n; ++k)
        acc += set_current(k * h, let, vd, p) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("collected_charge: zero-bias term") {
    OracleParams p;
    const double q = collected_charge(10.0, 0.0, p);
    CHECK(q == doctest::Approx(10.8 * 10.0 * 1.0 * 0.3 * 1e-15).epsilon(1e-12));
}

TEST_CASE("collected_charge: linear in LET") {
    OracleParams p;
    const double q1 = collected_charge(7.0, 0.9, p);
    const double q2 = collected_charge(14.0, 0.9, p);
    CHECK(q2 == doctest::Approx(2.0 * q1).epsilon(1e-12));
}

TEST_CASE("collected_charge: direct arithmetic cross-check") {
    OracleParams p;
    // Spreadsheet-style: 10.8 fC * 5 * 1.0 * (0.3 + 0.5*0.6/1.8)
    const double want = 10.8 * 5.0 * (0.3 + 0.5 * 0.6 / 1.8) * 1e-15;
    CHECK(collected_charge(5.0, 0.6, p) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("collected_charge: rejects out-of-sweep bias") {
    OracleParams p;
    CHECK_THROWS(collected_charge(5.0, 1.9, p));
    CHECK_THROWS(collected_charge(0.0, 0.5, p));
}

TEST_CASE("waveform vanishes at onset") {
    OracleParams p;
    CHECK(set_current(p.t0, 40.0, 0.6, p) == doctest::Approx(0.0));
    CHECK(set_current(p.t0 - 1e-12, 40.0, 0.6, p) == 0.0);
}

TEST_CASE("peak time matches closed form and a 1 ps-grid argmax") {
    OracleParams p;
    const double tp = peak_time(p);
    const double want = p.tau_fall * p.tau_rise / (p.tau_fall - p.tau_rise) *
                        std::log(p.tau_fall / p.tau_rise);
    CHECK(tp == doctest::Approx(want).epsilon(1e-12));

    double best_t = 0.0, best_i = -1.0;
    for (int k = 0; k <= 1000; ++k) {
        const double t = k * 1e-12;
        const double i = set_current(t, 40.0, 0.6, p);
        if (i > best_i) {
            best_i = i;
            best_t = t;
        }
    }
    CHECK(std::abs(best_t - tp) <= 1e-12);
}

TEST_CASE("integrated current equals the collected charge") {
    OracleParams p;
    for (double let : {5.0, 40.0, 100.0}) {
        for (double vd : {0.0, 0.6, 1.8}) {
            const double q = collected_charge(let, vd, p);
            const double got = integrate_current(let, vd, p, 50.0 * p.tau_fall, 200000);
            CHECK(std::abs(got - q) < 1e-3 * q);
        }
    }
}

TEST_CASE("generate_waveform populates the grid and tags") {
    OracleParams p;
    const auto grid = uniform_grid(1.5e-9, 300);
    const Waveform w = generate_waveform(40.0, 0.6, grid, p);
    CHECK(w.let_value == 40.0);
    CHECK(w.vd == 0.6);
    REQUIRE(w.samples.size() == grid.size());
    CHECK(w.samples[0].i == doctest::Approx(0.0));
    w.validate();
}

TEST_CASE("generate_waveform rejects a short grid") {
    OracleParams p;
    const auto grid = uniform_grid(2.0 * p.tau_fall, 50);
    CHECK_THROWS(generate_waveform(40.0, 0.6, grid, p));
}

TEST_CASE("generate_waveform rejects equal time constants") {
    OracleParams p;
    p.tau_rise = p.tau_fall;
    const auto grid = uniform_grid(1.5e-9, 300);
    CHECK_THROWS(generate_waveform(40.0, 0.6, grid, p));
}

TEST_CASE("grid dataset: cartesian product") {
    OracleParams p;
    const auto grid = uniform_grid(1.5e-9, 300);
    const std::vector<double> lets{5, 20, 40, 60, 80};
    const std::vector<double> vds{0.2, 0.4, 0.6, 0.8, 1.2};
    const auto ws = generate_grid_dataset(lets, vds, grid, p);
    CHECK(ws.size() == 25);

    const auto single = generate_grid_dataset(std::vector<double>{40.0},
                                              std::vector<double>{0.6}, grid, p);
    REQUIRE(single.size() == 1);
    const Waveform direct = generate_waveform(40.0, 0.6, grid, p);
    for (std::size_t k = 0; k < direct.samples.size(); ++k)
        CHECK(single[0].samples[k].i == direct.samples[k].i);
}

TEST_CASE("grid dataset: range rejection names the pair") {
    OracleParams p;
    const auto grid = uniform_grid(1.5e-9, 300);
    CHECK_THROWS_WITH_AS(generate_grid_dataset(std::vector<double>{120.0},
                                               std::vector<double>{0.6}, grid, p),
                         doctest::Contains("let=120"), std::invalid_argument);
}

TEST_CASE("properties: non-negativity and monotone trends") {
    OracleParams p;
    for (int k = 0; k <= 2000; ++k)
        CHECK(set_current(k * 1e-12, 40.0, 0.6, p) >= 0.0);

    // Charge strictly increasing in both LET and vd.
    double prev = 0.0;
    for (double let = 4.0; let <= 100.0; let += 8.0) {
        const double q = collected_charge(let, 0.6, p);
        CHECK(q > prev);
        prev = q;
    }
    prev = 0.0;
    bool first = true;
    for (double vd = 0.0; vd <= 1.8; vd += 0.2) {
        const double q = collected_charge(40.0, vd, p);
        if (!first) CHECK(q > prev);
        prev = q;
        first = false;
    }

    // Peak current strictly increasing in LET at fixed vd.
    const double tp = peak_time(p);
    prev = 0.0;
    for (double let = 4.0; let <= 100.0; let += 8.0) {
        const double i = set_current(tp, let, 0.8, p);
        CHECK(i > prev);
        prev = i;
    }
}
