#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "setml/vacodegen.hpp"

using namespace setml;

namespace {

NormParams simple_norm() {
    NormParams p;
    p.input = {Channel{0.0, 1e-9}, Channel{4.0, 100.0}, Channel{0.0, 1.8}};
    p.output = Channel{0.0, 1e-3};
    return p;
}

MlpModel random_mlp(const std::vector<int>& dims, const std::vector<Transfer>& tr,
                    std::uint64_t seed) {
    MlpModel m = make_mlp(dims, tr);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    Eigen::VectorXd params(m.parameter_count());
    for (int k = 0; k < params.size(); ++k) params[k] = u(rng);
    m.unpack(params);
    m.norm = simple_norm();
    return m;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

TEST_CASE("expression evaluator smoke tests") {
    std::map<std::string, double> vars{{"a", 3.0}, {"$abstime", 2e-10}};
    CHECK(eval_va_expression("2*exp(0)", vars) == 2.0);
    CHECK(eval_va_expression("-a + 5", vars) == 2.0);
    CHECK(eval_va_expression("a / (1.0 + abs(-a))", vars) == doctest::Approx(0.75));
    CHECK(eval_va_expression("(a < 4) ? 10 : 20", vars) == 10.0);
    CHECK(eval_va_expression("(a >= 4) ? 10 : 20", vars) == 20.0);
    CHECK(eval_va_expression("tanh(0.5)", vars) == doctest::Approx(std::tanh(0.5)));
    CHECK(eval_va_expression("ln(exp(1))", vars) == doctest::Approx(1.0));
    CHECK(eval_va_expression("pow(2, 10)", vars) == 1024.0);
    CHECK(eval_va_expression("$abstime * 1e10", vars) == doctest::Approx(2.0));
    CHECK_THROWS(eval_va_expression("nosuchvar + 1", vars));
    CHECK_THROWS(eval_va_expression("sin(1)", vars));
    CHECK_THROWS(eval_va_expression("1 +", vars));
}

TEST_CASE("zero network exports a constant source") {
    MlpModel m = make_mlp({3, 8, 8, 1},
                          {Transfer::Tansig, Transfer::Tansig, Transfer::Purelin});
    m.norm = simple_norm();
    const VaModule v = export_verilog_a(m, "zero_net", 200e-12);
    const double want = 0.5 * (m.norm.output.min + m.norm.output.max);
    for (double t : {0.25e-9, 0.5e-9, 0.9e-9})
        CHECK(evaluate_exported(v, t, 40.0, 0.6) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("emitted text embeds each of the 113 parameters exactly once") {
    const MlpModel m = random_mlp({3, 8, 8, 1},
                                  {Transfer::Tansig, Transfer::Tansig, Transfer::Purelin},
                                  77);
    REQUIRE(m.parameter_count() == 113);
    const VaModule v = export_verilog_a(m, "set_current", 200e-12);
    const Eigen::VectorXd params = m.pack();
    std::size_t total = 0;
    for (int k = 0; k < params.size(); ++k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", params[k]);
        const std::size_t n = count_occurrences(v.source_text, buf);
        CHECK(n == 1);
        total += n;
    }
    CHECK(total == 113);
}

TEST_CASE("codegen is byte-stable") {
    const MlpModel m = random_mlp({3, 8, 8, 1},
                                  {Transfer::Tansig, Transfer::Tansig, Transfer::Purelin},
                                  123);
    const VaModule a = export_verilog_a(m, "set_current", 200e-12);
    const VaModule b = export_verilog_a(m, "set_current", 200e-12);
    CHECK(a.source_text == b.source_text);
}

TEST_CASE("module structure: analog block and contribution present") {
    const MlpModel m = random_mlp({3, 8, 1}, {Transfer::Tansig, Transfer::Purelin}, 9);
    const VaModule v = export_verilog_a(m, "my_source", 100e-12);
    CHECK(v.source_text.find("module my_source(p, n);") != std::string::npos);
    CHECK(v.source_text.find("electrical p, n;") != std::string::npos);
    CHECK(v.source_text.find("analog begin") != std::string::npos);
    CHECK(v.source_text.find("I(p,n) <+") != std::string::npos);
    CHECK_THROWS(export_verilog_a(m, "1bad name", 0.0));
}

TEST_CASE("exported module matches predict_current gated at t_strike") {
    for (Transfer hidden : {Transfer::Tansig, Transfer::Logsig, Transfer::Elliotsig}) {
        const MlpModel m = random_mlp({3, 8, 8, 1},
                                      {hidden, hidden, Transfer::Purelin}, 55);
        const double t_strike = 200e-12;
        const VaModule v = export_verilog_a(m, "set_current", t_strike);

        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 1000; ++k) {
            const double tq = u(rng) * 1e-9;
            const double lq = 4.0 + u(rng) * 96.0;
            const double vq = u(rng) * 1.8;
            const double got = evaluate_exported(v, t_strike + tq, lq, vq);
            const double want = predict_current(m, tq, lq, vq);
            CHECK(std::abs(got - want) < 1e-9);
        }
        // Gated to zero before the strike.
        CHECK(evaluate_exported(v, t_strike - 1e-12, 40.0, 0.6) == 0.0);
        CHECK(evaluate_exported(v, 0.0, 40.0, 0.6) == 0.0);
    }
}

TEST_CASE("tansig/tanh equivalence justifies emitting tanh") {
    for (double n = -20.0; n <= 20.0; n += 0.01) {
        const double tansig = 2.0 / (1.0 + std::exp(-2.0 * n)) - 1.0;
        CHECK(std::abs(tansig - std::tanh(n)) < 1e-15);
    }
}
