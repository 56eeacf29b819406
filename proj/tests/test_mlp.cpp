#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "setml/mlp.hpp"

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

// Straight-line matrix evaluation, independent of forward().
double straight_line_eval(const MlpModel& m, const Eigen::Vector3d& x) {
    Eigen::VectorXd a = x;
    for (int l = 0; l < m.layer_count(); ++l) {
        const Eigen::VectorXd n = m.weights[l] * a + m.biases[l];
        Eigen::VectorXd next(n.size());
        for (int j = 0; j < n.size(); ++j) {
            switch (m.transfer[l]) {
                case Transfer::Tansig: next[j] = std::tanh(n[j]); break;
                case Transfer::Logsig: next[j] = 1.0 / (1.0 + std::exp(-n[j])); break;
                case Transfer::Elliotsig: next[j] = n[j] / (1.0 + std::abs(n[j])); break;
                case Transfer::Purelin: next[j] = n[j]; break;
            }
        }
        a = next;
    }
    return a[0];
}

Eigen::MatrixXd fd_jacobian(MlpModel m,
                            const Eigen::Matrix<double, Eigen::Dynamic, 3>& x,
                            double h = 1e-6) {
    const int np = m.parameter_count();
    Eigen::MatrixXd jac(x.rows(), np);
    const Eigen::VectorXd base = m.pack();
    for (int p = 0; p < np; ++p) {
        Eigen::VectorXd plus = base, minus = base;
        plus[p] += h;
        minus[p] -= h;
        for (int k = 0; k < x.rows(); ++k) {
            const Eigen::Vector3d xin = x.row(k).transpose();
            m.unpack(plus);
            const double fp = forward(m, xin);
            m.unpack(minus);
            const double fm = forward(m, xin);
            jac(k, p) = (fp - fm) / (2.0 * h);
        }
    }
    m.unpack(base);
    return jac;
}

}  // namespace

TEST_CASE("transfer functions at the origin") {
    CHECK(transfer_eval(Transfer::Tansig, 0.0) == 0.0);
    CHECK(transfer_eval(Transfer::Logsig, 0.0) == 0.5);
    CHECK(transfer_eval(Transfer::Elliotsig, 0.0) == 0.0);
    CHECK(transfer_eval(Transfer::Purelin, 0.0) == 0.0);
}

TEST_CASE("elliotsig closed form") {
    CHECK(transfer_eval(Transfer::Elliotsig, 1.0) == doctest::Approx(0.5));
    CHECK(transfer_eval(Transfer::Elliotsig, -1.0) == doctest::Approx(-0.5));
}

TEST_CASE("transfer derivatives match central finite differences") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    const double h = 1e-6;
    for (Transfer t : {Transfer::Tansig, Transfer::Logsig, Transfer::Elliotsig,
                       Transfer::Purelin}) {
        for (int k = 0; k < 1000; ++k) {
            const double n = u(rng);
            const double fd = (transfer_eval(t, n + h) - transfer_eval(t, n - h)) / (2 * h);
            CHECK(std::abs(transfer_deriv(t, n) - fd) < 1e-6);
        }
    }
}

TEST_CASE("tansig(n) == 2*logsig(2n) - 1") {
    for (double n = -20.0; n <= 20.0; n += 0.37) {
        const double lhs = transfer_eval(Transfer::Tansig, n);
        const double rhs = 2.0 * transfer_eval(Transfer::Logsig, 2.0 * n) - 1.0;
        CHECK(std::abs(lhs - rhs) < 1e-14);
    }
}

TEST_CASE("elliotsig stays in (-1, 1)") {
    for (double n : {-1e9, -37.0, -1.0, 0.0, 1.0, 37.0, 1e9}) {
        const double a = transfer_eval(Transfer::Elliotsig, n);
        CHECK(a > -1.0);
        CHECK(a < 1.0);
    }
}

TEST_CASE("forward: zero network outputs zero") {
    MlpModel m = make_mlp({3, 8, 8, 1},
                          {Transfer::Tansig, Transfer::Tansig, Transfer::Purelin});
    m.norm = simple_norm();
    CHECK(forward(m, Eigen::Vector3d(0.3, -0.7, 0.9)) == 0.0);
}

TEST_CASE("forward: single purelin layer is a dot product") {
    MlpModel m = make_mlp({3, 1}, {Transfer::Purelin});
    m.weights[0] << 1.0, 2.0, -3.0;
    m.norm = simple_norm();
    const Eigen::Vector3d x(0.5, 0.25, 1.0);
    CHECK(forward(m, x) == doctest::Approx(0.5 + 0.5 - 3.0));
}

TEST_CASE("forward matches an independent straight-line evaluation") {
    const MlpModel m = random_mlp({3, 8, 8, 1},
                                  {Transfer::Tansig, Transfer::Tansig, Transfer::Purelin}, 5);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Vector3d x(u(rng), u(rng), u(rng));
        CHECK(std::abs(forward(m, x) - straight_line_eval(m, x)) < 1e-12);
    }
}

TEST_CASE("predict_current maps extrema to +-1 and denormalizes") {
    MlpModel m = make_mlp({3, 1}, {Transfer::Purelin});
    m.weights[0] << 1.0, 0.0, 0.0;  // output = normalized time
    m.norm = simple_norm();
    // Input at the training extremum -> normalized -1 -> denorm.
    const double at_min = predict_current(m, 0.0, 4.0, 0.0);
    CHECK(at_min == doctest::Approx(denorm_value(-1.0, m.norm.output)));
    const double at_max = predict_current(m, 1e-9, 4.0, 0.0);
    CHECK(at_max == doctest::Approx(denorm_value(1.0, m.norm.output)));

    // Zero network -> output 0 -> midpoint of the output range.
    MlpModel z = make_mlp({3, 8, 1}, {Transfer::Tansig, Transfer::Purelin});
    z.norm = simple_norm();
    CHECK(predict_current(z, 0.5e-9, 50.0, 0.9) ==
          doctest::Approx(0.5 * (z.norm.output.min + z.norm.output.max)));
}

TEST_CASE("jacobian: single purelin layer") {
    MlpModel m = make_mlp({3, 1}, {Transfer::Purelin});
    m.weights[0] << 0.2, -0.4, 0.6;
    m.biases[0][0] = 0.1;
    m.norm = simple_norm();
    Eigen::Matrix<double, Eigen::Dynamic, 3> x(2, 3);
    x << 0.5, -0.3, 0.8, -0.1, 0.9, 0.2;
    const Eigen::MatrixXd jac = jacobian(m, x);
    REQUIRE(jac.rows() == 2);
    REQUIRE(jac.cols() == 4);
    for (int k = 0; k < 2; ++k) {
        CHECK(jac(k, 0) == doctest::Approx(x(k, 0)));
        CHECK(jac(k, 1) == doctest::Approx(x(k, 1)));
        CHECK(jac(k, 2) == doctest::Approx(x(k, 2)));
        CHECK(jac(k, 3) == doctest::Approx(1.0));
    }
}

TEST_CASE("jacobian matches finite differences for random networks") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::Matrix<double, Eigen::Dynamic, 3> x(20, 3);
    for (int k = 0; k < 20; ++k)
        for (int c = 0; c < 3; ++c) x(k, c) = u(rng);

    const std::vector<std::pair<std::vector<int>, std::vector<Transfer>>> cases = {
        {{3, 16, 1}, {Transfer::Tansig, Transfer::Purelin}},
        {{3, 8, 8, 1}, {Transfer::Logsig, Transfer::Logsig, Transfer::Purelin}},
        {{3, 8, 16, 8, 1},
         {Transfer::Elliotsig, Transfer::Elliotsig, Transfer::Elliotsig, Transfer::Purelin}},
    };
    for (const auto& [dims, tr] : cases) {
        const MlpModel m = random_mlp(dims, tr, 31);
        const Eigen::MatrixXd ja = jacobian(m, x);
        const Eigen::MatrixXd jf = fd_jacobian(m, x);
        const double scale = jf.cwiseAbs().maxCoeff();
        CHECK((ja - jf).cwiseAbs().maxCoeff() / scale < 1e-5);
    }
}

TEST_CASE("jacobian of a zero-weight tansig network matches finite differences") {
    MlpModel m = make_mlp({3, 8, 8, 1},
                          {Transfer::Tansig, Transfer::Tansig, Transfer::Purelin});
    m.norm = simple_norm();
    Eigen::Matrix<double, Eigen::Dynamic, 3> x(5, 3);
    x << 0.1, 0.2, 0.3, -0.5, 0.4, 0.9, 0.0, 0.0, 0.0, 1.0, -1.0, 0.5, 0.7, 0.7, -0.7;
    const Eigen::MatrixXd ja = jacobian(m, x);
    const Eigen::MatrixXd jf = fd_jacobian(m, x);
    CHECK((ja - jf).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("serialize/deserialize round trip preserves behavior") {
    const MlpModel m = random_mlp({3, 8, 8, 1},
                                  {Transfer::Tansig, Transfer::Elliotsig, Transfer::Purelin},
                                  41);
    std::ostringstream out;
    serialize(m, out);
    std::istringstream in(out.str());
    const MlpModel back = deserialize(in);

    CHECK(back.layer_dims == m.layer_dims);
    CHECK(back.transfer == m.transfer);
    CHECK((back.pack() - m.pack()).cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Vector3d x(u(rng), u(rng), u(rng));
        CHECK(forward(m, x) == forward(back, x));
    }
}

TEST_CASE("deserialize rejects truncated and alien streams") {
    const MlpModel m = random_mlp({3, 8, 1}, {Transfer::Tansig, Transfer::Purelin}, 43);
    std::ostringstream out;
    serialize(m, out);
    const std::string text = out.str();

    std::istringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS(deserialize(truncated));

    std::istringstream alien("some other format v9\n");
    CHECK_THROWS(deserialize(alien));
}

TEST_CASE("deserialize accepts a hand-written minimal model") {
    const std::string text =
        "setml-mlp v1\n"
        "dims 3 1\n"
        "transfer purelin\n"
        "norm 0 1 0 1 0 1 0 1\n"
        "layer 0\n"
        "0.25 -0.5 1\n"
        "0.125\n"
        "end\n";
    std::istringstream in(text);
    const MlpModel m = deserialize(in);
    CHECK(m.layer_dims == std::vector<int>{3, 1});
    CHECK(m.weights[0](0, 1) == -0.5);
    CHECK(m.biases[0][0] == 0.125);
}
