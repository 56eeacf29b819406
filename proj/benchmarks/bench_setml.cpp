// Microbenchmarks for the hot paths: forward evaluation, the training
// Jacobian, spline resampling, and the circuit transient.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "setml/dataset.hpp"
#include "setml/mlp.hpp"
#include "setml/oracle.hpp"
#include "setml/spicelet.hpp"
#include "setml/spline.hpp"

using namespace setml;

namespace {

MlpModel seeded_model(const std::vector<int>& dims) {
    std::vector<Transfer> tr(dims.size() - 1, Transfer::Tansig);
    tr.back() = Transfer::Purelin;
    MlpModel m = make_mlp(dims, tr);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    Eigen::VectorXd p(m.parameter_count());
    for (int k = 0; k < p.size(); ++k) p[k] = u(rng);
    m.unpack(p);
    m.norm.input = {Channel{0.0, 1e-9}, Channel{4.0, 100.0}, Channel{0.0, 1.8}};
    m.norm.output = Channel{0.0, 1e-3};
    return m;
}

void bm_forward(benchmark::State& state) {
    const MlpModel m = seeded_model({3, 8, 8, 1});
    const Eigen::Vector3d x(0.1, -0.3, 0.7);
    for (auto _ : state) benchmark::DoNotOptimize(forward(m, x));
}
BENCHMARK(bm_forward);

void bm_jacobian(benchmark::State& state) {
    const MlpModel m = seeded_model({3, 8, 8, 1});
    const auto rows = static_cast<Eigen::Index>(state.range(0));
    Eigen::Matrix<double, Eigen::Dynamic, 3> x(rows, 3);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (int c = 0; c < 3; ++c) x(r, c) = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(jacobian(m, x));
    state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(bm_jacobian)->Arg(256)->Arg(4096);

void bm_densify(benchmark::State& state) {
    std::vector<double> grid;
    for (int k = 0; k <= 2000; ++k) grid.push_back(1e-9 * k / 2000.0);
    const Waveform w = generate_waveform(40.0, 1.2, grid, OracleParams{});
    for (auto _ : state) benchmark::DoNotOptimize(densify_adaptive(w, 0.01));
}
BENCHMARK(bm_densify);

void bm_spline_eval(benchmark::State& state) {
    std::vector<double> x, y;
    for (int k = 0; k <= 200; ++k) {
        x.push_back(1e-9 * k / 200.0);
        y.push_back(set_current(x.back(), 40.0, 1.2, OracleParams{}));
    }
    const CubicSpline s(x, y);
    double q = 0.3e-9;
    for (auto _ : state) {
        benchmark::DoNotOptimize(s(q));
        q = (q < 0.9e-9) ? q + 1e-12 : 0.1e-9;
    }
}
BENCHMARK(bm_spline_eval);

void bm_transient(benchmark::State& state) {
    SetSourceDev src;
    src.name = "ISET";
    src.t_strike = 200e-12;
    src.let_value = 80.0;
    src.vd_fixed = 1.8;
    src.dexp = OracleParams{};
    const Netlist n = inject_set(build_inverter_chain(1.8, 5, 5e-15), "MN1", src);
    for (auto _ : state) benchmark::DoNotOptimize(transient(n, 1e-9, 1e-12));
}
BENCHMARK(bm_transient);

}  // namespace

BENCHMARK_MAIN();
