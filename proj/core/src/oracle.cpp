#include "setml/oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace setml {

namespace {
constexpr double kLetMin = 4.0;
constexpr double kLetMax = 100.0;
constexpr double kVdMin = 0.0;
constexpr double kVdMax = 1.8;
}  // namespace

void OracleParams::validate() const {
    if (!(tau_rise > 0.0 && tau_fall > tau_rise))
        throw std::invalid_argument("oracle: requires tau_fall > tau_rise > 0");
    if (!(eta0 > 0.0 && eta0 + eta1 <= 1.0))
        throw std::invalid_argument("oracle: requires 0 < eta0 and eta0 + eta1 <= 1");
    if (!(vdd_ref > 0.0))
        throw std::invalid_argument("oracle: vdd_ref must be positive");
}

double collected_charge(double let_value, double vd, const OracleParams& p) {
    p.validate();
    if (!(let_value > 0.0))
        throw std::invalid_argument("oracle: let_value must be positive");
    if (vd < 0.0 || vd > p.vdd_ref)
        throw std::invalid_argument("oracle: vd outside [0, vdd_ref]");
    const double q_fc = p.charge_per_let * let_value * p.depth *
                        (p.eta0 + p.eta1 * vd / p.vdd_ref);
    return q_fc * 1e-15;  // fC -> C
}

double set_current(double t, double let_value, double vd, const OracleParams& p) {
    if (t < p.t0) return 0.0;
    const double q = collected_charge(let_value, vd, p);
    const double dt = t - p.t0;
    return q / (p.tau_fall - p.tau_rise) *
           (std::exp(-dt / p.tau_fall) - std::exp(-dt / p.tau_rise));
}

double peak_time(const OracleParams& p) {
    return p.t0 + p.tau_fall * p.tau_rise / (p.tau_fall - p.tau_rise) *
                      std::log(p.tau_fall / p.tau_rise);
}

Waveform generate_waveform(double let_value, double vd,
                           std::span<const double> grid, const OracleParams& p) {
    p.validate();
    if (grid.size() < 4)
        throw std::invalid_argument("oracle: grid needs at least 4 points");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1]))
            throw std::invalid_argument("oracle: grid must be strictly increasing");
    if (grid.front() > p.t0 || grid.back() < p.t0 + 5.0 * p.tau_fall)
        throw std::invalid_argument("oracle: grid must cover [t0, t0 + 5*tau_fall]");
    Waveform w{let_value, vd, {}};
    w.samples.reserve(grid.size());
    for (double t : grid) w.samples.push_back({t, set_current(t, let_value, vd, p)});
    return w;
}

std::vector<Waveform> generate_grid_dataset(std::span<const double> let_values,
                                            std::span<const double> vd_values,
                                            std::span<const double> grid,
                                            const OracleParams& p) {
    if (let_values.empty() || vd_values.empty())
        throw std::invalid_argument("oracle: empty value list");
    for (double let : let_values)
        for (double vd : vd_values)
            if (let < kLetMin || let > kLetMax || vd < kVdMin || vd > kVdMax) {
                std::ostringstream msg;
                msg << "oracle: (let=" << let << ", vd=" << vd
                    << ") outside LET [4,100] x vd [0,1.8]";
                throw std::invalid_argument(msg.str());
            }
    std::vector<Waveform> out;
    out.reserve(let_values.size() * vd_values.size());
    for (double let : let_values)
        for (double vd : vd_values)
            out.push_back(generate_waveform(let, vd, grid, p));
    return out;
}

}  // namespace setml
