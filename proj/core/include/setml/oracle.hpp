#pragma once

#include <span>
#include <vector>

#include "setml/waveform.hpp"

namespace setml {

/// Double-exponential SET current surrogate with a bias-dependent
/// charge-collection efficiency. Stands in for device-level simulation
/// as the data source for training.
struct OracleParams {
    double tau_rise = 10e-12;      // s
    double tau_fall = 200e-12;     // s
    double t0 = 0.0;               // strike onset, s
    double charge_per_let = 10.8;  // fC per (MeV*cm^2/mg) per um
    double depth = 1.0;            // collection depth, um
    double eta0 = 0.3;             // zero-bias collection efficiency
    double eta1 = 0.5;             // bias-proportional efficiency
    double vdd_ref = 1.8;          // V

    void validate() const;
};

/// Q = charge_per_let * let * depth * (eta0 + eta1 * vd / vdd_ref), in C.
/// Throws if vd is outside [0, vdd_ref] or let_value <= 0.
double collected_charge(double let_value, double vd, const OracleParams& p);

/// i(t) = Q/(tau_fall - tau_rise) * (exp(-(t-t0)/tau_fall) - exp(-(t-t0)/tau_rise))
/// for t >= t0, zero before. The time integral over [t0, inf) equals Q.
double set_current(double t, double let_value, double vd, const OracleParams& p);

/// Closed-form time of the current maximum.
double peak_time(const OracleParams& p);

Waveform generate_waveform(double let_value, double vd,
                           std::span<const double> grid, const OracleParams& p);

/// Cartesian product of LET and bias lists, one waveform per pair.
/// Values must lie in LET [4, 100] and vd [0, 1.8].
std::vector<Waveform> generate_grid_dataset(std::span<const double> let_values,
                                            std::span<const double> vd_values,
                                            std::span<const double> grid,
                                            const OracleParams& p);

}  // namespace setml
