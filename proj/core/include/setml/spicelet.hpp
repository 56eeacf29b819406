#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "setml/mlp.hpp"
#include "setml/oracle.hpp"

namespace setml {

/// Square-law (level-1) MOSFET parameters.
struct MosParams {
    double vth = 0.4;       // V (positive magnitude for both types)
    double kp = 250e-6;     // A/V^2
    double w_over_l = 1.0;
    double lambda = 0.0;    // 1/V
    bool is_nmos = true;
};

/// Drain current for the given gate-source and drain-source voltages.
/// NMOS returns the conventional positive drain current; PMOS takes
/// negative vgs/vds and returns negative current. Drain and source are
/// swapped internally when vds reverses sign.
double mosfet_current(const MosParams& p, double vgs, double vds);

struct Mosfet {
    std::string name;
    MosParams params;
    int drain = 0, gate = 0, source = 0;
};

struct CapacitorDev {
    std::string name;
    double c = 0.0;  // F
    int a = 0, b = 0;
};

struct ResistorDev {
    std::string name;
    double r = 0.0;  // Ohm
    int a = 0, b = 0;
};

struct VSourceDev {
    std::string name;
    double v = 0.0;  // V
    int pos = 0, neg = 0;
};

enum class VdBinding {
    Fixed,          // model queried at the pre-strike drain bias
    Instantaneous,  // model queried with the live drain voltage
};

/// SET current source attached drain->source across the struck device.
/// Either an MLP model or double-exponential parameters drive it.
struct SetSourceDev {
    std::string name;
    int drain = 0, source = 0;
    double t_strike = 200e-12;
    double let_value = 0.0;
    double vd_fixed = 0.0;          // bias used in Fixed mode
    VdBinding binding = VdBinding::Instantaneous;
    bool enabled = true;
    std::optional<MlpModel> model;
    std::optional<OracleParams> dexp;
    std::string model_path;         // provenance for netlist text

    double current(double t, double vds) const;
};

/// Node 0 is ground.
struct Netlist {
    int node_count = 1;
    std::vector<std::string> node_names;  // index = node id
    std::vector<Mosfet> mosfets;
    std::vector<CapacitorDev> caps;
    std::vector<ResistorDev> resistors;
    std::vector<VSourceDev> vsources;
    std::vector<SetSourceDev> set_sources;

    int add_node(const std::string& name);
    int find_node(const std::string& name) const;  // -1 if absent
    void validate() const;
};

struct InverterChainParams {
    double vdd = 1.8;
    int fanout = 5;
    double load_cap = 5e-15;
    double nmos_vth = 0.4;
    double pmos_vth = 0.4;       // magnitude
    double nmos_kp = 250e-6;
    double pmos_kp = 100e-6;
    double nmos_w_over_l = 420.0 / 130.0;
    double pmos_w_over_l = 2.0 * 420.0 / 130.0;
    double lambda = 0.05;
};

/// Stage-1 inverter (input tied low, output logic high) driving `fanout`
/// identical inverters, with a capacitor at every internal node.
Netlist build_inverter_chain(double vdd, int fanout, double load_cap);
Netlist build_inverter_chain(const InverterChainParams& p);

/// Adds a SET source in parallel with the named OFF-state NMOS
/// (drain->source). The target must be an NMOS in the netlist.
Netlist inject_set(Netlist n, const std::string& target_nmos,
                   SetSourceDev source);

struct TransientTrace {
    std::vector<double> t;
    std::vector<std::vector<double>> v;  // per time point, per node (incl. ground)
    std::vector<double> i_set;           // total injected SET current

    double node_min(int node) const;
};

/// Trapezoidal-companion transient with Newton iteration per step
/// (residual tol 1e-9 A, step tol 1e-6 V, max 50 iterations) and local
/// dt halving to a floor of dt/64 on non-convergence. Initial condition
/// from a DC solve at t = 0.
TransientTrace transient(const Netlist& n, double t_stop, double dt);

/// Structured text round-trip for netlists (grammar documented in the
/// implementation). SET sources referencing a model file record its path.
void write_netlist(std::ostream& out, const Netlist& n);
Netlist read_netlist(std::istream& in);

/// CSV `t,<node names...>,i_set`.
void write_trace_csv(std::ostream& out, const Netlist& n, const TransientTrace& tr);

}  // namespace setml
