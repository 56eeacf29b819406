#include "setml/spicelet.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace setml {

namespace {

constexpr double kGmin = 1e-12;        // S, leak to ground at every node
constexpr double kResidualTol = 1e-9;  // A
constexpr double kStepTol = 1e-6;      // V
constexpr int kMaxNewton = 50;
constexpr double kMaxNewtonStep = 1.0;  // V per iteration

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double square_law(const MosParams& p, double vgs, double vds) {
    // NMOS conventions; caller maps PMOS and reversed vds onto this.
    const double vov = vgs - p.vth;
    if (vov <= 0.0) return 0.0;
    const double k = p.kp * p.w_over_l;
    if (vds < vov)
        return k * (vov * vds - 0.5 * vds * vds) * (1.0 + p.lambda * vds);
    return 0.5 * k * vov * vov * (1.0 + p.lambda * vds);
}

}  // namespace

double mosfet_current(const MosParams& p, double vgs, double vds) {
    if (!p.is_nmos) return -mosfet_current(MosParams{p.vth, p.kp, p.w_over_l,
                                                     p.lambda, true},
                                           -vgs, -vds);
    if (vds >= 0.0) return square_law(p, vgs, vds);
    // Source and drain swap roles when the channel reverses.
    return -square_law(p, vgs - vds, -vds);
}

double SetSourceDev::current(double t, double vds) const {
    if (!enabled || t < t_strike) return 0.0;
    const double tm = t - t_strike;
    double vd_eff = (binding == VdBinding::Fixed) ? vd_fixed : vds;
    if (model) return predict_current(*model, tm, let_value, vd_eff);
    if (dexp) {
        // The closed-form charge is only defined on [0, vdd_ref].
        vd_eff = std::clamp(vd_eff, 0.0, dexp->vdd_ref);
        return set_current(tm, let_value, vd_eff, *dexp);
    }
    throw std::runtime_error("set source '" + name + "' has no model attached");
}

int Netlist::add_node(const std::string& name) {
    if (node_names.empty()) node_names.push_back("0");
    node_names.push_back(name);
    return node_count++;
}

int Netlist::find_node(const std::string& name) const {
    if (name == "0") return 0;
    for (std::size_t k = 0; k < node_names.size(); ++k)
        if (node_names[k] == name) return static_cast<int>(k);
    return -1;
}

void Netlist::validate() const {
    auto check = [&](int node, const std::string& dev) {
        if (node < 0 || node >= node_count)
            throw std::invalid_argument("netlist: device '" + dev +
                                        "' references missing node");
    };
    for (const auto& d : mosfets) {
        check(d.drain, d.name);
        check(d.gate, d.name);
        check(d.source, d.name);
    }
    for (const auto& d : caps) {
        check(d.a, d.name);
        check(d.b, d.name);
    }
    for (const auto& d : resistors) {
        check(d.a, d.name);
        check(d.b, d.name);
        if (!(d.r > 0.0))
            throw std::invalid_argument("netlist: resistor '" + d.name +
                                        "' needs a positive resistance");
    }
    for (const auto& d : vsources) {
        check(d.pos, d.name);
        check(d.neg, d.name);
    }
    for (const auto& d : set_sources) {
        check(d.drain, d.name);
        check(d.source, d.name);
    }
    if (vsources.empty())
        throw std::invalid_argument("netlist: needs at least one voltage source");
}

Netlist build_inverter_chain(double vdd, int fanout, double load_cap) {
    InverterChainParams p;
    p.vdd = vdd;
    p.fanout = fanout;
    p.load_cap = load_cap;
    return build_inverter_chain(p);
}

Netlist build_inverter_chain(const InverterChainParams& p) {
    if (p.fanout < 1) throw std::invalid_argument("chain: fanout must be >= 1");
    Netlist n;
    const int vdd = n.add_node("vdd");
    const int out1 = n.add_node("out1");
    n.vsources.push_back({"VDD", p.vdd, vdd, 0});

    const MosParams nmos{p.nmos_vth, p.nmos_kp, p.nmos_w_over_l, p.lambda, true};
    const MosParams pmos{p.pmos_vth, p.pmos_kp, p.pmos_w_over_l, p.lambda, false};

    // Stage 1: input tied low, so MN1 is OFF and out1 sits at vdd.
    n.mosfets.push_back({"MP1", pmos, out1, 0, vdd});
    n.mosfets.push_back({"MN1", nmos, out1, 0, 0});
    n.caps.push_back({"C1", p.load_cap, out1, 0});

    for (int k = 1; k <= p.fanout; ++k) {
        const std::string id = std::to_string(k);
        const int out2 = n.add_node("out2_" + id);
        n.mosfets.push_back({"MP2_" + id, pmos, out2, out1, vdd});
        n.mosfets.push_back({"MN2_" + id, nmos, out2, out1, 0});
        n.caps.push_back({"C2_" + id, p.load_cap, out2, 0});
    }
    n.validate();
    return n;
}

Netlist inject_set(Netlist n, const std::string& target_nmos, SetSourceDev source) {
    const Mosfet* target = nullptr;
    for (const Mosfet& m : n.mosfets)
        if (m.name == target_nmos) target = &m;
    if (!target)
        throw std::invalid_argument("inject_set: no MOSFET named '" + target_nmos + "'");
    if (!target->params.is_nmos)
        throw std::invalid_argument("inject_set: target '" + target_nmos + "' is not an NMOS");
    if (target->gate != 0)
        throw std::invalid_argument("inject_set: target '" + target_nmos +
                                    "' is not an OFF-state NMOS (gate not tied low)");
    source.drain = target->drain;
    source.source = target->source;
    n.set_sources.push_back(std::move(source));
    n.validate();
    return n;
}

double TransientTrace::node_min(int node) const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& vs : v) lo = std::min(lo, vs[static_cast<std::size_t>(node)]);
    return lo;
}

namespace {

struct CapState {
    double v = 0.0;  // v(a) - v(b) at the last accepted point
    double i = 0.0;  // current a -> b at the last accepted point
};

class Solver {
public:
    explicit Solver(const Netlist& n) : n_(n) {
        n_.validate();
        n_unknowns_ = (n_.node_count - 1) + static_cast<int>(n_.vsources.size());
        x_ = Eigen::VectorXd::Zero(n_unknowns_);
        cap_state_.resize(n_.caps.size());
    }

    double node_v(const Eigen::VectorXd& x, int node) const {
        return node == 0 ? 0.0 : x[node - 1];
    }

    // KCL residuals (currents leaving each node) plus vsource branch rows.
    // dt <= 0 selects the DC formulation (capacitors open).
    Eigen::VectorXd residual(const Eigen::VectorXd& x, double t, double dt) const {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(n_unknowns_);
        auto kcl = [&](int node, double i_leaving) {
            if (node != 0) f[node - 1] += i_leaving;
        };
        for (int node = 1; node < n_.node_count; ++node)
            f[node - 1] += kGmin * node_v(x, node);

        for (const Mosfet& m : n_.mosfets) {
            const double vg = node_v(x, m.gate);
            const double vd = node_v(x, m.drain);
            const double vs = node_v(x, m.source);
            const double id = mosfet_current(m.params, vg - vs, vd - vs);
            kcl(m.drain, id);
            kcl(m.source, -id);
        }
        for (const ResistorDev& r : n_.resistors) {
            const double i = (node_v(x, r.a) - node_v(x, r.b)) / r.r;
            kcl(r.a, i);
            kcl(r.b, -i);
        }
        for (std::size_t k = 0; k < n_.caps.size(); ++k) {
            const CapacitorDev& c = n_.caps[k];
            if (dt <= 0.0) continue;  // open at DC
            const double geq = 2.0 * c.c / dt;
            const double vc = node_v(x, c.a) - node_v(x, c.b);
            const double i = geq * (vc - cap_state_[k].v) - cap_state_[k].i;
            kcl(c.a, i);
            kcl(c.b, -i);
        }
        for (const SetSourceDev& s : n_.set_sources) {
            const double vds = node_v(x, s.drain) - node_v(x, s.source);
            const double i = s.current(t, vds);
            kcl(s.drain, i);
            kcl(s.source, -i);
        }
        for (std::size_t k = 0; k < n_.vsources.size(); ++k) {
            const VSourceDev& src = n_.vsources[k];
            const double ib = x[(n_.node_count - 1) + static_cast<int>(k)];
            kcl(src.pos, ib);
            kcl(src.neg, -ib);
            f[(n_.node_count - 1) + static_cast<int>(k)] =
                node_v(x, src.pos) - node_v(x, src.neg) - src.v;
        }
        return f;
    }

    // Newton with a finite-difference Jacobian; the systems here are tiny.
    bool newton(Eigen::VectorXd& x, double t, double dt) const {
        for (int it = 0; it < kMaxNewton; ++it) {
            const Eigen::VectorXd f = residual(x, t, dt);
            Eigen::MatrixXd jac(n_unknowns_, n_unknowns_);
            for (int c = 0; c < n_unknowns_; ++c) {
                const double h = 1e-7 * std::max(1.0, std::abs(x[c]));
                Eigen::VectorXd xp = x;
                xp[c] += h;
                jac.col(c) = (residual(xp, t, dt) - f) / h;
            }
            Eigen::VectorXd dx = jac.partialPivLu().solve(-f);
            if (!dx.allFinite()) return false;
            const double limit = dx.cwiseAbs().maxCoeff();
            if (limit > kMaxNewtonStep) dx *= kMaxNewtonStep / limit;
            x += dx;
            if (residual(x, t, dt).cwiseAbs().maxCoeff() < kResidualTol &&
                dx.cwiseAbs().maxCoeff() < kStepTol)
                return true;
        }
        return false;
    }

    void solve_dc() {
        if (!newton(x_, 0.0, 0.0))
            throw std::runtime_error("transient: DC operating point did not converge");
        for (std::size_t k = 0; k < n_.caps.size(); ++k) {
            cap_state_[k].v = node_v(x_, n_.caps[k].a) - node_v(x_, n_.caps[k].b);
            cap_state_[k].i = 0.0;
        }
    }

    // Advances from t to t+h, halving h on Newton failure down to h_floor.
    void advance(double t, double h, double h_floor, TransientTrace& trace) {
        Eigen::VectorXd x_try = x_;
        if (newton(x_try, t + h, h)) {
            commit(x_try, t + h, h, trace);
            return;
        }
        if (h / 2.0 < h_floor) {
            std::ostringstream msg;
            msg << "transient: Newton failed to converge near t = " << (t + h)
                << " s even at the minimum step";
            throw std::runtime_error(msg.str());
        }
        advance(t, h / 2.0, h_floor, trace);
        advance(t + h / 2.0, h / 2.0, h_floor, trace);
    }

    void commit(const Eigen::VectorXd& x, double t, double dt, TransientTrace& trace) {
        for (std::size_t k = 0; k < n_.caps.size(); ++k) {
            const CapacitorDev& c = n_.caps[k];
            const double geq = 2.0 * c.c / dt;
            const double vc = node_v(x, c.a) - node_v(x, c.b);
            const double i = geq * (vc - cap_state_[k].v) - cap_state_[k].i;
            cap_state_[k] = {vc, i};
        }
        x_ = x;
        record(t, trace);
    }

    void record(double t, TransientTrace& trace) const {
        trace.t.push_back(t);
        std::vector<double> volts(static_cast<std::size_t>(n_.node_count));
        for (int node = 0; node < n_.node_count; ++node)
            volts[static_cast<std::size_t>(node)] = node_v(x_, node);
        trace.v.push_back(std::move(volts));
        double i_total = 0.0;
        for (const SetSourceDev& s : n_.set_sources)
            i_total += s.current(t, node_v(x_, s.drain) - node_v(x_, s.source));
        trace.i_set.push_back(i_total);
    }

private:
    const Netlist& n_;
    int n_unknowns_ = 0;
    Eigen::VectorXd x_;
    std::vector<CapState> cap_state_;
};

}  // namespace

TransientTrace transient(const Netlist& n, double t_stop, double dt) {
    if (!(dt > 0.0) || !(t_stop > 0.0))
        throw std::invalid_argument("transient: t_stop and dt must be positive");
    Solver solver(n);
    solver.solve_dc();
    TransientTrace trace;
    solver.record(0.0, trace);
    const double h_floor = dt / 64.0 * (1.0 - 1e-12);
    double t = 0.0;
    while (t < t_stop - dt / 2.0) {
        solver.advance(t, dt, h_floor, trace);
        t += dt;
    }
    return trace;
}

void write_netlist(std::ostream& out, const Netlist& n) {
    // Grammar (one directive per line, '#' comments allowed):
    //   netlist v1
    //   node <name>
    //   mosfet <name> nmos|pmos <drain> <gate> <source> vth= kp= wl= lambda=
    //   cap <name> <a> <b> c=
    //   res <name> <a> <b> r=
    //   vsource <name> <pos> <neg> v=
    //   set <name> <drain> <source> t_strike= let= vd= binding=fixed|inst
    //       enabled=0|1 kind=dexp|model [model=<path>]
    //       [tau_rise= tau_fall= qpl= depth= eta0= eta1= vdd_ref=]
    //   end
    // Node "0" is ground and is implicit.
    out << "netlist v1\n";
    for (int k = 1; k < n.node_count; ++k) out << "node " << n.node_names[k] << "\n";
    auto nn = [&](int node) -> const std::string& { return n.node_names[node]; };
    for (const Mosfet& m : n.mosfets)
        out << "mosfet " << m.name << ' ' << (m.params.is_nmos ? "nmos" : "pmos") << ' '
            << nn(m.drain) << ' ' << nn(m.gate) << ' ' << nn(m.source)
            << " vth=" << fmt17(m.params.vth) << " kp=" << fmt17(m.params.kp)
            << " wl=" << fmt17(m.params.w_over_l)
            << " lambda=" << fmt17(m.params.lambda) << "\n";
    for (const CapacitorDev& c : n.caps)
        out << "cap " << c.name << ' ' << nn(c.a) << ' ' << nn(c.b)
            << " c=" << fmt17(c.c) << "\n";
    for (const ResistorDev& r : n.resistors)
        out << "res " << r.name << ' ' << nn(r.a) << ' ' << nn(r.b)
            << " r=" << fmt17(r.r) << "\n";
    for (const VSourceDev& v : n.vsources)
        out << "vsource " << v.name << ' ' << nn(v.pos) << ' ' << nn(v.neg)
            << " v=" << fmt17(v.v) << "\n";
    for (const SetSourceDev& s : n.set_sources) {
        out << "set " << s.name << ' ' << nn(s.drain) << ' ' << nn(s.source)
            << " t_strike=" << fmt17(s.t_strike) << " let=" << fmt17(s.let_value)
            << " vd=" << fmt17(s.vd_fixed)
            << " binding=" << (s.binding == VdBinding::Fixed ? "fixed" : "inst")
            << " enabled=" << (s.enabled ? 1 : 0);
        if (s.model) {
            out << " kind=model model=" << s.model_path;
        } else if (s.dexp) {
            const OracleParams& p = *s.dexp;
            out << " kind=dexp tau_rise=" << fmt17(p.tau_rise)
                << " tau_fall=" << fmt17(p.tau_fall) << " qpl=" << fmt17(p.charge_per_let)
                << " depth=" << fmt17(p.depth) << " eta0=" << fmt17(p.eta0)
                << " eta1=" << fmt17(p.eta1) << " vdd_ref=" << fmt17(p.vdd_ref);
        }
        out << "\n";
    }
    out << "end\n";
}

namespace {

std::map<std::string, std::string> parse_kv(std::istringstream& in) {
    std::map<std::string, std::string> kv;
    std::string tok;
    while (in >> tok) {
        const std::size_t eq = tok.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("netlist: expected key=value, got '" + tok + "'");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

double kv_num(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end())
        throw std::runtime_error("netlist: missing field '" + key + "'");
    return std::stod(it->second);
}

}  // namespace

Netlist read_netlist(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "netlist v1")
        throw std::runtime_error("netlist: unknown format/version");
    Netlist n;
    auto node_id = [&](const std::string& name) {
        const int id = n.find_node(name);
        if (id < 0) throw std::runtime_error("netlist: unknown node '" + name + "'");
        return id;
    };
    bool ended = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "end") {
            ended = true;
            break;
        } else if (kind == "node") {
            std::string name;
            ls >> name;
            n.add_node(name);
        } else if (kind == "mosfet") {
            std::string name, type, d, g, s;
            ls >> name >> type >> d >> g >> s;
            auto kv = parse_kv(ls);
            MosParams p{kv_num(kv, "vth"), kv_num(kv, "kp"), kv_num(kv, "wl"),
                        kv_num(kv, "lambda"), type == "nmos"};
            n.mosfets.push_back({name, p, node_id(d), node_id(g), node_id(s)});
        } else if (kind == "cap") {
            std::string name, a, b;
            ls >> name >> a >> b;
            auto kv = parse_kv(ls);
            n.caps.push_back({name, kv_num(kv, "c"), node_id(a), node_id(b)});
        } else if (kind == "res") {
            std::string name, a, b;
            ls >> name >> a >> b;
            auto kv = parse_kv(ls);
            n.resistors.push_back({name, kv_num(kv, "r"), node_id(a), node_id(b)});
        } else if (kind == "vsource") {
            std::string name, pos, neg;
            ls >> name >> pos >> neg;
            auto kv = parse_kv(ls);
            n.vsources.push_back({name, kv_num(kv, "v"), node_id(pos), node_id(neg)});
        } else if (kind == "set") {
            std::string name, d, s;
            ls >> name >> d >> s;
            auto kv = parse_kv(ls);
            SetSourceDev src;
            src.name = name;
            src.drain = node_id(d);
            src.source = node_id(s);
            src.t_strike = kv_num(kv, "t_strike");
            src.let_value = kv_num(kv, "let");
            src.vd_fixed = kv_num(kv, "vd");
            src.binding = kv.at("binding") == "fixed" ? VdBinding::Fixed
                                                      : VdBinding::Instantaneous;
            src.enabled = kv_num(kv, "enabled") != 0.0;
            const std::string srckind = kv.at("kind");
            if (srckind == "model") {
                src.model_path = kv.at("model");
                src.model = load_model(src.model_path);
            } else if (srckind == "dexp") {
                OracleParams p;
                p.tau_rise = kv_num(kv, "tau_rise");
                p.tau_fall = kv_num(kv, "tau_fall");
                p.charge_per_let = kv_num(kv, "qpl");
                p.depth = kv_num(kv, "depth");
                p.eta0 = kv_num(kv, "eta0");
                p.eta1 = kv_num(kv, "eta1");
                p.vdd_ref = kv_num(kv, "vdd_ref");
                src.dexp = p;
            } else {
                throw std::runtime_error("netlist: unknown set source kind '" + srckind + "'");
            }
            n.set_sources.push_back(std::move(src));
        } else {
            throw std::runtime_error("netlist: unknown directive '" + kind + "'");
        }
    }
    if (!ended) throw std::runtime_error("netlist: missing 'end'");
    n.validate();
    return n;
}

void write_trace_csv(std::ostream& out, const Netlist& n, const TransientTrace& tr) {
    out << "t";
    for (int k = 1; k < n.node_count; ++k) out << ',' << n.node_names[k];
    out << ",i_set\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        out << fmt17(tr.t[k]);
        for (int node = 1; node < n.node_count; ++node)
            out << ',' << fmt17(tr.v[k][static_cast<std::size_t>(node)]);
        out << ',' << fmt17(tr.i_set[k]) << '\n';
    }
}

}  // namespace setml
