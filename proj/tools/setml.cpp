// setml: command-line front end for the SET current modeling pipeline.
// Subcommands: generate, train, sweep, export, simulate, pipeline.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "setml/dataset.hpp"
#include "setml/mlp.hpp"
#include "setml/oracle.hpp"
#include "setml/spicelet.hpp"
#include "setml/trainer.hpp"
#include "setml/vacodegen.hpp"

namespace fs = std::filesystem;
using namespace setml;

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    if (out.empty()) throw CLI::ValidationError("expected a comma-separated list");
    return out;
}

std::vector<int> parse_arch(const std::string& arch) {
    std::vector<int> dims;
    std::stringstream ss(arch);
    std::string tok;
    while (std::getline(ss, tok, 'x')) dims.push_back(std::stoi(tok));
    if (dims.size() < 2 || dims.back() != 1)
        throw CLI::ValidationError("architecture must look like '8x8x1' and end in 1");
    dims.pop_back();
    for (int d : dims)
        if (d < 1) throw CLI::ValidationError("hidden layer widths must be positive");
    return dims;
}

std::string join_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s += ',';
        s += fmt17(v[k]);
    }
    return s;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path.string());
    return f;
}

struct OracleFlags {
    OracleParams p;
    void attach(CLI::App* cmd) {
        cmd->add_option("--tau-rise", p.tau_rise, "Rise time constant, s");
        cmd->add_option("--tau-fall", p.tau_fall, "Fall time constant, s");
        cmd->add_option("--qpl", p.charge_per_let, "Deposited charge, fC per LET per um");
        cmd->add_option("--depth", p.depth, "Collection depth, um");
        cmd->add_option("--eta0", p.eta0, "Zero-bias collection efficiency");
        cmd->add_option("--eta1", p.eta1, "Bias-proportional collection efficiency");
        cmd->add_option("--vdd-ref", p.vdd_ref, "Reference supply for the bias term, V");
    }
};

struct GenerateOpts {
    std::string out = "dataset.csv";
    std::string lets, vds;
    double max_rel_err = 0.01;
    double t_stop = 1e-9;
    std::uint64_t seed = 42;
    OracleFlags oracle;
};

std::vector<double> default_lets() {
    std::vector<double> v;
    for (double let = 4.0; let <= 100.0; let += 4.0) v.push_back(let);
    return v;
}

std::vector<double> default_vds() {
    std::vector<double> v;
    for (int k = 0; k <= 9; ++k) v.push_back(0.2 * k);
    return v;
}

SetDataset generate_dataset(const GenerateOpts& o, std::vector<double>* lets_out,
                            std::vector<double>* vds_out) {
    const auto lets = o.lets.empty() ? default_lets() : parse_list(o.lets);
    const auto vds = o.vds.empty() ? default_vds() : parse_list(o.vds);
    std::vector<double> base_grid;
    const int n_base = 2000;
    for (int k = 0; k <= n_base; ++k)
        base_grid.push_back(o.t_stop * static_cast<double>(k) / n_base);
    const auto waveforms = generate_grid_dataset(lets, vds, base_grid, o.oracle.p);
    std::vector<Waveform> densified;
    densified.reserve(waveforms.size());
    for (const Waveform& w : waveforms) densified.push_back(densify_adaptive(w, o.max_rel_err));
    auto ds = split_dataset(flatten(densified), o.seed);
    if (lets_out) *lets_out = lets;
    if (vds_out) *vds_out = vds;
    return ds;
}

void write_manifest(const fs::path& csv_path, const GenerateOpts& o,
                    const std::vector<double>& lets, const std::vector<double>& vds,
                    std::size_t n_rows) {
    auto f = open_out(csv_path.string() + ".manifest");
    const OracleParams& p = o.oracle.p;
    f << "seed=" << o.seed << "\n"
      << "lets=" << join_list(lets) << "\n"
      << "vds=" << join_list(vds) << "\n"
      << "max_rel_err=" << fmt17(o.max_rel_err) << "\n"
      << "t_stop=" << fmt17(o.t_stop) << "\n"
      << "rows=" << n_rows << "\n"
      << "tau_rise=" << fmt17(p.tau_rise) << "\n"
      << "tau_fall=" << fmt17(p.tau_fall) << "\n"
      << "charge_per_let=" << fmt17(p.charge_per_let) << "\n"
      << "depth=" << fmt17(p.depth) << "\n"
      << "eta0=" << fmt17(p.eta0) << "\n"
      << "eta1=" << fmt17(p.eta1) << "\n"
      << "vdd_ref=" << fmt17(p.vdd_ref) << "\n";
}

int cmd_generate(const GenerateOpts& o) {
    std::vector<double> lets, vds;
    const auto ds = generate_dataset(o, &lets, &vds);
    auto f = open_out(o.out);
    write_dataset_csv(f, ds);
    write_manifest(o.out, o, lets, vds, ds.rows.size());
    std::cout << "wrote " << ds.rows.size() << " rows to " << o.out << " ("
              << ds.count_of(Split::Train) << " train / " << ds.count_of(Split::Validation)
              << " val / " << ds.count_of(Split::Test) << " test)\n";
    return 0;
}

SetDataset load_dataset(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open dataset: " + path);
    return read_dataset_csv(f);
}

struct TrainOpts {
    std::string data;
    std::string arch = "8x8x1";
    std::string transfer = "tansig";
    std::string model_out = "model.txt";
    std::string report_out = "report.csv";
    TrainConfig cfg;
};

std::pair<MlpModel, TrainReport> run_training(const TrainOpts& o, const SetDataset& ds) {
    return train_lm(parse_arch(o.arch), transfer_from_name(o.transfer), ds, o.cfg);
}

void write_report_csv(const fs::path& path, const TrainReport& rep) {
    auto f = open_out(path);
    f << "epoch,train_mse,val_mse,mu\n";
    for (std::size_t k = 0; k < rep.train_mse.size(); ++k)
        f << (k + 1) << ',' << fmt17(rep.train_mse[k]) << ',' << fmt17(rep.val_mse[k])
          << ',' << fmt17(rep.mu_trace[k]) << '\n';
}

int cmd_train(const TrainOpts& o) {
    const auto ds = load_dataset(o.data);
    auto [model, rep] = run_training(o, ds);
    save_model(model, o.model_out);
    write_report_csv(o.report_out, rep);
    std::cout << "trained " << o.arch << " " << o.transfer << ": " << rep.epochs
              << " epochs, stop=" << stop_reason_name(rep.stop_reason)
              << ", train/val/test MSE = " << rep.final_train_mse << " / "
              << rep.final_val_mse << " / " << rep.final_test_mse << "\n";
    std::cout << "model -> " << o.model_out << ", report -> " << o.report_out << "\n";
    return 0;
}

struct SweepOpts {
    std::string data;
    std::string out = "sweep.csv";
    std::string arch;      // empty = full nine-row grid
    std::string transfer;  // empty = all three hidden transfers
    TrainConfig cfg;
};

int cmd_sweep(const SweepOpts& o) {
    const auto ds = load_dataset(o.data);
    std::vector<SweepEntry> entries;
    const std::vector<std::vector<int>> archs =
        o.arch.empty() ? std::vector<std::vector<int>>{{16}, {8, 8}, {8, 16, 8}}
                       : std::vector<std::vector<int>>{parse_arch(o.arch)};
    const std::vector<Transfer> transfers =
        o.transfer.empty()
            ? std::vector<Transfer>{Transfer::Tansig, Transfer::Logsig, Transfer::Elliotsig}
            : std::vector<Transfer>{transfer_from_name(o.transfer)};
    for (const auto& a : archs)
        for (Transfer t : transfers) entries.push_back({a, t});
    auto rows = architecture_sweep(ds, entries, o.cfg);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SweepRow& a, const SweepRow& b) { return a.test_mse < b.test_mse; });
    auto f = open_out(o.out);
    write_sweep_csv(f, rows);
    write_sweep_table(std::cout, rows);
    return 0;
}

struct ExportOpts {
    std::string model;
    std::string module_name = "set_current";
    std::string out;
    double t_strike = 200e-12;
};

int cmd_export(const ExportOpts& o) {
    const MlpModel m = load_model(o.model);
    const VaModule v = export_verilog_a(m, o.module_name, o.t_strike);
    const std::string out = o.out.empty() ? o.module_name + ".va" : o.out;
    auto f = open_out(out);
    f << v.source_text;

    // Golden self-check: the emitted text must reproduce the model.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const auto& nin = m.norm.input;
        const double tq = nin[0].min + u(rng) * (nin[0].max - nin[0].min);
        const double lq = nin[1].min + u(rng) * (nin[1].max - nin[1].min);
        const double vq = nin[2].min + u(rng) * (nin[2].max - nin[2].min);
        const double got = evaluate_exported(v, o.t_strike + tq, lq, vq);
        const double want = predict_current(m, tq, lq, vq);
        worst = std::max(worst, std::abs(got - want));
    }
    if (worst > 1e-9)
        throw std::runtime_error("export self-check failed: max |error| = " +
                                 std::to_string(worst) + " A");
    std::cout << "wrote " << out << " (self-check max |error| = " << worst << " A)\n";
    return 0;
}

struct SimulateOpts {
    std::string model;
    std::string lets = "5,20,40,60,80";
    std::string out_dir = "traces";
    std::string binding = "inst";
    std::string netlist_out;
    double t_strike = 200e-12;
    double t_stop = 1e-9;
    double dt = 1e-12;
    double vdd = 1.8;
    int fanout = 5;
    double load_cap = 5e-15;
    bool use_dexp = false;
    OracleFlags oracle;
};

int cmd_simulate(const SimulateOpts& o) {
    std::optional<MlpModel> model;
    if (!o.use_dexp) {
        if (o.model.empty())
            throw std::runtime_error("simulate: pass --model <file> or --dexp");
        model = load_model(o.model);
    }
    const auto lets = parse_list(o.lets);
    const Netlist base = build_inverter_chain(o.vdd, o.fanout, o.load_cap);
    for (double let : lets) {
        SetSourceDev src;
        src.name = "ISET";
        src.t_strike = o.t_strike;
        src.let_value = let;
        src.vd_fixed = o.vdd;
        src.binding = o.binding == "fixed" ? VdBinding::Fixed : VdBinding::Instantaneous;
        if (model) {
            src.model = model;
            src.model_path = o.model;
        } else {
            src.dexp = o.oracle.p;
        }
        const Netlist n = inject_set(base, "MN1", std::move(src));
        const TransientTrace tr = transient(n, o.t_stop, o.dt);
        std::ostringstream name;
        name << "trace_let" << let << ".csv";
        auto f = open_out(fs::path(o.out_dir) / name.str());
        write_trace_csv(f, n, tr);
        if (!o.netlist_out.empty()) {
            std::ostringstream nname;
            nname << "let" << let << "_" << o.netlist_out;
            auto nf = open_out(fs::path(o.out_dir) / nname.str());
            write_netlist(nf, n);
        }
        std::cout << "LET " << let << ": min(out1) = " << tr.node_min(n.find_node("out1"))
                  << " V, trace -> " << (fs::path(o.out_dir) / name.str()).string() << "\n";
    }
    return 0;
}

struct PipelineOpts {
    std::string out_dir = "pipeline_out";
    GenerateOpts gen;
    TrainOpts train;
    SimulateOpts sim;
    ExportOpts exp;
};

int cmd_pipeline(PipelineOpts o) {
    const fs::path dir(o.out_dir);
    o.gen.out = (dir / "dataset.csv").string();
    cmd_generate(o.gen);

    o.train.data = o.gen.out;
    o.train.model_out = (dir / "model.txt").string();
    o.train.report_out = (dir / "report.csv").string();
    cmd_train(o.train);

    o.exp.model = o.train.model_out;
    o.exp.out = (dir / (o.exp.module_name + ".va")).string();
    cmd_export(o.exp);

    o.sim.model = o.train.model_out;
    o.sim.out_dir = (dir / "traces").string();
    cmd_simulate(o.sim);
    std::cout << "pipeline artifacts in " << o.out_dir << "\n";
    return 0;
}

void attach_train_config(CLI::App* cmd, TrainConfig& cfg) {
    cmd->add_option("--epochs", cfg.max_epochs, "Epoch cap")->capture_default_str();
    cmd->add_option("--seed", cfg.init_seed, "Weight initialization seed")
        ->capture_default_str();
    cmd->add_option("--batch", cfg.batch_size,
                    "LM batch size (0 = full training split)")
        ->capture_default_str();
    cmd->add_option("--mu-init", cfg.mu_init, "Initial LM damping");
    cmd->add_option("--mu-factor", cfg.mu_factor, "LM damping adjustment factor");
    cmd->add_option("--mu-max", cfg.mu_max, "Damping ceiling (stop when exceeded)");
    cmd->add_option("--grad-tol", cfg.grad_tol, "Gradient infinity-norm stop threshold");
    cmd->add_option("--val-patience", cfg.val_patience,
                    "Epochs without validation improvement before stopping");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SET current modeling pipeline: surrogate data generation, "
                 "LM-trained regression networks, Verilog-A export, and a small "
                 "transient inverter-chain experiment"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value config file");

    std::string out_dir_env;
    app.add_option("--out-dir-base", out_dir_env,
                   "Base directory prepended to relative output paths")
        ->envname("SETML_OUT_DIR");

    GenerateOpts gen;
    auto* cg = app.add_subcommand("generate", "Generate a surrogate SET dataset CSV");
    cg->add_option("--out", gen.out, "Output dataset CSV")->capture_default_str();
    cg->add_option("--lets", gen.lets, "Comma-separated LET values (default 4..100 step 4)");
    cg->add_option("--vds", gen.vds, "Comma-separated drain biases (default 0..1.8 step 0.2)");
    cg->add_option("--max-rel-err", gen.max_rel_err,
                   "Adaptive resampling tolerance relative to peak current")
        ->capture_default_str();
    cg->add_option("--t-stop", gen.t_stop, "Waveform end time, s")->capture_default_str();
    cg->add_option("--seed", gen.seed, "Split seed")->capture_default_str();
    gen.oracle.attach(cg);

    TrainOpts tr;
    auto* ct = app.add_subcommand("train", "Train one architecture with Levenberg-Marquardt");
    ct->add_option("--data", tr.data, "Dataset CSV from 'generate'")->required();
    ct->add_option("--arch", tr.arch, "Architecture, e.g. 8x8x1")->capture_default_str();
    ct->add_option("--transfer", tr.transfer, "Hidden transfer: tansig|logsig|elliotsig")
        ->capture_default_str();
    ct->add_option("--out", tr.model_out, "Output model file")->capture_default_str();
    ct->add_option("--report", tr.report_out, "Per-epoch report CSV")->capture_default_str();
    attach_train_config(ct, tr.cfg);

    SweepOpts sw;
    auto* cs = app.add_subcommand("sweep", "Train the architecture/transfer grid");
    cs->add_option("--data", sw.data, "Dataset CSV")->required();
    cs->add_option("--out", sw.out, "Sweep table CSV")->capture_default_str();
    cs->add_option("--arch", sw.arch, "Restrict to one architecture");
    cs->add_option("--transfer", sw.transfer, "Restrict to one hidden transfer");
    attach_train_config(cs, sw.cfg);

    ExportOpts ex;
    auto* ce = app.add_subcommand("export", "Emit the trained model as Verilog-A");
    ce->add_option("--model", ex.model, "Model file from 'train'")->required();
    ce->add_option("--module-name", ex.module_name, "Verilog-A module name")
        ->capture_default_str();
    ce->add_option("--out", ex.out, "Output .va path (default <module_name>.va)");
    ce->add_option("--t-strike", ex.t_strike, "Default strike time parameter, s")
        ->capture_default_str();

    SimulateOpts si;
    auto* cm = app.add_subcommand("simulate",
                                  "Run the struck inverter-chain transient for an LET list");
    cm->add_option("--model", si.model, "Model file driving the SET source");
    cm->add_flag("--dexp", si.use_dexp, "Drive the SET source from the double-exponential "
                                        "surrogate instead of a model file");
    cm->add_option("--lets", si.lets, "Comma-separated LET values")->capture_default_str();
    cm->add_option("--out-dir", si.out_dir, "Trace output directory")->capture_default_str();
    cm->add_option("--binding", si.binding, "SET source bias binding: inst|fixed")
        ->capture_default_str();
    cm->add_option("--netlist-out", si.netlist_out,
                   "Also dump each netlist to <out-dir>/let<L>_<name>");
    cm->add_option("--t-strike", si.t_strike, "Strike time, s")->capture_default_str();
    cm->add_option("--t-stop", si.t_stop, "Transient end time, s")->capture_default_str();
    cm->add_option("--dt", si.dt, "Time step, s")->capture_default_str();
    cm->add_option("--vdd", si.vdd, "Supply voltage, V")->capture_default_str();
    cm->add_option("--fanout", si.fanout, "Second-stage inverter count")->capture_default_str();
    cm->add_option("--load-cap", si.load_cap, "Node capacitance, F")->capture_default_str();
    si.oracle.attach(cm);

    PipelineOpts pl;
    auto* cp = app.add_subcommand("pipeline",
                                  "generate -> train -> export -> simulate in one run");
    cp->add_option("--out-dir", pl.out_dir, "Directory for all artifacts")
        ->capture_default_str();
    cp->add_option("--arch", pl.train.arch, "Architecture to train")->capture_default_str();
    cp->add_option("--transfer", pl.train.transfer, "Hidden transfer")->capture_default_str();
    cp->add_option("--lets", pl.sim.lets, "LET list for the circuit experiment")
        ->capture_default_str();
    cp->add_option("--data-seed", pl.gen.seed, "Dataset split seed")->capture_default_str();
    attach_train_config(cp, pl.train.cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!out_dir_env.empty()) {
            fs::create_directories(out_dir_env);
            fs::current_path(out_dir_env);
        }
        if (cg->parsed()) return cmd_generate(gen);
        if (ct->parsed()) return cmd_train(tr);
        if (cs->parsed()) return cmd_sweep(sw);
        if (ce->parsed()) return cmd_export(ex);
        if (cm->parsed()) return cmd_simulate(si);
        if (cp->parsed()) return cmd_pipeline(pl);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
