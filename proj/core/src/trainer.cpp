#include "setml/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace setml {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

Eigen::Matrix<double, Eigen::Dynamic, 3> normalized_inputs(
    const MlpModel& m, std::span<const DataRow> rows) {
    Eigen::Matrix<double, Eigen::Dynamic, 3> x(rows.size(), 3);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        x(static_cast<int>(k), 0) = norm_value(rows[k].t, m.norm.input[0]);
        x(static_cast<int>(k), 1) = norm_value(rows[k].let_value, m.norm.input[1]);
        x(static_cast<int>(k), 2) = norm_value(rows[k].vd, m.norm.input[2]);
    }
    return x;
}

Eigen::VectorXd normalized_targets(const MlpModel& m, std::span<const DataRow> rows) {
    Eigen::VectorXd y(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k)
        y[static_cast<int>(k)] = norm_value(rows[k].i_target, m.norm.output);
    return y;
}

Eigen::VectorXd predictions(const MlpModel& m,
                            const Eigen::Matrix<double, Eigen::Dynamic, 3>& x) {
    Eigen::VectorXd y(x.rows());
    for (int k = 0; k < x.rows(); ++k)
        y[k] = forward(m, Eigen::Vector3d(x.row(k).transpose()));
    return y;
}

double batch_mse(const MlpModel& m, const Eigen::Matrix<double, Eigen::Dynamic, 3>& x,
                 const Eigen::VectorXd& y) {
    const Eigen::VectorXd e = y - predictions(m, x);
    return e.squaredNorm() / static_cast<double>(e.size());
}

}  // namespace

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::MaxEpochs: return "max_epochs";
        case StopReason::MuMax: return "mu_max";
        case StopReason::GradTol: return "grad_tol";
        case StopReason::ValPatience: return "val_patience";
    }
    return "?";
}

double mse(const MlpModel& m, const SetDataset& data, Split split) {
    const auto rows = data.rows_of(split);
    if (rows.empty()) throw std::invalid_argument("mse: empty split");
    const auto x = normalized_inputs(m, rows);
    const auto y = normalized_targets(m, rows);
    return batch_mse(m, x, y);
}

Eigen::VectorXd lm_step(const MlpModel& m, const Eigen::MatrixXd& jac,
                        const Eigen::VectorXd& residuals, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("lm_step: mu must be positive");
    if (jac.rows() != residuals.size())
        throw std::invalid_argument("lm_step: Jacobian/residual size mismatch");
    const int n = static_cast<int>(jac.cols());
    Eigen::MatrixXd a = jac.transpose() * jac;
    a.diagonal().array() += mu;
    const Eigen::VectorXd g = jac.transpose() * residuals;
    Eigen::LDLT<Eigen::MatrixXd> solver(a);
    const Eigen::VectorXd dw = solver.solve(g);
    if (solver.info() != Eigen::Success || !dw.allFinite())
        throw std::runtime_error("lm_step: linear solve failed (NaN contamination?)");
    (void)n;
    return m.pack() + dw;
}

std::pair<MlpModel, TrainReport> train_lm(const std::vector<int>& hidden_dims,
                                          Transfer hidden_transfer,
                                          const SetDataset& data,
                                          const TrainConfig& cfg) {
    if (cfg.max_epochs < 1 || !(cfg.mu_init > 0.0) || !(cfg.mu_factor > 1.0))
        throw std::invalid_argument("train_lm: invalid config");
    const auto train_rows = data.rows_of(Split::Train);
    const auto val_rows = data.rows_of(Split::Validation);
    const auto test_rows = data.rows_of(Split::Test);
    if (train_rows.empty() || val_rows.empty() || test_rows.empty())
        throw std::invalid_argument("train_lm: dataset must carry all three splits");

    std::vector<int> dims{3};
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(1);
    std::vector<Transfer> transfer(hidden_dims.size(), hidden_transfer);
    transfer.push_back(Transfer::Purelin);
    MlpModel m = make_mlp(dims, transfer);
    m.norm = fit_norm(train_rows);

    std::mt19937_64 rng(cfg.init_seed);
    std::uniform_real_distribution<double> init(-0.5, 0.5);
    Eigen::VectorXd params(m.parameter_count());
    for (int k = 0; k < params.size(); ++k) params[k] = init(rng);
    m.unpack(params);

    // LM batch: full training split, or a fixed seeded subsample.
    std::vector<DataRow> batch_rows;
    if (cfg.batch_size > 0 && static_cast<std::size_t>(cfg.batch_size) < train_rows.size()) {
        std::vector<std::size_t> idx(train_rows.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(static_cast<std::size_t>(cfg.batch_size));
        std::sort(idx.begin(), idx.end());
        for (std::size_t k : idx) batch_rows.push_back(train_rows[k]);
    } else {
        batch_rows = train_rows;
    }

    const auto x_batch = normalized_inputs(m, batch_rows);
    const auto y_batch = normalized_targets(m, batch_rows);
    const auto x_val = normalized_inputs(m, val_rows);
    const auto y_val = normalized_targets(m, val_rows);

    TrainReport report;
    double mu = cfg.mu_init;
    double current_mse = batch_mse(m, x_batch, y_batch);

    MlpModel best = m;
    double best_val = batch_mse(m, x_val, y_val);
    int epochs_since_best = 0;
    StopReason reason = StopReason::MaxEpochs;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const Eigen::MatrixXd jac = jacobian(m, x_batch);
        const Eigen::VectorXd e = y_batch - predictions(m, x_batch);

        if ((jac.transpose() * e).lpNorm<Eigen::Infinity>() < cfg.grad_tol) {
            reason = StopReason::GradTol;
            break;
        }

        bool accepted = false;
        while (true) {
            const Eigen::VectorXd candidate = lm_step(m, jac, e, mu);
            MlpModel trial = m;
            trial.unpack(candidate);
            const double trial_mse = batch_mse(trial, x_batch, y_batch);
            if (trial_mse < current_mse && std::isfinite(trial_mse)) {
                m = std::move(trial);
                current_mse = trial_mse;
                mu = std::max(mu / cfg.mu_factor, 1e-20);
                accepted = true;
                break;
            }
            mu *= cfg.mu_factor;
            if (mu > cfg.mu_max) break;
        }
        if (!accepted) {
            reason = StopReason::MuMax;
            break;
        }

        const double val = batch_mse(m, x_val, y_val);
        report.train_mse.push_back(current_mse);
        report.val_mse.push_back(val);
        report.mu_trace.push_back(mu);
        ++report.epochs;

        if (val < best_val) {
            best_val = val;
            best = m;
            epochs_since_best = 0;
        } else if (++epochs_since_best > cfg.val_patience) {
            reason = StopReason::ValPatience;
            break;
        }
    }

    report.stop_reason = reason;
    report.final_train_mse = mse(best, data, Split::Train);
    report.final_val_mse = mse(best, data, Split::Validation);
    report.final_test_mse = mse(best, data, Split::Test);
    return {std::move(best), std::move(report)};
}

std::string arch_string(const std::vector<int>& hidden_dims) {
    std::string s;
    for (int d : hidden_dims) {
        s += std::to_string(d);
        s += 'x';
    }
    s += '1';
    return s;
}

std::vector<SweepRow> architecture_sweep(const SetDataset& data,
                                         std::span<const SweepEntry> entries,
                                         const TrainConfig& cfg) {
    std::vector<SweepRow> rows;
    rows.reserve(entries.size());
    for (const SweepEntry& e : entries) {
        auto [model, rep] = train_lm(e.hidden_dims, e.hidden_transfer, data, cfg);
        rows.push_back({arch_string(e.hidden_dims), transfer_name(e.hidden_transfer),
                        rep.final_train_mse, rep.final_val_mse, rep.final_test_mse,
                        rep.epochs, stop_reason_name(rep.stop_reason)});
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "arch,transfer,train_mse,val_mse,test_mse,epochs,stop_reason\n";
    for (const SweepRow& r : rows)
        out << r.arch << ',' << r.transfer << ',' << fmt(r.train_mse) << ','
            << fmt(r.val_mse) << ',' << fmt(r.test_mse) << ',' << r.epochs << ','
            << r.stop_reason << '\n';
}

void write_sweep_table(std::ostream& out, std::span<const SweepRow> rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %-10s %-12s %-12s %-12s %-7s %s\n", "arch",
                  "transfer", "train_mse", "val_mse", "test_mse", "epochs", "stop");
    out << buf;
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%-12s %-10s %-12.4e %-12.4e %-12.4e %-7d %s\n",
                      r.arch.c_str(), r.transfer.c_str(), r.train_mse, r.val_mse,
                      r.test_mse, r.epochs, r.stop_reason.c_str());
        out << buf;
    }
}

}  // namespace setml
