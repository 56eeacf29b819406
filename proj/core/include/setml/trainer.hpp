#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "setml/dataset.hpp"
#include "setml/mlp.hpp"

namespace setml {

struct TrainConfig {
    int max_epochs = 1000;
    double mu_init = 1e-3;
    double mu_factor = 10.0;
    double mu_max = 1e10;
    double grad_tol = 1e-7;
    int val_patience = 6;
    std::uint64_t init_seed = 1;
    /// 0 = full-batch LM. Otherwise a fixed seeded uniform subsample of
    /// the training split is used for the Jacobian and step acceptance.
    int batch_size = 0;
};

enum class StopReason { MaxEpochs, MuMax, GradTol, ValPatience };

const char* stop_reason_name(StopReason r);

struct TrainReport {
    std::vector<double> train_mse;  // per epoch, accepted model
    std::vector<double> val_mse;
    std::vector<double> mu_trace;
    double final_train_mse = 0.0;   // full splits, returned (best-val) model
    double final_val_mse = 0.0;
    double final_test_mse = 0.0;
    int epochs = 0;
    StopReason stop_reason = StopReason::MaxEpochs;
};

/// Mean squared error over the named split, in normalized units.
double mse(const MlpModel& m, const SetDataset& data, Split split);

/// Solves (J^T J + mu I) dw = J^T e and returns current parameters + dw.
Eigen::VectorXd lm_step(const MlpModel& m, const Eigen::MatrixXd& jac,
                        const Eigen::VectorXd& residuals, double mu);

/// Levenberg-Marquardt training. `hidden_dims` lists hidden layer widths
/// (the 3-wide input and 1-wide purelin output are implied). Returns the
/// model with the best validation MSE seen.
std::pair<MlpModel, TrainReport> train_lm(const std::vector<int>& hidden_dims,
                                          Transfer hidden_transfer,
                                          const SetDataset& data,
                                          const TrainConfig& cfg);

struct SweepRow {
    std::string arch;      // e.g. "8x8x1"
    std::string transfer;  // hidden transfer name
    double train_mse = 0.0;
    double val_mse = 0.0;
    double test_mse = 0.0;
    int epochs = 0;
    std::string stop_reason;
};

struct SweepEntry {
    std::vector<int> hidden_dims;
    Transfer hidden_transfer;
};

/// Trains one model per entry and tabulates final MSEs.
std::vector<SweepRow> architecture_sweep(const SetDataset& data,
                                         std::span<const SweepEntry> entries,
                                         const TrainConfig& cfg);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_sweep_table(std::ostream& out, std::span<const SweepRow> rows);

std::string arch_string(const std::vector<int>& hidden_dims);

}  // namespace setml
