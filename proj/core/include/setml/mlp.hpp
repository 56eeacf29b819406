#pragma once

#include <Eigen/Dense>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "setml/norm.hpp"

namespace setml {

enum class Transfer { Tansig, Logsig, Elliotsig, Purelin };

const char* transfer_name(Transfer t);
Transfer transfer_from_name(const std::string& name);

double transfer_eval(Transfer tag, double n);
double transfer_deriv(Transfer tag, double n);

/// Fully connected feedforward regression network with fixed input
/// (time, LET, vd) and scalar current output. Immutable in use; training
/// produces new instances via pack/unpack.
struct MlpModel {
    std::vector<int> layer_dims;             // {3, h1, ..., 1}
    std::vector<Eigen::MatrixXd> weights;    // per layer, out x in
    std::vector<Eigen::VectorXd> biases;     // per layer
    std::vector<Transfer> transfer;          // per layer; last is Purelin
    NormParams norm;

    int layer_count() const { return static_cast<int>(weights.size()); }
    int parameter_count() const;

    /// Layer by layer, weights row-major then biases. This order is the
    /// contract for the training Jacobian and for serialization.
    Eigen::VectorXd pack() const;
    void unpack(const Eigen::VectorXd& params);

    /// Throws std::invalid_argument on shape mismatches, a non-purelin
    /// final layer, wrong input/output width, or non-finite weights.
    void validate() const;
};

MlpModel make_mlp(const std::vector<int>& layer_dims,
                  const std::vector<Transfer>& transfer);

/// Forward pass in normalized space.
double forward(const MlpModel& m, const Eigen::Vector3d& x);

/// Normalize inputs, forward, denormalize the output to amperes.
double predict_current(const MlpModel& m, double t, double let_value, double vd);

/// J[k][p] = d(output for sample k)/d(parameter p), reverse accumulation.
/// Rows of `inputs` are normalized 3-vectors. Column order matches pack().
Eigen::MatrixXd jacobian(const MlpModel& m,
                         const Eigen::Matrix<double, Eigen::Dynamic, 3>& inputs);

/// Versioned text format; round-trips models bit-exactly.
void serialize(const MlpModel& m, std::ostream& out);
MlpModel deserialize(std::istream& in);

void save_model(const MlpModel& m, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace setml
