#include "setml/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace setml {

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr const char* kFormatTag = "setml-mlp v1";

}  // namespace

const char* transfer_name(Transfer t) {
    switch (t) {
        case Transfer::Tansig: return "tansig";
        case Transfer::Logsig: return "logsig";
        case Transfer::Elliotsig: return "elliotsig";
        case Transfer::Purelin: return "purelin";
    }
    return "?";
}

Transfer transfer_from_name(const std::string& name) {
    if (name == "tansig") return Transfer::Tansig;
    if (name == "logsig") return Transfer::Logsig;
    if (name == "elliotsig") return Transfer::Elliotsig;
    if (name == "purelin") return Transfer::Purelin;
    throw std::invalid_argument("unknown transfer function '" + name + "'");
}

double transfer_eval(Transfer tag, double n) {
    switch (tag) {
        case Transfer::Tansig: return 2.0 / (1.0 + std::exp(-2.0 * n)) - 1.0;
        case Transfer::Logsig: return 1.0 / (1.0 + std::exp(-n));
        case Transfer::Elliotsig: return n / (1.0 + std::abs(n));
        case Transfer::Purelin: return n;
    }
    throw std::invalid_argument("unknown transfer tag");
}

double transfer_deriv(Transfer tag, double n) {
    switch (tag) {
        case Transfer::Tansig: {
            const double a = transfer_eval(Transfer::Tansig, n);
            return 1.0 - a * a;
        }
        case Transfer::Logsig: {
            const double a = transfer_eval(Transfer::Logsig, n);
            return a * (1.0 - a);
        }
        case Transfer::Elliotsig: {
            const double d = 1.0 + std::abs(n);
            return 1.0 / (d * d);
        }
        case Transfer::Purelin: return 1.0;
    }
    throw std::invalid_argument("unknown transfer tag");
}

int MlpModel::parameter_count() const {
    int n = 0;
    for (int l = 0; l < layer_count(); ++l)
        n += static_cast<int>(weights[l].size() + biases[l].size());
    return n;
}

Eigen::VectorXd MlpModel::pack() const {
    Eigen::VectorXd out(parameter_count());
    int pos = 0;
    for (int l = 0; l < layer_count(); ++l) {
        const auto& w = weights[l];
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) out[pos++] = w(r, c);
        for (int r = 0; r < biases[l].size(); ++r) out[pos++] = biases[l][r];
    }
    return out;
}

void MlpModel::unpack(const Eigen::VectorXd& params) {
    if (params.size() != parameter_count())
        throw std::invalid_argument("mlp: parameter vector size mismatch");
    int pos = 0;
    for (int l = 0; l < layer_count(); ++l) {
        auto& w = weights[l];
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) w(r, c) = params[pos++];
        for (int r = 0; r < biases[l].size(); ++r) biases[l][r] = params[pos++];
    }
}

void MlpModel::validate() const {
    if (layer_dims.size() < 2)
        throw std::invalid_argument("mlp: needs at least input and output dims");
    if (layer_dims.front() != 3)
        throw std::invalid_argument("mlp: input dimension must be 3 (t, let, vd)");
    if (layer_dims.back() != 1)
        throw std::invalid_argument("mlp: output dimension must be 1");
    const std::size_t L = layer_dims.size() - 1;
    if (weights.size() != L || biases.size() != L || transfer.size() != L)
        throw std::invalid_argument("mlp: layer array size mismatch");
    if (transfer.back() != Transfer::Purelin)
        throw std::invalid_argument("mlp: final layer must be purelin");
    for (std::size_t l = 0; l < L; ++l) {
        if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l])
            throw std::invalid_argument("mlp: weight shape does not chain");
        if (biases[l].size() != layer_dims[l + 1])
            throw std::invalid_argument("mlp: bias shape does not chain");
        if (!weights[l].allFinite() || !biases[l].allFinite())
            throw std::invalid_argument("mlp: non-finite parameters");
    }
}

MlpModel make_mlp(const std::vector<int>& layer_dims,
                  const std::vector<Transfer>& transfer) {
    MlpModel m;
    m.layer_dims = layer_dims;
    m.transfer = transfer;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        m.weights.emplace_back(Eigen::MatrixXd::Zero(layer_dims[l + 1], layer_dims[l]));
        m.biases.emplace_back(Eigen::VectorXd::Zero(layer_dims[l + 1]));
    }
    m.validate();
    return m;
}

double forward(const MlpModel& m, const Eigen::Vector3d& x) {
    Eigen::VectorXd a = x;
    for (int l = 0; l < m.layer_count(); ++l) {
        Eigen::VectorXd n = m.weights[l] * a + m.biases[l];
        a.resize(n.size());
        for (int k = 0; k < n.size(); ++k) a[k] = transfer_eval(m.transfer[l], n[k]);
    }
    if (a.size() != 1) throw std::invalid_argument("mlp: output is not scalar");
    return a[0];
}

double predict_current(const MlpModel& m, double t, double let_value, double vd) {
    Eigen::Vector3d x;
    x[0] = norm_value(t, m.norm.input[0]);
    x[1] = norm_value(let_value, m.norm.input[1]);
    x[2] = norm_value(vd, m.norm.input[2]);
    return denorm_value(forward(m, x), m.norm.output);
}

Eigen::MatrixXd jacobian(const MlpModel& m,
                         const Eigen::Matrix<double, Eigen::Dynamic, 3>& inputs) {
    const int n_samples = static_cast<int>(inputs.rows());
    if (n_samples == 0) throw std::invalid_argument("jacobian: empty batch");
    const int n_params = m.parameter_count();
    const int L = m.layer_count();
    Eigen::MatrixXd jac(n_samples, n_params);

    std::vector<Eigen::VectorXd> act(L + 1), dphi(L);
    for (int k = 0; k < n_samples; ++k) {
        act[0] = inputs.row(k).transpose();
        for (int l = 0; l < L; ++l) {
            Eigen::VectorXd n = m.weights[l] * act[l] + m.biases[l];
            act[l + 1].resize(n.size());
            dphi[l].resize(n.size());
            for (int j = 0; j < n.size(); ++j) {
                act[l + 1][j] = transfer_eval(m.transfer[l], n[j]);
                dphi[l][j] = transfer_deriv(m.transfer[l], n[j]);
            }
        }
        // Reverse sweep: delta[l] = d(output)/d(net input of layer l).
        Eigen::VectorXd delta = dphi[L - 1];  // output layer is 1-wide
        int pos = n_params;
        for (int l = L - 1; l >= 0; --l) {
            const int nb = static_cast<int>(m.biases[l].size());
            const int nw = static_cast<int>(m.weights[l].size());
            pos -= nb + nw;
            int p = pos;
            for (int r = 0; r < m.weights[l].rows(); ++r)
                for (int c = 0; c < m.weights[l].cols(); ++c)
                    jac(k, p++) = delta[r] * act[l][c];
            for (int r = 0; r < nb; ++r) jac(k, p++) = delta[r];
            if (l > 0)
                delta = (m.weights[l].transpose() * delta).cwiseProduct(dphi[l - 1]);
        }
    }
    return jac;
}

void serialize(const MlpModel& m, std::ostream& out) {
    m.validate();
    out << kFormatTag << "\n";
    out << "dims";
    for (int d : m.layer_dims) out << ' ' << d;
    out << "\ntransfer";
    for (Transfer t : m.transfer) out << ' ' << transfer_name(t);
    out << "\nnorm";
    for (const Channel& c : m.norm.input) out << ' ' << fmt17(c.min) << ' ' << fmt17(c.max);
    out << ' ' << fmt17(m.norm.output.min) << ' ' << fmt17(m.norm.output.max);
    out << "\n";
    for (int l = 0; l < m.layer_count(); ++l) {
        out << "layer " << l << "\n";
        const auto& w = m.weights[l];
        for (int r = 0; r < w.rows(); ++r) {
            for (int c = 0; c < w.cols(); ++c) out << (c ? " " : "") << fmt17(w(r, c));
            out << "\n";
        }
        for (int r = 0; r < m.biases[l].size(); ++r)
            out << (r ? " " : "") << fmt17(m.biases[l][r]);
        out << "\n";
    }
    out << "end\n";
}

MlpModel deserialize(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kFormatTag)
        throw std::runtime_error("mlp: unknown model format/version");

    auto next_line = [&](const char* what) {
        std::string s;
        if (!std::getline(in, s))
            throw std::runtime_error(std::string("mlp: truncated model file at ") + what);
        return s;
    };

    MlpModel m;
    {
        std::istringstream ls(next_line("dims"));
        std::string tag;
        ls >> tag;
        if (tag != "dims") throw std::runtime_error("mlp: expected dims line");
        int d;
        while (ls >> d) m.layer_dims.push_back(d);
    }
    {
        std::istringstream ls(next_line("transfer"));
        std::string tag, name;
        ls >> tag;
        if (tag != "transfer") throw std::runtime_error("mlp: expected transfer line");
        while (ls >> name) m.transfer.push_back(transfer_from_name(name));
    }
    {
        std::istringstream ls(next_line("norm"));
        std::string tag;
        ls >> tag;
        if (tag != "norm") throw std::runtime_error("mlp: expected norm line");
        for (Channel* c : {&m.norm.input[0], &m.norm.input[1], &m.norm.input[2], &m.norm.output})
            if (!(ls >> c->min >> c->max))
                throw std::runtime_error("mlp: truncated norm line");
    }
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        {
            std::istringstream ls(next_line("layer header"));
            std::string tag;
            int idx = -1;
            ls >> tag >> idx;
            if (tag != "layer" || idx != static_cast<int>(l))
                throw std::runtime_error("mlp: expected layer header");
        }
        Eigen::MatrixXd w(m.layer_dims[l + 1], m.layer_dims[l]);
        for (int r = 0; r < w.rows(); ++r) {
            std::istringstream ls(next_line("weight row"));
            for (int c = 0; c < w.cols(); ++c)
                if (!(ls >> w(r, c))) throw std::runtime_error("mlp: truncated weight row");
        }
        Eigen::VectorXd b(m.layer_dims[l + 1]);
        {
            std::istringstream ls(next_line("bias row"));
            for (int r = 0; r < b.size(); ++r)
                if (!(ls >> b[r])) throw std::runtime_error("mlp: truncated bias row");
        }
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    if (next_line("end") != "end") throw std::runtime_error("mlp: missing end marker");
    m.validate();
    return m;
}

void save_model(const MlpModel& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open model file for writing: " + path);
    serialize(m, f);
}

MlpModel load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open model file: " + path);
    return deserialize(f);
}

}  // namespace setml
