#include "setml/vacodegen.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace setml {

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string lit(double v) { return "(" + fmt17(v) + ")"; }

std::string apply_transfer(Transfer tag, const std::string& var) {
    switch (tag) {
        case Transfer::Tansig: return "tanh(" + var + ")";
        case Transfer::Logsig: return "1.0 / (1.0 + exp(-" + var + "))";
        case Transfer::Elliotsig: return var + " / (1.0 + abs(" + var + "))";
        case Transfer::Purelin: return var;
    }
    throw std::invalid_argument("codegen: unsupported transfer tag");
}

// ---------------------------------------------------------------------------
// Expression evaluator for the subset the generator emits: literals,
// identifiers, + - * /, unary -, comparisons, ?:, exp/tanh/abs/ln/pow.
// ---------------------------------------------------------------------------

class ExprParser {
public:
    ExprParser(const std::string& src, const std::map<std::string, double>& vars)
        : src_(src), vars_(vars) {}

    double parse() {
        double v = ternary();
        skip_ws();
        if (pos_ != src_.size())
            throw std::runtime_error("va-expr: trailing input at '" + src_.substr(pos_) + "'");
        return v;
    }

private:
    double ternary() {
        double cond = comparison();
        skip_ws();
        if (peek() == '?') {
            ++pos_;
            double a = ternary();
            skip_ws();
            if (peek() != ':') throw std::runtime_error("va-expr: expected ':'");
            ++pos_;
            double b = ternary();
            return cond != 0.0 ? a : b;
        }
        return cond;
    }

    double comparison() {
        double lhs = additive();
        skip_ws();
        if (peek() == '<' || peek() == '>') {
            const char op = src_[pos_++];
            bool eq = peek() == '=';
            if (eq) ++pos_;
            const double rhs = additive();
            bool r = op == '<' ? (eq ? lhs <= rhs : lhs < rhs)
                               : (eq ? lhs >= rhs : lhs > rhs);
            return r ? 1.0 : 0.0;
        }
        return lhs;
    }

    double additive() {
        double v = multiplicative();
        while (true) {
            skip_ws();
            if (peek() == '+') {
                ++pos_;
                v += multiplicative();
            } else if (peek() == '-') {
                ++pos_;
                v -= multiplicative();
            } else {
                return v;
            }
        }
    }

    double multiplicative() {
        double v = unary();
        while (true) {
            skip_ws();
            if (peek() == '*') {
                ++pos_;
                v *= unary();
            } else if (peek() == '/') {
                ++pos_;
                v /= unary();
            } else {
                return v;
            }
        }
    }

    double unary() {
        skip_ws();
        if (peek() == '-') {
            ++pos_;
            return -unary();
        }
        return primary();
    }

    double primary() {
        skip_ws();
        const char c = peek();
        if (c == '(') {
            ++pos_;
            double v = ternary();
            skip_ws();
            if (peek() != ')') throw std::runtime_error("va-expr: expected ')'");
            ++pos_;
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$')
            return identifier();
        throw std::runtime_error("va-expr: unexpected character '" + std::string(1, c) + "'");
    }

    double number() {
        std::size_t end = pos_;
        while (end < src_.size()) {
            const char c = src_[end];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                ++end;
            } else if ((c == 'e' || c == 'E') && end + 1 < src_.size()) {
                const char n = src_[end + 1];
                if (std::isdigit(static_cast<unsigned char>(n)) || n == '+' || n == '-')
                    end += 2;
                else
                    break;
            } else {
                break;
            }
        }
        const double v = std::stod(src_.substr(pos_, end - pos_));
        pos_ = end;
        return v;
    }

    double identifier() {
        std::size_t end = pos_;
        if (src_[end] == '$') ++end;
        while (end < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
            ++end;
        const std::string name = src_.substr(pos_, end - pos_);
        pos_ = end;
        skip_ws();
        if (peek() == '(') {
            ++pos_;
            std::vector<double> args;
            skip_ws();
            if (peek() != ')') {
                args.push_back(ternary());
                skip_ws();
                while (peek() == ',') {
                    ++pos_;
                    args.push_back(ternary());
                    skip_ws();
                }
            }
            if (peek() != ')') throw std::runtime_error("va-expr: expected ')' after args");
            ++pos_;
            return call(name, args);
        }
        auto it = vars_.find(name);
        if (it == vars_.end())
            throw std::runtime_error("va-expr: unbound identifier '" + name + "'");
        return it->second;
    }

    double call(const std::string& name, const std::vector<double>& args) {
        auto need = [&](std::size_t n) {
            if (args.size() != n)
                throw std::runtime_error("va-expr: bad arity for " + name);
        };
        if (name == "exp") { need(1); return std::exp(args[0]); }
        if (name == "tanh") { need(1); return std::tanh(args[0]); }
        if (name == "abs") { need(1); return std::abs(args[0]); }
        if (name == "ln") { need(1); return std::log(args[0]); }
        if (name == "pow") { need(2); return std::pow(args[0], args[1]); }
        throw std::runtime_error("va-expr: unknown function '" + name + "'");
    }

    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
    void skip_ws() {
        while (pos_ < src_.size() &&
               std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    const std::string& src_;
    const std::map<std::string, double>& vars_;
    std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

}  // namespace

double eval_va_expression(const std::string& expr,
                          const std::map<std::string, double>& bindings) {
    return ExprParser(expr, bindings).parse();
}

VaModule export_verilog_a(const MlpModel& m, const std::string& module_name,
                          double t_strike_default) {
    m.validate();
    if (module_name.empty() ||
        !(std::isalpha(static_cast<unsigned char>(module_name[0])) || module_name[0] == '_'))
        throw std::invalid_argument("codegen: module name must be a legal identifier");
    for (char c : module_name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            throw std::invalid_argument("codegen: module name must be a legal identifier");

    VaModule v;
    v.module_name = module_name;
    std::ostringstream out;

    // Normalization expressed as one scale and one offset per channel so
    // each embedded constant occurs exactly once.
    const auto& nin = m.norm.input;
    const double tscale = 2.0 / (nin[0].max - nin[0].min);
    const double lscale = 2.0 / (nin[1].max - nin[1].min);
    const double vscale = 2.0 / (nin[2].max - nin[2].min);
    const double yscale = (m.norm.output.max - m.norm.output.min) / 2.0;
    const double yoffset = (m.norm.output.max + m.norm.output.min) / 2.0;

    out << "// " << module_name << ".va -- SET current source generated from a\n";
    out << "// trained feedforward regression model. Do not edit by hand.\n";
    out << "`include \"constants.vams\"\n";
    out << "`include \"disciplines.vams\"\n\n";
    out << "module " << module_name << "(p, n);\n";
    out << "  inout p, n;\n";
    out << "  electrical p, n;\n";
    out << "  parameter real let_val = 40.0;\n";
    out << "  parameter real vd_bias = 0.59999999999999998;\n";
    out << "  parameter real t_strike = " << fmt17(t_strike_default) << ";\n";
    out << "  real t_rel;\n";
    out << "  real x0, x1, x2;\n";
    const int L = m.layer_count();
    for (int l = 0; l < L - 1; ++l) {
        out << "  real";
        for (int j = 0; j < m.layer_dims[l + 1]; ++j)
            out << (j ? ", " : " ") << "n" << (l + 1) << "_" << j
                << ", a" << (l + 1) << "_" << j;
        out << ";\n";
    }
    out << "  real y_norm;\n";
    out << "  real i_set;\n\n";
    out << "  analog begin\n";
    out << "    t_rel = (($abstime - t_strike) < 0.0) ? 0.0 : ($abstime - t_strike);\n";
    out << "    x0 = (t_rel - " << lit(nin[0].min) << ") * " << lit(tscale) << " - 1.0;\n";
    out << "    x1 = (let_val - " << lit(nin[1].min) << ") * " << lit(lscale) << " - 1.0;\n";
    out << "    x2 = (vd_bias - " << lit(nin[2].min) << ") * " << lit(vscale) << " - 1.0;\n";

    auto input_var = [&](int layer, int j) -> std::string {
        if (layer == 0) return "x" + std::to_string(j);
        return "a" + std::to_string(layer) + "_" + std::to_string(j);
    };
    for (int l = 0; l < L; ++l) {
        const bool last = (l == L - 1);
        const auto& w = m.weights[l];
        for (int r = 0; r < w.rows(); ++r) {
            const std::string net =
                last ? "y_norm" : "n" + std::to_string(l + 1) + "_" + std::to_string(r);
            out << "    " << net << " = ";
            for (int c = 0; c < w.cols(); ++c)
                out << (c ? " + " : "") << lit(w(r, c)) << "*" << input_var(l, c);
            out << " + " << lit(m.biases[l][r]) << ";\n";
            if (!last) {
                const std::string act =
                    "a" + std::to_string(l + 1) + "_" + std::to_string(r);
                out << "    " << act << " = " << apply_transfer(m.transfer[l], net)
                    << ";\n";
            }
        }
    }
    out << "    i_set = ($abstime < t_strike) ? 0.0 : (y_norm * " << lit(yscale)
        << " + " << lit(yoffset) << ");\n";
    out << "    I(p,n) <+ i_set;\n";
    out << "  end\n";
    out << "endmodule\n";

    v.source_text = out.str();
    v.symbols["t_strike"] = t_strike_default;
    v.symbols["t_min"] = nin[0].min;
    v.symbols["t_scale"] = tscale;
    v.symbols["let_min"] = nin[1].min;
    v.symbols["let_scale"] = lscale;
    v.symbols["vd_min"] = nin[2].min;
    v.symbols["vd_scale"] = vscale;
    v.symbols["i_scale"] = yscale;
    v.symbols["i_offset"] = yoffset;
    return v;
}

double evaluate_exported(const VaModule& v, double t, double let_value, double vd) {
    std::map<std::string, double> vars;
    std::istringstream in(v.source_text);
    std::string raw;

    // First pass: parameter defaults.
    while (std::getline(in, raw)) {
        const std::string line = trim(raw);
        if (line.rfind("parameter real ", 0) == 0) {
            const std::size_t eq = line.find('=');
            const std::size_t semi = line.rfind(';');
            if (eq == std::string::npos || semi == std::string::npos || semi < eq)
                throw std::runtime_error("va-eval: malformed parameter line");
            const std::string name = trim(line.substr(15, eq - 15));
            vars[name] = eval_va_expression(line.substr(eq + 1, semi - eq - 1), vars);
        }
    }
    vars["$abstime"] = t;
    vars["let_val"] = let_value;
    vars["vd_bias"] = vd;

    // Second pass: execute the analog block.
    in.clear();
    in.seekg(0);
    bool in_analog = false;
    bool have_result = false;
    double result = 0.0;
    while (std::getline(in, raw)) {
        const std::string line = trim(raw);
        if (line == "analog begin") {
            in_analog = true;
            continue;
        }
        if (!in_analog) continue;
        if (line == "end") break;
        if (line.empty()) continue;
        const std::size_t semi = line.rfind(';');
        if (semi == std::string::npos)
            throw std::runtime_error("va-eval: statement without ';': " + line);
        const std::string stmt = line.substr(0, semi);
        if (stmt.rfind("I(p,n) <+", 0) == 0) {
            result = eval_va_expression(stmt.substr(9), vars);
            have_result = true;
            continue;
        }
        const std::size_t eq = stmt.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("va-eval: unparseable statement: " + line);
        const std::string name = trim(stmt.substr(0, eq));
        vars[name] = eval_va_expression(stmt.substr(eq + 1), vars);
    }
    if (!have_result)
        throw std::runtime_error("va-eval: module has no current contribution");
    return result;
}

}  // namespace setml
