#pragma once

#include <map>
#include <string>

#include "setml/mlp.hpp"

namespace setml {

/// A generated Verilog-A current-source module together with the
/// constants embedded in its text.
struct VaModule {
    std::string module_name;
    std::string source_text;
    std::map<std::string, double> symbols;  // parameter name -> value
};

/// Emits the model as a Verilog-A module with parameters
/// (let_val, vd_bias, t_strike). The analog block shifts time by
/// t_strike (clamped at zero), normalizes the inputs, evaluates the
/// layer chain, denormalizes, and contributes the current; the
/// contribution is zero before t_strike. Output is byte-stable for a
/// given model.
VaModule export_verilog_a(const MlpModel& m, const std::string& module_name,
                          double t_strike_default);

/// Evaluates the emitted analog block with the given bindings using a
/// built-in interpreter for the expression subset the generator emits.
/// This is the codegen oracle: the result must match predict_current
/// gated by t >= t_strike.
double evaluate_exported(const VaModule& v, double t, double let_value, double vd);

/// Expression evaluator used by evaluate_exported, exposed for tests.
/// Supports literals, identifiers, + - * /, unary -, comparisons,
/// ?:, and exp/tanh/abs/ln/pow.
double eval_va_expression(const std::string& expr,
                          const std::map<std::string, double>& bindings);

}  // namespace setml
