#include "setml/norm.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "setml/dataset.hpp"

namespace setml {

double norm_value(double x, const Channel& c) {
    return 2.0 * (x - c.min) / (c.max - c.min) - 1.0;
}

double denorm_value(double xn, const Channel& c) {
    return (xn + 1.0) * (c.max - c.min) / 2.0 + c.min;
}

NormParams fit_norm(std::span<const DataRow> rows) {
    if (rows.empty()) throw std::invalid_argument("fit_norm: no rows");
    constexpr double inf = std::numeric_limits<double>::infinity();
    Channel ch[4];
    for (auto& c : ch) {
        c.min = inf;
        c.max = -inf;
    }
    for (const DataRow& r : rows) {
        const double vals[4] = {r.t, r.let_value, r.vd, r.i_target};
        for (int k = 0; k < 4; ++k) {
            ch[k].min = std::min(ch[k].min, vals[k]);
            ch[k].max = std::max(ch[k].max, vals[k]);
        }
    }
    static const char* names[4] = {"t", "let", "vd", "i"};
    for (int k = 0; k < 4; ++k)
        if (!(ch[k].max > ch[k].min))
            throw std::invalid_argument(std::string("fit_norm: degenerate channel ") + names[k]);
    NormParams p;
    p.input = {ch[0], ch[1], ch[2]};
    p.output = ch[3];
    return p;
}

}  // namespace setml
