#include "setml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "setml/spline.hpp"

namespace setml {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, int line_no) {
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e)
        throw std::runtime_error("csv: malformed numeric field '" + s + "' at line " +
                                 std::to_string(line_no));
    return v;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Validation: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

std::vector<DataRow> SetDataset::rows_of(Split s) const {
    std::vector<DataRow> out;
    for (std::size_t k = 0; k < rows.size(); ++k)
        if (split[k] == s) out.push_back(rows[k]);
    return out;
}

std::size_t SetDataset::count_of(Split s) const {
    return static_cast<std::size_t>(std::count(split.begin(), split.end(), s));
}

std::vector<Waveform> ingest_waveform_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("csv: empty stream");
    {
        auto fields = split_fields(line);
        if (fields.size() != 4 || fields[0] != "let" || fields[1] != "vd" ||
            fields[2] != "t" || fields[3] != "i")
            throw std::runtime_error("csv: expected header 'let,vd,t,i'");
    }
    // Group rows by (let, vd), preserving first-seen order.
    std::vector<Waveform> out;
    std::map<std::pair<double, double>, std::size_t> index;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_fields(line);
        if (fields.size() != 4)
            throw std::runtime_error("csv: expected 4 fields at line " + std::to_string(line_no));
        const double let = parse_number(fields[0], line_no);
        const double vd = parse_number(fields[1], line_no);
        const double t = parse_number(fields[2], line_no);
        const double i = parse_number(fields[3], line_no);
        auto key = std::make_pair(let, vd);
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(key, out.size());
            out.push_back(Waveform{let, vd, {}});
            it = index.find(key);
        }
        out[it->second].samples.push_back({t, i});
    }
    for (Waveform& w : out) {
        std::sort(w.samples.begin(), w.samples.end(),
                  [](const Sample& a, const Sample& b) { return a.t < b.t; });
        for (std::size_t k = 1; k < w.samples.size(); ++k)
            if (w.samples[k].t == w.samples[k - 1].t)
                throw std::runtime_error("csv: duplicate time within (let,vd) group");
        if (w.samples.size() < 4)
            throw std::runtime_error("csv: fewer than 4 samples in a (let,vd) group");
        w.validate();
    }
    return out;
}

Waveform resample_cubic_spline(const Waveform& w, std::span<const double> grid) {
    w.validate();
    if (grid.empty())
        throw std::invalid_argument("resample: empty grid");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1]))
            throw std::invalid_argument("resample: grid must be strictly increasing");
    const double t_first = w.samples.front().t;
    const double t_last = w.samples.back().t;
    if (grid.front() < t_first || grid.back() > t_last)
        throw std::out_of_range("resample: grid point outside data range");

    std::vector<double> xs(w.samples.size()), ys(w.samples.size());
    for (std::size_t k = 0; k < w.samples.size(); ++k) {
        xs[k] = w.samples[k].t;
        ys[k] = w.samples[k].i;
    }
    CubicSpline s(xs, ys);
    Waveform out{w.let_value, w.vd, {}};
    out.samples.reserve(grid.size());
    for (double t : grid) out.samples.push_back({t, s(t)});
    return out;
}

Waveform densify_adaptive(const Waveform& w, double max_rel_err) {
    w.validate();
    if (!(max_rel_err > 0.0 && max_rel_err < 1.0))
        throw std::invalid_argument("densify: max_rel_err must be in (0, 1)");

    std::vector<double> xs(w.samples.size()), ys(w.samples.size());
    for (std::size_t k = 0; k < w.samples.size(); ++k) {
        xs[k] = w.samples[k].t;
        ys[k] = w.samples[k].i;
    }
    CubicSpline s(xs, ys);

    double peak = 0.0;
    for (double y : ys) peak = std::max(peak, std::abs(y));
    if (peak == 0.0) peak = 1.0;
    const double tol = max_rel_err * peak;

    // Recursive interval bisection: subdivide while the midpoint of the
    // linear chord misses the spline by more than tol.
    std::vector<double> grid{xs.front()};
    const double t_span = xs.back() - xs.front();
    const double min_h = t_span * 1e-6;
    std::function<void(double, double, int)> refine = [&](double a, double b, int depth) {
        const double mid = 0.5 * (a + b);
        const double lin = 0.5 * (s(a) + s(b));
        if (depth < 24 && (b - a) > min_h && std::abs(lin - s(mid)) >= tol) {
            refine(a, mid, depth + 1);
            grid.push_back(mid);
            refine(mid, b, depth + 1);
        }
    };
    // Always keep one interior point so even a constant waveform has
    // a midpoint to check against.
    const double mid0 = 0.5 * (xs.front() + xs.back());
    refine(xs.front(), mid0, 1);
    grid.push_back(mid0);
    refine(mid0, xs.back(), 1);
    grid.push_back(xs.back());
    return resample_cubic_spline(w, grid);
}

std::vector<DataRow> flatten(std::span<const Waveform> waveforms) {
    std::vector<DataRow> rows;
    for (const Waveform& w : waveforms)
        for (const Sample& smp : w.samples)
            rows.push_back({smp.t, w.let_value, w.vd, smp.i});
    return rows;
}

SetDataset split_dataset(std::vector<DataRow> rows, std::uint64_t seed) {
    const std::size_t n = rows.size();
    if (n < 10) throw std::invalid_argument("split: needs at least 10 rows");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    const auto n_train = static_cast<std::size_t>(std::llround(0.70 * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(0.15 * static_cast<double>(n)));

    SetDataset ds;
    ds.rows = std::move(rows);
    ds.split.assign(n, Split::Test);
    ds.seed = seed;
    for (std::size_t k = 0; k < n_train; ++k) ds.split[perm[k]] = Split::Train;
    for (std::size_t k = n_train; k < n_train + n_val; ++k) ds.split[perm[k]] = Split::Validation;
    return ds;
}

void write_dataset_csv(std::ostream& out, const SetDataset& ds) {
    out << "let,vd,t,i,split\n";
    for (std::size_t k = 0; k < ds.rows.size(); ++k) {
        const DataRow& r = ds.rows[k];
        out << format_double(r.let_value) << ',' << format_double(r.vd) << ','
            << format_double(r.t) << ',' << format_double(r.i_target) << ','
            << split_name(ds.split[k]) << '\n';
    }
}

SetDataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("dataset csv: empty stream");
    {
        auto fields = split_fields(line);
        if (fields.size() != 5 || fields[0] != "let" || fields[1] != "vd" ||
            fields[2] != "t" || fields[3] != "i" || fields[4] != "split")
            throw std::runtime_error("dataset csv: expected header 'let,vd,t,i,split'");
    }
    SetDataset ds;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_fields(line);
        if (fields.size() != 5)
            throw std::runtime_error("dataset csv: expected 5 fields at line " +
                                     std::to_string(line_no));
        DataRow r;
        r.let_value = parse_number(fields[0], line_no);
        r.vd = parse_number(fields[1], line_no);
        r.t = parse_number(fields[2], line_no);
        r.i_target = parse_number(fields[3], line_no);
        ds.rows.push_back(r);
        if (fields[4] == "train") ds.split.push_back(Split::Train);
        else if (fields[4] == "val") ds.split.push_back(Split::Validation);
        else if (fields[4] == "test") ds.split.push_back(Split::Test);
        else
            throw std::runtime_error("dataset csv: bad split tag at line " +
                                     std::to_string(line_no));
    }
    return ds;
}

}  // namespace setml
