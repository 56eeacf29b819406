#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "setml/waveform.hpp"

namespace setml {

/// One flattened regression sample.
struct DataRow {
    double t = 0.0;          // s
    double let_value = 0.0;  // MeV*cm^2/mg
    double vd = 0.0;         // V
    double i_target = 0.0;   // A
};

enum class Split { Train, Validation, Test };

const char* split_name(Split s);

/// Flattened samples with a 70/15/15 train/validation/test assignment.
struct SetDataset {
    std::vector<DataRow> rows;
    std::vector<Split> split;  // one tag per row
    std::uint64_t seed = 0;

    std::vector<DataRow> rows_of(Split s) const;
    std::size_t count_of(Split s) const;
};

/// Reads waveforms from CSV with header `let,vd,t,i`, rows grouped by
/// (let, vd). Throws std::runtime_error on malformed rows, duplicate
/// times within a group, or groups with fewer than 4 samples.
std::vector<Waveform> ingest_waveform_csv(std::istream& in);

/// Cubic spline resampling onto `grid`. Grid points must lie
/// within the waveform's time range and be strictly increasing.
Waveform resample_cubic_spline(const Waveform& w, std::span<const double> grid);

/// Resamples so that piecewise-linear reconstruction deviates from the
/// spline by less than max_rel_err * peak current at every interval
/// midpoint. Denser near the peak, sparser in the tails.
Waveform densify_adaptive(const Waveform& w, double max_rel_err);

std::vector<DataRow> flatten(std::span<const Waveform> waveforms);

/// Deterministic seeded 70/15/15 split. Requires at least 10 rows.
SetDataset split_dataset(std::vector<DataRow> rows, std::uint64_t seed);

/// CSV with header `let,vd,t,i,split`.
void write_dataset_csv(std::ostream& out, const SetDataset& ds);
SetDataset read_dataset_csv(std::istream& in);

}  // namespace setml
