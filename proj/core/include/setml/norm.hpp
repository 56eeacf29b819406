#pragma once

#include <array>
#include <span>

namespace setml {

struct DataRow;

/// Min/max of one normalized channel.
struct Channel {
    double min = 0.0;
    double max = 0.0;
};

/// Min-max normalization parameters mapping each channel to [-1, +1].
/// Input channel order: time, LET, drain bias. Output: drain current.
struct NormParams {
    std::array<Channel, 3> input{};
    Channel output{};
};

/// x -> 2(x - min)/(max - min) - 1
double norm_value(double x, const Channel& c);
/// Inverse of norm_value.
double denorm_value(double xn, const Channel& c);

/// Fits per-channel extrema over the given rows (training rows only).
/// Throws std::invalid_argument if any channel is degenerate (max == min)
/// or the row set is empty.
NormParams fit_norm(std::span<const DataRow> rows);

}  // namespace setml
