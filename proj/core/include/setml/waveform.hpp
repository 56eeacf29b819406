#pragma once

#include <vector>

namespace setml {

struct Sample {
    double t = 0.0;  // s
    double i = 0.0;  // A
};

/// One SET current transient tagged with its strike conditions.
struct Waveform {
    double let_value = 0.0;  // MeV*cm^2/mg
    double vd = 0.0;         // V
    std::vector<Sample> samples;

    /// Throws std::invalid_argument on non-increasing times, let <= 0,
    /// vd < 0, or fewer than 4 samples.
    void validate() const;
};

}  // namespace setml
