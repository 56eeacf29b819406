#pragma once

#include <span>
#include <vector>

namespace setml {

/// Cubic spline with not-a-knot end conditions through strictly
/// increasing knots; reproduces polynomials up to degree 3 exactly.
/// Evaluation outside [x.front(), x.back()] throws; there is no
/// extrapolation.
class CubicSpline {
public:
    CubicSpline(std::span<const double> x, std::span<const double> y);

    double operator()(double x) const;

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;  // second derivatives at knots
};

}  // namespace setml
