#include "setml/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace setml {

// Not-a-knot cubic spline: third-derivative continuity at the first and
// last interior knots. Reproduces polynomials up to degree 3 exactly,
// which natural end conditions cannot.
CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    const std::size_t n = x_.size();
    if (n < 4) throw std::invalid_argument("spline: needs at least 4 knots");
    if (y_.size() != n) throw std::invalid_argument("spline: x/y size mismatch");
    for (std::size_t k = 1; k < n; ++k)
        if (!(x_[k] > x_[k - 1]))
            throw std::invalid_argument("spline: knots must be strictly increasing");

    // Interior second-derivative equations for m_1 .. m_{n-2}:
    //   h_{k-1} m_{k-1} + 2(h_{k-1}+h_k) m_k + h_k m_{k+1} = rhs_k.
    // The end values are eliminated with the not-a-knot relations
    //   m_0     = (1 + h_0/h_1) m_1 - (h_0/h_1) m_2
    //   m_{n-1} = (1 + h_{n-2}/h_{n-3}) m_{n-2} - (h_{n-2}/h_{n-3}) m_{n-3}.
    const std::size_t ni = n - 2;  // interior unknowns
    std::vector<double> lower(ni, 0.0), diag(ni, 0.0), upper(ni, 0.0), rhs(ni, 0.0);
    auto h = [&](std::size_t k) { return x_[k + 1] - x_[k]; };
    for (std::size_t k = 1; k <= ni; ++k) {
        const std::size_t j = k - 1;  // row index
        lower[j] = h(k - 1);
        diag[j] = 2.0 * (h(k - 1) + h(k));
        upper[j] = h(k);
        rhs[j] = 6.0 * ((y_[k + 1] - y_[k]) / h(k) - (y_[k] - y_[k - 1]) / h(k - 1));
    }
    {
        const double r0 = h(0) / h(1);
        diag[0] += lower[0] * (1.0 + r0);
        upper[0] -= lower[0] * r0;
        lower[0] = 0.0;
        const double r1 = h(n - 2) / h(n - 3);
        diag[ni - 1] += upper[ni - 1] * (1.0 + r1);
        lower[ni - 1] -= upper[ni - 1] * r1;
        upper[ni - 1] = 0.0;
    }
    // Thomas elimination.
    for (std::size_t j = 1; j < ni; ++j) {
        const double w = lower[j] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    m_.assign(n, 0.0);
    m_[ni] = rhs[ni - 1] / diag[ni - 1];
    for (std::size_t j = ni - 1; j >= 1; --j)
        m_[j] = (rhs[j - 1] - upper[j - 1] * m_[j + 1]) / diag[j - 1];
    m_[0] = (1.0 + h(0) / h(1)) * m_[1] - (h(0) / h(1)) * m_[2];
    m_[n - 1] = (1.0 + h(n - 2) / h(n - 3)) * m_[n - 2] - (h(n - 2) / h(n - 3)) * m_[n - 3];
}

double CubicSpline::operator()(double x) const {
    if (x < x_.front() || x > x_.back())
        throw std::out_of_range("spline: evaluation outside knot range");
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - x_.begin());
    if (hi == x_.size()) --hi;
    if (hi == 0) hi = 1;
    const std::size_t lo = hi - 1;
    const double h = x_[hi] - x_[lo];
    const double a = (x_[hi] - x) / h;
    const double b = (x - x_[lo]) / h;
    return a * y_[lo] + b * y_[hi] +
           ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * h * h / 6.0;
}

}  // namespace setml
