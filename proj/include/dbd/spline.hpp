#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace dbd {

// Natural cubic spline through (x_i, y_i), x strictly increasing. Value may be
// a scalar, std::complex or a fixed-size Eigen matrix. Evaluation outside
// [x_0, x_n] extrapolates the end cubic; callers clamp as needed.
template <class Value>
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<Value> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw std::invalid_argument("spline needs at least two matching samples");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("spline abscissae must be strictly increasing");

        const Value zero = y_[0] * 0.0;
        m_.assign(n, zero);
        if (n > 2) {
            // Thomas algorithm on the natural-boundary tridiagonal system.
            std::vector<double> diag(n), upper(n);
            std::vector<Value> rhs(n, zero);
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double h0 = x_[i] - x_[i - 1];
                const double h1 = x_[i + 1] - x_[i];
                diag[i] = (h0 + h1) / 3.0;
                upper[i] = h1 / 6.0;
                rhs[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
                if (i > 1) {
                    const double w = (h0 / 6.0) / diag[i - 1];
                    diag[i] -= w * upper[i - 1];
                    rhs[i] = rhs[i] - w * rhs[i - 1];
                }
            }
            for (std::size_t i = n - 2; i >= 1; --i) {
                m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
                if (i == 1) break;
            }
        }
        const double h = (x_.back() - x_.front()) / static_cast<double>(n - 1);
        uniform_ = true;
        for (std::size_t i = 1; i < n && uniform_; ++i)
            uniform_ = std::abs(x_[i] - x_.front() - static_cast<double>(i) * h) <= 1e-12 * (1.0 + std::abs(x_.back()));
    }

    Value operator()(double x) const {
        const std::size_t i = interval(x);
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - x) / h;
        const double b = (x - x_[i]) / h;
        return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * (h * h / 6.0)) * m_[i] +
               ((b * b * b - b) * (h * h / 6.0)) * m_[i + 1];
    }

    Value derivative(double x) const {
        const std::size_t i = interval(x);
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - x) / h;
        const double b = (x - x_[i]) / h;
        return (y_[i + 1] - y_[i]) / h + ((1.0 - 3.0 * a * a) * (h / 6.0)) * m_[i] +
               ((3.0 * b * b - 1.0) * (h / 6.0)) * m_[i + 1];
    }

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    std::span<const double> knots() const { return x_; }
    std::span<const Value> values() const { return y_; }
    bool empty() const { return x_.empty(); }

private:
    std::size_t interval(double x) const {
        const std::size_t n = x_.size();
        if (uniform_) {
            const double h = (x_.back() - x_.front()) / static_cast<double>(n - 1);
            const double f = std::floor((x - x_.front()) / h);
            if (f <= 0.0) return 0;
            return std::min(static_cast<std::size_t>(f), n - 2);
        }
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        if (it == x_.begin()) return 0;
        return std::min(static_cast<std::size_t>(it - x_.begin()) - 1, n - 2);
    }

    std::vector<double> x_;
    std::vector<Value> y_;
    std::vector<Value> m_;  // second derivatives at the knots
    bool uniform_ = false;
};

}  // namespace dbd
