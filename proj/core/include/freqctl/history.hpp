#pragma once

// Ring buffer of fixed-width rows sampled on a uniform time grid t_k = k h.
// Queries interpolate between samples. Before t = 0 the buffer answers with
// a configured pre-history row.

#include "freqctl/network.hpp"

#include <vector>

namespace freqctl {

enum class Interpolation { linear, cubic };

class UniformHistory {
public:
    UniformHistory() = default;
    /// `span` is the oldest lag (seconds) a query may reach back from the
    /// latest sample.
    UniformHistory(int width, double h, double span, Vector pre_history,
                   Interpolation interp = Interpolation::linear);

    void push(const Vector& row);
    void push(const double* row);

    int width() const { return width_; }
    double step() const { return h_; }
    long long count() const { return count_; }
    double latest_time() const { return static_cast<double>(count_ - 1) * h_; }
    bool empty() const { return count_ == 0; }

    /// Row at sample index k (must still be retained).
    const double* sample(long long k) const;
    /// Interpolated row at time t. Times after the latest sample are clamped
    /// to it; negative times return the pre-history row.
    void value(double t, double* out) const;
    Vector value(double t) const;

private:
    int width_ = 0;
    double h_ = 0.0;
    long long capacity_ = 0;
    long long count_ = 0;
    Interpolation interp_ = Interpolation::linear;
    Vector pre_;
    std::vector<double> data_;
};

}  // namespace freqctl
