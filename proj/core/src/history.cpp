#include "freqctl/history.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace freqctl {

UniformHistory::UniformHistory(int width, double h, double span, Vector pre_history, Interpolation interp)
    : width_(width), h_(h), interp_(interp), pre_(std::move(pre_history)) {
    if (!(h > 0.0)) throw std::invalid_argument("history step must be positive");
    if (pre_.size() != width) throw std::invalid_argument("pre-history width mismatch");
    capacity_ = static_cast<long long>(std::ceil(std::max(span, 0.0) / h)) + 8;
    data_.assign(static_cast<std::size_t>(capacity_ * width_), 0.0);
}

void UniformHistory::push(const Vector& row) {
    if (row.size() != width_) throw std::invalid_argument("history row width mismatch");
    push(row.data());
}

void UniformHistory::push(const double* row) {
    double* slot = data_.data() + (count_ % capacity_) * width_;
    std::copy(row, row + width_, slot);
    ++count_;
}

const double* UniformHistory::sample(long long k) const {
    if (k < 0 || k >= count_) throw std::out_of_range("history sample index out of range");
    if (k < count_ - capacity_) throw std::out_of_range("history underrun: sample already evicted");
    return data_.data() + (k % capacity_) * width_;
}

Vector UniformHistory::value(double t) const {
    Vector out(width_);
    value(t, out.data());
    return out;
}

void UniformHistory::value(double t, double* out) const {
    if (t < 0.0 || count_ == 0) {
        std::copy(pre_.data(), pre_.data() + width_, out);
        return;
    }
    const long long last = count_ - 1;
    const double pos = t / h_;
    if (pos >= static_cast<double>(last)) {
        const double* s = sample(last);
        std::copy(s, s + width_, out);
        return;
    }
    long long i = static_cast<long long>(std::floor(pos));
    double frac = pos - static_cast<double>(i);
    if (frac < 1e-12) {
        const double* s = sample(i);
        std::copy(s, s + width_, out);
        return;
    }
    if (interp_ == Interpolation::cubic && last >= 3) {
        // Four-point Lagrange stencil kept inside [0, last] so that it never
        // straddles the jump between pre-history and the first sample.
        const long long start = std::clamp<long long>(i - 1, 0, last - 3);
        const double x = pos - static_cast<double>(start);
        const double w0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
        const double w1 = x * (x - 2.0) * (x - 3.0) / 2.0;
        const double w2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
        const double w3 = x * (x - 1.0) * (x - 2.0) / 6.0;
        const double* s0 = sample(start);
        const double* s1 = sample(start + 1);
        const double* s2 = sample(start + 2);
        const double* s3 = sample(start + 3);
        for (int c = 0; c < width_; ++c) out[c] = w0 * s0[c] + w1 * s1[c] + w2 * s2[c] + w3 * s3[c];
        return;
    }
    const double* a = sample(i);
    const double* b = sample(i + 1);
    for (int c = 0; c < width_; ++c) out[c] = a[c] + frac * (b[c] - a[c]);
}

}  // namespace freqctl
