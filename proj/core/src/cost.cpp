#include "freqctl/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace freqctl {

double Cost::gradient_inverse(double beta) const {
    double lo = -1.0;
    double hi = 1.0;
    for (int grow = 0; gradient(lo) > beta; ++grow) {
        if (grow > 200) throw std::runtime_error("cost gradient is bounded below the requested price");
        lo *= 2.0;
    }
    for (int grow = 0; gradient(hi) < beta; ++grow) {
        if (grow > 200) throw std::runtime_error("cost gradient is bounded above the requested price");
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gradient(mid) < beta)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

QuadraticCost::QuadraticCost(double q, double c) : q_(q), c_(c) {
    if (!(q > 0.0)) throw std::invalid_argument("quadratic cost needs q > 0");
}

double QuadraticCost::value(double p) const { return 0.5 * q_ * (p - c_) * (p - c_); }

double QuadraticCost::gradient(double p) const { return q_ * (p - c_); }

double QuadraticCost::gradient_inverse(double beta) const { return c_ + beta / q_; }

std::unique_ptr<Cost> QuadraticCost::clone() const { return std::make_unique<QuadraticCost>(*this); }

}  // namespace freqctl
