#pragma once

// Generation cost functions. The plant and the oracle only need the value,
// the derivative and the inverse of the (strictly increasing) derivative.

#include <memory>

namespace freqctl {

class Cost {
public:
    virtual ~Cost() = default;
    virtual double value(double p) const = 0;
    virtual double gradient(double p) const = 0;
    /// Solves gradient(p) = beta. The default brackets and bisects, which is
    /// valid for any strictly convex differentiable cost.
    virtual double gradient_inverse(double beta) const;
    virtual std::unique_ptr<Cost> clone() const = 0;
};

/// Q(p) = q/2 (p - c)^2 with q > 0.
class QuadraticCost final : public Cost {
public:
    QuadraticCost(double q, double c);
    double value(double p) const override;
    double gradient(double p) const override;
    double gradient_inverse(double beta) const override;
    std::unique_ptr<Cost> clone() const override;

    double q() const { return q_; }
    double c() const { return c_; }

private:
    double q_;
    double c_;
};

}  // namespace freqctl
