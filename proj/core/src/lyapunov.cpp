#include "freqctl/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace freqctl {

double V_F(const Vector& M, const Vector& omega, const Vector& omega_star) {
    return 0.5 * (M.array() * (omega - omega_star).array().square()).sum();
}

double V_P(const Vector& Y, const Vector& eta, const Vector& eta_star) {
    double v = 0.0;
    for (Eigen::Index e = 0; e < eta.size(); ++e)
        v += Y[e] * (std::cos(eta_star[e]) - std::cos(eta[e]) - std::sin(eta_star[e]) * (eta[e] - eta_star[e]));
    return v;
}

double V_D(const Vector& tau, const Vector& k_g, const Vector& k_c, const Vector& pM, const Vector& pM_star) {
    double v = 0.0;
    for (Eigen::Index g = 0; g < pM.size(); ++g) {
        const double d = pM[g] - pM_star[g];
        v += tau[g] / (2.0 * k_g[g] * k_c[g]) * d * d;
    }
    return v;
}

double weighted_quadratic(const Vector& w, const Vector& x, const Vector& x_star) {
    return 0.5 * (w.array() * (x - x_star).array().square()).sum();
}

double compensated_quadratic(const Vector& rho, const Vector& x, const Vector& x_star) {
    return 0.5 * rho.squaredNorm() + 0.5 * (x - rho - x_star).squaredNorm();
}

namespace {

double multiplier_term(double x, double x_star) {
    if (!(x > 0.0)) throw std::invalid_argument("multiplier functional needs positive multipliers");
    const double s2 = x_star * x_star;
    const double log_part = s2 == 0.0 ? 0.0 : 0.5 * s2 * (std::log(x) - std::log(x_star));
    return 0.25 * (x * x - s2) - log_part;
}

}  // namespace

double V_G(const Vector& lambda, const Vector& lambda_star, const Vector& mu, const Vector& mu_star,
           const std::vector<bool>& has_min, const std::vector<bool>& has_max) {
    double v = 0.0;
    for (Eigen::Index g = 0; g < lambda.size(); ++g) {
        if (has_min[g]) v += multiplier_term(lambda[g], lambda_star[g]);
        if (has_max[g]) v += multiplier_term(mu[g], mu_star[g]);
    }
    return v;
}

double V_E(const Vector& M, const Vector& b, const Vector& b_star, const Vector& omega, const Vector& omega_star,
           const Vector& tau_chi, const Vector& chi, const Vector& chi_star) {
    const Vector gap = (b - b_star) - (omega - omega_star);
    return 0.5 * ((M.array() * gap.array().square()).sum() +
                  (tau_chi.array() * (chi - chi_star).array().square()).sum());
}

ChannelStorage::ChannelStorage(double h, double delay, double g_pre) : h_(h), delay_(delay), g_pre_(g_pre) {
    capacity_ = static_cast<long long>(std::ceil(delay / h)) + 4;
    g_.assign(static_cast<std::size_t>(capacity_), 0.0);
    cum_.assign(static_cast<std::size_t>(capacity_), 0.0);
}

void ChannelStorage::push(double g) {
    double cum = 0.0;
    if (count_ > 0) {
        const auto prev = static_cast<std::size_t>((count_ - 1) % capacity_);
        cum = cum_[prev] + 0.5 * h_ * (g_[prev] + g);
    }
    const auto slot = static_cast<std::size_t>(count_ % capacity_);
    g_[slot] = g;
    cum_[slot] = cum;
    ++count_;
}

double ChannelStorage::cumulative_at(double t) const {
    if (t < 0.0) return g_pre_ * t;
    const double pos = t / h_;
    auto i = static_cast<long long>(std::floor(pos));
    double theta = pos - static_cast<double>(i);
    if (i >= count_ - 1) {
        i = count_ - 1;
        theta = 0.0;
    }
    if (i < count_ - capacity_) throw std::out_of_range("channel storage underrun");
    const auto a = static_cast<std::size_t>(i % capacity_);
    if (theta == 0.0) return cum_[a];
    const auto b = static_cast<std::size_t>((i + 1) % capacity_);
    return cum_[a] + h_ * (theta * g_[a] + 0.5 * theta * theta * (g_[b] - g_[a]));
}

double ChannelStorage::value() const {
    if (count_ == 0 || delay_ <= 0.0) return 0.0;
    const double t = static_cast<double>(count_ - 1) * h_;
    return 0.5 * (cumulative_at(t) - cumulative_at(t - delay_));
}

double monotonicity_probe(const std::vector<double>& series) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < series.size(); ++k) worst = std::max(worst, series[k + 1] - series[k]);
    return series.size() < 2 ? 0.0 : worst;
}

std::vector<double> derivative_estimate(const std::vector<double>& s, double h) {
    std::vector<double> d(s.size(), 0.0);
    if (s.size() < 2) return d;
    d.front() = (s[1] - s[0]) / h;
    d.back() = (s[s.size() - 1] - s[s.size() - 2]) / h;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) d[k] = (s[k + 1] - s[k - 1]) / (2.0 * h);
    return d;
}

}  // namespace freqctl
