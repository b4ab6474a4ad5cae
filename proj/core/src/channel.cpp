#include "freqctl/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace freqctl {

namespace {
const double sqrt2 = std::sqrt(2.0);
}

std::vector<DirectedChannel> make_channels(const NetworkModel& model, const std::vector<double>& delays) {
    if (delays.size() != 2 * model.comm_edges.size())
        throw std::invalid_argument("need one delay per directed communication channel");
    std::vector<DirectedChannel> out;
    out.reserve(delays.size());
    for (std::size_t e = 0; e < model.comm_edges.size(); ++e) {
        const auto& edge = model.comm_edges[e];
        const bool intra = !model.is_inter_area(edge);
        for (int dir = 0; dir < 2; ++dir) {
            DirectedChannel ch;
            ch.from = dir == 0 ? edge.from : edge.to;
            ch.to = dir == 0 ? edge.to : edge.from;
            ch.edge = static_cast<int>(e);
            ch.alpha = edge.alpha;
            ch.delay = delays[2 * e + dir];
            if (!(ch.delay >= 0.0)) throw std::invalid_argument("delays must be nonnegative");
            ch.intra_area = intra;
            ch.receiver_sign = dir == 0 ? 1 : -1;
            out.push_back(ch);
        }
    }
    return out;
}

Vector scatter_output(double zeta, double p_c) {
    Vector y(base_slots);
    y << zeta, -p_c;
    return y;
}

Vector scatter_output_tieline(double zeta, double p_c, double pi, double phi, bool intra_area) {
    const double mask = intra_area ? 1.0 : 0.0;
    Vector y(tieline_slots);
    y << zeta, -p_c, pi, -zeta, mask * phi, -mask * pi;
    return y;
}

void rotate_in_place(double* frame, int width) {
    for (int k = 0; k + 1 < width; k += 2) {
        const double a = frame[k];
        frame[k] = -frame[k + 1];
        frame[k + 1] = a;
    }
}

Vector rotate(const Vector& frame) {
    if (frame.size() % 2 != 0) throw std::invalid_argument("frame width must be even");
    Vector out = frame;
    rotate_in_place(out.data(), static_cast<int>(out.size()));
    return out;
}

Vector encode_send(const Vector& y, const Vector& r, int sign) {
    if (y.size() != r.size()) throw std::invalid_argument("scheme mismatch between r and y");
    return (static_cast<double>(sign) / sqrt2) * (r - y);
}

Vector decode_r(const Vector& s_in, const Vector& y, int sign) {
    if (y.size() != s_in.size()) throw std::invalid_argument("scheme mismatch between frame and y");
    return static_cast<double>(sign) * sqrt2 * s_in - y;
}

Vector receive(const UniformHistory& sender_frames, double t, double delay, double disturbance) {
    Vector s = sender_frames.value(t - delay);
    rotate_in_place(s.data(), static_cast<int>(s.size()));
    s.array() += disturbance;
    return s;
}

ZeroDelayDecode decode_zero_delay(const Vector& y_tail, const Vector& y_head, double d_to_head,
                                  double d_to_tail) {
    const Eigen::Index n = y_tail.size();
    const Vector ones = Vector::Ones(n);
    ZeroDelayDecode out;
    out.r_head = rotate(y_tail) + (rotate(d_to_tail * ones) + d_to_head * ones) / sqrt2;
    out.r_tail = -rotate(out.r_head - y_head) - sqrt2 * d_to_tail * ones - y_tail;
    return out;
}

Vector raw_delayed_lookup(const UniformHistory& history, double t, double delay) {
    return history.value(t - delay);
}

ChannelDisturbance::ChannelDisturbance(const DisturbanceSpec& spec, int n_channels)
    : spec_(spec), rng_(spec.seed), e_(static_cast<std::size_t>(n_channels), 0.0),
      sample_(static_cast<std::size_t>(n_channels), 0.0) {
    if (spec.kind == DisturbanceKind::gaussian && !(spec.power >= 0.0))
        throw std::invalid_argument("noise power must be nonnegative");
    if (spec.kind == DisturbanceKind::decaying) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (auto& e : e_) {
            do {
                e = unit(rng_);
            } while (e <= 0.0);
        }
    }
}

void ChannelDisturbance::advance_step() {
    if (spec_.kind != DisturbanceKind::gaussian) return;
    std::normal_distribution<double> noise(0.0, std::sqrt(spec_.power));
    for (auto& s : sample_) s = noise(rng_);
}

double ChannelDisturbance::value(int channel, double t) const {
    switch (spec_.kind) {
        case DisturbanceKind::none:
            return 0.0;
        case DisturbanceKind::decaying:
            return 1.0 / (e_[channel] + t);
        case DisturbanceKind::gaussian:
            return sample_[channel];
    }
    return 0.0;
}

Vector inject_disturbance(const Vector& value, double d) { return (value.array() + d).matrix(); }

}  // namespace freqctl
