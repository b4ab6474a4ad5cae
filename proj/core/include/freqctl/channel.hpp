#pragma once

// Directed communication channels. Scattering channels carry wave frames
// s = sign/sqrt(2) (r - y); raw channels carry delayed copies of controller
// variables. Both may add a disturbance on reception.

#include "freqctl/history.hpp"
#include "freqctl/network.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace freqctl {

/// One direction of a communication edge. For a canonical edge a < b the
/// channel a -> b is stored at index 2e and b -> a at 2e + 1.
struct DirectedChannel {
    int from = 0;
    int to = 0;
    int edge = 0;
    double alpha = 1.0;
    double delay = 0.0;
    bool intra_area = true;  // false on inter-area comm lines
    /// Scattering sign of the receiving bus: +1 at the head of the canonical
    /// edge, -1 at its tail.
    int receiver_sign = 1;
};

std::vector<DirectedChannel> make_channels(const NetworkModel& model, const std::vector<double>& delays);

/// Frame width of the base scheme and of the tie-line scheme.
inline constexpr int base_slots = 2;
inline constexpr int tieline_slots = 6;

/// Local output of a bus in the base scheme: (zeta, -p^c).
Vector scatter_output(double zeta, double p_c);
/// Local output in the tie-line scheme: (zeta, -p^c, pi, -zeta, phi, -pi),
/// with the last pair zeroed on inter-area edges.
Vector scatter_output_tieline(double zeta, double p_c, double pi, double phi, bool intra_area);

/// E_s: pairwise rotation (a, b) -> (-b, a).
Vector rotate(const Vector& frame);
void rotate_in_place(double* frame, int width);

/// s_out = sign / sqrt(2) (r - y)
Vector encode_send(const Vector& y, const Vector& r, int sign);
/// r = sign sqrt(2) s_in - y
Vector decode_r(const Vector& s_in, const Vector& y, int sign);

/// Received frame: E_s applied to the sender's frame at t - T, plus d on
/// every slot. Before the first sample the sender's history is zero.
Vector receive(const UniformHistory& sender_frames, double t, double delay, double disturbance = 0.0);

struct ZeroDelayDecode {
    Vector r_head;  // what the head bus of the edge formulates
    Vector r_tail;
};
/// Explicit solution of the encode/decode loop when both directions have
/// zero delay. d_to_head is added to frames received by the head bus.
ZeroDelayDecode decode_zero_delay(const Vector& y_tail, const Vector& y_head, double d_to_head,
                                  double d_to_tail);

/// Delayed copy of a raw variable history; equals the initial value for
/// negative arguments (the history's pre-history row).
Vector raw_delayed_lookup(const UniformHistory& history, double t, double delay);

enum class DisturbanceKind { none, decaying, gaussian };

struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::none;
    double power = 0.0;  // variance for the gaussian kind
    std::uint64_t seed = 0;
};

/// Per-channel disturbance state. Decaying offsets 1/(e + t) use one e per
/// channel drawn from (0, 1); gaussian samples are redrawn once per step.
class ChannelDisturbance {
public:
    ChannelDisturbance() = default;
    ChannelDisturbance(const DisturbanceSpec& spec, int n_channels);

    DisturbanceKind kind() const { return spec_.kind; }
    /// Refresh per-step samples. Call once at the start of each step.
    void advance_step();
    double value(int channel, double t) const;
    const std::vector<double>& offsets() const { return e_; }

private:
    DisturbanceSpec spec_;
    std::mt19937_64 rng_;
    std::vector<double> e_;
    std::vector<double> sample_;
};

/// Perturbs every entry by d.
Vector inject_disturbance(const Vector& value, double d);

}  // namespace freqctl
