#include "fixtures.hpp"

#include "freqctl/channel.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace freqctl;
using Catch::Matchers::WithinAbs;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) out[k++] = x;
    return out;
}

double gap(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("channel numbering", "[channel]") {
    const auto m = fixtures::five_bus_areas();
    std::vector<double> delays(10, 0.0);
    delays[3] = 0.7;
    const auto ch = make_channels(m, delays);
    REQUIRE(ch.size() == 10);
    CHECK(ch[2].from == 0);
    CHECK(ch[2].to == 3);
    CHECK(ch[2].receiver_sign == 1);
    CHECK(ch[3].from == 3);
    CHECK(ch[3].to == 0);
    CHECK(ch[3].receiver_sign == -1);
    CHECK(ch[3].delay == 0.7);
    // 2-3 and 4-5 cross the area boundary
    CHECK_FALSE(ch[4].intra_area);
    CHECK_FALSE(ch[8].intra_area);
    CHECK(ch[0].intra_area);
    CHECK_THROWS(make_channels(m, std::vector<double>(9, 0.0)));
    delays[0] = -1.0;
    CHECK_THROWS(make_channels(m, delays));
}

TEST_CASE("local outputs", "[channel]") {
    CHECK(gap(scatter_output(0.3, 0.7), vec({0.3, -0.7})) == 0.0);
    CHECK(gap(scatter_output_tieline(1, 2, 3, 4, true), vec({1, -2, 3, -1, 4, -3})) == 0.0);
    const Vector inter = scatter_output_tieline(1, 2, 3, 4, false);
    CHECK(inter[4] == 0.0);
    CHECK(inter[5] == 0.0);
}

TEST_CASE("pairwise rotation", "[channel]") {
    CHECK(gap(rotate(vec({1, 2})), vec({-2, 1})) == 0.0);
    CHECK(gap(rotate(vec({1, 2, 3, 4, 5, 6})), vec({-2, 1, -4, 3, -6, 5})) == 0.0);
    const Vector x = vec({0.1, -0.4, 2.0, 3.0});
    CHECK(gap(rotate(rotate(x)), -x) == 0.0);
    CHECK_THAT(rotate(x).norm(), WithinAbs(x.norm(), 1e-15));
    CHECK_THROWS(rotate(vec({1, 2, 3})));
}

TEST_CASE("encode and decode", "[channel]") {
    const Vector y = vec({1, 2});
    const Vector r = vec({3, 5});
    const Vector s = encode_send(y, r, 1);
    CHECK_THAT(s[0], WithinAbs(2.0 / std::sqrt(2.0), 1e-15));
    CHECK_THAT(s[1], WithinAbs(3.0 / std::sqrt(2.0), 1e-15));
    CHECK(gap(encode_send(y, r, -1), -s) == 0.0);
    // a side that already agrees with its own output sends nothing
    for (int sign : {1, -1}) CHECK(encode_send(y, y, sign).cwiseAbs().maxCoeff() == 0.0);
    for (int sign : {1, -1}) CHECK(gap(decode_r(Vector::Zero(2), y, sign), -y) == 0.0);
    CHECK(gap(decode_r(s, y, 1), r - 2.0 * y) < 1e-15);
    CHECK_THROWS(encode_send(y, vec({1, 2, 3, 4}), 1));
}

TEST_CASE("frames are zero before the first round trip", "[channel]") {
    UniformHistory frames(2, 0.01, 2.0, Vector::Zero(2));
    for (int k = 0; k <= 100; ++k) frames.push(vec({1.0, 2.0}));
    CHECK(receive(frames, 0.5, 1.0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(gap(receive(frames, 1.0, 0.5), vec({-2, 1})) == 0.0);
    CHECK(gap(receive(frames, 1.0, 0.5, 0.25), vec({-1.75, 1.25})) == 0.0);
}

TEST_CASE("zero-delay decode recovers the neighbour's output", "[channel]") {
    const Vector y_tail = scatter_output(0.4, 0.9);
    const Vector y_head = scatter_output(-0.2, 0.1);
    const auto z = decode_zero_delay(y_tail, y_head, 0.0, 0.0);
    CHECK(gap(z.r_head, rotate(y_tail)) < 1e-15);
    CHECK(gap(z.r_tail, rotate(y_head)) < 1e-15);
    // rotate(zeta, -p) = (p, zeta)
    CHECK_THAT(z.r_head[0], WithinAbs(0.9, 1e-15));
    CHECK_THAT(z.r_head[1], WithinAbs(0.4, 1e-15));
}

TEST_CASE("zero-delay decode closes the loop under disturbance", "[channel][property]") {
    const Vector y_tail = vec({0.3, -0.5, 0.2, -0.3, 0.1, -0.2});
    const Vector y_head = vec({-0.1, 0.7, 0.4, 0.1, -0.6, 0.3});
    for (double d_head : {0.0, 0.3, -1.1})
        for (double d_tail : {0.0, 0.2, 0.9}) {
            const auto z = decode_zero_delay(y_tail, y_head, d_head, d_tail);
            const Vector s_tail = encode_send(y_tail, z.r_tail, -1);
            const Vector s_head = encode_send(y_head, z.r_head, 1);
            const Vector in_head = inject_disturbance(rotate(s_tail), d_head);
            const Vector in_tail = inject_disturbance(rotate(s_head), d_tail);
            CHECK(gap(decode_r(in_head, y_head, 1), z.r_head) < 1e-14);
            CHECK(gap(decode_r(in_tail, y_tail, -1), z.r_tail) < 1e-14);
        }
}

TEST_CASE("raw delayed lookup", "[channel]") {
    UniformHistory ramp(1, 0.1, 5.0, vec({-7.0}));
    for (int k = 0; k <= 40; ++k) ramp.push(vec({0.1 * k}));
    CHECK_THAT(raw_delayed_lookup(ramp, 4.0, 1.5)[0], WithinAbs(2.5, 1e-12));
    CHECK_THAT(raw_delayed_lookup(ramp, 4.0, 1.55)[0], WithinAbs(2.45, 1e-12));
    CHECK(raw_delayed_lookup(ramp, 1.0, 2.0)[0] == -7.0);
}

TEST_CASE("disturbance injection and kinds", "[channel]") {
    CHECK(gap(inject_disturbance(vec({0.0, 2.0}), 1.0), vec({1.0, 3.0})) == 0.0);

    ChannelDisturbance none({}, 4);
    none.advance_step();
    CHECK(none.value(2, 1.0) == 0.0);

    ChannelDisturbance decay({DisturbanceKind::decaying, 0.0, 3}, 4);
    for (int c = 0; c < 4; ++c) {
        const double e = decay.offsets()[static_cast<std::size_t>(c)];
        CHECK(e > 0.0);
        CHECK(e < 1.0);
        CHECK_THAT(decay.value(c, 2.0), WithinAbs(1.0 / (e + 2.0), 1e-15));
        CHECK(decay.value(c, 0.0) > 1.0);
        CHECK(decay.value(c, 10.0) < decay.value(c, 1.0));
    }
}

TEST_CASE("gaussian disturbance is reproducible", "[channel]") {
    const DisturbanceSpec spec{DisturbanceKind::gaussian, 0.04, 99};
    ChannelDisturbance a(spec, 3), b(spec, 3), c({DisturbanceKind::gaussian, 0.04, 100}, 3);
    double sum = 0.0, sum_sq = 0.0, diff = 0.0;
    const int steps = 20000;
    for (int k = 0; k < steps; ++k) {
        a.advance_step();
        b.advance_step();
        c.advance_step();
        CHECK(a.value(1, 0.0) == b.value(1, 0.0));
        // constant within a step
        CHECK(a.value(1, 0.0) == a.value(1, 5.0));
        diff += std::abs(a.value(1, 0.0) - c.value(1, 0.0));
        sum += a.value(0, 0.0);
        sum_sq += a.value(0, 0.0) * a.value(0, 0.0);
    }
    CHECK(diff > 0.0);
    CHECK_THAT(sum / steps, WithinAbs(0.0, 0.01));
    CHECK_THAT(sum_sq / steps, WithinAbs(0.04, 0.003));
    CHECK_THROWS(ChannelDisturbance({DisturbanceKind::gaussian, -1.0, 1}, 2));
}
