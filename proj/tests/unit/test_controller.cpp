#include "fixtures.hpp"

#include "freqctl/controller.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace freqctl;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<DirectedChannel> channels_of(const NetworkModel& m) {
    return make_channels(m, std::vector<double>(2 * m.comm_edges.size(), 0.0));
}

// What each receiver sees over undelayed raw links: the sender's values.
Matrix raw_recv(const std::vector<DirectedChannel>& ch, const std::vector<Vector>& cols) {
    Matrix recv(static_cast<Eigen::Index>(ch.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < ch.size(); ++c)
        for (std::size_t k = 0; k < cols.size(); ++k) recv(c, k) = cols[k][ch[c].from];
    return recv;
}

struct Rng {
    std::mt19937_64 gen{7};
    std::uniform_real_distribution<double> U{-1.0, 1.0};
    Vector operator()(Eigen::Index n) { return Vector::NullaryExpr(n, [&] { return U(gen); }); }
};

}  // namespace

TEST_CASE("kind names round trip", "[controller]") {
    for (auto k : {ControllerKind::naive, ControllerKind::xi, ControllerKind::reform, ControllerKind::scatter,
                   ControllerKind::tieline_direct, ControllerKind::tieline_scatter})
        CHECK(controller_kind_from_string(to_string(k)) == k);
    CHECK_THROWS(controller_kind_from_string("pid"));
    CHECK(uses_scattering(ControllerKind::tieline_scatter));
    CHECK_FALSE(uses_scattering(ControllerKind::reform));
    CHECK(received_width(ControllerKind::tieline_scatter) == 6);
}

TEST_CASE("consensus with balanced power is a fixed point", "[controller]") {
    const auto m = fixtures::five_bus();
    const auto ch = channels_of(m);
    const Vector p = Vector::Constant(5, 0.42);
    const Vector z = Vector::Constant(5, -0.1);
    const Vector mis = Vector::Zero(5);

    const auto dn = naive_derivatives({Vector::Zero(5), Vector::Zero(5), p}, raw_recv(ch, {p}), mis, ch);
    CHECK(dn.p_c.cwiseAbs().maxCoeff() == 0.0);
    CHECK(dn.psi_head.cwiseAbs().maxCoeff() == 0.0);

    const auto dx = xi_derivatives({Vector::Zero(5), p}, raw_recv(ch, {p}), mis, ch);
    CHECK(dx.p_c.cwiseAbs().maxCoeff() == 0.0);
    CHECK(dx.xi.cwiseAbs().maxCoeff() == 0.0);

    const auto dr = reform_derivatives({z, p}, raw_recv(ch, {p, z}), mis, ch);
    CHECK(dr.p_c.cwiseAbs().maxCoeff() == 0.0);
    CHECK(dr.zeta.cwiseAbs().maxCoeff() == 0.0);

    const auto ds = scatter_controller_derivatives({Vector::Zero(5), z, Vector::Zero(5), p}, raw_recv(ch, {p, z}),
                                                   mis, ch);
    CHECK(ds.p_c.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ds.zeta.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ds.rho_p.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reform drive on a two-bus edge", "[controller]") {
    NetworkModel m;
    m.buses = {fixtures::gen(1, 1, 1, 1, 1, 0, 0), fixtures::gen(2, 1, 1, 1, 1, 0, 0)};
    m.comm_edges = {fixtures::comm(1, 2)};
    const auto ch = channels_of(m);
    Vector p(2), z(2);
    p << 1.0, 0.0;
    z << 0.0, 0.0;
    const auto d = reform_derivatives({z, p}, raw_recv(ch, {p, z}), Vector::Zero(2), ch);
    CHECK(d.zeta[0] == -1.0);
    CHECK(d.zeta[1] == 1.0);
    CHECK(d.p_c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("compensated pair identity", "[controller][property]") {
    const auto m = fixtures::five_bus();
    const auto ch = channels_of(m);
    Rng rng;
    for (int trial = 0; trial < 10; ++trial) {
        const ScatterState s{rng(5), rng(5), rng(5), rng(5)};
        const Matrix recv = Matrix::NullaryExpr(10, 2, [&] { return rng.U(rng.gen); });
        const auto d = scatter_controller_derivatives(s, recv, rng(5), ch);
        CHECK((d.zeta - 2.0 * d.rho_zeta - s.rho_zeta).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((d.p_c - 2.0 * d.rho_p - s.rho_p).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("reform conserves total control effort against total mismatch", "[controller][property]") {
    const auto m = fixtures::five_bus();
    const auto ch = channels_of(m);
    Rng rng;
    for (int trial = 0; trial < 10; ++trial) {
        const ReformState s{rng(5), rng(5)};
        const Vector mis = rng(5);
        const auto d = reform_derivatives(s, raw_recv(ch, {s.p_c, s.zeta}), mis, ch);
        CHECK_THAT(d.p_c.sum(), WithinAbs(-mis.sum(), 1e-13));
        CHECK_THAT(d.zeta.sum(), WithinAbs(0.0, 1e-13));
        const auto dx = xi_derivatives({rng(5), s.p_c}, raw_recv(ch, {s.p_c}), mis, ch);
        CHECK_THAT(dx.xi.sum(), WithinAbs(0.0, 1e-13));
    }
}

TEST_CASE("undelayed scatter matches reform", "[controller][property]") {
    const auto m = fixtures::five_bus();
    const auto ch = channels_of(m);
    Rng rng;
    const Vector p = rng(5), z = rng(5), mis = rng(5);
    const Matrix recv = raw_recv(ch, {p, z});
    const auto dr = reform_derivatives({z, p}, recv, mis, ch);
    const auto ds = scatter_controller_derivatives({dr.zeta, z, dr.p_c, p}, recv, mis, ch);
    // with rho at the drive value the pair reduces to the plain update
    CHECK((ds.zeta - dr.zeta).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ds.p_c - dr.p_c).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(ds.rho_zeta.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("naive edge copies", "[controller]") {
    NetworkModel m;
    m.buses = {fixtures::gen(1, 1, 1, 1, 1, 0, 0), fixtures::gen(2, 1, 1, 1, 1, 0, 0)};
    m.comm_edges = {fixtures::comm(1, 2, 2.0)};
    const auto ch = channels_of(m);
    Vector p(2);
    p << 1.0, 0.25;
    Vector psi(1);
    psi << 0.5;
    const auto d = naive_derivatives({psi, psi, p}, raw_recv(ch, {p}), Vector::Zero(2), ch);
    CHECK(d.psi_head[0] == 2.0 * 0.75);
    CHECK(d.psi_tail[0] == 2.0 * 0.75);
    CHECK(d.p_c[0] == -0.5);
    CHECK(d.p_c[1] == 0.5);
}

TEST_CASE("tie-line schemes reduce to the base scheme without areas", "[controller][property]") {
    const auto m = fixtures::five_bus();
    const auto ch = channels_of(m);
    Rng rng;
    const Vector p = rng(5), z = rng(5), mis = rng(5);
    const Vector zero = Vector::Zero(5);
    const auto dr = reform_derivatives({z, p}, raw_recv(ch, {p, z}), mis, ch);
    const auto dt = tieline_direct_derivatives({z, p, zero, zero}, raw_recv(ch, {p, z, zero, zero}), mis, zero, ch);
    CHECK((dt.zeta - dr.zeta).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((dt.p_c - dr.p_c).cwiseAbs().maxCoeff() < 1e-14);

    const ScatterState base{rng(5), z, rng(5), p};
    const auto ds = scatter_controller_derivatives(base, raw_recv(ch, {p, z}), mis, ch);
    // decoded pi columns equal the receiver's own pi = 0 and zeta' equals zeta
    Matrix recv6 = Matrix::Zero(10, 6);
    recv6.leftCols(2) = raw_recv(ch, {p, z});
    for (std::size_t c = 0; c < ch.size(); ++c) recv6(c, 2) = z[ch[c].to];
    const TieLineState ts{base, zero, zero, zero, zero};
    const auto dts = tieline_derivatives(ts, recv6, mis, zero, ch);
    CHECK((dts.base.zeta - ds.zeta).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((dts.base.p_c - ds.p_c).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(dts.pi.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(dts.phi.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("schedule injection drives pi at the informed bus", "[controller]") {
    const auto m = fixtures::five_bus_areas();
    const auto ch = channels_of(m);
    const Vector zero = Vector::Zero(5);
    Vector sched = zero;
    sched[1] = -0.5;
    const auto d = tieline_direct_derivatives({zero, zero, zero, zero}, Matrix::Zero(10, 4), zero, sched, ch);
    CHECK(d.pi[1] == 0.5);
    CHECK(d.pi.cwiseAbs().sum() == 0.5);
}

TEST_CASE("bound multipliers", "[controller]") {
    Vector lambda(2), mu(2), pM(2), pmin(2), pmax(2);
    lambda << 0.5, 0.0;
    mu << 1.0, 1.0;
    pM << 1.0, 0.7;
    pmin << 0.0, 1.0;
    pmax << 1.5, 0.5;
    const auto d = bounds_derivatives({lambda, mu}, pM, pmin, pmax, {true, true}, {true, false});
    CHECK(d.lambda[0] == -1.0);
    CHECK(d.lambda[1] == 0.0);  // zero stays zero
    CHECK(d.mu[0] == -1.0);
    CHECK(d.mu[1] == 0.0);      // no upper bound
}

TEST_CASE("observer at a balanced point", "[controller]") {
    ObserverInputs in;
    in.omega = Vector::Zero(2);
    in.p_c = Vector::Constant(2, 0.3);
    in.pM = Vector::Constant(2, 0.5);
    in.inflow = Vector::Constant(2, -0.2);
    in.M = Vector::Constant(2, 10.0);
    in.Lambda = Vector::Ones(2);
    in.tau_chi = Vector::Constant(2, 0.1);
    // chi equal to the true demand, b = p^c + chi
    const ObserverState s{Vector::Constant(2, 0.3), Vector::Constant(2, 0.6)};
    const auto d = observer_derivatives(s, in);
    CHECK(d.chi.cwiseAbs().maxCoeff() < 1e-15);
    CHECK(d.b.cwiseAbs().maxCoeff() < 1e-15);
    CHECK(observer_load_estimate(0.0, 0.0, 1.0) == 0.0);
    CHECK_THAT(observer_load_estimate(-0.1, 0.3, 2.0), WithinAbs(0.5, 1e-15));
}

TEST_CASE("received data must cover every channel", "[controller]") {
    const auto m = fixtures::five_bus();
    const auto ch = channels_of(m);
    CHECK_THROWS(reform_derivatives({Vector::Zero(5), Vector::Zero(5)}, Matrix::Zero(10, 1), Vector::Zero(5), ch));
}
