#pragma once

// Shared five-bus model used across the unit tests.

#include "freqctl/network.hpp"

#include <optional>

namespace fixtures {

inline freqctl::BusParams gen(int id, double M, double Lambda, double tau, double q, double c, double pL) {
    freqctl::BusParams b;
    b.id = id;
    b.kind = freqctl::BusKind::generator;
    b.M = M;
    b.Lambda = Lambda;
    b.tau = tau;
    b.cost_q = q;
    b.cost_c = c;
    b.pL = pL;
    return b;
}

inline freqctl::BusParams load(int id, double Lambda, double pL) {
    freqctl::BusParams b;
    b.id = id;
    b.Lambda = Lambda;
    b.pL = pL;
    return b;
}

inline freqctl::LineParams phys(int i, int j, double Y = 1.0) { return {i - 1, j - 1, Y, 1.0}; }
inline freqctl::LineParams comm(int i, int j, double alpha = 1.0) { return {i - 1, j - 1, 0.0, alpha}; }

inline freqctl::NetworkModel five_bus() {
    freqctl::NetworkModel m;
    m.buses = {gen(1, 13, 1, 0.3, 2.4, 0.3, 0.1), gen(2, 12.1, 0.8, 0.4, 4, 0.1, 0.2),
               gen(3, 14.3, 1.1, 0.35, 3.4, 0.2, 0.3), load(4, 1, 0.4), load(5, 0.9, 0.5)};
    m.phys_edges = {phys(1, 2), phys(1, 4), phys(2, 3), phys(2, 4), phys(3, 5), phys(4, 5)};
    m.comm_edges = {comm(1, 2), comm(1, 4), comm(2, 3), comm(3, 5), comm(4, 5)};
    return m;
}

inline freqctl::NetworkModel five_bus_areas() {
    auto m = five_bus();
    m.areas = {{{0, 1, 3}, -0.5, 1}, {{2, 4}, 0.5, 2}};
    return m;
}

}  // namespace fixtures
