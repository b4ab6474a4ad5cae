#include "freqctl/network.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace freqctl {

namespace {

std::string edge_name(const LineParams& e) {
    std::ostringstream os;
    os << (e.from + 1) << "-" << (e.to + 1);
    return os.str();
}

std::string bus_name(int index) { return "bus " + std::to_string(index + 1); }

class DisjointSets {
public:
    explicit DisjointSets(int n) : parent_(static_cast<std::size_t>(n)) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(int a, int b) { parent_[find(a)] = find(b); }

private:
    std::vector<int> parent_;
};

}  // namespace

std::vector<int> NetworkModel::generators() const {
    std::vector<int> out;
    for (int i = 0; i < n_buses(); ++i)
        if (buses[i].is_generator()) out.push_back(i);
    return out;
}

std::vector<int> NetworkModel::loads() const {
    std::vector<int> out;
    for (int i = 0; i < n_buses(); ++i)
        if (!buses[i].is_generator()) out.push_back(i);
    return out;
}

std::vector<int> NetworkModel::area_of_bus() const {
    std::vector<int> area(buses.size(), 0);
    for (std::size_t k = 0; k < areas.size(); ++k)
        for (int b : areas[k].buses)
            if (b >= 0 && b < n_buses()) area[b] = static_cast<int>(k);
    return area;
}

bool NetworkModel::is_inter_area(const LineParams& edge) const {
    if (areas.empty()) return false;
    const auto area = area_of_bus();
    return area[edge.from] != area[edge.to];
}

LineParams canonical(LineParams edge) {
    if (edge.from == edge.to) throw std::invalid_argument("self loop on " + bus_name(edge.from));
    if (edge.from > edge.to) std::swap(edge.from, edge.to);
    return edge;
}

Matrix incidence_matrix(const std::vector<LineParams>& edges, int n_nodes) {
    Matrix D = Matrix::Zero(n_nodes, static_cast<Eigen::Index>(edges.size()));
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& edge = edges[e];
        if (edge.from < 0 || edge.from >= n_nodes || edge.to < 0 || edge.to >= n_nodes)
            throw std::out_of_range("edge " + edge_name(edge) + " references a node outside 1.." +
                                    std::to_string(n_nodes));
        D(edge.from, static_cast<Eigen::Index>(e)) = -1.0;
        D(edge.to, static_cast<Eigen::Index>(e)) = 1.0;
    }
    return D;
}

Matrix laplacian(const std::vector<LineParams>& comm_edges, int n_nodes) {
    for (const auto& e : comm_edges)
        if (!(e.alpha > 0.0))
            throw std::invalid_argument("nonpositive communication weight on edge " + edge_name(e));
    const Matrix D = incidence_matrix(comm_edges, n_nodes);
    Vector w(static_cast<Eigen::Index>(comm_edges.size()));
    for (std::size_t e = 0; e < comm_edges.size(); ++e) w[static_cast<Eigen::Index>(e)] = comm_edges[e].alpha;
    return D * w.asDiagonal() * D.transpose();
}

Matrix tie_line_incidence(const NetworkModel& model) {
    const int K = model.n_areas();
    const auto area = model.area_of_bus();
    Matrix D_hat = Matrix::Zero(K, static_cast<Eigen::Index>(model.phys_edges.size()));
    for (std::size_t e = 0; e < model.phys_edges.size(); ++e) {
        const auto& line = model.phys_edges[e];
        const int a_from = area[line.from];
        const int a_to = area[line.to];
        if (a_from == a_to) continue;  // not in any B_k
        // Same orientation as E_K * D: leaving an area counts -1, entering +1.
        D_hat(a_from, static_cast<Eigen::Index>(e)) = -1.0;
        D_hat(a_to, static_cast<Eigen::Index>(e)) = 1.0;
    }
    return D_hat;
}

AreaMatrices area_matrices(const NetworkModel& model) {
    const int n = model.n_buses();
    const int K = model.n_areas();
    AreaMatrices out;
    out.E_K = Matrix::Zero(K, n);
    out.J = Matrix::Zero(n, K);

    if (model.areas.empty()) {
        out.E_K.setOnes();
    } else {
        std::vector<int> seen(static_cast<std::size_t>(n), 0);
        for (int k = 0; k < K; ++k) {
            const auto& area = model.areas[k];
            for (int b : area.buses) {
                if (b < 0 || b >= n) throw std::out_of_range("area member outside the bus range");
                out.E_K(k, b) = 1.0;
                ++seen[b];
            }
            const bool informed_inside =
                std::find(area.buses.begin(), area.buses.end(), area.informed_bus) != area.buses.end();
            if (!informed_inside)
                throw std::invalid_argument("informed bus of area " + std::to_string(k + 1) +
                                            " is not inside the area");
            out.J(area.informed_bus, k) = 1.0;
        }
        if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
            throw std::invalid_argument("area partition is not exhaustive and disjoint");
    }

    out.D_hat = out.E_K * incidence_matrix(model.phys_edges, n);

    std::vector<LineParams> intra;
    for (const auto& e : model.comm_edges)
        if (!model.is_inter_area(e)) intra.push_back(e);
    out.L_K = laplacian(intra, n);
    return out;
}

int connected_components(const std::vector<LineParams>& edges, int n_nodes) {
    if (n_nodes == 0) return 0;
    DisjointSets sets(n_nodes);
    for (const auto& e : edges)
        if (e.from >= 0 && e.from < n_nodes && e.to >= 0 && e.to < n_nodes) sets.unite(e.from, e.to);
    std::set<int> roots;
    for (int i = 0; i < n_nodes; ++i) roots.insert(sets.find(i));
    return static_cast<int>(roots.size());
}

std::vector<Violation> validate(const NetworkModel& model) {
    std::vector<Violation> out;
    auto add = [&](std::string inv, std::string elem, std::string msg) {
        out.push_back({std::move(inv), std::move(elem), std::move(msg)});
    };
    const int n = model.n_buses();
    if (n == 0) {
        add("non-empty network", "buses", "no buses configured");
        return out;
    }

    for (int i = 0; i < n; ++i) {
        const auto& b = model.buses[i];
        const auto name = bus_name(i);
        if (b.id != i + 1) add("contiguous bus ids", name, "bus ids must be 1..N in order");
        if (!(b.Lambda > 0.0)) add("positive damping", name, "Lambda must be > 0");
        if (!b.is_generator()) continue;
        if (!(b.M > 0.0)) add("positive inertia", name, "M must be > 0");
        if (!(b.tau > 0.0)) add("positive time constant", name, "tau must be > 0");
        if (!(b.k_g > 0.0)) add("positive gain", name, "k_g must be > 0");
        if (!(b.k_c > 0.0)) add("positive gain", name, "k_c must be > 0");
        if (!(b.cost_q > 0.0)) add("strictly convex cost", name, "cost q must be > 0");
        if (b.pM_min && b.pM_max && *b.pM_min > *b.pM_max)
            add("ordered generation bounds", name, "pM_min exceeds pM_max");
    }
    if (model.generators().empty()) add("at least one generator", "buses", "no generator buses");

    auto check_edges = [&](const std::vector<LineParams>& edges, bool comm) {
        const std::string kind = comm ? "communication" : "physical";
        std::set<std::pair<int, int>> seen;
        for (const auto& e : edges) {
            const auto name = kind + " edge " + edge_name(e);
            if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
                add("edge endpoints in range", name, "endpoint outside the bus range");
                continue;
            }
            if (e.from == e.to) add("no self loops", name, "self loop");
            if (e.from > e.to) add("canonical orientation", name, "edge must be stored as from < to");
            if (!seen.insert({std::min(e.from, e.to), std::max(e.from, e.to)}).second)
                add("edges stored once", name, "duplicate edge");
            if (comm) {
                if (!(e.alpha > 0.0)) add("positive communication weight", name, "alpha must be > 0");
            } else if (!(e.Y > 0.0)) {
                add("positive susceptance", name, "Y must be > 0");
            }
        }
        if (connected_components(edges, n) != 1)
            add(kind + " graph connected", kind + " graph", "graph is not connected");
    };
    check_edges(model.phys_edges, false);
    check_edges(model.comm_edges, true);

    if (!model.areas.empty()) {
        std::vector<int> count(static_cast<std::size_t>(n), 0);
        for (std::size_t k = 0; k < model.areas.size(); ++k) {
            const auto& area = model.areas[k];
            const auto name = "area " + std::to_string(k + 1);
            if (area.buses.empty()) add("non-empty areas", name, "area has no buses");
            for (int b : area.buses) {
                if (b < 0 || b >= n) {
                    add("area members in range", name, "member outside the bus range");
                    continue;
                }
                ++count[b];
            }
            if (std::find(area.buses.begin(), area.buses.end(), area.informed_bus) == area.buses.end())
                add("informed bus inside its area", name, "informed bus is not a member of the area");
        }
        for (int i = 0; i < n; ++i) {
            if (count[i] == 0) add("areas exhaustive", bus_name(i), "bus belongs to no area");
            if (count[i] > 1) add("areas disjoint", bus_name(i), "bus belongs to several areas");
        }
        const bool partition_ok = std::all_of(count.begin(), count.end(), [](int c) { return c == 1; });
        if (partition_ok) {
            std::vector<LineParams> intra;
            for (const auto& e : model.comm_edges)
                if (e.from >= 0 && e.from < n && e.to >= 0 && e.to < n && !model.is_inter_area(e))
                    intra.push_back(e);
            if (connected_components(intra, n) != model.n_areas())
                add("intra-area communication connected", "areas",
                    "communication graph without inter-area lines must have one component per area");
        }
    }
    return out;
}

}  // namespace freqctl
