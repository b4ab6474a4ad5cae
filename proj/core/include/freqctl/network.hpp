#pragma once

// Network topology, bus/line parameters and the graph-algebra objects built
// from them (incidence matrices, Laplacians, area matrices).
//
// Buses are addressed by a dense 0-based index everywhere in the library.
// External (1-based) ids only appear at the I/O boundary.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace freqctl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class BusKind { generator, load };

struct BusParams {
    int id = 0;  // external id (1-based)
    BusKind kind = BusKind::load;
    double M = 0.0;       // inertia, generators only
    double Lambda = 0.0;  // frequency damping
    double tau = 0.0;     // generation time constant, generators only
    double k_g = 1.0;
    double k_c = 1.0;
    double cost_q = 0.0;  // Q(p) = q/2 (p - c)^2
    double cost_c = 0.0;
    double pL = 0.0;      // uncontrollable demand after all load events
    std::optional<double> pM_min;
    std::optional<double> pM_max;

    bool is_generator() const { return kind == BusKind::generator; }
};

/// Undirected edge with canonical orientation from < to (bus indices).
/// Physical lines use Y, communication lines use alpha.
struct LineParams {
    int from = 0;
    int to = 0;
    double Y = 0.0;
    double alpha = 1.0;
};

struct Area {
    std::vector<int> buses;  // bus indices
    double schedule = 0.0;   // scheduled net tie-line exchange
    int informed_bus = -1;   // the single bus that knows the schedule
};

struct NetworkModel {
    std::vector<BusParams> buses;
    std::vector<LineParams> phys_edges;
    std::vector<LineParams> comm_edges;
    std::vector<Area> areas;  // empty means a single implicit area

    int n_buses() const { return static_cast<int>(buses.size()); }
    /// Bus indices of generators, ascending.
    std::vector<int> generators() const;
    /// Bus indices of load buses, ascending.
    std::vector<int> loads() const;
    /// Area index per bus (all zeros when no partition is configured).
    std::vector<int> area_of_bus() const;
    int n_areas() const { return areas.empty() ? 1 : static_cast<int>(areas.size()); }
    /// True when the comm edge joins buses of different areas.
    bool is_inter_area(const LineParams& edge) const;
};

/// Returns the edge with from < to. Throws std::invalid_argument on a self loop.
LineParams canonical(LineParams edge);

/// D[i][e] = -1 if edge e leaves node i, +1 if it enters it.
Matrix incidence_matrix(const std::vector<LineParams>& edges, int n_nodes);

/// Weighted Laplacian D W D^T with W = diag(alpha).
Matrix laplacian(const std::vector<LineParams>& comm_edges, int n_nodes);

struct AreaMatrices {
    Matrix E_K;    // |K| x |N| area indicator rows
    Matrix D_hat;  // |K| x |E| tie-line incidence (E_K * D)
    Matrix J;      // |N| x |K| schedule knowledge
    Matrix L_K;    // Laplacian of the comm graph without inter-area lines
};

AreaMatrices area_matrices(const NetworkModel& model);

/// Tie-line incidence built directly from boundary-line membership.
Matrix tie_line_incidence(const NetworkModel& model);

struct Violation {
    std::string invariant;
    std::string element;
    std::string message;
};

/// Empty iff every parameter invariant and connectivity condition holds.
std::vector<Violation> validate(const NetworkModel& model);

/// Number of connected components of the graph on n nodes.
int connected_components(const std::vector<LineParams>& edges, int n_nodes);

}  // namespace freqctl
