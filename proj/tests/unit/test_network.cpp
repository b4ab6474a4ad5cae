#include "fixtures.hpp"

#include "freqctl/network.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

using namespace freqctl;
using Catch::Matchers::WithinAbs;

TEST_CASE("single edge incidence", "[network]") {
    const Matrix D = incidence_matrix({{0, 1, 1.0, 1.0}}, 2);
    REQUIRE(D.rows() == 2);
    REQUIRE(D.cols() == 1);
    CHECK(D(0, 0) == -1.0);
    CHECK(D(1, 0) == 1.0);
}

TEST_CASE("no edges gives an empty incidence", "[network]") {
    const Matrix D = incidence_matrix({}, 3);
    CHECK(D.rows() == 3);
    CHECK(D.cols() == 0);
}

TEST_CASE("incidence columns sum to zero", "[network]") {
    const auto m = fixtures::five_bus();
    const Matrix D = incidence_matrix(m.phys_edges, m.n_buses());
    CHECK(D.colwise().sum().cwiseAbs().maxCoeff() == 0.0);
    CHECK(D.cwiseAbs().colwise().sum().minCoeff() == 2.0);
}

TEST_CASE("edge outside the node range throws", "[network]") {
    CHECK_THROWS_AS(incidence_matrix({{0, 3, 1.0, 1.0}}, 3), std::out_of_range);
}

TEST_CASE("path laplacian", "[network]") {
    const Matrix L = laplacian({{0, 1, 0.0, 1.0}, {1, 2, 0.0, 2.0}}, 3);
    Matrix expected(3, 3);
    expected << 1, -1, 0, -1, 3, -2, 0, -2, 2;
    CHECK((L - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("laplacian is symmetric, PSD, with ones in the kernel", "[network]") {
    const auto m = fixtures::five_bus();
    const Matrix L = laplacian(m.comm_edges, m.n_buses());
    CHECK((L - L.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((L * Vector::Ones(5)).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Matrix> es(L);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK_THAT(es.eigenvalues()[0], WithinAbs(0.0, 1e-12));
    CHECK(es.eigenvalues()[1] > 1e-6);  // connected
}

TEST_CASE("nonpositive weight rejected by the laplacian", "[network]") {
    CHECK_THROWS_AS(laplacian({{0, 1, 0.0, 0.0}}, 2), std::invalid_argument);
}

TEST_CASE("canonical orientation", "[network]") {
    const auto e = canonical({3, 1, 2.0, 1.0});
    CHECK(e.from == 1);
    CHECK(e.to == 3);
    CHECK(e.Y == 2.0);
    CHECK_THROWS_AS(canonical({2, 2, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("area matrices", "[network]") {
    const auto m = fixtures::five_bus_areas();
    const auto a = area_matrices(m);
    REQUIRE(a.E_K.rows() == 2);
    REQUIRE(a.E_K.cols() == 5);
    CHECK(a.E_K.colwise().sum().minCoeff() == 1.0);
    CHECK(a.E_K.colwise().sum().maxCoeff() == 1.0);
    CHECK((a.E_K * a.J - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.E_K * a.L_K).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((a.D_hat - tie_line_incidence(m)).cwiseAbs().maxCoeff() == 0.0);
    // boundary lines are 2-3 (index 2) and 4-5 (index 5)
    CHECK(a.D_hat(0, 2) == -1.0);
    CHECK(a.D_hat(1, 2) == 1.0);
    CHECK(a.D_hat(0, 5) == -1.0);
    CHECK(a.D_hat(1, 5) == 1.0);
    CHECK(a.D_hat.col(0).cwiseAbs().sum() == 0.0);
}

TEST_CASE("single implicit area", "[network]") {
    const auto m = fixtures::five_bus();
    const auto a = area_matrices(m);
    CHECK(a.E_K.rows() == 1);
    CHECK(a.D_hat.cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.n_areas() == 1);
}

TEST_CASE("validation of the benchmark model", "[network]") {
    CHECK(validate(fixtures::five_bus()).empty());
    CHECK(validate(fixtures::five_bus_areas()).empty());
}

TEST_CASE("disconnected communication graph is one violation", "[network]") {
    auto m = fixtures::five_bus();
    m.comm_edges.pop_back();  // 4-5
    m.comm_edges.erase(m.comm_edges.begin() + 1);  // 1-4 leaves bus 4 isolated
    const auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].invariant == "communication graph connected");
}

TEST_CASE("zero communication weight is one violation", "[network]") {
    auto m = fixtures::five_bus();
    m.comm_edges[2].alpha = 0.0;
    const auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].invariant == "positive communication weight");
}

TEST_CASE("parameter violations are reported per element", "[network]") {
    auto m = fixtures::five_bus();
    m.buses[0].M = 0.0;
    m.buses[1].cost_q = -1.0;
    m.buses[2].pM_min = 1.0;
    m.buses[2].pM_max = 0.5;
    const auto v = validate(m);
    REQUIRE(v.size() == 3);
    CHECK(v[0].element == "bus 1");
    CHECK(v[1].element == "bus 2");
    CHECK(v[2].invariant == "ordered generation bounds");
}

TEST_CASE("area partition violations", "[network]") {
    auto m = fixtures::five_bus_areas();
    m.areas[1].buses = {2};  // bus 5 orphaned
    bool orphan = false;
    for (const auto& v : validate(m)) orphan |= v.invariant == "areas exhaustive";
    CHECK(orphan);
    m = fixtures::five_bus_areas();
    m.areas[0].informed_bus = 4;
    bool informed = false;
    for (const auto& v : validate(m)) informed |= v.invariant == "informed bus inside its area";
    CHECK(informed);
}

TEST_CASE("connected components", "[network]") {
    CHECK(connected_components({}, 0) == 0);
    CHECK(connected_components({}, 3) == 3);
    CHECK(connected_components({{0, 1, 1, 1}}, 3) == 2);
}
