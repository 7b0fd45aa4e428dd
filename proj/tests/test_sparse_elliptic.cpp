#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "otmorph/elliptic.hpp"
#include "otmorph/errors.hpp"
#include "otmorph/fields.hpp"
#include "otmorph/grid.hpp"
#include "otmorph/sparse.hpp"
#include "test_util.hpp"

using namespace otm;

TEST_CASE("triplets are summed and looked up") {
    std::vector<Triplet> t{{0, 0, 1.0}, {0, 0, 2.0}, {1, 1, 4.0}, {0, 1, -1.0},
                           {1, 0, -1.0}, {2, 2, 5.0}};
    SparseOperator A = SparseOperator::from_triplets(3, t);
    CHECK(A.size() == 3);
    CHECK(A.entry(0, 0) == doctest::Approx(3.0));
    CHECK(A.entry(0, 1) == doctest::Approx(-1.0));
    CHECK(A.entry(0, 2) == 0.0);
    CHECK(A.max_asymmetry() == doctest::Approx(0.0));

    std::vector<double> x{1.0, 2.0, 3.0}, y(3, 0.0);
    A.apply(x, y);
    CHECK(y[0] == doctest::Approx(1.0));
    CHECK(y[1] == doctest::Approx(7.0));
    CHECK(y[2] == doctest::Approx(15.0));

    auto d = A.diagonal();
    CHECK(d[0] == doctest::Approx(3.0));
    CHECK(d[2] == doctest::Approx(5.0));
}

TEST_CASE("cg solves a small SPD system") {
    // A = [[4,1,0],[1,3,1],[0,1,2]], b = A * (1,-2,3)
    std::vector<Triplet> t{{0, 0, 4.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0},
                           {1, 2, 1.0}, {2, 1, 1.0}, {2, 2, 2.0}};
    SparseOperator A = SparseOperator::from_triplets(3, t);
    std::vector<double> want{1.0, -2.0, 3.0}, b(3, 0.0);
    A.apply(want, b);

    std::vector<double> x(3, 0.0);
    CgResult r = cg_jacobi(A, b, x, 1e-12, 100);
    CHECK(r.converged);
    CHECK(r.iterations <= 3 + 1);
    for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(want[i]).epsilon(1e-10));
    CHECK_FALSE(r.residual_history.empty());
}

TEST_CASE("cg reports divergence via the result") {
    // coupled SPD system: one preconditioned step cannot reach 1e-16
    std::vector<Triplet> t{{0, 0, 4.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0},
                           {1, 2, 1.0}, {2, 1, 1.0}, {2, 2, 2.0}};
    SparseOperator A = SparseOperator::from_triplets(3, t);
    std::vector<double> b{1.0, -2.0, 0.5}, x(3, 0.0);
    CgResult r = cg_jacobi(A, b, x, 1e-16, 1);  // too few iterations
    CHECK_FALSE(r.converged);
}

TEST_CASE("stiffness matrix of the unit coefficient") {
    Grid2D g = Grid2D::unit_square(5, 5);
    ScalarField2D one(g, 1.0);
    SparseOperator A = assemble_stiffness(one);
    CHECK(A.size() == 25);

    // interior node diagonal of the bilinear Laplacian on a square mesh
    CHECK(A.entry(g.node(2, 2), g.node(2, 2)) == doctest::Approx(8.0 / 3.0).epsilon(1e-13));

    // constants are in the kernel: rows sum to zero
    std::vector<double> ones(25, 1.0), y(25, 0.0);
    A.apply(ones, y);
    for (double v : y) CHECK(std::fabs(v) < 1e-13);

    CHECK(A.max_asymmetry() < 1e-14);

    // linear in the coefficient
    ScalarField2D two(g, 2.0);
    SparseOperator A2 = assemble_stiffness(two);
    auto va = A.values();
    auto vb = A2.values();
    REQUIRE(va.size() == vb.size());
    for (std::size_t m = 0; m < va.size(); ++m)
        CHECK(vb[m] == doctest::Approx(2.0 * va[m]).epsilon(1e-13));
}

TEST_CASE("ellipticity guard") {
    Grid2D g = Grid2D::unit_square(4, 4);
    ScalarField2D rho(g, 1.0);
    rho.at(2, 1) = 0.05;
    CHECK_THROWS_AS(assemble_stiffness(rho, 0.1), EllipticityError);
    CHECK_NOTHROW(assemble_stiffness(rho, 0.01));
}

TEST_CASE("consistent load integrates the constant") {
    Grid2D g = Grid2D::unit_square(9, 9);
    ScalarField2D one(g, 1.0);
    auto b = consistent_load(one);
    double total = 0.0;
    for (double v : b) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));  // integral of 1 over the square
}

TEST_CASE("dirichlet solve with zero rhs is the boundary constant") {
    Grid2D g = Grid2D::unit_square(9, 9);
    ScalarField2D one(g, 1.0), zero(g, 0.0);
    SolverConfig cfg;
    ScalarField2D phi = solve_potential(one, zero, 5.0, cfg);
    for (double v : phi.values()) CHECK(v == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("manufactured solution converges at second order") {
    SolverConfig cfg;
    auto err = [&](int n) {
        Grid2D g = Grid2D::unit_square(n, n);
        ScalarField2D one(g, 1.0), rhs(g), exact(g);
        const double pi = std::numbers::pi;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double s = std::sin(pi * g.x(i)) * std::sin(pi * g.y(j));
                exact.at(i, j) = s;
                rhs.at(i, j) = 2.0 * pi * pi * s;
            }
        CgResult stats;
        ScalarField2D phi = solve_potential(one, rhs, 0.0, cfg, &stats);
        CHECK(stats.converged);
        CHECK(stats.relative_residual <= cfg.cg_tol);
        ScalarField2D diff = phi;
        for (int m = 0; m < g.node_count(); ++m) diff[m] -= exact[m];
        return l2_norm_slice(diff.values(), g);
    };
    double e8 = err(9), e16 = err(17);
    double ratio = e8 / e16;
    CHECK(ratio > 3.2);
    CHECK(ratio < 4.8);
}

TEST_CASE("variable coefficient solve stays symmetric positive") {
    Grid2D g = Grid2D::unit_square(9, 9);
    ScalarField2D rho = testutil::gaussian_bump(g, 0.5, 0.5, 0.2, 0.8, 0.2);
    SparseOperator A = assemble_stiffness(rho, 0.1);
    CHECK(A.max_asymmetry() < 1e-14);
    // x' A x >= 0 on a few vectors
    std::vector<double> x(g.node_count()), y(g.node_count());
    for (int trial = 0; trial < 3; ++trial) {
        for (int m = 0; m < g.node_count(); ++m) x[m] = std::sin(0.7 * (m + 1) * (trial + 1));
        A.apply(x, y);
        double q = 0.0;
        for (int m = 0; m < g.node_count(); ++m) q += x[m] * y[m];
        CHECK(q >= -1e-12);
    }
}

TEST_CASE("boundary constant shifts the potential, not the velocity") {
    Grid2D g = Grid2D::unit_square(17, 17);
    ScalarField2D rho = testutil::gaussian_bump(g, 0.45, 0.55, 0.2, 0.8, 0.2);
    ScalarField2D rhs = testutil::gaussian_bump(g, 0.6, 0.4, 0.15, 1.0, -0.5);
    SolverConfig cfg;
    ScalarField2D p0 = solve_potential(rho, rhs, 0.0, cfg);
    ScalarField2D p7 = solve_potential(rho, rhs, 7.0, cfg);
    for (int m = 0; m < g.node_count(); ++m)
        CHECK(p7[m] - p0[m] == doctest::Approx(7.0).epsilon(1e-12));

    NodalVectors v0 = velocity_from_potential(p0);
    NodalVectors v7 = velocity_from_potential(p7);
    CHECK(testutil::max_abs_diff(v0.x, v7.x) < 1e-11);
    CHECK(testutil::max_abs_diff(v0.y, v7.y) < 1e-11);
}

TEST_CASE("velocity recovery of a linear potential") {
    Grid2D g = Grid2D::unit_square(9, 9);
    ScalarField2D phi(g);
    for (int j = 0; j < 9; ++j)
        for (int i = 0; i < 9; ++i) phi.at(i, j) = g.x(i);
    NodalVectors v = velocity_from_potential(phi);
    for (int j = 0; j < 9; ++j)
        for (int i = 0; i < 9; ++i) {
            int n = g.node(i, j);
            if (g.is_boundary(i, j)) {
                CHECK(v.x[n] == 0.0);
                CHECK(v.y[n] == 0.0);
            } else {
                CHECK(v.x[n] == doctest::Approx(1.0).epsilon(1e-13));
                CHECK(v.y[n] == doctest::Approx(0.0));
            }
        }
}

TEST_CASE("auxiliary neumann problem") {
    Grid2D g = Grid2D::unit_square(17, 17);
    SolverConfig cfg;
    ScalarField2D rho = testutil::gaussian_bump(g, 0.5, 0.5, 0.25, 0.6, 0.3);

    SUBCASE("zero dtrho gives zero constant") {
        ScalarField2D zero(g, 0.0);
        EtaResult r = solve_eta_and_constant(rho, zero, cfg);
        CHECK(r.constant == 0.0);
        CHECK(std::fabs(trapezoid_mass(r.eta)) < 1e-10);
        CHECK(r.cg.converged);
    }

    SUBCASE("incompatible flux component is the projected mean") {
        ScalarField2D dt = testutil::gaussian_bump(g, 0.4, 0.6, 0.2, 0.5, -0.25);
        EtaResult r = solve_eta_and_constant(rho, dt, cfg);
        // load total is the perimeter 4; removing the mean leaves 4/sqrt(n)
        CHECK(r.projection_residual ==
              doctest::Approx(4.0 / std::sqrt(double(g.node_count()))).epsilon(1e-10));
        CHECK(std::fabs(trapezoid_mass(r.eta)) < 1e-10);
    }

    SUBCASE("constant stabilizes under refinement") {
        ScalarField2D dt17 = testutil::gaussian_bump(g, 0.4, 0.6, 0.2, 0.5, -0.25);
        EtaResult r17 = solve_eta_and_constant(rho, dt17, cfg);

        Grid2D g33 = Grid2D::unit_square(33, 33);
        ScalarField2D rho33 = testutil::gaussian_bump(g33, 0.5, 0.5, 0.25, 0.6, 0.3);
        ScalarField2D dt33 = testutil::gaussian_bump(g33, 0.4, 0.6, 0.2, 0.5, -0.25);
        EtaResult r33 = solve_eta_and_constant(rho33, dt33, cfg);

        CHECK(r17.constant == doctest::Approx(r33.constant).epsilon(0.08));
    }
}
