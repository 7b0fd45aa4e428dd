#include "otmorph/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "otmorph/errors.hpp"

namespace otm {

namespace {

// Quad shape values and physical gradients at the 2x2 Gauss points, cached
// once per grid spacing.
struct QuadTables {
    double values[4][4];
    double gx[4][4];
    double gy[4][4];
    double weight[4];  // includes the element Jacobian hx*hy
};

QuadTables make_tables(const Grid2D& grid) {
    QuadTables t{};
    const auto rule = QuadratureRule::gauss2(2);
    for (int q = 0; q < 4; ++q) {
        const auto se = shape_functions(ElementKind::quad4, rule.points[q].data());
        for (int a = 0; a < 4; ++a) {
            t.values[q][a] = se.values[a];
            t.gx[q][a] = se.gradients[a][0] / grid.hx();
            t.gy[q][a] = se.gradients[a][1] / grid.hy();
        }
        t.weight[q] = rule.weights[q] * grid.hx() * grid.hy();
    }
    return t;
}

void element_nodes(const Grid2D& grid, int ei, int ej, int out[4]) {
    out[0] = grid.node(ei, ej);
    out[1] = grid.node(ei + 1, ej);
    out[2] = grid.node(ei, ej + 1);
    out[3] = grid.node(ei + 1, ej + 1);
}

std::vector<Triplet> stiffness_triplets(const ScalarField2D& rho) {
    const Grid2D& grid = rho.grid();
    const QuadTables t = make_tables(grid);
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(grid.nx() - 1) * (grid.ny() - 1) * 16);
    auto vals = rho.values();
    for (int ej = 0; ej < grid.ny() - 1; ++ej) {
        for (int ei = 0; ei < grid.nx() - 1; ++ei) {
            int nodes[4];
            element_nodes(grid, ei, ej, nodes);
            double local[4][4] = {};
            for (int q = 0; q < 4; ++q) {
                double coeff = 0.0;
                for (int a = 0; a < 4; ++a) coeff += t.values[q][a] * vals[nodes[a]];
                const double w = t.weight[q] * coeff;
                for (int a = 0; a < 4; ++a) {
                    for (int b = 0; b < 4; ++b) {
                        local[a][b] += w * (t.gx[q][a] * t.gx[q][b] + t.gy[q][a] * t.gy[q][b]);
                    }
                }
            }
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    trip.push_back({nodes[a], nodes[b], local[a][b]});
                }
            }
        }
    }
    return trip;
}

void check_positive(const ScalarField2D& rho, double floor) {
    const double lo = rho.min_value();
    if (!(lo > floor)) {
        std::ostringstream msg;
        msg << "elliptic coefficient minimum " << lo << " is not above the positivity floor "
            << floor;
        throw EllipticityError(msg.str());
    }
}

}  // namespace

SparseOperator assemble_stiffness(const ScalarField2D& rho_slice, double positivity_floor) {
    check_positive(rho_slice, positivity_floor);
    return SparseOperator::from_triplets(rho_slice.grid().node_count(),
                                         stiffness_triplets(rho_slice));
}

std::vector<double> consistent_load(const ScalarField2D& f) {
    const Grid2D& grid = f.grid();
    const QuadTables t = make_tables(grid);
    std::vector<double> out(grid.node_count(), 0.0);
    auto vals = f.values();
    for (int ej = 0; ej < grid.ny() - 1; ++ej) {
        for (int ei = 0; ei < grid.nx() - 1; ++ei) {
            int nodes[4];
            element_nodes(grid, ei, ej, nodes);
            for (int q = 0; q < 4; ++q) {
                double fq = 0.0;
                for (int a = 0; a < 4; ++a) fq += t.values[q][a] * vals[nodes[a]];
                const double w = t.weight[q] * fq;
                for (int a = 0; a < 4; ++a) out[nodes[a]] += w * t.values[q][a];
            }
        }
    }
    return out;
}

ScalarField2D solve_potential(const ScalarField2D& rho_slice, const ScalarField2D& rhs_slice,
                              double C, const SolverConfig& cfg, CgResult* stats) {
    check_positive(rho_slice, 0.0);
    const Grid2D& grid = rho_slice.grid();
    const int n = grid.node_count();

    // Interior renumbering; boundary unknowns are eliminated (the boundary
    // value enters only as the additive constant C, which the operator kills).
    std::vector<int> interior_of(n, -1);
    int n_int = 0;
    for (int node = 0; node < n; ++node) {
        int i = node % grid.nx();
        int j = node / grid.nx();
        if (!grid.is_boundary(i, j)) interior_of[node] = n_int++;
    }

    std::vector<Triplet> trip = stiffness_triplets(rho_slice);
    std::vector<Triplet> reduced;
    reduced.reserve(trip.size());
    for (const Triplet& t : trip) {
        const int r = interior_of[t.row];
        const int c = interior_of[t.col];
        if (r >= 0 && c >= 0) reduced.push_back({r, c, t.value});
    }
    const SparseOperator A = SparseOperator::from_triplets(n_int, std::move(reduced));

    const std::vector<double> load = consistent_load(rhs_slice);
    std::vector<double> b(n_int);
    for (int node = 0; node < n; ++node) {
        if (interior_of[node] >= 0) b[interior_of[node]] = load[node];
    }

    std::vector<double> y(n_int, 0.0);
    const CgResult cg = cg_jacobi(A, b, y, cfg.cg_tol, cfg.cg_iteration_cap(n_int));
    if (stats) *stats = cg;
    if (!cg.converged) {
        throw SolverDivergenceError("potential solve did not reach the requested tolerance",
                                    cg.relative_residual, cg.residual_history);
    }

    std::vector<double> phi(n, C);
    for (int node = 0; node < n; ++node) {
        if (interior_of[node] >= 0) phi[node] += y[interior_of[node]];
    }
    return ScalarField2D(grid, std::move(phi));
}

EtaResult solve_eta_and_constant(const ScalarField2D& rho_slice, const ScalarField2D& dtrho_slice,
                                 const SolverConfig& cfg) {
    check_positive(rho_slice, 0.0);
    const Grid2D& grid = rho_slice.grid();
    const int n = grid.node_count();
    const SparseOperator A =
        SparseOperator::from_triplets(n, stiffness_triplets(rho_slice));

    // Boundary flux datum 1: g_i = integral of psi_i over the boundary, i.e.
    // half the length of each incident boundary edge. Corners collect from
    // both sides; the total is the perimeter 4.
    std::vector<double> g(n, 0.0);
    for (int i = 0; i < grid.nx() - 1; ++i) {
        for (int j : {0, grid.ny() - 1}) {
            g[grid.node(i, j)] += 0.5 * grid.hx();
            g[grid.node(i + 1, j)] += 0.5 * grid.hx();
        }
    }
    for (int j = 0; j < grid.ny() - 1; ++j) {
        for (int i : {0, grid.nx() - 1}) {
            g[grid.node(i, j)] += 0.5 * grid.hy();
            g[grid.node(i, j + 1)] += 0.5 * grid.hy();
        }
    }

    // The datum is incompatible with the zero interior source; remove the
    // component along the operator's kernel (constants).
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / n;
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = g[i] - mean;
    const double projection_residual = std::abs(mean) * std::sqrt(static_cast<double>(n));

    std::vector<double> eta(n, 0.0);
    const CgResult cg = cg_jacobi(A, b, eta, cfg.cg_tol, cfg.cg_iteration_cap(n),
                                  /*project_constant_kernel=*/true);
    if (!cg.converged) {
        throw SolverDivergenceError("auxiliary boundary-flux solve did not converge",
                                    cg.relative_residual, cg.residual_history);
    }

    // Zero-mean gauge in the continuous sense (|Omega| = 1).
    ScalarField2D eta_field(grid, std::move(eta));
    const double volume_mean = trapezoid_mass(eta_field);
    std::vector<double> gauged(eta_field.values().begin(), eta_field.values().end());
    for (double& v : gauged) v -= volume_mean;
    ScalarField2D eta_out(grid, std::move(gauged));

    const std::vector<double> m_dtrho = consistent_load(dtrho_slice);
    double integral = 0.0;
    for (int i = 0; i < n; ++i) integral += m_dtrho[i] * eta_out.values()[i];

    EtaResult out{std::move(eta_out), 0.25 * integral, projection_residual, cg};
    return out;
}

NodalVectors velocity_from_potential(const ScalarField2D& phi) {
    const Grid2D& grid = phi.grid();
    const int n = grid.node_count();
    NodalVectors v{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    std::vector<int> touch(n, 0);
    auto vals = phi.values();

    for (int ej = 0; ej < grid.ny() - 1; ++ej) {
        for (int ei = 0; ei < grid.nx() - 1; ++ei) {
            int nodes[4];
            element_nodes(grid, ei, ej, nodes);
            const double p00 = vals[nodes[0]], p10 = vals[nodes[1]];
            const double p01 = vals[nodes[2]], p11 = vals[nodes[3]];
            // Bilinear gradient evaluated at each corner (u, w in {0,1}).
            for (int c = 0; c < 4; ++c) {
                const double u = (c & 1) ? 1.0 : 0.0;
                const double w = (c & 2) ? 1.0 : 0.0;
                const double dx = ((p10 - p00) * (1 - w) + (p11 - p01) * w) / grid.hx();
                const double dy = ((p01 - p00) * (1 - u) + (p11 - p10) * u) / grid.hy();
                v.x[nodes[c]] += dx;
                v.y[nodes[c]] += dy;
                ++touch[nodes[c]];
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        v.x[i] /= touch[i];
        v.y[i] /= touch[i];
    }
    for (int bnode : grid.boundary_nodes()) {
        v.x[bnode] = 0.0;
        v.y[bnode] = 0.0;
    }
    return v;
}

}  // namespace otm
