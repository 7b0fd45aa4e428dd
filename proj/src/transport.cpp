#include "otmorph/transport.hpp"

#include <array>
#include <cmath>

#include "otmorph/errors.hpp"

namespace otm {

namespace {

// Trilinear shape data at the 2x2x2 Gauss points with physical scaling.
struct BrickTables {
    double values[8][8];
    double gx[8][8];
    double gy[8][8];
    double gt[8][8];
    double weight[8];  // includes the brick Jacobian hx*hy*dt
};

BrickTables make_tables(const SpaceTimeGrid& grid) {
    BrickTables t{};
    const Grid2D& g = grid.spatial();
    const auto rule = QuadratureRule::gauss2(3);
    for (int q = 0; q < 8; ++q) {
        const auto se = shape_functions(ElementKind::brick8, rule.points[q].data());
        for (int a = 0; a < 8; ++a) {
            t.values[q][a] = se.values[a];
            t.gx[q][a] = se.gradients[a][0] / g.hx();
            t.gy[q][a] = se.gradients[a][1] / g.hy();
            t.gt[q][a] = se.gradients[a][2] / grid.dt();
        }
        t.weight[q] = rule.weights[q] * g.hx() * g.hy() * grid.dt();
    }
    return t;
}

struct BrickWalk {
    const SpaceTimeGrid& grid;
    int ei, ej, ek;
    std::int64_t nodes[8];

    explicit BrickWalk(const SpaceTimeGrid& g) : grid(g), ei(0), ej(0), ek(0) { fill(); }

    void fill() {
        for (int c = 0; c < 8; ++c) {
            nodes[c] = grid.node(ei + (c & 1), ej + ((c >> 1) & 1), ek + ((c >> 2) & 1));
        }
    }
    bool next() {
        const Grid2D& g = grid.spatial();
        if (++ei == g.nx() - 1) {
            ei = 0;
            if (++ej == g.ny() - 1) {
                ej = 0;
                if (++ek == grid.nt() - 1) return false;
            }
        }
        fill();
        return true;
    }
};

// The residual operator applied to basis function a at one quadrature point:
// D(phi_a) = d_t phi_a + v . grad phi_a + (div v) phi_a.
struct PointOperator {
    double d[8];
    double n[8];
    double vdiv;

    PointOperator(const BrickTables& t, int q, const double* vx, const double* vy) {
        double v1 = 0.0, v2 = 0.0, dv = 0.0;
        for (int a = 0; a < 8; ++a) {
            v1 += t.values[q][a] * vx[a];
            v2 += t.values[q][a] * vy[a];
            dv += t.gx[q][a] * vx[a] + t.gy[q][a] * vy[a];
        }
        vdiv = dv;
        for (int a = 0; a < 8; ++a) {
            n[a] = t.values[q][a];
            d[a] = t.gt[q][a] + v1 * t.gx[q][a] + v2 * t.gy[q][a] + dv * t.values[q][a];
        }
    }
};

}  // namespace

LsqSystem assemble_lsq(const VelocityField& v, const SpaceTimeField& lifting,
                       const SolverConfig& cfg, const SpaceTimeField* dtrho_prev) {
    const SpaceTimeGrid& grid = lifting.grid();
    if (!(v.grid() == grid) || (dtrho_prev && !(dtrho_prev->grid() == grid))) {
        throw ShapeError("velocity, lifting and previous-iterate grids must match");
    }
    const Grid2D& g = grid.spatial();
    const int ns = g.node_count();
    const int nt = grid.nt();
    const std::int64_t n_free = static_cast<std::int64_t>(nt - 2) * ns;

    const BrickTables t = make_tables(grid);
    const bool legacy = cfg.legacy_rhs && dtrho_prev != nullptr;

    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(g.nx() - 1) * (g.ny() - 1) * (nt - 1) * 64);
    std::vector<double> load(static_cast<std::size_t>(n_free), 0.0);
    double j0_acc = 0.0;

    const auto vx = v.x_values();
    const auto vy = v.y_values();
    const auto lift = lifting.values();

    BrickWalk walk(grid);
    do {
        double cvx[8], cvy[8], clift[8], cdt[8];
        int dof[8];
        for (int c = 0; c < 8; ++c) {
            const std::int64_t node = walk.nodes[c];
            cvx[c] = vx[node];
            cvy[c] = vy[node];
            clift[c] = lift[node];
            cdt[c] = legacy ? dtrho_prev->values()[node] : 0.0;
            const int k = walk.ek + ((c >> 2) & 1);
            dof[c] = (k >= 1 && k <= nt - 2) ? static_cast<int>(node - ns) : -1;
        }

        double local[8][8] = {};
        double local_load[8] = {};
        for (int q = 0; q < 8; ++q) {
            const PointOperator op(t, q, cvx, cvy);
            const double w = t.weight[q];
            double dlift = 0.0, dtq = 0.0;
            for (int a = 0; a < 8; ++a) {
                dlift += op.d[a] * clift[a];
                dtq += op.n[a] * cdt[a];
            }
            j0_acc += w * dlift * dlift;
            for (int a = 0; a < 8; ++a) {
                const double da = w * op.d[a];
                for (int b = a; b < 8; ++b) local[a][b] += da * op.d[b];
                local_load[a] -= da * dlift;
                if (legacy) local_load[a] -= w * op.d[a] * dtq;
            }
            if (cfg.lsq_eps > 0.0) {
                for (int a = 0; a < 8; ++a) {
                    const double na = w * cfg.lsq_eps * op.n[a];
                    for (int b = a; b < 8; ++b) local[a][b] += na * op.n[b];
                }
            }
        }

        for (int a = 0; a < 8; ++a) {
            if (dof[a] < 0) continue;
            load[dof[a]] += local_load[a];
            for (int b = 0; b < 8; ++b) {
                if (dof[b] < 0) continue;
                trip.push_back({dof[a], dof[b], (a <= b) ? local[a][b] : local[b][a]});
            }
        }
    } while (walk.next());

    LsqSystem sys{SparseOperator::from_triplets(static_cast<int>(n_free), std::move(trip)),
                  std::move(load), lifting, 0.5 * j0_acc};
    return sys;
}

SpaceTimeField solve_transport(const LsqSystem& sys, const SolverConfig& cfg, CgResult* stats) {
    const SpaceTimeGrid& grid = sys.lifting.grid();
    const int ns = grid.spatial().node_count();
    const int n_free = static_cast<int>(sys.load.size());

    std::vector<double> c(sys.load.size(), 0.0);
    const CgResult cg =
        cg_jacobi(sys.op, sys.load, c, cfg.cg_tol, cfg.cg_iteration_cap(n_free));
    if (stats) *stats = cg;
    if (!cg.converged) {
        throw SolverDivergenceError("transport least-squares solve did not converge",
                                    cg.relative_residual, cg.residual_history);
    }

    SpaceTimeField rho = sys.lifting;
    for (int k = 1; k <= grid.nt() - 2; ++k) {
        auto slice = rho.slice_span(k);
        const std::size_t base = static_cast<std::size_t>(k - 1) * ns;
        for (int n = 0; n < ns; ++n) slice[n] += c[base + n];
    }
    return rho;
}

double lsq_residual(const SpaceTimeField& rho, const VelocityField& v) {
    const SpaceTimeGrid& grid = rho.grid();
    if (!(v.grid() == grid)) throw ShapeError("density and velocity grids must match");
    const BrickTables t = make_tables(grid);
    const auto vx = v.x_values();
    const auto vy = v.y_values();
    const auto vals = rho.values();

    double acc = 0.0;
    BrickWalk walk(grid);
    do {
        double cvx[8], cvy[8], cr[8];
        for (int c = 0; c < 8; ++c) {
            cvx[c] = vx[walk.nodes[c]];
            cvy[c] = vy[walk.nodes[c]];
            cr[c] = vals[walk.nodes[c]];
        }
        for (int q = 0; q < 8; ++q) {
            const PointOperator op(t, q, cvx, cvy);
            double r = 0.0;
            for (int a = 0; a < 8; ++a) r += op.d[a] * cr[a];
            acc += t.weight[q] * r * r;
        }
    } while (walk.next());
    return acc;
}

double bb_cost(const SpaceTimeField& rho, const VelocityField& v) {
    const SpaceTimeGrid& grid = rho.grid();
    if (!(v.grid() == grid)) throw ShapeError("density and velocity grids must match");
    const BrickTables t = make_tables(grid);
    const auto vx = v.x_values();
    const auto vy = v.y_values();
    const auto vals = rho.values();

    double acc = 0.0;
    BrickWalk walk(grid);
    do {
        double cvx[8], cvy[8], cr[8];
        for (int c = 0; c < 8; ++c) {
            cvx[c] = vx[walk.nodes[c]];
            cvy[c] = vy[walk.nodes[c]];
            cr[c] = vals[walk.nodes[c]];
        }
        for (int q = 0; q < 8; ++q) {
            double v1 = 0.0, v2 = 0.0, rq = 0.0;
            for (int a = 0; a < 8; ++a) {
                v1 += t.values[q][a] * cvx[a];
                v2 += t.values[q][a] * cvy[a];
                rq += t.values[q][a] * cr[a];
            }
            acc += t.weight[q] * rq * (v1 * v1 + v2 * v2);
        }
    } while (walk.next());
    return acc;
}

}  // namespace otm
