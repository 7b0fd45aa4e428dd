#include "otmorph/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "otmorph/elliptic.hpp"
#include "otmorph/errors.hpp"
#include "otmorph/parallel.hpp"

namespace otm {

namespace {

double max_abs_difference(const SpaceTimeField& a, const SpaceTimeField& b) {
    double m = 0.0;
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t n = 0; n < va.size(); ++n) m = std::max(m, std::abs(va[n] - vb[n]));
    return m;
}

SpaceTimeField difference(const SpaceTimeField& a, const SpaceTimeField& b) {
    SpaceTimeField d(a.grid());
    auto vd = d.values();
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t n = 0; n < va.size(); ++n) vd[n] = va[n] - vb[n];
    return d;
}

}  // namespace

FixedPointResult run_fixed_point(const ScalarField2D& rho0, const ScalarField2D& rho1,
                                 const SolverConfig& cfg) {
    cfg.validate();
    if (!(rho0.grid() == rho1.grid())) throw ShapeError("endpoint grids differ");
    const auto t_start = std::chrono::steady_clock::now();

    const SpaceTimeGrid grid(rho0.grid(), cfg.nt);
    const Grid2D& g = grid.spatial();
    const int nt = grid.nt();
    const int ns = g.node_count();

    const SpaceTimeField lifting = interpolate_lifting(rho0, rho1, grid);
    SpaceTimeField rho = lifting;
    const double norm0 = l2_norm_q(rho);
    const double mass_ref = trapezoid_mass(rho0);
    const double clamp_floor = 0.5 * cfg.beta_min;

    FixedPointResult result{rho, VelocityField(grid), IterationReport{}};
    IterationReport& report = result.report;
    report.verdict = "max-iterations";

    for (int iter = 1; iter <= cfg.fp_max_iter; ++iter) {
        IterationRecord rec;
        rec.iteration = iter;
        rec.cg_eta_iterations.resize(nt);
        rec.cg_potential_iterations.resize(nt);
        rec.projection_residuals.resize(nt);
        rec.boundary_constants.resize(nt);
        rec.mass_drift.resize(nt);

        try {
            const SpaceTimeField dtrho = time_derivative(rho);
            VelocityField v(grid);

            parallel_for(nt, [&](int k) {
                const ScalarField2D rho_k = rho.slice(k);
                const ScalarField2D dtrho_k = dtrho.slice(k);
                const EtaResult aux = solve_eta_and_constant(rho_k, dtrho_k, cfg);
                rec.cg_eta_iterations[k] = aux.cg.iterations;
                rec.projection_residuals[k] = aux.projection_residual;
                rec.boundary_constants[k] = aux.constant;

                CgResult pot_cg;
                const ScalarField2D phi =
                    solve_potential(rho_k, dtrho_k, aux.constant, cfg, &pot_cg);
                rec.cg_potential_iterations[k] = pot_cg.iterations;

                const NodalVectors nv = velocity_from_potential(phi);
                auto vx = v.x_values().subspan(static_cast<std::size_t>(k) * ns, ns);
                auto vy = v.y_values().subspan(static_cast<std::size_t>(k) * ns, ns);
                std::copy(nv.x.begin(), nv.x.end(), vx.begin());
                std::copy(nv.y.begin(), nv.y.end(), vy.begin());
            });

            CgResult transport_cg;
            const LsqSystem sys =
                assemble_lsq(v, lifting, cfg, cfg.legacy_rhs ? &dtrho : nullptr);
            SpaceTimeField rho_new = solve_transport(sys, cfg, &transport_cg);
            rec.cg_transport_iterations = transport_cg.iterations;

            if (cfg.relaxation < 1.0) {
                auto vn = rho_new.values();
                auto vo = rho.values();
                for (std::size_t n = 0; n < vn.size(); ++n) {
                    vn[n] = vo[n] + cfg.relaxation * (vn[n] - vo[n]);
                }
            }

            auto vn = rho_new.values();
            for (double& value : vn) {
                if (value < clamp_floor) {
                    value = clamp_floor;
                    ++rec.clamped_nodes;
                }
            }
            if (rec.clamped_nodes > 0) {
                std::ostringstream msg;
                msg << "iteration " << iter << ": " << rec.clamped_nodes
                    << " node(s) clamped to the density floor " << clamp_floor;
                report.warnings.push_back(msg.str());
            }

            const SpaceTimeField diff = difference(rho_new, rho);
            rec.residual_l2 = l2_norm_q(diff) / norm0;
            rec.residual_max = max_abs_difference(rho_new, rho);
            rec.cost = bb_cost(rho_new, v);
            rec.lsq_residual = lsq_residual(rho_new, v);
            for (int k = 0; k < nt; ++k) {
                rec.mass_drift[k] =
                    std::abs(trapezoid_mass(rho_new.slice_span(k), g) - mass_ref) / mass_ref;
            }

            rho = std::move(rho_new);
            result.v = std::move(v);
        } catch (const SolverDivergenceError& e) {
            std::ostringstream msg;
            msg << "fixed-point iteration " << iter << ": " << e.what();
            throw SolverDivergenceError(msg.str(), e.final_residual, e.residual_history);
        }

        report.iterations.push_back(std::move(rec));
        if (report.iterations.back().residual_l2 <= cfg.fp_tol) {
            report.verdict = "converged";
            break;
        }
    }

    result.rho = std::move(rho);
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

ConservationResidual conservation_residual(const SpaceTimeField& rho, const VelocityField& v) {
    const SpaceTimeGrid& grid = rho.grid();
    if (!(v.grid() == grid)) throw ShapeError("density and velocity grids must match");
    const Grid2D& g = grid.spatial();
    const int ns = g.node_count();
    const SpaceTimeField dtrho = time_derivative(rho);

    // Per-slice quadrature of d_t rho + div(v rho), with the flux divergence
    // taken from the bilinear interpolant of the nodal products.
    const auto rule = QuadratureRule::gauss2(2);
    double shp[4][4], gx[4][4], gy[4][4];
    for (int q = 0; q < 4; ++q) {
        const auto se = shape_functions(ElementKind::quad4, rule.points[q].data());
        for (int a = 0; a < 4; ++a) {
            shp[q][a] = se.values[a];
            gx[q][a] = se.gradients[a][0] / g.hx();
            gy[q][a] = se.gradients[a][1] / g.hy();
        }
    }
    const double cell = g.hx() * g.hy();

    ConservationResidual out;
    out.per_slice.resize(grid.nt(), 0.0);
    const auto vx = v.x_values();
    const auto vy = v.y_values();
    for (int k = 0; k < grid.nt(); ++k) {
        const auto r = rho.slice_span(k);
        const auto dr = dtrho.slice_span(k);
        const std::size_t base = static_cast<std::size_t>(k) * ns;
        double acc = 0.0;
        for (int ej = 0; ej < g.ny() - 1; ++ej) {
            for (int ei = 0; ei < g.nx() - 1; ++ei) {
                const int nodes[4] = {g.node(ei, ej), g.node(ei + 1, ej), g.node(ei, ej + 1),
                                      g.node(ei + 1, ej + 1)};
                double mx[4], my[4];
                for (int a = 0; a < 4; ++a) {
                    mx[a] = vx[base + nodes[a]] * r[nodes[a]];
                    my[a] = vy[base + nodes[a]] * r[nodes[a]];
                }
                for (int q = 0; q < 4; ++q) {
                    double value = 0.0;
                    for (int a = 0; a < 4; ++a) {
                        value += shp[q][a] * dr[nodes[a]] + gx[q][a] * mx[a] + gy[q][a] * my[a];
                    }
                    acc += rule.weights[q] * cell * value * value;
                }
            }
        }
        out.per_slice[k] = std::sqrt(acc);
    }
    out.total = lsq_residual(rho, v);
    return out;
}

}  // namespace otm
