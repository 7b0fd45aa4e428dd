#pragma once

#include <span>
#include <vector>

#include "otmorph/config.hpp"
#include "otmorph/fields.hpp"

namespace otm {

// One integrated characteristic: positions X(s_j) from s_0 = t to s_N =
// s_target. Positions are clamped into the closed unit square (the velocity
// vanishes outside the domain, so a true trajectory cannot exit);
// clamp_drift records the largest correction that was necessary.
struct FlowTrajectory {
    int direction = +1;
    std::vector<double> times;
    std::vector<Vec2> positions;
    double clamp_drift = 0.0;

    Vec2 end() const { return positions.back(); }
};

// Integrates dX/ds = direction * v(s, X) from X(t) = x to s_target with
// classical RK4, cfg.rk4_substeps uniform substeps per slice interval.
FlowTrajectory trace_flow(const VelocityField& v, int direction, double s_target, double t,
                          Vec2 x, const SolverConfig& cfg);

// Convenience wrapper returning only the final position; *clamp_drift (when
// given) receives the trajectory's clamp correction.
Vec2 integrate_flow(const VelocityField& v, int direction, double s_target, double t, Vec2 x,
                    const SolverConfig& cfg, double* clamp_drift = nullptr);

// Trapezoid accumulation of the velocity divergence along a trajectory,
// with div v evaluated by central differences of the interpolated field
// (step hx/2), deliberately independent of the FEM assembly code.
double divergence_along(const FlowTrajectory& traj, const VelocityField& v);

// Two-endpoint representation formula evaluated at every space-time node:
//   rho(t,x) = (1-t) rho0^2(X+(0,t,x))/rho_prev(t,x)
//            +    t  rho1^2(X+(1,t,x))/rho_prev(t,x).
// Throws DivisionGuardError naming the node if rho_prev dips below
// cfg.beta_min/2.
SpaceTimeField representation_density(const SpaceTimeField& rho_prev, const VelocityField& v,
                                      const ScalarField2D& rho0, const ScalarField2D& rho1,
                                      const SolverConfig& cfg);

// Exponential-weighted two-endpoint solution of the conservation law along
// the characteristic through (t, x):
//   (1-t) e^{-int_0^t div v} rho0(X+(0,t,x)) + t e^{int_t^1 div v} rho1(X+(1,t,x)).
double ode_lsq_solution(const VelocityField& v, double t, Vec2 x, const ScalarField2D& rho0,
                        const ScalarField2D& rho1, const SolverConfig& cfg);

// Checks the Liouville identity det D_x X+(s,t,x) = exp(int_t^s div v) at the
// given sample points (Jacobian by central differences of four perturbed flow
// integrations). Returns the maximum relative deviation.
double liouville_check(const VelocityField& v, std::span<const Vec2> samples, double s_target,
                       double t, const SolverConfig& cfg);

// Squared 2-Wasserstein distance between two positive 1D densities sampled on
// a common uniform grid over [0,1], by inversion of piecewise-linear CDFs at
// mass_points midpoint quadrature masses. Requires equal total mass.
double w2_1d_oracle(std::span<const double> f, std::span<const double> g,
                    int mass_points = 100000);

}  // namespace otm
