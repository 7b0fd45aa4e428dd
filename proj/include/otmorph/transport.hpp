#pragma once

#include <vector>

#include "otmorph/config.hpp"
#include "otmorph/fields.hpp"
#include "otmorph/sparse.hpp"

namespace otm {

// Normal system of the space-time least-squares functional
//   J(c) = 1/2 * integral over Q of (d_t(lifting+c) + div(v*(lifting+c)))^2.
// Degrees of freedom are the spatial nodes of time slices 1..nt-2; the
// endpoint slices carry the data through the lifting and are never unknowns.
struct LsqSystem {
    SparseOperator op;         // J's Hessian (plus eps * mass matrix if configured)
    std::vector<double> load;  // -dJ/dc at c = 0, i.e. J(c) = 1/2 c'Ac - load'c + j0
    SpaceTimeField lifting;
    double j0 = 0.0;  // J(0) for the pure conservation functional (no shift terms)
};

// Assembles the least-squares system with 2x2x2 Gauss on bricks; the velocity
// is interpolated trilinearly inside each brick from its per-slice nodal
// values. When cfg.legacy_rhs is set and dtrho_prev is given, the load
// additionally carries the previous iterate's time derivative tested against
// the residual operator (kept for comparison; the plain load already encodes
// the full conservation residual of lifting + c).
LsqSystem assemble_lsq(const VelocityField& v, const SpaceTimeField& lifting,
                       const SolverConfig& cfg, const SpaceTimeField* dtrho_prev = nullptr);

// Solves the assembled system by CG and returns lifting + correction. The
// endpoint slices of the result are bitwise those of the lifting.
SpaceTimeField solve_transport(const LsqSystem& sys, const SolverConfig& cfg,
                               CgResult* stats = nullptr);

// Quadrature value of the squared conservation residual
// integral over Q of (d_t rho + div(v rho))^2, i.e. twice the functional J.
double lsq_residual(const SpaceTimeField& rho, const VelocityField& v);

// Transport cost integral over Q of rho * |v|^2 with the same brick quadrature.
double bb_cost(const SpaceTimeField& rho, const VelocityField& v);

}  // namespace otm
