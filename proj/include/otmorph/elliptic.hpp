#pragma once

#include <vector>

#include "otmorph/config.hpp"
#include "otmorph/fields.hpp"
#include "otmorph/sparse.hpp"

namespace otm {

// Nodal 2D vectors on one spatial grid (one time slice's worth of velocity).
struct NodalVectors {
    std::vector<double> x;
    std::vector<double> y;
};

// Stiffness matrix of -div(rho grad .) with bilinear elements and the
// coefficient interpolated bilinearly; 2x2 Gauss per element, 9-point pattern.
// Throws EllipticityError if the coefficient does not exceed positivity_floor
// everywhere.
SparseOperator assemble_stiffness(const ScalarField2D& rho_slice, double positivity_floor = 0.0);

// Consistent load vector b_i = integral of f_h * psi_i (mass matrix applied to
// the nodal field), same quadrature as the stiffness assembly.
std::vector<double> consistent_load(const ScalarField2D& f);

// Dirichlet problem -div(rho grad phi) = rhs with phi = C on the boundary.
// Internally solves for the zero-boundary part and adds C afterwards, so the
// gradient of the result does not depend on C. Fills *stats when given.
ScalarField2D solve_potential(const ScalarField2D& rho_slice, const ScalarField2D& rhs_slice,
                              double C, const SolverConfig& cfg, CgResult* stats = nullptr);

struct EtaResult {
    ScalarField2D eta;
    double constant = 0.0;             // C = (1/4) * integral of dtrho * eta
    double projection_residual = 0.0;  // norm of the incompatible load component removed
    CgResult cg;
};

// Auxiliary pure-Neumann problem -div(rho grad eta) = 0 with unit boundary
// flux datum. The datum is incompatible (its total is the perimeter, not 0),
// so the load is projected onto the operator's range; eta is gauged to zero
// mean. Also evaluates the per-slice boundary constant from dtrho.
EtaResult solve_eta_and_constant(const ScalarField2D& rho_slice, const ScalarField2D& dtrho_slice,
                                 const SolverConfig& cfg);

// Nodal gradient of phi: average of the bilinear element gradients over the
// elements touching each node, then hard zero on boundary nodes.
NodalVectors velocity_from_potential(const ScalarField2D& phi);

}  // namespace otm
