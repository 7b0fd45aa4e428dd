#pragma once

#include <string>

namespace otm {

/// All numerical knobs the method leaves open, with the defaults the solver
/// and CLI share. Flat-JSON serializable; see config_io.
struct SolverConfig {
    double beta_min = 0.1;        // density floor (0, 0.5]
    double boundary_tol = 0.05;   // max allowed |rho0-rho1| on the boundary
    double cg_tol = 1e-10;        // relative CG residual
    int cg_max_iter = 0;          // 0 = automatic (10 * unknowns)
    double lsq_eps = 0.0;         // Tikhonov shift on the transport system
    double fp_tol = 1e-6;         // fixed-point relative L2(Q) tolerance
    int fp_max_iter = 50;
    int nx = 33;
    int ny = 33;
    int nt = 11;
    int rk4_substeps = 8;         // flow-integration substeps per slice interval
    bool legacy_rhs = false;      // add the extra d/dt rho^n load term
    double relaxation = 1.0;      // fixed-point update damping (1 = plain)

    int cg_iteration_cap(int unknowns) const {
        return cg_max_iter > 0 ? cg_max_iter : 10 * unknowns;
    }

    /// Throws Error when a field violates its invariant.
    void validate() const;
};

}  // namespace otm
