#pragma once

#include <string>
#include <vector>

#include "otmorph/config.hpp"
#include "otmorph/fields.hpp"
#include "otmorph/transport.hpp"

namespace otm {

// Everything observed during one fixed-point sweep.
struct IterationRecord {
    int iteration = 0;           // 1-based
    double residual_l2 = 0.0;    // ||rho_new - rho_old||_{L2(Q)} / ||rho^0||_{L2(Q)}
    double residual_max = 0.0;   // max-norm of the same difference
    double cost = 0.0;           // transport cost of the new iterate
    double lsq_residual = 0.0;   // squared conservation residual of the new iterate
    int clamped_nodes = 0;       // values lifted back to beta_min/2
    int cg_transport_iterations = 0;
    std::vector<int> cg_eta_iterations;        // per slice
    std::vector<int> cg_potential_iterations;  // per slice
    std::vector<double> projection_residuals;  // per slice, incompatible-load norm
    std::vector<double> boundary_constants;    // C(t_k)
    std::vector<double> mass_drift;            // per slice, relative to the endpoint mass
};

struct IterationReport {
    std::vector<IterationRecord> iterations;
    std::string verdict;  // "converged" or "max-iterations"
    double elapsed_seconds = 0.0;
    std::vector<std::string> warnings;

    bool converged() const { return verdict == "converged"; }
};

struct FixedPointResult {
    SpaceTimeField rho;
    VelocityField v;
    IterationReport report;
};

// The alternating elliptic/transport iteration. Starts from the lifting,
// recomputes the velocity from the current density slice by slice (these
// solves run concurrently when OTMORPH_THREADS allows), then replaces the
// density with the least-squares transport solution, until consecutive
// iterates agree to cfg.fp_tol in relative L2(Q) or cfg.fp_max_iter is
// reached. Non-convergence is reported in the verdict, not thrown.
FixedPointResult run_fixed_point(const ScalarField2D& rho0, const ScalarField2D& rho1,
                                 const SolverConfig& cfg);

struct ConservationResidual {
    std::vector<double> per_slice;  // L2 norm of d_t rho + div(v rho) per slice
    double total = 0.0;             // the space-time squared-residual integral
};

// Strong-form conservation check used by reports and verification.
ConservationResidual conservation_residual(const SpaceTimeField& rho, const VelocityField& v);

}  // namespace otm
