#include "otmorph/config.hpp"

#include "otmorph/errors.hpp"

namespace otm {

void SolverConfig::validate() const {
    if (!(beta_min > 0.0 && beta_min <= 0.5)) throw Error("beta_min must be in (0, 0.5]");
    if (!(boundary_tol > 0.0)) throw Error("boundary_tol must be positive");
    if (!(cg_tol > 0.0)) throw Error("cg_tol must be positive");
    if (cg_max_iter < 0) throw Error("cg_max_iter must be >= 0");
    if (!(lsq_eps >= 0.0)) throw Error("lsq_eps must be >= 0");
    if (!(fp_tol > 0.0)) throw Error("fp_tol must be positive");
    if (fp_max_iter < 1) throw Error("fp_max_iter must be >= 1");
    if (nx < 3 || ny < 3 || nt < 3) throw Error("nx, ny, nt must each be >= 3");
    if (rk4_substeps < 1) throw Error("rk4_substeps must be >= 1");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw Error("relaxation must be in (0, 1]");
}

}  // namespace otm
