#pragma once

#include <string>
#include <utility>

#include "otmorph/config.hpp"
#include "otmorph/fields.hpp"

namespace otm {

// Reads a PGM image and resamples it bilinearly onto the grid nodes.
// Intensities are mapped affinely from [0, maxval] to [0, 1]; no floor is
// applied yet (prepare_pair handles that).
ScalarField2D load_density(const std::string& path, const Grid2D& grid);

// Conditions a raw endpoint pair for the solver:
//   1. remaps both fields jointly and affinely into [beta_min, 1],
//   2. rejects pairs whose boundary traces differ by more than boundary_tol
//      (hypothesis H2 requires equal traces),
//   3. alternates boundary harmonization (common pointwise average) with a
//      total-mass rescale of the second field until the masses agree to
//      rounding,
//   4. lifts both fields by a common additive constant if the rescale pushed
//      any value below beta_min, so the floor holds exactly.
// Throws DegenerateInputError on non-positive input mass and
// HypothesisViolationError on a boundary mismatch.
std::pair<ScalarField2D, ScalarField2D> prepare_pair(const ScalarField2D& rho0_raw,
                                                     const ScalarField2D& rho1_raw,
                                                     const SolverConfig& cfg);

enum class FrameFormat { pgm16, csv };

// Writes one file per time slice into dir, named frame_0000.<ext> onward.
// pgm16 frames share a single affine map from the [min, max] of the whole
// sequence so brightness is comparable across frames; csv frames list
// "x,y,value" rows in row-major node order.
void export_frames(const SpaceTimeField& rho, const std::string& dir, FrameFormat format);

}  // namespace otm
