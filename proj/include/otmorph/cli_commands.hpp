#pragma once

#include <string>
#include <vector>

#include "otmorph/config.hpp"

namespace otm {

// Exit codes shared by all commands.
inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_not_converged = 2;
inline constexpr int exit_verify_failed = 3;

struct RunManifest {
    std::string rho0_path;
    std::string rho1_path;
    std::string out_dir;    // morph/convergence output, or the run dir for verify
    SolverConfig cfg;       // fully resolved (defaults, file, flag overrides)
    std::string frame_format = "pgm16";  // or "csv"
    std::vector<std::string> studies{"elliptic", "transport"};
    unsigned seed = 12345;
    bool json_errors = false;
};

// morph: ingest the pair, run the fixed point, export frames, fields and the
// JSON report. 0 on convergence, 2 on max-iterations, 1 on error.
int cmd_morph(const RunManifest& manifest);

// verify: reload a run directory and check it against the independent
// characteristics/Wasserstein oracles; writes verify.json. 0 when every check
// passes, 3 on any failed check, 1 on missing/unreadable artifacts.
int cmd_verify(const RunManifest& manifest);

// convergence: mesh-refinement studies (manufactured elliptic case,
// prescribed-velocity transport case); writes convergence.csv. 0 on success.
int cmd_convergence(const RunManifest& manifest);

}  // namespace otm
