// Command-line front end: morph two densities, verify a finished run, or run
// the mesh-refinement studies.
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "otmorph/cli_commands.hpp"
#include "otmorph/config_io.hpp"
#include "otmorph/errors.hpp"

namespace {

// Numeric flags only override the config file when actually given on the
// command line, so precedence is defaults < file < flags.
struct FlagOverrides {
    int nx = 0, ny = 0, nt = 0, fp_max_iter = 0, rk4_substeps = 0;
    double beta_min = 0, boundary_tol = 0, cg_tol = 0, fp_tol = 0, lsq_eps = 0, relaxation = 0;
    bool legacy_rhs = false;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal-transport density morphing"};
    app.require_subcommand(1);

    otm::RunManifest manifest;
    std::string config_path;
    std::string studies_csv = "elliptic,transport";
    FlagOverrides flags;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_flag("--json-errors", manifest.json_errors,
                      "machine-readable errors on standard error");
        cmd->add_option("--config", config_path, "flat JSON config file");
        cmd->add_option("--nx", flags.nx, "grid nodes along x");
        cmd->add_option("--ny", flags.ny, "grid nodes along y");
        cmd->add_option("--nt", flags.nt, "time slices");
        cmd->add_option("--beta-min", flags.beta_min, "density floor");
        cmd->add_option("--boundary-tol", flags.boundary_tol, "boundary mismatch tolerance");
        cmd->add_option("--cg-tol", flags.cg_tol, "CG relative tolerance");
        cmd->add_option("--fp-tol", flags.fp_tol, "fixed-point tolerance");
        cmd->add_option("--fp-max-iter", flags.fp_max_iter, "fixed-point iteration cap");
        cmd->add_option("--lsq-eps", flags.lsq_eps, "Tikhonov shift for the transport solve");
        cmd->add_option("--rk4-substeps", flags.rk4_substeps, "flow substeps per slice");
        cmd->add_option("--relaxation", flags.relaxation, "fixed-point damping factor");
        cmd->add_flag("--legacy-rhs", flags.legacy_rhs, "add the extra time-derivative load term");
    };

    CLI::App* morph = app.add_subcommand("morph", "compute the optimal morph between two images");
    morph->add_option("--rho0", manifest.rho0_path, "first endpoint image (PGM)")->required();
    morph->add_option("--rho1", manifest.rho1_path, "second endpoint image (PGM)")->required();
    morph->add_option("--out", manifest.out_dir, "output directory")->required();
    morph->add_option("--format", manifest.frame_format, "frame format: pgm16 or csv")
        ->check(CLI::IsMember({"pgm16", "csv"}));
    add_common(morph);

    CLI::App* verify = app.add_subcommand("verify", "check a run directory against the oracles");
    verify->add_option("--run", manifest.out_dir, "run directory to verify")->required();
    verify->add_option("--seed", manifest.seed, "sampling seed");
    verify->add_flag("--json-errors", manifest.json_errors,
                     "machine-readable errors on standard error");

    CLI::App* conv = app.add_subcommand("convergence", "mesh-refinement studies");
    conv->add_option("--out", manifest.out_dir, "output directory")->required();
    conv->add_option("--studies", studies_csv, "comma-separated study list (may be empty)");
    add_common(conv);

    CLI11_PARSE(app, argc, argv);

    try {
        otm::SolverConfig cfg;
        if (!config_path.empty()) cfg = otm::load_config_file(config_path, cfg);

        const auto picked = [&](CLI::App* cmd, const std::string& name) {
            return cmd->count(name) > 0;
        };
        CLI::App* active = morph->parsed() ? morph : (conv->parsed() ? conv : nullptr);
        if (active) {
            if (picked(active, "--nx")) cfg.nx = flags.nx;
            if (picked(active, "--ny")) cfg.ny = flags.ny;
            if (picked(active, "--nt")) cfg.nt = flags.nt;
            if (picked(active, "--beta-min")) cfg.beta_min = flags.beta_min;
            if (picked(active, "--boundary-tol")) cfg.boundary_tol = flags.boundary_tol;
            if (picked(active, "--cg-tol")) cfg.cg_tol = flags.cg_tol;
            if (picked(active, "--fp-tol")) cfg.fp_tol = flags.fp_tol;
            if (picked(active, "--fp-max-iter")) cfg.fp_max_iter = flags.fp_max_iter;
            if (picked(active, "--lsq-eps")) cfg.lsq_eps = flags.lsq_eps;
            if (picked(active, "--rk4-substeps")) cfg.rk4_substeps = flags.rk4_substeps;
            if (picked(active, "--relaxation")) cfg.relaxation = flags.relaxation;
            if (picked(active, "--legacy-rhs")) cfg.legacy_rhs = flags.legacy_rhs;
        }
        manifest.cfg = cfg;

        manifest.studies.clear();
        std::size_t start = 0;
        while (start <= studies_csv.size() && !studies_csv.empty()) {
            const std::size_t comma = studies_csv.find(',', start);
            const std::string item = studies_csv.substr(
                start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!item.empty()) manifest.studies.push_back(item);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }

        if (morph->parsed()) return otm::cmd_morph(manifest);
        if (verify->parsed()) return otm::cmd_verify(manifest);
        return otm::cmd_convergence(manifest);
    } catch (const otm::Error& e) {
        if (manifest.json_errors) {
            fprintf(stderr, "{\"error\":{\"type\":\"error\",\"message\":\"%s\"}}\n", e.what());
        } else {
            fprintf(stderr, "error: %s\n", e.what());
        }
        return otm::exit_error;
    }
}
