#include "otmorph/config_io.hpp"

#include <fstream>

#include "otmorph/errors.hpp"

namespace otm {

nlohmann::json config_to_json(const SolverConfig& cfg) {
    return nlohmann::json{{"beta_min", cfg.beta_min},
                          {"boundary_tol", cfg.boundary_tol},
                          {"cg_tol", cfg.cg_tol},
                          {"cg_max_iter", cfg.cg_max_iter},
                          {"lsq_eps", cfg.lsq_eps},
                          {"fp_tol", cfg.fp_tol},
                          {"fp_max_iter", cfg.fp_max_iter},
                          {"nx", cfg.nx},
                          {"ny", cfg.ny},
                          {"nt", cfg.nt},
                          {"rk4_substeps", cfg.rk4_substeps},
                          {"legacy_rhs", cfg.legacy_rhs},
                          {"relaxation", cfg.relaxation}};
}

SolverConfig config_from_json(const nlohmann::json& j, SolverConfig base) {
    if (!j.is_object()) throw Error("config must be a flat JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "beta_min") base.beta_min = value.get<double>();
            else if (key == "boundary_tol") base.boundary_tol = value.get<double>();
            else if (key == "cg_tol") base.cg_tol = value.get<double>();
            else if (key == "cg_max_iter") base.cg_max_iter = value.get<int>();
            else if (key == "lsq_eps") base.lsq_eps = value.get<double>();
            else if (key == "fp_tol") base.fp_tol = value.get<double>();
            else if (key == "fp_max_iter") base.fp_max_iter = value.get<int>();
            else if (key == "nx") base.nx = value.get<int>();
            else if (key == "ny") base.ny = value.get<int>();
            else if (key == "nt") base.nt = value.get<int>();
            else if (key == "rk4_substeps") base.rk4_substeps = value.get<int>();
            else if (key == "legacy_rhs") base.legacy_rhs = value.get<bool>();
            else if (key == "relaxation") base.relaxation = value.get<double>();
            else throw Error("unknown config key: " + key);
        } catch (const nlohmann::json::exception& e) {
            throw Error("config key '" + key + "': " + e.what());
        }
    }
    base.validate();
    return base;
}

SolverConfig load_config_file(const std::string& path, SolverConfig base) {
    return config_from_json(read_json_file(path), base);
}

nlohmann::json report_to_json(const SolverConfig& cfg, const IterationReport& report) {
    nlohmann::json history{{"residual_l2", nlohmann::json::array()},
                           {"residual_max", nlohmann::json::array()},
                           {"cost", nlohmann::json::array()},
                           {"lsq_residual", nlohmann::json::array()},
                           {"clamped_nodes", nlohmann::json::array()},
                           {"cg_transport_iterations", nlohmann::json::array()}};
    for (const IterationRecord& rec : report.iterations) {
        history["residual_l2"].push_back(rec.residual_l2);
        history["residual_max"].push_back(rec.residual_max);
        history["cost"].push_back(rec.cost);
        history["lsq_residual"].push_back(rec.lsq_residual);
        history["clamped_nodes"].push_back(rec.clamped_nodes);
        history["cg_transport_iterations"].push_back(rec.cg_transport_iterations);
    }

    nlohmann::json out{{"config", config_to_json(cfg)},
                       {"verdict", report.verdict},
                       {"iterations", report.iterations.size()},
                       {"elapsed_seconds", report.elapsed_seconds},
                       {"warnings", report.warnings},
                       {"history", history}};
    if (!report.iterations.empty()) {
        const IterationRecord& last = report.iterations.back();
        double max_drift = 0.0;
        for (double d : last.mass_drift) max_drift = std::max(max_drift, d);
        out["per_slice"] = nlohmann::json{{"boundary_constants", last.boundary_constants},
                                          {"projection_residuals", last.projection_residuals},
                                          {"mass_drift", last.mass_drift},
                                          {"cg_eta_iterations", last.cg_eta_iterations},
                                          {"cg_potential_iterations", last.cg_potential_iterations}};
        out["final"] = nlohmann::json{{"cost", last.cost},
                                      {"lsq_residual", last.lsq_residual},
                                      {"residual_l2", last.residual_l2},
                                      {"max_mass_drift", max_drift}};
    }
    return out;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw ExportError(path + ": cannot open file for writing");
    out << j.dump(2) << "\n";
    if (!out) throw ExportError(path + ": write failed");
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError(path + ": cannot open file");
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(path + ": malformed JSON: " + e.what());
    }
}

}  // namespace otm
