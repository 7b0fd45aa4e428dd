#pragma once

#include <string>

#include <json.hpp>

#include "otmorph/config.hpp"
#include "otmorph/driver.hpp"

namespace otm {

// Flat-JSON view of SolverConfig; every field materialized.
nlohmann::json config_to_json(const SolverConfig& cfg);

// Applies the keys present in j on top of base; unknown keys are an error so
// typos cannot silently fall back to defaults.
SolverConfig config_from_json(const nlohmann::json& j, SolverConfig base = SolverConfig{});

// Reads a flat-JSON config file over the defaults.
SolverConfig load_config_file(const std::string& path, SolverConfig base = SolverConfig{});

// Full run report: config echo, per-iteration history arrays, the last
// iteration's per-slice data, verdict and timings.
nlohmann::json report_to_json(const SolverConfig& cfg, const IterationReport& report);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace otm
