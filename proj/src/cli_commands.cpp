#include "otmorph/cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "otmorph/config_io.hpp"
#include "otmorph/driver.hpp"
#include "otmorph/elliptic.hpp"
#include "otmorph/errors.hpp"
#include "otmorph/image_io.hpp"
#include "otmorph/oracle.hpp"
#include "otmorph/persist.hpp"
#include "otmorph/transport.hpp"

namespace otm {

namespace {

namespace fs = std::filesystem;

void emit_error(const RunManifest& manifest, const std::string& kind, const std::string& message) {
    if (manifest.json_errors) {
        nlohmann::json j{{"error", {{"type", kind}, {"message", message}}}};
        std::cerr << j.dump() << "\n";
    } else {
        std::cerr << "error: " << message << "\n";
    }
}

std::string error_kind(const Error& e) {
    if (dynamic_cast<const IngestionError*>(&e)) return "ingestion";
    if (dynamic_cast<const HypothesisViolationError*>(&e)) return "hypothesis-violation";
    if (dynamic_cast<const DegenerateInputError*>(&e)) return "degenerate-input";
    if (dynamic_cast<const SolverDivergenceError*>(&e)) return "solver-divergence";
    if (dynamic_cast<const EllipticityError*>(&e)) return "ellipticity";
    if (dynamic_cast<const DivisionGuardError*>(&e)) return "division-guard";
    if (dynamic_cast<const ExportError*>(&e)) return "export";
    if (dynamic_cast<const ShapeError*>(&e)) return "shape";
    if (dynamic_cast<const InvalidGridError*>(&e)) return "invalid-grid";
    if (dynamic_cast<const OutOfRangeError*>(&e)) return "out-of-range";
    return "error";
}

std::vector<std::int64_t> field_dims(const SpaceTimeGrid& grid) {
    return {grid.nt(), grid.spatial().ny(), grid.spatial().nx()};
}

void save_run_artifacts(const std::string& dir, const ScalarField2D& rho0,
                        const ScalarField2D& rho1, const FixedPointResult& result) {
    const SpaceTimeGrid& grid = result.rho.grid();
    const Grid2D& g = grid.spatial();
    const std::vector<std::int64_t> dims3 = field_dims(grid);
    const std::vector<std::int64_t> dims2{g.ny(), g.nx()};
    const std::string order3 = "t-slice-major, then y, x fastest";
    const std::string order2 = "row-major, x fastest";

    save_raw_field((fs::path(dir) / "rho.raw").string(), result.rho.values(), dims3, order3);
    save_raw_field((fs::path(dir) / "vx.raw").string(), result.v.x_values(), dims3, order3);
    save_raw_field((fs::path(dir) / "vy.raw").string(), result.v.y_values(), dims3, order3);
    save_raw_field((fs::path(dir) / "rho0.raw").string(), rho0.values(), dims2, order2);
    save_raw_field((fs::path(dir) / "rho1.raw").string(), rho1.values(), dims2, order2);
}

}  // namespace

int cmd_morph(const RunManifest& manifest) {
    try {
        manifest.cfg.validate();
        std::error_code ec;
        fs::create_directories(manifest.out_dir, ec);
        if (ec) throw ExportError(manifest.out_dir + ": cannot create output directory");

        const Grid2D grid = Grid2D::unit_square(manifest.cfg.nx, manifest.cfg.ny);
        const ScalarField2D raw0 = load_density(manifest.rho0_path, grid);
        const ScalarField2D raw1 = load_density(manifest.rho1_path, grid);
        const auto [rho0, rho1] = prepare_pair(raw0, raw1, manifest.cfg);

        const FixedPointResult result = run_fixed_point(rho0, rho1, manifest.cfg);

        const FrameFormat format =
            manifest.frame_format == "csv" ? FrameFormat::csv : FrameFormat::pgm16;
        export_frames(result.rho, manifest.out_dir, format);
        save_run_artifacts(manifest.out_dir, rho0, rho1, result);
        write_json_file((fs::path(manifest.out_dir) / "config.json").string(),
                        config_to_json(manifest.cfg));
        write_json_file((fs::path(manifest.out_dir) / "report.json").string(),
                        report_to_json(manifest.cfg, result.report));

        return result.report.converged() ? exit_ok : exit_not_converged;
    } catch (const Error& e) {
        emit_error(manifest, error_kind(e), e.what());
        return exit_error;
    } catch (const std::exception& e) {
        emit_error(manifest, "error", e.what());
        return exit_error;
    }
}

namespace {

struct CheckOutcome {
    bool ran = false;
    bool passed = false;
    nlohmann::json details;
};

nlohmann::json outcome_json(const CheckOutcome& c) {
    nlohmann::json j = c.details.is_null() ? nlohmann::json::object() : c.details;
    j["status"] = !c.ran ? "skipped" : (c.passed ? "pass" : "fail");
    return j;
}

// Runs one verification check, turning thrown errors into a failed outcome
// (corrupt artifacts must fail verification, not crash it).
template <typename Fn>
CheckOutcome run_check(Fn&& fn) {
    CheckOutcome out;
    out.ran = true;
    try {
        fn(out);
    } catch (const std::exception& e) {
        out.passed = false;
        out.details["error"] = e.what();
    }
    return out;
}

bool is_y_constant(const ScalarField2D& f) {
    const Grid2D& g = f.grid();
    for (int i = 0; i < g.nx(); ++i) {
        for (int j = 1; j < g.ny(); ++j) {
            if (std::abs(f.at(i, j) - f.at(i, 0)) > 1e-12) return false;
        }
    }
    return true;
}

}  // namespace

int cmd_verify(const RunManifest& manifest) {
    constexpr double representation_tol = 5e-2;
    constexpr double mass_drift_tol = 1e-2;
    constexpr double duality_tol = 1e-6;  // reversed-field identity, RK4-limited
    constexpr double w2_tol = 0.10;

    SolverConfig cfg;
    SpaceTimeGrid grid = build_space_time_grid(3, 3, 3);
    std::vector<double> rho_raw, vx_raw, vy_raw, rho0_raw, rho1_raw;
    bool integrity_ok = true;
    std::vector<std::string> corrupt;
    try {
        const fs::path run(manifest.out_dir);
        cfg = config_from_json(read_json_file((run / "config.json").string()));

        const auto load = [&](const char* name, std::vector<double>& dst,
                              std::vector<std::int64_t>* dims = nullptr) {
            RawFieldInfo info;
            dst = load_raw_field((run / name).string(), &info, /*require_checksum=*/false);
            if (!info.checksum_ok) {
                integrity_ok = false;
                corrupt.push_back(name);
            }
            if (dims) *dims = info.dims;
        };

        std::vector<std::int64_t> dims;
        load("rho.raw", rho_raw, &dims);
        if (dims.size() != 3) throw IngestionError("rho.raw: expected 3 dims");
        grid = build_space_time_grid(static_cast<int>(dims[2]), static_cast<int>(dims[1]),
                                     static_cast<int>(dims[0]));
        load("vx.raw", vx_raw);
        load("vy.raw", vy_raw);
        load("rho0.raw", rho0_raw);
        load("rho1.raw", rho1_raw);

        const auto expect = [&](const std::vector<double>& v, std::size_t n, const char* name) {
            if (v.size() != n) {
                throw IngestionError(std::string(name) +
                                     ": element count does not match the run's grid");
            }
        };
        const std::size_t n3 = static_cast<std::size_t>(grid.node_count());
        const std::size_t n2 = static_cast<std::size_t>(grid.spatial().node_count());
        expect(rho_raw, n3, "rho.raw");
        expect(vx_raw, n3, "vx.raw");
        expect(vy_raw, n3, "vy.raw");
        expect(rho0_raw, n2, "rho0.raw");
        expect(rho1_raw, n2, "rho1.raw");
    } catch (const Error& e) {
        emit_error(manifest, error_kind(e), e.what());
        return exit_error;
    }

    SpaceTimeField rho(grid);
    std::copy(rho_raw.begin(), rho_raw.end(), rho.values().begin());
    VelocityField v(grid);
    std::copy(vx_raw.begin(), vx_raw.end(), v.x_values().begin());
    std::copy(vy_raw.begin(), vy_raw.end(), v.y_values().begin());
    const ScalarField2D rho0(grid.spatial(), rho0_raw);
    const ScalarField2D rho1(grid.spatial(), rho1_raw);

    CheckOutcome integrity;
    integrity.ran = true;
    integrity.passed = integrity_ok;
    integrity.details["corrupt_files"] = corrupt;

    const CheckOutcome representation = run_check([&](CheckOutcome& out) {
        const SpaceTimeField rep = representation_density(rho, v, rho0, rho1, cfg);
        double num = 0.0;
        auto a = rep.values();
        auto b = rho.values();
        SpaceTimeField diff(grid);
        auto d = diff.values();
        for (std::size_t n = 0; n < a.size(); ++n) d[n] = a[n] - b[n];
        num = l2_norm_q(diff) / l2_norm_q(rho);
        out.details["relative_l2"] = num;
        out.details["tolerance"] = representation_tol;
        out.passed = num <= representation_tol;
    });

    const CheckOutcome conservation = run_check([&](CheckOutcome& out) {
        const double mass_ref = trapezoid_mass(rho0);
        double worst = 0.0;
        for (int k = 0; k < grid.nt(); ++k) {
            worst = std::max(worst, std::abs(trapezoid_mass(rho.slice_span(k), grid.spatial()) -
                                             mass_ref) /
                                        mass_ref);
        }
        const bool endpoints_exact =
            std::memcmp(rho.slice_span(0).data(), rho0.values().data(),
                        rho0.values().size() * sizeof(double)) == 0 &&
            std::memcmp(rho.slice_span(grid.nt() - 1).data(), rho1.values().data(),
                        rho1.values().size() * sizeof(double)) == 0;
        const ConservationResidual res = conservation_residual(rho, v);
        out.details["max_mass_drift"] = worst;
        out.details["tolerance"] = mass_drift_tol;
        out.details["endpoints_bitwise"] = endpoints_exact;
        out.details["residual_total"] = res.total;
        out.passed = worst <= mass_drift_tol && endpoints_exact;
    });

    const CheckOutcome duality = run_check([&](CheckOutcome& out) {
        // X-(1-s,1-t,x) integrated in the time-reversed field equals
        // X+(s,t,x) for any velocity; only RK4 error separates the two.
        VelocityField reversed(grid);
        const int ns = grid.spatial().node_count();
        for (int k = 0; k < grid.nt(); ++k) {
            const int kr = grid.nt() - 1 - k;
            std::copy_n(v.x_values().begin() + static_cast<std::ptrdiff_t>(kr) * ns, ns,
                        reversed.x_values().begin() + static_cast<std::ptrdiff_t>(k) * ns);
            std::copy_n(v.y_values().begin() + static_cast<std::ptrdiff_t>(kr) * ns, ns,
                        reversed.y_values().begin() + static_cast<std::ptrdiff_t>(k) * ns);
        }
        std::mt19937 rng(manifest.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_real_distribution<double> inner(0.05, 0.95);
        double worst = 0.0;
        for (int n = 0; n < 128; ++n) {
            const double s = unit(rng), t = unit(rng);
            const Vec2 x{inner(rng), inner(rng)};
            const Vec2 fwd = integrate_flow(v, +1, s, t, x, cfg);
            const Vec2 bwd = integrate_flow(reversed, -1, 1.0 - s, 1.0 - t, x, cfg);
            worst = std::max(worst, std::hypot(fwd.x - bwd.x, fwd.y - bwd.y));
        }
        out.details["max_deviation"] = worst;
        out.details["tolerance"] = duality_tol;
        out.details["samples"] = 128;
        out.passed = worst <= duality_tol;
    });

    CheckOutcome w2;
    if (is_y_constant(rho0) && is_y_constant(rho1)) {
        w2 = run_check([&](CheckOutcome& out) {
            const Grid2D& g = grid.spatial();
            std::vector<double> f(g.nx()), h(g.nx());
            for (int i = 0; i < g.nx(); ++i) {
                f[i] = rho0.at(i, 0);
                h[i] = rho1.at(i, 0);
            }
            const double reference = w2_1d_oracle(f, h);
            const double cost = bb_cost(rho, v);
            const double rel = std::abs(cost - reference) / reference;
            out.details["cost"] = cost;
            out.details["w2_oracle"] = reference;
            out.details["relative_error"] = rel;
            out.details["tolerance"] = w2_tol;
            out.passed = rel <= w2_tol;
        });
    }

    nlohmann::json checks{{"artifact_integrity", outcome_json(integrity)},
                          {"representation", outcome_json(representation)},
                          {"conservation", outcome_json(conservation)},
                          {"flow_duality", outcome_json(duality)},
                          {"w2_match", outcome_json(w2)}};
    const bool all_pass = integrity.passed && representation.passed && conservation.passed &&
                          duality.passed && (!w2.ran || w2.passed);
    nlohmann::json summary{{"checks", checks}, {"passed", all_pass}, {"seed", manifest.seed}};
    try {
        write_json_file((fs::path(manifest.out_dir) / "verify.json").string(), summary);
    } catch (const Error& e) {
        emit_error(manifest, error_kind(e), e.what());
        return exit_error;
    }
    return all_pass ? exit_ok : exit_verify_failed;
}

namespace {

struct StudyRow {
    std::string name;
    double h;
    double error;
};

// Manufactured Dirichlet case: coefficient 1, solution sin(pi x) sin(pi y).
double elliptic_study_error(int n, const SolverConfig& base) {
    SolverConfig cfg = base;
    const Grid2D grid = Grid2D::unit_square(n, n);
    const double pi = std::acos(-1.0);
    ScalarField2D rho(grid, 1.0);
    ScalarField2D rhs(grid);
    ScalarField2D exact(grid);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double sx = std::sin(pi * grid.x(i)) * std::sin(pi * grid.y(j));
            exact.at(i, j) = sx;
            rhs.at(i, j) = 2.0 * pi * pi * sx;
        }
    }
    const ScalarField2D phi = solve_potential(rho, rhs, 0.0, cfg);
    std::vector<double> diff(grid.node_count());
    for (int m = 0; m < grid.node_count(); ++m) diff[m] = phi[m] - exact[m];
    return l2_norm_slice(diff, grid);
}

// Prescribed rigid translation: constant velocity (0.2, 0) carried into the
// least-squares solve (boundary zeroing deliberately relaxed); the exact
// solution is the translated bump.
double transport_study_error(int n, const SolverConfig& base) {
    SolverConfig cfg = base;
    cfg.nt = (n - 1) / 2 + 1;
    const Grid2D grid = Grid2D::unit_square(n, n);
    const SpaceTimeGrid st(grid, cfg.nt);
    const double shift = 0.2;

    const auto profile = [](double x, double y, double cx) {
        const double dx = x - cx;
        const double dy = y - 0.5;
        return 0.25 + 0.6 * std::exp(-(dx * dx + dy * dy) / (2 * 0.12 * 0.12));
    };
    ScalarField2D rho0(grid), rho1(grid);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            rho0.at(i, j) = profile(grid.x(i), grid.y(j), 0.3);
            rho1.at(i, j) = profile(grid.x(i), grid.y(j), 0.3 + shift);
        }
    }

    VelocityField v(st);
    std::fill(v.x_values().begin(), v.x_values().end(), shift);

    const SpaceTimeField lifting = interpolate_lifting(rho0, rho1, st);
    const LsqSystem sys = assemble_lsq(v, lifting, cfg);
    const SpaceTimeField solved = solve_transport(sys, cfg);

    SpaceTimeField diff(st);
    for (int k = 0; k < st.nt(); ++k) {
        const double t = st.t(k);
        auto d = diff.slice_span(k);
        auto s = solved.slice_span(k);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const int node = grid.node(i, j);
                d[node] = s[node] - profile(grid.x(i), grid.y(j), 0.3 + shift * t);
            }
        }
    }
    return l2_norm_q(diff) / l2_norm_q(lifting);
}

}  // namespace

int cmd_convergence(const RunManifest& manifest) {
    try {
        manifest.cfg.validate();
        std::error_code ec;
        fs::create_directories(manifest.out_dir, ec);
        if (ec) throw ExportError(manifest.out_dir + ": cannot create output directory");

        std::vector<StudyRow> rows;
        for (const std::string& study : manifest.studies) {
            if (study == "elliptic") {
                for (int n : {9, 17, 33}) {
                    rows.push_back({"elliptic", 1.0 / (n - 1), elliptic_study_error(n, manifest.cfg)});
                }
            } else if (study == "transport") {
                for (int n : {9, 17, 33}) {
                    rows.push_back({"transport", 1.0 / (n - 1), transport_study_error(n, manifest.cfg)});
                }
            } else {
                throw Error("unknown convergence study: " + study);
            }
        }

        const std::string path = (fs::path(manifest.out_dir) / "convergence.csv").string();
        std::FILE* f = std::fopen(path.c_str(), "w");
        if (!f) throw ExportError(path + ": cannot open file for writing");
        std::fputs("case,h,error,order\n", f);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const bool has_prev = r > 0 && rows[r - 1].name == rows[r].name;
            if (has_prev) {
                const double order = std::log2(rows[r - 1].error / rows[r].error) /
                                     std::log2(rows[r - 1].h / rows[r].h);
                std::fprintf(f, "%s,%.12g,%.12g,%.6g\n", rows[r].name.c_str(), rows[r].h,
                             rows[r].error, order);
            } else {
                std::fprintf(f, "%s,%.12g,%.12g,\n", rows[r].name.c_str(), rows[r].h,
                             rows[r].error);
            }
        }
        if (std::fclose(f) != 0) throw ExportError(path + ": write failed");
        return exit_ok;
    } catch (const Error& e) {
        emit_error(manifest, error_kind(e), e.what());
        return exit_error;
    } catch (const std::exception& e) {
        emit_error(manifest, "error", e.what());
        return exit_error;
    }
}

}  // namespace otm
