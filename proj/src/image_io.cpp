#include "otmorph/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "otmorph/errors.hpp"
#include "otmorph/pgm.hpp"

namespace otm {

ScalarField2D load_density(const std::string& path, const Grid2D& grid) {
    const PgmImage img = read_pgm(path);
    const double inv_max = 1.0 / img.maxval;

    std::vector<double> values(grid.node_count());
    for (int j = 0; j < grid.ny(); ++j) {
        // Image row b runs along the same axis as the grid's y coordinate.
        const double b = grid.y(j) * (img.height - 1);
        const int b0 = std::min(static_cast<int>(b), std::max(img.height - 2, 0));
        const double fb = (img.height > 1) ? b - b0 : 0.0;
        for (int i = 0; i < grid.nx(); ++i) {
            const double a = grid.x(i) * (img.width - 1);
            const int a0 = std::min(static_cast<int>(a), std::max(img.width - 2, 0));
            const double fa = (img.width > 1) ? a - a0 : 0.0;
            const int a1 = std::min(a0 + 1, img.width - 1);
            const int b1 = std::min(b0 + 1, img.height - 1);
            const double v =
                (1 - fb) * ((1 - fa) * img.pixel(a0, b0) + fa * img.pixel(a1, b0)) +
                fb * ((1 - fa) * img.pixel(a0, b1) + fa * img.pixel(a1, b1));
            values[grid.node(i, j)] = v * inv_max;
        }
    }
    return ScalarField2D(grid, std::move(values));
}

std::pair<ScalarField2D, ScalarField2D> prepare_pair(const ScalarField2D& rho0_raw,
                                                     const ScalarField2D& rho1_raw,
                                                     const SolverConfig& cfg) {
    if (!(rho0_raw.grid() == rho1_raw.grid())) {
        throw ShapeError("endpoint densities live on different grids");
    }
    const Grid2D grid = rho0_raw.grid();

    if (trapezoid_mass(rho0_raw) <= 0.0) {
        throw DegenerateInputError("first endpoint density has non-positive total mass");
    }
    if (trapezoid_mass(rho1_raw) <= 0.0) {
        throw DegenerateInputError("second endpoint density has non-positive total mass");
    }

    std::vector<double> a(rho0_raw.values().begin(), rho0_raw.values().end());
    std::vector<double> b(rho1_raw.values().begin(), rho1_raw.values().end());

    // Joint affine remap into [beta_min, 1] so both fields keep their relative
    // contrast. The minimum lands on beta_min exactly.
    const double lo = std::min(*std::min_element(a.begin(), a.end()),
                               *std::min_element(b.begin(), b.end()));
    const double hi = std::max(*std::max_element(a.begin(), a.end()),
                               *std::max_element(b.begin(), b.end()));
    if (hi - lo < 1e-14) {
        const double c = std::clamp(lo, cfg.beta_min, 1.0);
        std::fill(a.begin(), a.end(), c);
        std::fill(b.begin(), b.end(), c);
    } else {
        const double scale = (1.0 - cfg.beta_min) / (hi - lo);
        for (double& v : a) v = cfg.beta_min + (v - lo) * scale;
        for (double& v : b) v = cfg.beta_min + (v - lo) * scale;
    }

    const auto& bnodes = grid.boundary_nodes();
    double mismatch = 0.0;
    for (int n : bnodes) mismatch = std::max(mismatch, std::abs(a[n] - b[n]));
    if (mismatch > cfg.boundary_tol) {
        std::ostringstream msg;
        msg << "input densities violate hypothesis H2 (equal boundary traces): boundary values "
               "differ by "
            << mismatch << ", tolerance " << cfg.boundary_tol;
        throw HypothesisViolationError(msg.str());
    }

    // Harmonizing the boundary perturbs the masses and rescaling perturbs the
    // boundary, so alternate the two; the coupling is weak (a thin boundary
    // strip) and the mass ratio contracts to 1 geometrically.
    bool matched = false;
    for (int pass = 0; pass < 40; ++pass) {
        for (int n : bnodes) {
            const double mean = 0.5 * (a[n] + b[n]);
            a[n] = mean;
            b[n] = mean;
        }
        const double s = trapezoid_mass(a, grid) / trapezoid_mass(b, grid);
        if (std::abs(s - 1.0) <= 1e-14) {
            matched = true;
            break;
        }
        for (double& v : b) v *= s;
    }
    if (!matched) throw Error("mass matching between endpoint densities did not converge");

    // The rescale may have pulled values below the floor; lift both fields by
    // the same constant, which preserves the boundary equality and the mass
    // difference exactly. The max() only absorbs last-ulp rounding.
    const double floor_min = std::min(*std::min_element(a.begin(), a.end()),
                                      *std::min_element(b.begin(), b.end()));
    if (floor_min < cfg.beta_min) {
        const double c = cfg.beta_min - floor_min;
        for (double& v : a) v = std::max(v + c, cfg.beta_min);
        for (double& v : b) v = std::max(v + c, cfg.beta_min);
    }

    return {ScalarField2D(grid, std::move(a)), ScalarField2D(grid, std::move(b))};
}

namespace {

void write_csv_frame(const std::string& path, std::span<const double> slice, const Grid2D& grid) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ExportError(path + ": cannot open file for writing");
    std::fputs("x,y,value\n", f);
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            std::fprintf(f, "%.17g,%.17g,%.17g\n", grid.x(i), grid.y(j), slice[grid.node(i, j)]);
        }
    }
    if (std::fclose(f) != 0) throw ExportError(path + ": write failed");
}

}  // namespace

void export_frames(const SpaceTimeField& rho, const std::string& dir, FrameFormat format) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ExportError(dir + ": cannot create output directory: " + ec.message());

    const Grid2D& grid = rho.grid().spatial();
    const auto all = rho.values();
    const double lo = *std::min_element(all.begin(), all.end());
    const double hi = *std::max_element(all.begin(), all.end());
    const double scale = (hi - lo > 0.0) ? 65535.0 / (hi - lo) : 0.0;

    for (int k = 0; k < rho.grid().nt(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04d", k);
        const auto slice = rho.slice_span(k);
        const std::string base = (fs::path(dir) / name).string();
        if (format == FrameFormat::csv) {
            write_csv_frame(base + ".csv", slice, grid);
        } else {
            PgmImage img;
            img.width = grid.nx();
            img.height = grid.ny();
            img.maxval = 65535;
            img.pixels.resize(static_cast<std::size_t>(grid.nx()) * grid.ny());
            for (int j = 0; j < grid.ny(); ++j) {
                for (int i = 0; i < grid.nx(); ++i) {
                    const double v = (slice[grid.node(i, j)] - lo) * scale;
                    const long q = std::lround(std::clamp(v, 0.0, 65535.0));
                    img.pixels[static_cast<std::size_t>(j) * grid.nx() + i] =
                        static_cast<std::uint16_t>(q);
                }
            }
            write_pgm16(base + ".pgm", img);
        }
    }
}

}  // namespace otm
