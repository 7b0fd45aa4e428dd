#include "otmorph/fields.hpp"

#include <algorithm>
#include <cmath>

#include "otmorph/errors.hpp"

namespace otm {

ScalarField2D::ScalarField2D(Grid2D grid, double fill)
    : grid_(grid), values_(grid.node_count(), fill) {}

ScalarField2D::ScalarField2D(Grid2D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_.node_count()) {
        throw ShapeError("value count does not match grid node count");
    }
}

double ScalarField2D::sample(double x, double y) const {
    x = std::clamp(x, 0.0, 1.0);
    y = std::clamp(y, 0.0, 1.0);
    const int nx = grid_.nx();
    const int ny = grid_.ny();
    const double sx = x * (nx - 1);
    const double sy = y * (ny - 1);
    const int i = std::min(static_cast<int>(sx), nx - 2);
    const int j = std::min(static_cast<int>(sy), ny - 2);
    const double fx = sx - i;
    const double fy = sy - j;
    const double v00 = at(i, j), v10 = at(i + 1, j);
    const double v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

double ScalarField2D::min_value() const {
    return *std::min_element(values_.begin(), values_.end());
}

double ScalarField2D::max_value() const {
    return *std::max_element(values_.begin(), values_.end());
}

SpaceTimeField::SpaceTimeField(SpaceTimeGrid grid, double fill)
    : grid_(grid), values_(static_cast<std::size_t>(grid.node_count()), fill) {}

std::span<double> SpaceTimeField::slice_span(int k) {
    const int ns = grid_.spatial().node_count();
    return {values_.data() + static_cast<std::size_t>(k) * ns, static_cast<std::size_t>(ns)};
}

std::span<const double> SpaceTimeField::slice_span(int k) const {
    const int ns = grid_.spatial().node_count();
    return {values_.data() + static_cast<std::size_t>(k) * ns, static_cast<std::size_t>(ns)};
}

ScalarField2D SpaceTimeField::slice(int k) const {
    auto s = slice_span(k);
    return ScalarField2D(grid_.spatial(), std::vector<double>(s.begin(), s.end()));
}

void SpaceTimeField::set_slice(int k, const ScalarField2D& f) {
    if (!(f.grid() == grid_.spatial())) throw ShapeError("slice grid mismatch");
    auto dst = slice_span(k);
    std::copy(f.values().begin(), f.values().end(), dst.begin());
}

VelocityField::VelocityField(SpaceTimeGrid grid)
    : grid_(grid),
      vx_(static_cast<std::size_t>(grid.node_count()), 0.0),
      vy_(static_cast<std::size_t>(grid.node_count()), 0.0) {}

namespace {

// Bilinear interpolation of one velocity component on one slice; zero for
// points outside the closed unit square.
double sample_component(std::span<const double> vals, const Grid2D& g, double x, double y) {
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) return 0.0;
    const int nx = g.nx();
    const int ny = g.ny();
    const double sx = x * (nx - 1);
    const double sy = y * (ny - 1);
    const int i = std::min(static_cast<int>(sx), nx - 2);
    const int j = std::min(static_cast<int>(sy), ny - 2);
    const double fx = sx - i;
    const double fy = sy - j;
    const double v00 = vals[g.node(i, j)], v10 = vals[g.node(i + 1, j)];
    const double v01 = vals[g.node(i, j + 1)], v11 = vals[g.node(i + 1, j + 1)];
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

}  // namespace

Vec2 VelocityField::sample(double t, Vec2 p) const {
    if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) return {0.0, 0.0};
    t = std::clamp(t, 0.0, 1.0);
    const int nt = grid_.nt();
    const int ns = grid_.spatial().node_count();
    const double st = t * (nt - 1);
    const int k = std::min(static_cast<int>(st), nt - 2);
    const double ft = st - k;

    const auto slice_x0 = std::span<const double>(vx_).subspan(static_cast<std::size_t>(k) * ns, ns);
    const auto slice_x1 = std::span<const double>(vx_).subspan(static_cast<std::size_t>(k + 1) * ns, ns);
    const auto slice_y0 = std::span<const double>(vy_).subspan(static_cast<std::size_t>(k) * ns, ns);
    const auto slice_y1 = std::span<const double>(vy_).subspan(static_cast<std::size_t>(k + 1) * ns, ns);

    const Grid2D& g = grid_.spatial();
    Vec2 out;
    out.x = (1 - ft) * sample_component(slice_x0, g, p.x, p.y) +
            ft * sample_component(slice_x1, g, p.x, p.y);
    out.y = (1 - ft) * sample_component(slice_y0, g, p.x, p.y) +
            ft * sample_component(slice_y1, g, p.x, p.y);
    return out;
}

double VelocityField::max_norm() const {
    double m = 0.0;
    for (std::size_t n = 0; n < vx_.size(); ++n) {
        m = std::max(m, std::hypot(vx_[n], vy_[n]));
    }
    return m;
}

void VelocityField::zero_boundary() {
    const Grid2D& g = grid_.spatial();
    const int ns = g.node_count();
    for (int k = 0; k < grid_.nt(); ++k) {
        const std::size_t base = static_cast<std::size_t>(k) * ns;
        for (int b : g.boundary_nodes()) {
            vx_[base + b] = 0.0;
            vy_[base + b] = 0.0;
        }
    }
}

SpaceTimeField interpolate_lifting(const ScalarField2D& rho0, const ScalarField2D& rho1,
                                   const SpaceTimeGrid& grid) {
    if (!(rho0.grid() == grid.spatial()) || !(rho1.grid() == grid.spatial())) {
        throw ShapeError("lifting endpoints must live on the space-time grid's spatial grid");
    }
    SpaceTimeField out(grid);
    const int ns = grid.spatial().node_count();
    for (int k = 0; k < grid.nt(); ++k) {
        const double t = grid.t(k);
        auto dst = out.slice_span(k);
        auto a = rho0.values();
        auto b = rho1.values();
        for (int n = 0; n < ns; ++n) dst[n] = (1.0 - t) * a[n] + t * b[n];
    }
    return out;
}

SpaceTimeField time_derivative(const SpaceTimeField& rho) {
    const SpaceTimeGrid& grid = rho.grid();
    const int nt = grid.nt();
    const int ns = grid.spatial().node_count();
    const double inv2dt = 0.5 * (nt - 1);

    SpaceTimeField out(grid);
    for (int k = 0; k < nt; ++k) {
        auto dst = out.slice_span(k);
        if (k == 0) {
            auto f0 = rho.slice_span(0), f1 = rho.slice_span(1), f2 = rho.slice_span(2);
            for (int n = 0; n < ns; ++n) dst[n] = (-3.0 * f0[n] + 4.0 * f1[n] - f2[n]) * inv2dt;
        } else if (k == nt - 1) {
            auto f0 = rho.slice_span(nt - 1), f1 = rho.slice_span(nt - 2), f2 = rho.slice_span(nt - 3);
            for (int n = 0; n < ns; ++n) dst[n] = (3.0 * f0[n] - 4.0 * f1[n] + f2[n]) * inv2dt;
        } else {
            auto fm = rho.slice_span(k - 1), fp = rho.slice_span(k + 1);
            for (int n = 0; n < ns; ++n) dst[n] = (fp[n] - fm[n]) * inv2dt;
        }
    }
    return out;
}

double trapezoid_mass(std::span<const double> slice, const Grid2D& grid) {
    const int nx = grid.nx();
    const int ny = grid.ny();
    double acc = 0.0;
    for (int j = 0; j < ny; ++j) {
        const double wy = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
        for (int i = 0; i < nx; ++i) {
            const double wx = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
            acc += wx * wy * slice[grid.node(i, j)];
        }
    }
    return acc * grid.hx() * grid.hy();
}

double trapezoid_mass(const ScalarField2D& f) { return trapezoid_mass(f.values(), f.grid()); }

double l2_norm_slice(std::span<const double> slice, const Grid2D& grid) {
    const auto rule = QuadratureRule::gauss2(2);
    const int nq = static_cast<int>(rule.points.size());
    std::array<std::array<double, 4>, 4> shp{};
    for (int q = 0; q < nq; ++q) {
        auto se = shape_functions(ElementKind::quad4, rule.points[q].data());
        for (int a = 0; a < 4; ++a) shp[q][a] = se.values[a];
    }
    const double cell = grid.hx() * grid.hy();
    double acc = 0.0;
    for (int ej = 0; ej < grid.ny() - 1; ++ej) {
        for (int ei = 0; ei < grid.nx() - 1; ++ei) {
            const int nodes[4] = {grid.node(ei, ej), grid.node(ei + 1, ej),
                                  grid.node(ei, ej + 1), grid.node(ei + 1, ej + 1)};
            for (int q = 0; q < nq; ++q) {
                double v = 0.0;
                for (int a = 0; a < 4; ++a) v += shp[q][a] * slice[nodes[a]];
                acc += rule.weights[q] * cell * v * v;
            }
        }
    }
    return std::sqrt(acc);
}

double l2_norm_q(const SpaceTimeField& f) {
    const SpaceTimeGrid& grid = f.grid();
    const Grid2D& g = grid.spatial();
    const auto rule = QuadratureRule::gauss2(3);
    const int nq = static_cast<int>(rule.points.size());
    std::array<std::array<double, 8>, 8> shp{};
    for (int q = 0; q < nq; ++q) {
        auto se = shape_functions(ElementKind::brick8, rule.points[q].data());
        for (int a = 0; a < 8; ++a) shp[q][a] = se.values[a];
    }
    const double cell = g.hx() * g.hy() * grid.dt();
    auto vals = f.values();
    double acc = 0.0;
    for (int ek = 0; ek < grid.nt() - 1; ++ek) {
        for (int ej = 0; ej < g.ny() - 1; ++ej) {
            for (int ei = 0; ei < g.nx() - 1; ++ei) {
                std::int64_t nodes[8];
                for (int c = 0; c < 8; ++c) {
                    nodes[c] = grid.node(ei + (c & 1), ej + ((c >> 1) & 1), ek + ((c >> 2) & 1));
                }
                for (int q = 0; q < nq; ++q) {
                    double v = 0.0;
                    for (int a = 0; a < 8; ++a) v += shp[q][a] * vals[nodes[a]];
                    acc += rule.weights[q] * cell * v * v;
                }
            }
        }
    }
    return std::sqrt(acc);
}

}  // namespace otm
