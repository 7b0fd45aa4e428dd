#include "otmorph/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "otmorph/errors.hpp"

namespace otm {

namespace {

void check_unit_interval(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) {
        std::ostringstream msg;
        msg << name << " = " << value << " lies outside [0,1]";
        throw OutOfRangeError(msg.str());
    }
}

}  // namespace

FlowTrajectory trace_flow(const VelocityField& v, int direction, double s_target, double t,
                          Vec2 x, const SolverConfig& cfg) {
    if (direction != 1 && direction != -1) throw Error("flow direction must be +1 or -1");
    check_unit_interval(s_target, "s_target");
    check_unit_interval(t, "t");
    check_unit_interval(x.x, "x.x");
    check_unit_interval(x.y, "x.y");

    FlowTrajectory traj;
    traj.direction = direction;
    traj.times.push_back(t);
    traj.positions.push_back(x);
    if (s_target == t) return traj;

    const double span = s_target - t;
    const int steps = std::max(
        1, static_cast<int>(std::ceil(std::abs(span) / v.grid().dt() * cfg.rk4_substeps)));
    const double h = span / steps;
    const double dir = static_cast<double>(direction);

    Vec2 p = x;
    for (int n = 0; n < steps; ++n) {
        const double s = t + n * h;
        const Vec2 k1 = v.sample(s, p);
        const Vec2 k2 = v.sample(s + 0.5 * h, {p.x + 0.5 * h * dir * k1.x, p.y + 0.5 * h * dir * k1.y});
        const Vec2 k3 = v.sample(s + 0.5 * h, {p.x + 0.5 * h * dir * k2.x, p.y + 0.5 * h * dir * k2.y});
        const Vec2 k4 = v.sample(s + h, {p.x + h * dir * k3.x, p.y + h * dir * k3.y});
        p.x += h * dir * (k1.x + 2 * k2.x + 2 * k3.x + k4.x) / 6.0;
        p.y += h * dir * (k1.y + 2 * k2.y + 2 * k3.y + k4.y) / 6.0;

        const Vec2 clamped{std::clamp(p.x, 0.0, 1.0), std::clamp(p.y, 0.0, 1.0)};
        traj.clamp_drift =
            std::max(traj.clamp_drift, std::hypot(p.x - clamped.x, p.y - clamped.y));
        p = clamped;
        traj.times.push_back(t + (n + 1) * h);
        traj.positions.push_back(p);
    }
    traj.times.back() = s_target;
    return traj;
}

Vec2 integrate_flow(const VelocityField& v, int direction, double s_target, double t, Vec2 x,
                    const SolverConfig& cfg, double* clamp_drift) {
    const FlowTrajectory traj = trace_flow(v, direction, s_target, t, x, cfg);
    if (clamp_drift) *clamp_drift = traj.clamp_drift;
    return traj.end();
}

double divergence_along(const FlowTrajectory& traj, const VelocityField& v) {
    const double delta = 0.5 * v.grid().spatial().hx();
    const auto div_at = [&](double s, Vec2 p) {
        const double dx = (v.sample(s, {p.x + delta, p.y}).x - v.sample(s, {p.x - delta, p.y}).x) /
                          (2.0 * delta);
        const double dy = (v.sample(s, {p.x, p.y + delta}).y - v.sample(s, {p.x, p.y - delta}).y) /
                          (2.0 * delta);
        return dx + dy;
    };

    double acc = 0.0;
    double prev = div_at(traj.times[0], traj.positions[0]);
    for (std::size_t n = 1; n < traj.times.size(); ++n) {
        const double cur = div_at(traj.times[n], traj.positions[n]);
        acc += 0.5 * (traj.times[n] - traj.times[n - 1]) * (prev + cur);
        prev = cur;
    }
    return acc;
}

SpaceTimeField representation_density(const SpaceTimeField& rho_prev, const VelocityField& v,
                                      const ScalarField2D& rho0, const ScalarField2D& rho1,
                                      const SolverConfig& cfg) {
    const SpaceTimeGrid& grid = rho_prev.grid();
    if (!(v.grid() == grid) || !(rho0.grid() == grid.spatial()) ||
        !(rho1.grid() == grid.spatial())) {
        throw ShapeError("representation inputs must share one grid");
    }
    const Grid2D& g = grid.spatial();
    const double floor = 0.5 * cfg.beta_min;

    SpaceTimeField out(grid);
    for (int k = 0; k < grid.nt(); ++k) {
        const double t = grid.t(k);
        auto dst = out.slice_span(k);
        auto prev = rho_prev.slice_span(k);
        for (int j = 0; j < g.ny(); ++j) {
            for (int i = 0; i < g.nx(); ++i) {
                const int n = g.node(i, j);
                const double denom = prev[n];
                if (denom < floor) {
                    std::ostringstream msg;
                    msg << "density " << denom << " below division floor " << floor
                        << " at node (i=" << i << ", j=" << j << ", k=" << k << ")";
                    throw DivisionGuardError(msg.str());
                }
                const Vec2 x{g.x(i), g.y(j)};
                double value = 0.0;
                if (t < 1.0) {
                    const Vec2 x0 = integrate_flow(v, +1, 0.0, t, x, cfg);
                    const double r0 = rho0.sample(x0.x, x0.y);
                    value += (1.0 - t) * r0 * r0 / denom;
                }
                if (t > 0.0) {
                    const Vec2 x1 = integrate_flow(v, +1, 1.0, t, x, cfg);
                    const double r1 = rho1.sample(x1.x, x1.y);
                    value += t * r1 * r1 / denom;
                }
                dst[n] = value;
            }
        }
    }
    return out;
}

double ode_lsq_solution(const VelocityField& v, double t, Vec2 x, const ScalarField2D& rho0,
                        const ScalarField2D& rho1, const SolverConfig& cfg) {
    double value = 0.0;
    if (t < 1.0) {
        const FlowTrajectory back = trace_flow(v, +1, 0.0, t, x, cfg);
        // Accumulated from t down to 0, this already carries the sign of
        // -int_0^t div v.
        const double expo = divergence_along(back, v);
        const Vec2 x0 = back.end();
        value += (1.0 - t) * std::exp(expo) * rho0.sample(x0.x, x0.y);
    }
    if (t > 0.0) {
        const FlowTrajectory fwd = trace_flow(v, +1, 1.0, t, x, cfg);
        const double expo = divergence_along(fwd, v);
        const Vec2 x1 = fwd.end();
        value += t * std::exp(expo) * rho1.sample(x1.x, x1.y);
    }
    return value;
}

double liouville_check(const VelocityField& v, std::span<const Vec2> samples, double s_target,
                       double t, const SolverConfig& cfg) {
    const double delta = 1e-5;
    double worst = 0.0;
    for (const Vec2& x : samples) {
        const Vec2 xpx = integrate_flow(v, +1, s_target, t, {x.x + delta, x.y}, cfg);
        const Vec2 xmx = integrate_flow(v, +1, s_target, t, {x.x - delta, x.y}, cfg);
        const Vec2 xpy = integrate_flow(v, +1, s_target, t, {x.x, x.y + delta}, cfg);
        const Vec2 xmy = integrate_flow(v, +1, s_target, t, {x.x, x.y - delta}, cfg);
        const double j11 = (xpx.x - xmx.x) / (2 * delta);
        const double j21 = (xpx.y - xmx.y) / (2 * delta);
        const double j12 = (xpy.x - xmy.x) / (2 * delta);
        const double j22 = (xpy.y - xmy.y) / (2 * delta);
        const double det = j11 * j22 - j12 * j21;

        const FlowTrajectory traj = trace_flow(v, +1, s_target, t, x, cfg);
        const double expected = std::exp(divergence_along(traj, v));
        worst = std::max(worst, std::abs(det - expected) / std::max(std::abs(expected), 1e-30));
    }
    return worst;
}

double w2_1d_oracle(std::span<const double> f, std::span<const double> g, int mass_points) {
    if (f.size() != g.size()) throw ShapeError("1D densities must share one grid");
    if (f.size() < 2) throw ShapeError("need at least two samples");
    if (mass_points < 10000) throw Error("mass quadrature needs at least 10^4 points");
    const auto positive = [](std::span<const double> d) {
        return std::all_of(d.begin(), d.end(), [](double v) { return v > 0.0; });
    };
    if (!positive(f) || !positive(g)) {
        throw DegenerateInputError("1D densities must be strictly positive");
    }

    const int cells = static_cast<int>(f.size()) - 1;
    const double h = 1.0 / cells;
    // Piecewise-linear CDFs from per-cell trapezoid masses, normalized to 1.
    const auto cdf = [&](std::span<const double> d) {
        std::vector<double> F(d.size(), 0.0);
        for (int c = 0; c < cells; ++c) F[c + 1] = F[c] + 0.5 * h * (d[c] + d[c + 1]);
        return F;
    };
    std::vector<double> F = cdf(f), G = cdf(g);
    const double mass_f = F.back(), mass_g = G.back();
    if (std::abs(mass_f - mass_g) > 1e-10 * std::max(mass_f, mass_g)) {
        std::ostringstream msg;
        msg << "total masses differ: " << mass_f << " vs " << mass_g;
        throw DegenerateInputError(msg.str());
    }
    for (double& v : F) v /= mass_f;
    for (double& v : G) v /= mass_g;

    const auto quantile = [&](const std::vector<double>& C, double m) {
        const auto it = std::upper_bound(C.begin(), C.end(), m);
        const int c = std::clamp(static_cast<int>(it - C.begin()) - 1, 0, cells - 1);
        const double dC = C[c + 1] - C[c];
        const double frac = dC > 0.0 ? (m - C[c]) / dC : 0.0;
        return (c + frac) * h;
    };

    double acc = 0.0;
    for (int p = 0; p < mass_points; ++p) {
        const double m = (p + 0.5) / mass_points;
        const double d = quantile(F, m) - quantile(G, m);
        acc += d * d;
    }
    return 0.5 * (mass_f + mass_g) * acc / mass_points;
}

}  // namespace otm
