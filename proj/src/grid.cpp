#include "otmorph/grid.hpp"

#include <cmath>
#include <string>

#include "otmorph/errors.hpp"

namespace otm {

Grid2D::Grid2D(int nx, int ny) : nx_(nx), ny_(ny) {
    hx_ = 1.0 / (nx_ - 1);
    hy_ = 1.0 / (ny_ - 1);
    boundary_.reserve(2 * nx_ + 2 * ny_ - 4);
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            if (is_boundary(i, j)) boundary_.push_back(node(i, j));
        }
    }
}

Grid2D Grid2D::unit_square(int nx, int ny) {
    if (nx < 3 || ny < 3) {
        throw InvalidGridError("grid needs at least 3 nodes per axis, got " +
                               std::to_string(nx) + "x" + std::to_string(ny));
    }
    return Grid2D(nx, ny);
}

SpaceTimeGrid::SpaceTimeGrid(Grid2D spatial, int nt) : spatial_(spatial), nt_(nt) {
    if (nt < 3) {
        throw InvalidGridError("space-time grid needs nt >= 3, got " + std::to_string(nt));
    }
    dt_ = 1.0 / (nt_ - 1);
}

SpaceTimeGrid build_space_time_grid(int nx, int ny, int nt) {
    return SpaceTimeGrid(Grid2D::unit_square(nx, ny), nt);
}

namespace {

inline void check_ref_range(const double* p, int dim) {
    for (int d = 0; d < dim; ++d) {
        if (!(p[d] >= 0.0 && p[d] <= 1.0)) {
            throw OutOfRangeError("reference point outside [0,1]^" + std::to_string(dim));
        }
    }
}

}  // namespace

ShapeEval shape_functions(ElementKind kind, const double* ref_point) {
    const int dim = kind == ElementKind::quad4 ? 2 : 3;
    check_ref_range(ref_point, dim);

    // 1D hat pair per axis: l0(s) = 1-s, l1(s) = s.
    double l[3][2];
    for (int d = 0; d < dim; ++d) {
        l[d][0] = 1.0 - ref_point[d];
        l[d][1] = ref_point[d];
    }

    ShapeEval out;
    out.count = 1 << dim;
    for (int n = 0; n < out.count; ++n) {
        const int off[3] = {n & 1, (n >> 1) & 1, (n >> 2) & 1};
        double value = 1.0;
        for (int d = 0; d < dim; ++d) value *= l[d][off[d]];
        out.values[n] = value;
        for (int d = 0; d < dim; ++d) {
            double g = off[d] == 0 ? -1.0 : 1.0;
            for (int e = 0; e < dim; ++e) {
                if (e != d) g *= l[e][off[e]];
            }
            out.gradients[n][d] = g;
        }
    }
    return out;
}

QuadratureRule QuadratureRule::gauss2(int dim) {
    const double a = 0.5 - 0.5 / std::sqrt(3.0);
    const double b = 0.5 + 0.5 / std::sqrt(3.0);
    const double pts1d[2] = {a, b};

    QuadratureRule rule;
    rule.dim = dim;
    const int count = 1 << dim;
    rule.points.resize(count);
    rule.weights.assign(count, 1.0 / count);
    for (int n = 0; n < count; ++n) {
        for (int d = 0; d < dim; ++d) {
            rule.points[n][d] = pts1d[(n >> d) & 1];
        }
    }
    return rule;
}

}  // namespace otm
