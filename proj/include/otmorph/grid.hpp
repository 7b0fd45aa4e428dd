#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace otm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Uniform tensor-product grid of nodes on the closed unit square [0,1]^2.
/// Node (i,j) sits at (i/(nx-1), j/(ny-1)); flat index is j*nx + i.
class Grid2D {
public:
    static Grid2D unit_square(int nx, int ny);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }

    int node_count() const { return nx_ * ny_; }
    int node(int i, int j) const { return j * nx_ + i; }

    double x(int i) const { return static_cast<double>(i) / (nx_ - 1); }
    double y(int j) const { return static_cast<double>(j) / (ny_ - 1); }

    bool is_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
    }

    /// Indices of the 2*nx + 2*ny - 4 boundary nodes, ascending.
    const std::vector<int>& boundary_nodes() const { return boundary_; }

    bool operator==(const Grid2D& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

private:
    Grid2D(int nx, int ny);

    int nx_ = 0;
    int ny_ = 0;
    double hx_ = 0.0;
    double hy_ = 0.0;
    std::vector<int> boundary_;
};

/// Tensor grid on Q = (0,1) x Omega with nt time slices. Node ordering is
/// time-slice-major, then row-major in space (x fastest), so per-slice
/// spatial subproblems are contiguous.
class SpaceTimeGrid {
public:
    SpaceTimeGrid(Grid2D spatial, int nt);

    const Grid2D& spatial() const { return spatial_; }
    int nt() const { return nt_; }
    double dt() const { return dt_; }

    double t(int k) const { return static_cast<double>(k) / (nt_ - 1); }

    std::int64_t node_count() const {
        return static_cast<std::int64_t>(nt_) * spatial_.node_count();
    }
    std::int64_t node(int i, int j, int k) const {
        return static_cast<std::int64_t>(k) * spatial_.node_count() + spatial_.node(i, j);
    }

    bool operator==(const SpaceTimeGrid& o) const {
        return spatial_ == o.spatial_ && nt_ == o.nt_;
    }

private:
    Grid2D spatial_;
    int nt_ = 0;
    double dt_ = 0.0;
};

SpaceTimeGrid build_space_time_grid(int nx, int ny, int nt);

enum class ElementKind { quad4, brick8 };

/// Values and reference-space gradients of the d-linear Lagrange basis at one
/// reference point. Local node l = di + 2*dj (+ 4*dk) maps to the element
/// corner with offsets (di,dj[,dk]), matching the grid's lexicographic order.
struct ShapeEval {
    int count = 0;
    std::array<double, 8> values{};
    std::array<std::array<double, 3>, 8> gradients{};
};

ShapeEval shape_functions(ElementKind kind, const double* ref_point);

/// Tensor Gauss rule on the reference element [0,1]^dim.
struct QuadratureRule {
    int dim = 0;
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;

    /// 2 Gauss points per axis: exact for polynomials of degree 3 per axis.
    static QuadratureRule gauss2(int dim);
};

}  // namespace otm
