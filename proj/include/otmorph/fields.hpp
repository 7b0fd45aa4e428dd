#pragma once

#include <span>
#include <vector>

#include "otmorph/grid.hpp"

namespace otm {

/// Nodal scalar values on one time slice (a density or a potential).
class ScalarField2D {
public:
    ScalarField2D(Grid2D grid, double fill = 0.0);
    ScalarField2D(Grid2D grid, std::vector<double> values);

    const Grid2D& grid() const { return grid_; }

    double& at(int i, int j) { return values_[grid_.node(i, j)]; }
    double at(int i, int j) const { return values_[grid_.node(i, j)]; }
    double& operator[](int n) { return values_[n]; }
    double operator[](int n) const { return values_[n]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    /// Bilinear interpolation at (x,y); arguments clamped into [0,1].
    double sample(double x, double y) const;

    double min_value() const;
    double max_value() const;

private:
    Grid2D grid_;
    std::vector<double> values_;
};

/// Nodal scalar values across all time slices, slice-major.
class SpaceTimeField {
public:
    SpaceTimeField(SpaceTimeGrid grid, double fill = 0.0);

    const SpaceTimeGrid& grid() const { return grid_; }

    double& at(int i, int j, int k) { return values_[grid_.node(i, j, k)]; }
    double at(int i, int j, int k) const { return values_[grid_.node(i, j, k)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    std::span<double> slice_span(int k);
    std::span<const double> slice_span(int k) const;

    ScalarField2D slice(int k) const;
    void set_slice(int k, const ScalarField2D& f);

private:
    SpaceTimeGrid grid_;
    std::vector<double> values_;
};

/// Per-slice nodal 2D velocity vectors, stored as separate x/y components in
/// the same slice-major node order as SpaceTimeField.
class VelocityField {
public:
    explicit VelocityField(SpaceTimeGrid grid);

    const SpaceTimeGrid& grid() const { return grid_; }

    double& vx(int i, int j, int k) { return vx_[grid_.node(i, j, k)]; }
    double vx(int i, int j, int k) const { return vx_[grid_.node(i, j, k)]; }
    double& vy(int i, int j, int k) { return vy_[grid_.node(i, j, k)]; }
    double vy(int i, int j, int k) const { return vy_[grid_.node(i, j, k)]; }

    std::span<double> x_values() { return vx_; }
    std::span<const double> x_values() const { return vx_; }
    std::span<double> y_values() { return vy_; }
    std::span<const double> y_values() const { return vy_; }

    /// Space-time interpolation: trilinear inside Q, zero outside Omega,
    /// time clamped into [0,1].
    Vec2 sample(double t, Vec2 p) const;

    double max_norm() const;

    /// Both components zeroed on the spatial boundary of every slice.
    void zero_boundary();

private:
    SpaceTimeGrid grid_;
    std::vector<double> vx_;
    std::vector<double> vy_;
};

/// Space-time blend (1-t) rho0 + t rho1; endpoint slices are bitwise copies.
SpaceTimeField interpolate_lifting(const ScalarField2D& rho0, const ScalarField2D& rho1,
                                   const SpaceTimeGrid& grid);

/// Second-order finite differences in t: centered inside, one-sided at the
/// endpoint slices. Exact on fields quadratic in t.
SpaceTimeField time_derivative(const SpaceTimeField& rho);

/// Trapezoidal nodal quadrature of a slice over Omega.
double trapezoid_mass(const ScalarField2D& f);
double trapezoid_mass(std::span<const double> slice, const Grid2D& grid);

/// L2(Q) norm of the trilinear interpolant (tensor 2-point Gauss per brick).
double l2_norm_q(const SpaceTimeField& f);

/// L2(Omega) norm of the bilinear interpolant of one slice.
double l2_norm_slice(std::span<const double> slice, const Grid2D& grid);

}  // namespace otm
