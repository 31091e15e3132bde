#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "specwave/common.hpp"

namespace specwave {

/// Desk-scale computational domain: an interval (0,L) or a rectangle
/// (0,L1)x(0,L2) with homogeneous Dirichlet boundary, a uniform grid of
/// n cells per axis (interior unknowns only) and a spectral truncation of
/// the first `modes` eigenmodes.
struct DomainSpec {
    int dimension = 1;                       // 1 or 2
    std::array<double, 2> lengths{M_PI, M_PI};
    std::array<int, 2> grid_n{256, 0};       // cells per axis; interior points = n-1
    int modes = 32;                          // retained eigenmodes N
    int fd_order = 2;                        // 2 (any coefficients) or 4 (1D, constant a)

    void validate() const;

    int interiorPerAxis(int axis) const { return grid_n[axis] - 1; }
    double spacing(int axis) const { return lengths[axis] / grid_n[axis]; }
    /// Total number of interior grid points.
    int gridSize() const {
        return dimension == 1 ? interiorPerAxis(0)
                              : interiorPerAxis(0) * interiorPerAxis(1);
    }
};

/// Sampled coefficients of the elliptic operator
///   A u = beta(x) u - sum_ij d_i(a_ij(x) d_j u).
/// 1D stores the single entry in a11. 2D stores the symmetric tensor
/// (a11, a22, a12) per interior grid point; a12 must vanish for assembly
/// (five-point stencil), but is carried so the ellipticity check sees the
/// full tensor. Declared bounds a0, a1 are optional; when unset (<=0) they
/// are derived as the extreme pointwise tensor eigenvalues.
struct CoefficientField {
    Eigen::VectorXd a11, a22, a12;
    Eigen::VectorXd beta;
    double a0_declared = 0.0;
    double a1_declared = 0.0;

    static CoefficientField constant(const DomainSpec& dom, double a, double beta_value);

    /// Pointwise ellipticity bounds of the sampled tensor.
    struct Bounds { double a0; double a1; std::ptrdiff_t argmin; };
    Bounds ellipticityBounds(const DomainSpec& dom) const;
};

/// Interior grid coordinates, flattened row-major for 2D: index = ix + (nx-1)*iy.
Eigen::VectorXd gridCoordinates(const DomainSpec& dom, int axis);

}  // namespace specwave
