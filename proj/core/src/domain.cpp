#include "specwave/domain.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace specwave {

void DomainSpec::validate() const {
    if (dimension != 1 && dimension != 2)
        throw ConfigError("domain dimension must be 1 or 2, got " + std::to_string(dimension));
    if (modes < 1) throw ConfigError("modes_N must be >= 1");
    const int axes = dimension;
    const double min_n = 4.0 * std::sqrt(static_cast<double>(modes));
    for (int ax = 0; ax < axes; ++ax) {
        if (lengths[ax] <= 0.0)
            throw ConfigError("domain extent must be strictly positive on axis " + std::to_string(ax));
        if (grid_n[ax] < 4)
            throw ConfigError("grid_n must be >= 4 on axis " + std::to_string(ax));
        if (static_cast<double>(grid_n[ax]) < min_n)
            throw ConfigError("grid resolution " + std::to_string(grid_n[ax]) +
                              " per axis cannot resolve " + std::to_string(modes) +
                              " modes (need n >= 4*sqrt(N) = " + std::to_string(min_n) + ")");
    }
    if (fd_order != 2 && fd_order != 4)
        throw ConfigError("fd_order must be 2 or 4");
    if (fd_order == 4 && dimension != 1)
        throw ConfigError("fd_order=4 is available in 1D only");
    if (modes > gridSize())
        throw ConfigError("modes_N exceeds the number of interior grid points");
}

CoefficientField CoefficientField::constant(const DomainSpec& dom, double a, double beta_value) {
    CoefficientField c;
    const int m = dom.gridSize();
    c.a11 = Eigen::VectorXd::Constant(m, a);
    if (dom.dimension == 2) {
        c.a22 = Eigen::VectorXd::Constant(m, a);
        c.a12 = Eigen::VectorXd::Zero(m);
    }
    c.beta = Eigen::VectorXd::Constant(m, beta_value);
    return c;
}

CoefficientField::Bounds CoefficientField::ellipticityBounds(const DomainSpec& dom) const {
    Bounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0};
    const int m = dom.gridSize();
    for (int i = 0; i < m; ++i) {
        double lo, hi;
        if (dom.dimension == 1) {
            lo = hi = a11(i);
        } else {
            // eigenvalues of [[a11,a12],[a12,a22]]
            const double tr = a11(i) + a22(i);
            const double det = a11(i) * a22(i) - a12(i) * a12(i);
            const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
            lo = tr / 2.0 - disc;
            hi = tr / 2.0 + disc;
        }
        if (lo < b.a0) { b.a0 = lo; b.argmin = i; }
        if (hi > b.a1) b.a1 = hi;
    }
    return b;
}

Eigen::VectorXd gridCoordinates(const DomainSpec& dom, int axis) {
    const int m = dom.gridSize();
    Eigen::VectorXd x(m);
    if (dom.dimension == 1) {
        const double h = dom.spacing(0);
        for (int i = 0; i < m; ++i) x(i) = (i + 1) * h;
        return x;
    }
    const int nx = dom.interiorPerAxis(0);
    const int ny = dom.interiorPerAxis(1);
    const double hx = dom.spacing(0);
    const double hy = dom.spacing(1);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            x(ix + nx * iy) = (axis == 0) ? (ix + 1) * hx : (iy + 1) * hy;
    return x;
}

}  // namespace specwave
