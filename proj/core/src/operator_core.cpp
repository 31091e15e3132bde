#include "specwave/operator_core.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace specwave {

namespace {

using Triplet = Eigen::Triplet<double>;

void assemble_1d_order2(const DomainSpec& dom, const CoefficientField& c,
                        std::vector<Triplet>& trips) {
    const int m = dom.gridSize();
    const double h = dom.spacing(0);
    const double ih2 = 1.0 / (h * h);
    auto a_half = [&](int i) {  // midpoint coefficient between interior nodes i and i+1
        if (i < 0) return c.a11(0);
        if (i + 1 >= m) return c.a11(m - 1);
        return 0.5 * (c.a11(i) + c.a11(i + 1));
    };
    for (int i = 0; i < m; ++i) {
        const double al = a_half(i - 1);
        const double ar = a_half(i);
        trips.emplace_back(i, i, (al + ar) * ih2 + c.beta(i));
        if (i > 0) trips.emplace_back(i, i - 1, -al * ih2);
        if (i + 1 < m) trips.emplace_back(i, i + 1, -ar * ih2);
    }
}

void assemble_1d_order4(const DomainSpec& dom, const CoefficientField& c,
                        std::vector<Triplet>& trips) {
    const int m = dom.gridSize();
    const double a = c.a11(0);
    const double span = c.a11.maxCoeff() - c.a11.minCoeff();
    if (span > 1e-12 * std::max(1.0, std::abs(a)))
        throw ConfigError("fd_order=4 requires a constant diffusion coefficient");
    const double ih2 = a / (dom.spacing(0) * dom.spacing(0));
    // five-point fourth-order -u'' stencil with antisymmetric ghost extension
    for (int i = 0; i < m; ++i) {
        double diag = 5.0 / 2.0;
        if (i == 0 || i == m - 1) diag -= 1.0 / 12.0;  // ghost u(-h) = -u(h)
        trips.emplace_back(i, i, diag * ih2 + c.beta(i));
        if (i >= 1) trips.emplace_back(i, i - 1, -(4.0 / 3.0) * ih2);
        if (i + 1 < m) trips.emplace_back(i, i + 1, -(4.0 / 3.0) * ih2);
        if (i >= 2) trips.emplace_back(i, i - 2, (1.0 / 12.0) * ih2);
        if (i + 2 < m) trips.emplace_back(i, i + 2, (1.0 / 12.0) * ih2);
    }
}

void assemble_2d_order2(const DomainSpec& dom, const CoefficientField& c,
                        std::vector<Triplet>& trips) {
    if (c.a12.size() > 0 && c.a12.cwiseAbs().maxCoeff() > 1e-14)
        throw ConfigError("five-point stencil requires a12 = 0");
    const int nx = dom.interiorPerAxis(0);
    const int ny = dom.interiorPerAxis(1);
    const double ihx2 = 1.0 / (dom.spacing(0) * dom.spacing(0));
    const double ihy2 = 1.0 / (dom.spacing(1) * dom.spacing(1));
    auto idx = [&](int ix, int iy) { return ix + nx * iy; };
    auto ax_half = [&](int ix, int iy) {  // between (ix,iy) and (ix+1,iy)
        if (ix < 0) return c.a11(idx(0, iy));
        if (ix + 1 >= nx) return c.a11(idx(nx - 1, iy));
        return 0.5 * (c.a11(idx(ix, iy)) + c.a11(idx(ix + 1, iy)));
    };
    auto ay_half = [&](int ix, int iy) {
        if (iy < 0) return c.a22(idx(ix, 0));
        if (iy + 1 >= ny) return c.a22(idx(ix, ny - 1));
        return 0.5 * (c.a22(idx(ix, iy)) + c.a22(idx(ix, iy + 1)));
    };
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const int i = idx(ix, iy);
            const double axl = ax_half(ix - 1, iy), axr = ax_half(ix, iy);
            const double ayl = ay_half(ix, iy - 1), ayr = ay_half(ix, iy);
            trips.emplace_back(i, i, (axl + axr) * ihx2 + (ayl + ayr) * ihy2 + c.beta(i));
            if (ix > 0) trips.emplace_back(i, idx(ix - 1, iy), -axl * ihx2);
            if (ix + 1 < nx) trips.emplace_back(i, idx(ix + 1, iy), -axr * ihx2);
            if (iy > 0) trips.emplace_back(i, idx(ix, iy - 1), -ayl * ihy2);
            if (iy + 1 < ny) trips.emplace_back(i, idx(ix, iy + 1), -ayr * ihy2);
        }
    }
}

}  // namespace

AssembledOperator assemble_operator(const DomainSpec& dom, const CoefficientField& coeffs) {
    dom.validate();
    const int m = dom.gridSize();
    if (coeffs.a11.size() != m || coeffs.beta.size() != m ||
        (dom.dimension == 2 && coeffs.a22.size() != m))
        throw ConfigError("coefficient fields do not match the grid size");

    const auto bounds = coeffs.ellipticityBounds(dom);
    if (bounds.a0 <= 0.0) {
        std::ostringstream os;
        os << "ellipticity violated: smallest tensor eigenvalue " << bounds.a0
           << " at grid point " << bounds.argmin;
        throw EllipticityError(os.str(), bounds.argmin);
    }
    if (coeffs.a0_declared > 0.0 && bounds.a0 < coeffs.a0_declared * (1.0 - 1e-12)) {
        std::ostringstream os;
        os << "declared a0=" << coeffs.a0_declared << " violated: pointwise minimum "
           << bounds.a0 << " at grid point " << bounds.argmin;
        throw EllipticityError(os.str(), bounds.argmin);
    }
    if (coeffs.a1_declared > 0.0 && bounds.a1 > coeffs.a1_declared * (1.0 + 1e-12))
        throw ConfigError("declared a1 exceeded by the sampled tensor");

    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(m) * 5);
    if (dom.dimension == 1) {
        if (dom.fd_order == 4)
            assemble_1d_order4(dom, coeffs, trips);
        else
            assemble_1d_order2(dom, coeffs, trips);
    } else {
        assemble_2d_order2(dom, coeffs, trips);
    }

    AssembledOperator op;
    op.domain = dom;
    op.matrix.resize(m, m);
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.matrix.makeCompressed();
    const double w = dom.dimension == 1 ? dom.spacing(0) : dom.spacing(0) * dom.spacing(1);
    op.quad_weights = Eigen::VectorXd::Constant(m, w);

    // definiteness probe; on failure report the smallest Ritz value
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(op.matrix);
    const bool spd = ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0;
    if (!spd) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix.toDense(),
                                                          Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues()(0);
        std::ostringstream os;
        os << "operator is not positive definite: smallest Ritz value " << lmin;
        throw CoercivityError(os.str(), lmin);
    }
    return op;
}

Eigen::VectorXd SpectralModel::project(const Eigen::VectorXd& grid_values) const {
    return modes.transpose() * quad_weights.cwiseProduct(grid_values);
}

Eigen::VectorXd SpectralModel::synthesize(const Eigen::VectorXd& coeffs) const {
    return modes * coeffs;
}

double SpectralModel::gridInner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
    return f.dot(quad_weights.cwiseProduct(g));
}

ModelPtr eig_decompose(const AssembledOperator& op, int N) {
    const int m = op.domain.gridSize();
    if (N < 1 || N > m)
        throw ConfigError("mode count N must lie in [1, gridSize]");
    if (m > 6000)
        throw ConfigError("grid too large for the dense eigensolver (interior points > 6000)");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix.toDense());
    if (es.info() != Eigen::Success)
        throw ConvergenceError("eigendecomposition failed to converge");

    auto model = std::make_shared<SpectralModel>();
    model->domain = op.domain;
    model->quad_weights = op.quad_weights;
    model->eigenvalues = es.eigenvalues().head(N);
    // rescale to weighted-L2 orthonormality (uniform weights)
    const double w = op.quad_weights(0);
    model->modes = es.eigenvectors().leftCols(N) / std::sqrt(w);

    if (model->eigenvalues(0) <= 0.0)
        throw CoercivityError("smallest eigenvalue is not positive", model->eigenvalues(0));

    model->residuals.resize(N);
    for (int k = 0; k < N; ++k) {
        Eigen::VectorXd r = op.matrix * model->modes.col(k) -
                            model->eigenvalues(k) * model->modes.col(k);
        model->residuals(k) = std::sqrt(model->gridInner(r, r));
        if (model->residuals(k) > 1e-8 * model->eigenvalues(k))
            throw ConvergenceError("eigenpair residual exceeds tolerance at mode " +
                                   std::to_string(k + 1));
    }
    // orthonormality guard
    Eigen::MatrixXd gram = model->modes.transpose() *
                           op.quad_weights.asDiagonal() * model->modes;
    gram.diagonal().array() -= 1.0;
    if (gram.cwiseAbs().maxCoeff() > 1e-10)
        throw ConvergenceError("eigenvector orthonormality violated");
    return model;
}

Field Field::mode(const ModelPtr& m, int k, double amplitude) {
    Field f = Field::zero(m);
    if (k < 1 || k > m->modeCount())
        throw ConfigError("mode index out of range");
    f.c(k - 1) = amplitude;
    return f;
}

namespace {
void require_same_model(const Field& a, const Field& b) {
    if (a.model.get() != b.model.get())
        throw std::invalid_argument("fields belong to different spectral models");
}
}  // namespace

Field operator+(const Field& a, const Field& b) {
    require_same_model(a, b);
    return Field(a.c + b.c, a.model);
}
Field operator-(const Field& a, const Field& b) {
    require_same_model(a, b);
    return Field(a.c - b.c, a.model);
}
Field operator*(double s, const Field& a) { return Field(s * a.c, a.model); }

double norm_H(const Field& u, double kappa) {
    const auto& lam = u.model->eigenvalues;
    double s = 0.0;
    for (int k = 0; k < u.size(); ++k) s += std::pow(lam(k), kappa) * u.c(k) * u.c(k);
    return std::sqrt(s);
}

double norm_H_theta(const Field& u, int kappa, double theta) {
    return std::sqrt(inner_H_theta(u, u, kappa, theta));
}

double inner_H_theta(const Field& u, const Field& v, int kappa, double theta) {
    require_same_model(u, v);
    if (kappa != 1 && kappa != -1)
        throw std::invalid_argument("shifted norms are defined for kappa = +1 or -1");
    if (theta < 0.0) throw std::invalid_argument("theta must be >= 0");
    const auto& lam = u.model->eigenvalues;
    double s = 0.0;
    for (int k = 0; k < u.size(); ++k) {
        const double w = (kappa == 1) ? (lam(k) + theta) : 1.0 / (lam(k) + theta);
        s += w * u.c(k) * v.c(k);
    }
    return s;
}

ShiftReport check_shift_inequalities(double theta, const std::vector<Field>& samples,
                                     double tol) {
    if (samples.empty()) throw std::invalid_argument("no sample fields given");
    ShiftReport rep;
    rep.theta = theta;
    rep.samples = static_cast<int>(samples.size());
    const double lam1 = samples.front().model->lambda1();
    const double factor = std::sqrt(lam1 / (theta + lam1));

    const char* names[6] = {"equ1.lower", "equ1.upper", "equ2.lower",
                            "equ2.upper", "eigen1", "eigen2"};
    double best[6];
    int best_idx[6];
    std::fill(std::begin(best), std::end(best), std::numeric_limits<double>::infinity());
    std::fill(std::begin(best_idx), std::end(best_idx), -1);

    for (int s = 0; s < rep.samples; ++s) {
        const Field& u = samples[s];
        const double h1 = norm_H(u, 1.0);
        if (h1 == 0.0) continue;
        const double l2 = norm_H(u, 0.0);
        const double hm1 = norm_H(u, -1.0);
        const double h1t = norm_H_theta(u, 1, theta);
        const double hm1t = norm_H_theta(u, -1, theta);
        const double ratios[6] = {
            h1 / (factor * h1t),                        // equ1 lower
            h1t / h1,                                   // equ1 upper
            hm1t / (factor * hm1),                      // equ2 lower
            hm1 / hm1t,                                 // equ2 upper
            h1t * h1t / ((lam1 + theta) * l2 * l2),     // eigen1
            l2 * l2 / ((lam1 + theta) * hm1t * hm1t)};  // eigen2
        for (int q = 0; q < 6; ++q) {
            if (ratios[q] < best[q]) { best[q] = ratios[q]; best_idx[q] = s; }
            if (ratios[q] < 1.0 - tol && rep.pass) {
                rep.pass = false;
                std::ostringstream os;
                os << "inequality " << names[q] << " violated by sample " << s
                   << " with margin " << (ratios[q] - 1.0);
                rep.violation = os.str();
            }
        }
    }
    for (int q = 0; q < 6; ++q)
        rep.entries.push_back({names[q], best[q], best_idx[q]});
    return rep;
}

Field random_field(const ModelPtr& m, Rng& rng, double h1_norm) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd c(m->modeCount());
    for (int k = 0; k < c.size(); ++k) c(k) = normal(rng);
    Field f(c, m);
    const double n = norm_H(f, 1.0);
    if (n > 0.0 && h1_norm > 0.0) f.c *= h1_norm / n;
    return f;
}

}  // namespace specwave
