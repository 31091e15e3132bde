#include "specwave/nonlinearity.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

namespace specwave {

void NonlinearitySpec::validate(int grid_size) const {
    if (std::abs(alpha + beta_h - 2.0) > 1e-12)
        throw ConfigError("Holder exponents must satisfy alpha + beta_h = 2");
    if (alpha < 1.0 || alpha >= 2.0) throw ConfigError("alpha must lie in [1,2)");
    if (beta_h <= 0.0 || beta_h > 1.0) throw ConfigError("beta_h must lie in (0,1]");
    if (holder_C <= 0.0) throw ConfigError("Hyp 2 constant C must be positive");
    if (mu <= 0.0) throw ConfigError("mu must be positive");
    if (kind == Kind::Polynomial) {
        for (const auto& g : powers)
            if (g.size() != 0 && g.size() != grid_size)
                throw ConfigError("polynomial coefficient field does not match the grid");
    } else {
        if (!f_custom || !fu_custom || !fuu_custom || !F_custom)
            throw ConfigError("custom nonlinearity must provide f, fu, fuu and F evaluators");
    }
    if (c_dissip.size() != 0 && c_dissip.size() != grid_size)
        throw ConfigError("c(x) field does not match the grid");
}

double NonlinearitySpec::f(std::ptrdiff_t i, double u) const {
    if (kind == Kind::Custom) return f_custom(i, u);
    double acc = 0.0;
    for (std::size_t p = powers.size(); p-- > 0;) {
        acc *= u;
        if (powers[p].size() > 0) acc += powers[p](i);
    }
    return acc;
}

double NonlinearitySpec::fu(std::ptrdiff_t i, double u) const {
    if (kind == Kind::Custom) return fu_custom(i, u);
    double acc = 0.0;
    for (std::size_t p = powers.size(); p-- > 1;) {
        acc *= u;
        if (powers[p].size() > 0) acc += static_cast<double>(p) * powers[p](i);
    }
    return acc;
}

double NonlinearitySpec::fuu(std::ptrdiff_t i, double u) const {
    if (kind == Kind::Custom) return fuu_custom(i, u);
    double acc = 0.0;
    for (std::size_t p = powers.size(); p-- > 2;) {
        acc *= u;
        if (powers[p].size() > 0) acc += static_cast<double>(p * (p - 1)) * powers[p](i);
    }
    return acc;
}

double NonlinearitySpec::F(std::ptrdiff_t i, double u) const {
    if (kind == Kind::Custom) return F_custom(i, u);
    double acc = 0.0;
    for (std::size_t p = powers.size(); p-- > 0;) {
        acc *= u;
        if (powers[p].size() > 0) acc += powers[p](i) / static_cast<double>(p + 1);
    }
    return acc * u;
}

double NonlinearitySpec::derivativeSupBound(double u_max) const {
    if (kind == Kind::Polynomial) {
        double bound = 0.0;
        for (std::size_t p = 1; p < powers.size(); ++p) {
            if (powers[p].size() == 0) continue;
            bound += static_cast<double>(p) * powers[p].cwiseAbs().maxCoeff() *
                     std::pow(u_max, static_cast<double>(p - 1));
        }
        return bound;
    }
    // dense lattice fallback for custom evaluators
    double bound = 0.0;
    const int nu = 201;
    for (int j = 0; j < nu; ++j) {
        const double u = -u_max + 2.0 * u_max * j / (nu - 1);
        bound = std::max(bound, std::abs(fu_custom(0, u)));
    }
    return bound;
}

double NonlinearitySpec::hessianAffineBound(int grid_size) const {
    double at_zero = 0.0;
    for (int i = 0; i < grid_size; ++i) at_zero = std::max(at_zero, std::abs(fuu(i, 0.0)));
    return std::max(at_zero, hess_C);
}

NonlinearitySpec NonlinearitySpec::polynomial(int grid_size, const std::vector<double>& coeffs) {
    NonlinearitySpec s;
    s.kind = Kind::Polynomial;
    s.powers.resize(coeffs.size());
    for (std::size_t p = 0; p < coeffs.size(); ++p)
        if (coeffs[p] != 0.0)
            s.powers[p] = Eigen::VectorXd::Constant(grid_size, coeffs[p]);
    return s;
}

namespace {

Eigen::VectorXd pointwise_eval(const NonlinearitySpec& f, const Field& u,
                               double (NonlinearitySpec::*eval)(std::ptrdiff_t, double) const) {
    const Eigen::VectorXd grid = u.model->synthesize(u.c);
    Eigen::VectorXd out(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        out(i) = (f.*eval)(i, grid(i));
        if (!std::isfinite(out(i)))
            throw NonFiniteError("nonlinearity produced a non-finite value at grid point " +
                                 std::to_string(i), i);
    }
    return out;
}

}  // namespace

Field nemitski(const NonlinearitySpec& f, const Field& u) {
    return Field(u.model->project(pointwise_eval(f, u, &NonlinearitySpec::f)), u.model);
}

Field frechet_apply(const NonlinearitySpec& f, const Field& u, const Field& v) {
    if (u.model.get() != v.model.get())
        throw std::invalid_argument("fields belong to different spectral models");
    const Eigen::VectorXd du = pointwise_eval(f, u, &NonlinearitySpec::fu);
    const Eigen::VectorXd vg = v.model->synthesize(v.c);
    return Field(u.model->project(du.cwiseProduct(vg)), u.model);
}

Eigen::MatrixXd multiplication_matrix(const NonlinearitySpec& f, const Field& u) {
    const Eigen::VectorXd du = pointwise_eval(f, u, &NonlinearitySpec::fu);
    const auto& model = *u.model;
    const Eigen::VectorXd wd = model.quad_weights.cwiseProduct(du);
    Eigen::MatrixXd M = model.modes.transpose() * wd.asDiagonal() * model.modes;
    return 0.5 * (M + M.transpose());  // symmetrize roundoff
}

double potential_integral(const NonlinearitySpec& f, const Field& u) {
    const Eigen::VectorXd vals = pointwise_eval(f, u, &NonlinearitySpec::F);
    return u.model->quad_weights.dot(vals);
}

double GrowthReport::maxCtilde() const {
    double m = 0.0;
    for (const auto& e : estimates) m = std::max(m, e.ctilde);
    return m;
}

GrowthReport verify_growth(const NonlinearitySpec& f, const std::vector<Field>& samples) {
    if (samples.size() < 2) throw std::invalid_argument("growth verification needs >= 2 samples");
    GrowthReport rep;
    rep.polynomial_form = f.polynomialForm();
    rep.sample_count = static_cast<int>(samples.size());
    const char* names[5] = {"n1", "n2", "n3", "n4", "n5"};
    for (int q = 0; q < 5; ++q) rep.estimates[q].name = names[q];

    const auto& model = *samples.front().model;
    const Eigen::VectorXd lam_isqrt = model.eigenvalues.cwiseSqrt().cwiseInverse();

    auto op_norm_h1_l2 = [&](const Eigen::MatrixXd& M) {
        // ||M||_{L(H^1_0, L^2)} = sigma_max(M Lambda^{-1/2})
        return Eigen::JacobiSVD<Eigen::MatrixXd>(M * lam_isqrt.asDiagonal())
            .singularValues()(0);
    };
    auto op_norm_l2_hm1 = [&](const Eigen::MatrixXd& M) {
        // ||M||_{L(L^2, H^-1)} = sigma_max(Lambda^{-1/2} M)
        return Eigen::JacobiSVD<Eigen::MatrixXd>(lam_isqrt.asDiagonal() * M)
            .singularValues()(0);
    };
    auto record = [&](int q, double ratio) {
        auto& e = rep.estimates[q];
        if (!std::isfinite(ratio))
            throw NonFiniteError("growth ratio " + std::string(names[q]) + " is non-finite", 0);
        e.worst_ratio = std::max(e.worst_ratio, ratio);
        e.ctilde = e.worst_ratio;
        ++e.samples;
    };

    std::vector<Eigen::MatrixXd> mult(samples.size());
    std::vector<double> h1(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const Field& u = samples[s];
        h1[s] = norm_H(u, 1.0);
        mult[s] = multiplication_matrix(f, u);
        record(0, norm_H(nemitski(f, u), 0.0) / (1.0 + std::pow(h1[s], 3)));
        const double dnorm = op_norm_h1_l2(mult[s]);
        record(1, dnorm / (1.0 + h1[s] * h1[s]));
        record(3, op_norm_l2_hm1(mult[s]) / (1.0 + h1[s] * h1[s]));
    }
    for (std::size_t s = 0; s + 1 < samples.size(); ++s) {
        const Field& u1 = samples[s];
        const Field& u2 = samples[s + 1];
        const double du = norm_H(u1 - u2, 1.0);
        if (du < 1e-14) continue;
        const double denom = (1.0 + std::pow(h1[s], f.alpha) + std::pow(h1[s + 1], f.alpha)) *
                             std::pow(du, f.beta_h);
        const Eigen::MatrixXd D = mult[s] - mult[s + 1];
        record(2, op_norm_h1_l2(D) / denom);
        record(4, op_norm_l2_hm1(D) / denom);
    }
    return rep;
}

DissipReport check_dissipativeness(const NonlinearitySpec& f, const ModelPtr& model,
                                   double u_max, int u_samples) {
    if (f.c_dissip.size() != model->domain.gridSize())
        throw ConfigError("Hyp 4 requires a c(x) field matching the grid");
    DissipReport rep;
    rep.margin1 = rep.margin2 = std::numeric_limits<double>::infinity();
    const int m = model->domain.gridSize();
    rep.lattice_points = m * u_samples;
    const double guard = 1e-12;
    for (int i = 0; i < m; ++i) {
        const double c = f.c_dissip(i);
        for (int j = 0; j < u_samples; ++j) {
            const double u = -u_max + 2.0 * u_max * j / (u_samples - 1);
            const double lhs1 = f.f(i, u) * u - f.mu * f.F(i, u);
            const double lhs2 = f.F(i, u);
            const double m1 = c - lhs1;
            const double m2 = c - lhs2;
            if (m1 < rep.margin1) { rep.margin1 = m1; }
            if (m2 < rep.margin2) { rep.margin2 = m2; }
            const double scale = std::max({1.0, std::abs(lhs1), std::abs(lhs2), std::abs(c)});
            if ((m1 < -guard * scale || m2 < -guard * scale) && rep.pass) {
                rep.pass = false;
                rep.worst_index = i;
                rep.worst_u = u;
                std::ostringstream os;
                os << "dissipativeness violated at grid point " << i << ", u = " << u
                   << " (margins " << m1 << ", " << m2 << ")";
                rep.violation = os.str();
            }
        }
    }
    return rep;
}

}  // namespace specwave
