#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>

#include "specwave/attractor.hpp"
#include "specwave/config.hpp"
#include "specwave/semiflow.hpp"

namespace sw = specwave;

// Reference 1D model on (0,pi) with a=1, beta=0 (lambda_k ~= k^2), cached.
inline sw::ModelPtr reference_model(int n = 256, int N = 32, int order = 2) {
    struct Key { int n, N, order; };
    static std::vector<std::pair<Key, sw::ModelPtr>> cache;
    for (auto& [k, m] : cache)
        if (k.n == n && k.N == N && k.order == order) return m;
    sw::DomainSpec dom;
    dom.dimension = 1;
    dom.lengths = {M_PI, M_PI};
    dom.grid_n = {n, 0};
    dom.modes = N;
    dom.fd_order = order;
    auto coeffs = sw::CoefficientField::constant(dom, 1.0, 0.0);
    auto model = sw::eig_decompose(sw::assemble_operator(dom, coeffs), N);
    cache.push_back({{n, N, order}, model});
    return model;
}

// f(u) = 2u - u^3 with the constants of the reference scenario.
inline sw::NonlinearitySpec cubic_spec(const sw::ModelPtr& model) {
    auto f = sw::NonlinearitySpec::polynomial(model->domain.gridSize(), {0.0, 2.0, 0.0, -1.0});
    f.alpha = 1.0;
    f.beta_h = 1.0;
    f.holder_C = 3.0;
    f.hess_C = 6.0;
    f.mu = 4.0;
    f.c_dissip = Eigen::VectorXd::Constant(model->domain.gridSize(), 1.0);
    return f;
}

inline sw::NonlinearitySpec zero_spec(const sw::ModelPtr& model) {
    auto f = sw::NonlinearitySpec::polynomial(model->domain.gridSize(), {0.0});
    f.mu = 1.0;
    f.c_dissip = Eigen::VectorXd::Zero(model->domain.gridSize());
    return f;
}

// Classic RK4 on z' = B z, independent oracle for the closed-form propagator.
inline Eigen::Vector2d rk4_flow(const Eigen::Matrix2d& B, Eigen::Vector2d z, double t,
                                int steps) {
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const Eigen::Vector2d k1 = B * z;
        const Eigen::Vector2d k2 = B * (z + 0.5 * h * k1);
        const Eigen::Vector2d k3 = B * (z + 0.5 * h * k2);
        const Eigen::Vector2d k4 = B * (z + h * k3);
        z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return z;
}

inline Eigen::Matrix2d mode_generator(double eps, double m) {
    Eigen::Matrix2d B;
    B << 0.0, 1.0, -m / eps, -1.0 / eps;
    return B;
}

// Newton equilibrium oracle: the positive Chafee-Infante equilibrium.
inline sw::Field positive_equilibrium(const sw::ModelPtr& model, const sw::NonlinearitySpec& f) {
    const auto roots = sw::find_equilibria(
        f, model, {sw::Field::mode(model, 1, 1.0)});
    REQUIRE(roots.size() == 1);
    return roots.front();
}
