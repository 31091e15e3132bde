#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <vector>

#include "specwave/domain.hpp"

namespace specwave {

/// Assembled discrete elliptic operator on the interior grid.
struct AssembledOperator {
    DomainSpec domain;
    Eigen::SparseMatrix<double> matrix;  // symmetric positive definite
    Eigen::VectorXd quad_weights;        // grid quadrature weights (h resp. h1*h2)
};

/// Assemble A = beta - div(a grad) with Dirichlet rows eliminated.
/// Throws EllipticityError / CoercivityError per the declared invariants.
AssembledOperator assemble_operator(const DomainSpec& dom, const CoefficientField& coeffs);

/// Eigenpairs of the assembled operator; the single source of truth for
/// every norm in the harness. Fields live in the span of the first N modes
/// and are identified with their coefficient vectors, so all H_kappa norms
/// are closed-form sums.
class SpectralModel {
public:
    DomainSpec domain;
    Eigen::VectorXd eigenvalues;   // ascending, lambda_1 > 0
    Eigen::MatrixXd modes;         // gridSize x N, L2(grid)-orthonormal
    Eigen::VectorXd quad_weights;
    Eigen::VectorXd residuals;     // ||A phi_k - lambda_k phi_k||_{L2}

    double lambda1() const { return eigenvalues(0); }
    int modeCount() const { return static_cast<int>(eigenvalues.size()); }

    /// Grid function -> spectral coefficients (weighted projection).
    Eigen::VectorXd project(const Eigen::VectorXd& grid_values) const;
    /// Spectral coefficients -> grid function.
    Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs) const;
    /// Weighted grid inner product.
    double gridInner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
};

using ModelPtr = std::shared_ptr<const SpectralModel>;

/// Dense symmetric eigendecomposition of the first N modes.
ModelPtr eig_decompose(const AssembledOperator& op, int N);

/// A scalar field as a coefficient vector against a shared SpectralModel.
struct Field {
    Eigen::VectorXd c;
    ModelPtr model;

    Field() = default;
    Field(Eigen::VectorXd coeffs, ModelPtr m) : c(std::move(coeffs)), model(std::move(m)) {}
    static Field zero(const ModelPtr& m) {
        return Field(Eigen::VectorXd::Zero(m->modeCount()), m);
    }
    static Field mode(const ModelPtr& m, int k, double amplitude = 1.0);
    int size() const { return static_cast<int>(c.size()); }
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);

/// || u ||_{H_kappa} = (sum lambda_k^kappa c_k^2)^{1/2}.
double norm_H(const Field& u, double kappa);
/// Shifted norms: kappa=+1 gives (sum (lambda_k+theta) c_k^2)^{1/2},
/// kappa=-1 gives (sum c_k^2/(lambda_k+theta))^{1/2}.
double norm_H_theta(const Field& u, int kappa, double theta);
double inner_H_theta(const Field& u, const Field& v, int kappa, double theta);

/// Verification report for the shifted-norm inequality family.
struct ShiftReport {
    struct Entry {
        std::string inequality;    // "equ1.lower", "equ1.upper", "equ2.lower", ...
        double tightest_ratio;     // min over samples of slack ratio (>= 1 means holds)
        int tightest_sample;       // index of the extremal sample
    };
    std::vector<Entry> entries;
    int samples = 0;
    double theta = 0.0;
    bool pass = true;
    std::string violation;         // empty when pass
};

/// Checks (equ1), (equ2), (eigen1), (eigen2) on the given samples with
/// exact spectral arithmetic (relative guard `tol`, default 1e-12).
ShiftReport check_shift_inequalities(double theta, const std::vector<Field>& samples,
                                     double tol = 1e-12);

/// Random field with a prescribed H^1_0 norm (iid normal coefficients rescaled).
Field random_field(const ModelPtr& m, Rng& rng, double h1_norm);

}  // namespace specwave
