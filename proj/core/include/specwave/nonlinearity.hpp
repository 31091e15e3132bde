#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "specwave/operator_core.hpp"

namespace specwave {

/// Pointwise nonlinearity f(x,u) with derivatives and antiderivative,
/// together with the structural constants of the growth and dissipativeness
/// hypotheses. The primary family is polynomial in u with grid-sampled
/// coefficient fields (exact derivatives, no symbolic engine); a custom
/// evaluator kind exists for out-of-family experiments and is flagged as
/// such by the growth verifier.
///
/// Note on names: the Holder exponent is beta_h (the potential coefficient
/// field already uses beta), and alpha + beta_h = 2.
class NonlinearitySpec {
public:
    enum class Kind { Polynomial, Custom };

    Kind kind = Kind::Polynomial;
    /// powers[p] = coefficient field of u^p (size = gridSize, may be empty for 0)
    std::vector<Eigen::VectorXd> powers;
    /// custom evaluators by (grid index, u); only read when kind == Custom
    std::function<double(std::ptrdiff_t, double)> f_custom, fu_custom, fuu_custom, F_custom;

    double holder_C = 1.0;   // Hyp 2 constant C
    double alpha = 1.0;      // 1 <= alpha < 2
    double beta_h = 1.0;     // 0 < beta_h <= 1, alpha + beta_h = 2
    double hess_C = 1.0;     // Hyp 3 Lipschitz constant of d_uu f
    double mu = 1.0;         // Hyp 4
    Eigen::VectorXd c_dissip;  // Hyp 4 c(x) on the grid

    void validate(int grid_size) const;
    bool polynomialForm() const { return kind == Kind::Polynomial; }

    double f(std::ptrdiff_t i, double u) const;
    double fu(std::ptrdiff_t i, double u) const;
    double fuu(std::ptrdiff_t i, double u) const;
    double F(std::ptrdiff_t i, double u) const;

    /// sup over the grid and |u| <= u_max of |d_u f(x,u)| (closed form for the
    /// polynomial family, dense lattice sample for custom evaluators).
    double derivativeSupBound(double u_max) const;
    /// C1 with |d_uu f(x,u)| <= C1 (1 + |u|): max of sup|d_uu f(.,0)| and hess_C.
    double hessianAffineBound(int grid_size) const;

    /// Constant-coefficient polynomial helper: f = sum coeffs[p] u^p.
    static NonlinearitySpec polynomial(int grid_size, const std::vector<double>& coeffs);
};

/// Nemitski operator: spectral projection of x -> f(x, u(x)).
Field nemitski(const NonlinearitySpec& f, const Field& u);
/// Frechet derivative action: projection of d_u f(x,u(x)) v(x).
Field frechet_apply(const NonlinearitySpec& f, const Field& u, const Field& v);
/// Projected multiplication operator M_jk = <phi_j, d_u f(.,u) phi_k> (symmetric N x N).
Eigen::MatrixXd multiplication_matrix(const NonlinearitySpec& f, const Field& u);
/// Grid quadrature of F(x, u(x)).
double potential_integral(const NonlinearitySpec& f, const Field& u);

/// Measured constants for the Nemitski growth estimates (n1)-(n5).
struct GrowthReport {
    struct Entry {
        std::string name;
        double ctilde = 0.0;       // certified constant = observed supremum
        double worst_ratio = 0.0;
        int samples = 0;
    };
    std::array<Entry, 5> estimates;  // n1..n5
    bool polynomial_form = true;     // false flags an out-of-Hyp-2 evaluator family
    int sample_count = 0;

    double ctilde(int n) const { return estimates.at(n - 1).ctilde; }
    double maxCtilde() const;
};

/// Empirical growth certification over a sample family (pairs are taken
/// consecutively for (n3)/(n5)).
GrowthReport verify_growth(const NonlinearitySpec& f, const std::vector<Field>& samples);

/// Lattice check of the two dissipativeness inequalities of Hyp 4.
struct DissipReport {
    bool pass = true;
    double margin1 = 0.0;  // min over lattice of c(x) - (f u - mu F)
    double margin2 = 0.0;  // min over lattice of c(x) - F
    std::ptrdiff_t worst_index = 0;
    double worst_u = 0.0;
    int lattice_points = 0;
    std::string violation;
};
DissipReport check_dissipativeness(const NonlinearitySpec& f, const ModelPtr& model,
                                   double u_max, int u_samples = 81);

}  // namespace specwave
