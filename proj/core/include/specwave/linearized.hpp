#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specwave/semiflow.hpp"

namespace specwave {

/// Parameters of the interval-iteration energy argument.
struct EnergyParams {
    double epsilon = 1.0;
    double theta = 0.0;
    double delta = 0.25;     // in (0, min(1/2, lambda1/2)]
    double eta = 1.0;        // interval length
    double rho = 0.5;        // in (0, 1/2]
    double theta_rho = 0.0;  // certified shift threshold

    void validate(double lambda1) const;
};

/// Frozen operator A[theta,tau] = A[theta] - multiplication by d_u f(u(tau)),
/// dense symmetric in the eigenbasis, with its spectral factorization.
class FrozenOperator {
public:
    FrozenOperator(const NonlinearitySpec& f, const Field& u_frozen, double theta);

    double theta() const { return theta_; }
    const Eigen::MatrixXd& matrix() const { return A_; }
    const Eigen::MatrixXd& eigenvectors() const { return Q_; }
    const Eigen::VectorXd& eigenvalues() const { return m_; }
    bool positiveDefinite() const { return m_(0) > 0.0; }

    /// v^T A v  (squared H^1_0[theta,tau] norm)
    double normPlusSq(const Eigen::VectorXd& v) const;
    /// v^T A^{-1} v (squared H^-1[theta,tau] norm; requires positive definiteness)
    double normMinusSq(const Eigen::VectorXd& v) const;

private:
    double theta_;
    Eigen::MatrixXd A_, Q_;
    Eigen::VectorXd m_;
};

/// Certified shift threshold for the frozen-norm equivalences.
struct ThetaRhoResult {
    double theta_rho = 0.0;
    double derivative_bound = 0.0;  // D(R)
    double u_max = 0.0;             // embedding bound on |u|
    double embedding_constant = 1.0;
    int doublings = 0;
    bool verified = false;
    int samples = 0;
    std::string log;
};

/// theta_rho = max(0, 2 D(R)/rho - lambda1) from the declared polynomial
/// bound and the sup-norm embedding, then verified exactly (generalized
/// eigenvalues of the frozen/shifted form pencil) on random freeze states
/// with ||u||_{H^1_0}^2 <= R. Raises theta geometrically on failure.
ThetaRhoResult theta_rho(double rho, double R, const NonlinearitySpec& f,
                         const ModelPtr& model, int n_samples = 200,
                         std::uint64_t seed = 1234, double embedding_override = 0.0);

/// Default sup-norm embedding constant ||u||_inf <= C ||u||_{H^1_0}.
double embedding_constant(const ModelPtr& model);

/// Observer invoked at every substep boundary during linearized propagation.
using BlockObserver = std::function<void(double t, const Eigen::MatrixXd& Z)>;
/// Optional source term sigma(t) entering as (0, sigma) on the w-slot.
using SourceFn = std::function<Eigen::VectorXd(double t)>;

/// Propagate a block of linearized states (columns [v;w], 2N rows) from s to
/// t along the stored trajectory: frozen-coefficient exponential flow per
/// substep (freeze at the substep start) plus endpoint quadrature of the
/// coefficient-variation correction, plus exact two-stage treatment of the
/// source when present.
Eigen::MatrixXd propagate_block(const Trajectory& traj, const NonlinearitySpec& f,
                                double eps, double theta, double s, double t,
                                Eigen::MatrixXd Z, int substeps_per_sample = 1,
                                const SourceFn& source = {},
                                const BlockObserver& observer = {});

/// Single-state form of the evolution system U_{eps,kappa}[theta](t,s).
StatePair propagate_U(const Trajectory& traj, const NonlinearitySpec& f, double theta,
                      double s, double t, const StatePair& initial);

/// Interval energy functional. For level Zm1:
///   E = eps/2 ||d v + w||_*^2 + 1/2 ||v||_{L^2}^2 + (eps d^2 - d)/2 ||v||_*^2
/// with * the (frozen) H^-1[theta(,tau)] norm; for Z0 the same with
/// * -> L^2 and the middle norm H^1_0[theta(,tau)]. frozen == nullptr uses
/// the unfrozen theta-shifted norms.
double energy_E(const Eigen::VectorXd& v, const Eigen::VectorXd& w, Level level,
                const EnergyParams& p, const ModelPtr& model,
                const FrozenOperator* frozen = nullptr);
double energy_E(const StatePair& vw, Level level, const EnergyParams& p,
                const FrozenOperator* frozen = nullptr);

/// Largest tabulated eta with 2 Ctilde (1+2R^alpha)^2 omega(eta)^{2 beta_h} <= delta.
double choose_eta(const EnergyParams& p, const OmegaTable& omega, double ctilde,
                  double R, double alpha);

/// Decay certificate for U(t,s) at one level.
struct DecayCertificate {
    Level level = Level::Zm1;
    double epsilon = 1.0, theta = 0.0, theta_rho = 0.0, rho = 0.5, delta = 0.25, eta = 1.0;
    double M = 0.0;                 // envelope prefactor: op(t) <= M e^{-rate (t-s)} on samples
    double rate = 0.0;              // fitted decay rate (log-linear LS)
    double fit_residual = 0.0;      // rms residual of the fit
    double min_interval_rate = 0.0; // min per-interval energy contraction rate
    double won3_prefactor = 0.0;    // sup_t E(t) e^{(delta/2)(t-s)} / E(s)
    bool compat_rho_eta = false;    // ((1+rho)/(1-rho)) e^{-delta eta/2} <= 1
    int intervals = 0, basis_size = 0, sample_count = 0;
    double window_start = 0.0, window_end = 0.0;
    bool pass = false;
    std::string notes;

    // series for reporting: operator norm samples and interval energies
    std::vector<double> sample_times, opnorm;
    std::vector<int> interval_index;
    std::vector<double> interval_energy_ratio;  // max over basis, normalized per interval
};

/// Propagates a weighted-orthonormal basis, asserts per-interval energy
/// contraction at rate >= delta (1 - fit_tol) and fits the global operator
/// norm decay (rate >= delta/2 for a pass).
DecayCertificate verify_interval_decay(const Trajectory& traj, const NonlinearitySpec& f,
                                       const EnergyParams& params, Level level,
                                       int basis_size = 0, double fit_tol = 0.02,
                                       int substeps_per_sample = 1);

}  // namespace specwave
