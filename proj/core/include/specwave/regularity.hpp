#pragma once

#include <string>
#include <vector>

#include "specwave/linearized.hpp"

namespace specwave {

/// Variation-of-constants reconstruction of (v,w) from the trajectory's
/// recent past through the evolution system, with its error budget.
struct VocResult {
    double theta = 0.0, Tw = 0.0;
    std::vector<double> times;       // evaluation times (>= window start + Tw)
    std::vector<double> error;       // ||J0(t) - (v,w)(t)|| in the Z0-level weighted norm
    std::vector<double> tail_bound;  // certificate tail budget at each time
    double max_error = 0.0;
    double quad_budget = 0.0;        // Richardson estimate from substep halving
    double bridge_max = 0.0;         // residual of the true-initial-data sweep
    double tail_at_Tw = 0.0;
    bool pass = false;
    std::string notes;
};

/// Reconstructs int_{t-Tw}^{t} U(t,p)(0,(theta/eps) v(p)) dp by sweeping the
/// linearized system with source from the window start; requires a Z0-level
/// decay certificate. If voc_tol > 0 and the tail bound at lag Tw exceeds
/// it, the reconstruction is refused with the required Tw in the message.
VocResult voc_reconstruct(const Trajectory& traj, const NonlinearitySpec& f, double theta,
                          double Tw, const DecayCertificate& cert_z0, double voc_tol = 0.0,
                          int substeps_per_sample = 1);

/// Measured suprema and closed bounds of the regularity bootstrap.
struct RegularityReport {
    double epsilon = 1.0, theta = 0.0;
    double sup_a0u_sq = 0.0, sup_v_h1_sq = 0.0, sup_eps_w_sq = 0.0, sup_sum = 0.0;
    double th1_bound = 0.0;  // 4 M R theta / (delta eps) + Ctilde^2 (1+R^3)^2
    double th2_bound = 0.0;  // 4 theta^2 K e^{2 C_nu K}
    double R_used = 0.0, ctilde_n1 = 0.0, M = 0.0, rate = 0.0, delta = 0.0;
    double K_measured = 0.0, K_telescope = 0.0, C_nu = 0.0, K3_chain = 0.0;
    double urka_fd_mismatch = 0.0, urka_fd_tolerance = 0.0;
    double voc_max_error = 0.0, voc_tail_budget = 0.0, voc_quad_budget = 0.0;
    double window_start = 0.0, window_end = 0.0;
    bool pass = false;
    std::string notes;
};

/// Theorem 1 verification on one trajectory window.
RegularityReport theorem1_check(const Trajectory& traj, const NonlinearitySpec& f,
                                const EnergyParams& params, const DecayCertificate& cert,
                                const GrowthReport& growth, const VocResult& voc,
                                double R_declared);

/// Lyapunov-type functional of the derivative pair along the trajectory:
/// Lambda(t) = eps/2 ||d v + w||^2 + 1/2 ||v||^2_{H^1_0[theta,t]}
///           + (eps d^2 - d)/2 ||v||^2  (frozen-at-t middle norm).
double lambda_functional(const Trajectory& traj, int index, const NonlinearitySpec& f,
                         const EnergyParams& params);

/// Compares the discrete d/dt Lambda against the exact differential identity
///   Lambda' + 2 delta Lambda = (2 delta eps - 1)||w + d v||^2
///     + theta <w + d v, v> - 1/2 int d_uu f(u) v |v|^2.
struct LambdaReport {
    double max_residual = 0.0;
    double tolerance = 0.0;  // a-posteriori second-order bound
    double dt = 0.0;
    int samples = 0;
    bool pass = false;
    std::string notes;
};
LambdaReport lambda_derivative_check(const Trajectory& traj, const NonlinearitySpec& f,
                                     const EnergyParams& params);

/// Lemma "integral": measured window integral of ||v||^2 against the
/// Lyapunov telescope and the a-priori 2 sup|L| bound.
struct KReport {
    double K_measured = 0.0;    // int_window ||v||^2 dt
    double K_telescope = 0.0;   // L(start) - L(end)
    double K_apriori = 0.0;     // 2 sup_window |L|
    bool pass = false;          // measured <= apriori (+tolerance)
};
KReport integral_bound_K(const Trajectory& traj);

/// Constants of the cubic-term interpolation chain: K3 with
/// 1/2 int |d_uu f| |v|^3 <= K3 ||v||_{L2} ||v||^2_{H^1_0}, and
/// C_nu = K3^2/(4 nu) with nu = delta.
struct CnuResult { double K3 = 0.0; double C_nu = 0.0; double C1 = 0.0; double C_emb = 0.0; };
CnuResult derive_C_nu(const NonlinearitySpec& f, const ModelPtr& model, double R, double delta,
                      double embedding_override = 0.0);

/// Theorem 2 epsilon sweep: per-epsilon reports plus the uniformity verdict.
struct Theorem2Result {
    std::vector<double> epsilons;
    std::vector<RegularityReport> reports;
    double band_ratio = 0.0;        // max/min of the measured suprema
    double uniformity_factor = 2.0;
    bool uniform_pass = false;
    bool bounds_pass = false;
    bool pass = false;
};

struct Theorem2Options {
    double T = 60.0;
    double h = 1e-3;
    double window_T0 = 5.0;      // sweep measurement window start
    double uniformity_factor = 2.0;
    double R_declared = 0.0;     // 0 = use measured R
    double embedding_override = 0.0;
    int threads = 1;
    IntegrateOptions integrate;
};

/// Runs the trajectory per epsilon, measures the Z1 suprema over the window,
/// and checks the Gronwall bound 4 theta^2 K e^{2 C_nu K} and the factor-2
/// uniformity band.
Theorem2Result theorem2_sweep(const std::vector<double>& epsilons, const StatePair& initial_e1,
                              const NonlinearitySpec& f, const EnergyParams& params,
                              const Theorem2Options& opts);

}  // namespace specwave
