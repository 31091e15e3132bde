#pragma once

#include <optional>
#include <vector>

#include "specwave/mode_flow.hpp"
#include "specwave/nonlinearity.hpp"
#include "specwave/operator_core.hpp"

namespace specwave {

/// Phase-space level tag: Z0 = H^1_0 x L^2, Zm1 = L^2 x H^-1.
enum class Level { Z0, Zm1 };

/// A point (u,v) of the phase space Z_kappa, with its epsilon.
/// For linearized states the slots hold (v,w).
struct StatePair {
    Field u, v;
    double epsilon = 1.0;
    Level level = Level::Z0;

    static StatePair zero(const ModelPtr& m, double eps, Level lvl = Level::Z0) {
        return {Field::zero(m), Field::zero(m), eps, lvl};
    }
};

/// Weighted phase-space norms. The sum form is the paper's display
///   Z0:  ||u||_{H^1_0[th]} + eps^{1/2} ||v||_{L^2}
///   Zm1: ||u||_{L^2} + eps^{1/2} ||v||_{H^-1[th]};
/// the squared form is the Hilbert-style combination (first^2 + eps second^2)
/// used wherever a quadratic form is required (energy sandwiches, operator
/// norms). They are equivalent within sqrt(2).
double z_norm_sum(const StatePair& z, double theta);
double z_norm_sq(const StatePair& z, double theta);

/// Exact per-mode application of the damped-wave semigroup T_{eps,kappa}[theta](t).
StatePair linear_semigroup_step(const StatePair& z, double theta, double t);

struct StepControls {
    double fp_tol = 1e-12;
    int fp_max_iter = 50;
    int max_halvings = 8;
};

/// Modulus-of-continuity table: omega[l] = sup over stored pairs with
/// |t-s| <= lag[l] of ||u(t)-u(s)||_{H^1_0} (cumulative, nondecreasing).
struct OmegaTable {
    std::vector<double> lag;
    std::vector<double> omega;
};

/// Time-sampled solution with per-step scalar series and bookkeeping.
struct Trajectory {
    double epsilon = 1.0;      // 0 marks the parabolic flow
    double h = 1e-3;           // integrator step
    double t0 = 0.0;
    int store_stride = 10;
    std::vector<double> times;        // stored sample times
    std::vector<StatePair> states;    // stored samples (parabolic: v = u_t)

    // per-step scalar series, including the initial point
    std::vector<double> step_times, u_h1, v_l2, a0u_l2, v_h1, lyap, r_running;

    OmegaTable omega;
    double R = 0.0;            // sup of ||u||_{H^1_0}^2 + eps ||v||_{L^2}^2
    bool blew_up = false;

    double storeDt() const { return h * store_stride; }
    double windowStart() const { return times.empty() ? t0 : times.front(); }
    double windowEnd() const { return times.empty() ? t0 : times.back(); }
    /// Index of the stored sample at time t (throws if off-grid).
    int indexAt(double t) const;
    /// Linear interpolation of u-coefficients between stored samples.
    Eigen::VectorXd interpU(double t) const;
    Eigen::VectorXd interpV(double t) const;
    /// w from the spectral identity eps*w = -v - A0 u + f(u) (exact in the
    /// truncation). For the parabolic flow returns u_tt = d/dt(-A0 u + f(u)).
    Eigen::VectorXd wAt(int index, const NonlinearitySpec& f) const;
};

struct IntegrateOptions {
    double store_dt = 0.01;
    double omega_max_lag = 1.0;
    double blowup_ceiling = 1e6;
    StepControls controls;
};

/// One mild step of the Duhamel form via the exponential two-stage rule:
/// the nonlinearity is evaluated at both endpoints (the right endpoint by
/// fixed-point iteration) and its linear-in-time interpolant is propagated
/// exactly mode by mode. Exact when f is constant along the step.
StatePair mild_step(const StatePair& z, const NonlinearitySpec& f, double h,
                    const StepControls& controls = {});

/// Integrate the damped wave flow on [t0, t0+T].
Trajectory integrate(const StatePair& initial, const NonlinearitySpec& f, double T,
                     double h, const IntegrateOptions& opts = {}, double t0 = 0.0);

/// Integrate the parabolic limit; states carry v = u_t = -A0 u + f(u).
Trajectory parabolic_integrate(const Field& u0, const NonlinearitySpec& f, double T,
                               double h, const IntegrateOptions& opts = {}, double t0 = 0.0);

/// L(u,v) = (eps/2)||v||^2 + (1/2)||u||_{H^1_0}^2 - int F(x,u).
double lyapunov(const StatePair& z, const NonlinearitySpec& f);

/// Restriction of a trajectory to [t_from, end]: stored samples, per-step
/// series, R and the omega table are all rebuilt over the window.
Trajectory window_trajectory(const Trajectory& traj, double t_from, double omega_max_lag);

/// Compares the discrete d/dt L against -||v||^2 along the per-step series.
struct DissipationReport {
    double max_residual = 0.0;  // max |dL/dt + ||v||^2|
    bool monotone = true;       // L nonincreasing within tolerance
    double mono_tolerance = 0.0;
    double h = 0.0;
};
DissipationReport dissipation_check(const Trajectory& traj);

}  // namespace specwave
