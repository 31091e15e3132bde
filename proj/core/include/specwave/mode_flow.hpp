#pragma once

#include <Eigen/Dense>

namespace specwave {

/// Closed-form flow of the single damped oscillator mode
///   u' = v,   eps v' = -v - m u,   m > 0 in the shifted setting,
/// i.e. of z' = B z with B = [[0, 1], [-m/eps, -1/eps]].
///
/// Characteristic roots r = (-1 +- sqrt(1 - 4 eps m)) / (2 eps); the three
/// regimes (complex, real distinct, double) are dispatched on the
/// discriminant with a guard band of width 1e-8 around the double root,
/// where the analytic limit formula is used instead.
///
/// Besides the propagator T(t) = exp(Bt), the Duhamel weights
///   I0(t) = int_0^t exp(Bs) ds,    I1(t) = int_0^t s exp(Bs) ds
/// are available in closed form; they make the exponential two-stage
/// (trapezoidal) rule exact for nonlinearities that are constant or linear
/// along a step.
struct ModeFlow {
    using Mat2 = Eigen::Matrix2d;

    static constexpr double kDiscriminantGuard = 1e-8;

    /// T(t) only.
    static Mat2 propagator(double eps, double m, double t);
    /// T(t), I0(t), I1(t) in one evaluation.
    static void propagatorWithIntegrals(double eps, double m, double t,
                                        Mat2& T, Mat2& I0, Mat2& I1);

    /// Scalar analogue for the parabolic flow u' = -m u:
    /// E = exp(-m t), q = int_0^t exp(-m s) ds, s1 = int_0^t s exp(-m s) ds.
    static void parabolicWeights(double m, double t, double& E, double& q, double& s1);
};

}  // namespace specwave
