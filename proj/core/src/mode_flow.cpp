#include "specwave/mode_flow.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace specwave {

namespace {

using Cplx = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;

// q(r,t) = int_0^t e^{rs} ds, series near rt = 0 to avoid cancellation
Cplx q_of(Cplx r, double t) {
    const Cplx x = r * t;
    if (std::abs(x) < 1e-4) {
        return t * (1.0 + x * (1.0 / 2.0 + x * (1.0 / 6.0 + x * (1.0 / 24.0 +
                    x * (1.0 / 120.0 + x / 720.0)))));
    }
    return (std::exp(x) - 1.0) / r;
}

// s(r,t) = int_0^t s e^{rs} ds
Cplx s_of(Cplx r, double t) {
    const Cplx x = r * t;
    if (std::abs(x) < 1e-4) {
        return t * t * (1.0 / 2.0 + x * (1.0 / 3.0 + x * (1.0 / 8.0 + x * (1.0 / 30.0 +
                        x * (1.0 / 144.0 + x / 840.0)))));
    }
    return (t * std::exp(x) - q_of(r, t)) / r;
}

// p(r,t) = int_0^t s^2 e^{rs} ds
Cplx p_of(Cplx r, double t) {
    const Cplx x = r * t;
    if (std::abs(x) < 1e-4) {
        return t * t * t * (1.0 / 3.0 + x * (1.0 / 4.0 + x * (1.0 / 10.0 + x * (1.0 / 36.0 +
                            x * (1.0 / 168.0 + x / 960.0)))));
    }
    return (t * t * std::exp(x) - 2.0 * s_of(r, t)) / r;
}

struct Roots {
    bool degenerate;
    Cplx rp, rm;   // distinct case
    double r;      // double-root case
};

Roots roots_of(double eps, double m) {
    if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
    const double disc = 1.0 - 4.0 * eps * m;
    Roots out{};
    if (std::abs(disc) <= ModeFlow::kDiscriminantGuard) {
        out.degenerate = true;
        out.r = -1.0 / (2.0 * eps);
        return out;
    }
    out.degenerate = false;
    const Cplx sq = std::sqrt(Cplx(disc, 0.0));
    out.rp = (-1.0 + sq) / (2.0 * eps);
    out.rm = (-1.0 - sq) / (2.0 * eps);
    return out;
}

Eigen::Matrix2d generator(double eps, double m) {
    Eigen::Matrix2d B;
    B << 0.0, 1.0, -m / eps, -1.0 / eps;
    return B;
}

}  // namespace

ModeFlow::Mat2 ModeFlow::propagator(double eps, double m, double t) {
    if (t == 0.0) return Mat2::Identity();
    const Roots rt = roots_of(eps, m);
    const Eigen::Matrix2d B = generator(eps, m);
    if (rt.degenerate) {
        const double r = rt.r;
        const Eigen::Matrix2d N = B - r * Eigen::Matrix2d::Identity();
        return std::exp(r * t) * (Mat2::Identity() + t * N);
    }
    const Cplx denom = rt.rp - rt.rm;
    const Mat2c Bc = B.cast<Cplx>();
    const Mat2c Pp = (Bc - rt.rm * Mat2c::Identity()) / denom;
    const Mat2c Pm = (Bc - rt.rp * Mat2c::Identity()) / (-denom);
    const Mat2c Tc = std::exp(rt.rp * t) * Pp + std::exp(rt.rm * t) * Pm;
    return Tc.real();
}

void ModeFlow::propagatorWithIntegrals(double eps, double m, double t,
                                       Mat2& T, Mat2& I0, Mat2& I1) {
    if (t == 0.0) {
        T = Mat2::Identity();
        I0.setZero();
        I1.setZero();
        return;
    }
    const Roots rt = roots_of(eps, m);
    const Eigen::Matrix2d B = generator(eps, m);
    if (rt.degenerate) {
        const double r = rt.r;
        const Eigen::Matrix2d N = B - r * Eigen::Matrix2d::Identity();
        const double E = std::exp(r * t);
        const double q = q_of(Cplx(r, 0), t).real();
        const double s = s_of(Cplx(r, 0), t).real();
        const double p = p_of(Cplx(r, 0), t).real();
        T = E * (Mat2::Identity() + t * N);
        I0 = q * Mat2::Identity() + s * N;
        I1 = s * Mat2::Identity() + p * N;
        return;
    }
    const Cplx denom = rt.rp - rt.rm;
    const Mat2c Bc = B.cast<Cplx>();
    const Mat2c Pp = (Bc - rt.rm * Mat2c::Identity()) / denom;
    const Mat2c Pm = (Bc - rt.rp * Mat2c::Identity()) / (-denom);
    T = (std::exp(rt.rp * t) * Pp + std::exp(rt.rm * t) * Pm).real();
    I0 = (q_of(rt.rp, t) * Pp + q_of(rt.rm, t) * Pm).real();
    I1 = (s_of(rt.rp, t) * Pp + s_of(rt.rm, t) * Pm).real();
}

void ModeFlow::parabolicWeights(double m, double t, double& E, double& q, double& s1) {
    E = std::exp(-m * t);
    if (m == 0.0) {
        q = t;
        s1 = 0.5 * t * t;
        return;
    }
    q = -std::expm1(-m * t) / m;
    const double x = m * t;
    if (x < 1e-4) {
        s1 = t * t * (1.0 / 2.0 - x * (1.0 / 3.0 - x * (1.0 / 8.0 - x * (1.0 / 30.0 -
                      x / 144.0))));
    } else {
        s1 = (q - t * E) / m;
    }
}

}  // namespace specwave
