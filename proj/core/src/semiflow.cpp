#include "specwave/semiflow.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace specwave {

double z_norm_sum(const StatePair& z, double theta) {
    if (z.level == Level::Z0)
        return norm_H_theta(z.u, 1, theta) + std::sqrt(z.epsilon) * norm_H(z.v, 0.0);
    return norm_H(z.u, 0.0) + std::sqrt(z.epsilon) * norm_H_theta(z.v, -1, theta);
}

double z_norm_sq(const StatePair& z, double theta) {
    if (z.level == Level::Z0) {
        const double a = norm_H_theta(z.u, 1, theta);
        const double b = norm_H(z.v, 0.0);
        return a * a + z.epsilon * b * b;
    }
    const double a = norm_H(z.u, 0.0);
    const double b = norm_H_theta(z.v, -1, theta);
    return a * a + z.epsilon * b * b;
}

StatePair linear_semigroup_step(const StatePair& z, double theta, double t) {
    if (t < 0.0) throw std::invalid_argument("semigroup time must be >= 0");
    StatePair out = z;
    const auto& lam = z.u.model->eigenvalues;
    for (int k = 0; k < z.u.size(); ++k) {
        const Eigen::Matrix2d T = ModeFlow::propagator(z.epsilon, lam(k) + theta, t);
        const double uk = z.u.c(k), vk = z.v.c(k);
        out.u.c(k) = T(0, 0) * uk + T(0, 1) * vk;
        out.v.c(k) = T(1, 0) * uk + T(1, 1) * vk;
    }
    return out;
}

namespace {

// Per-step mode weights for the exponential two-stage rule, cached by h.
struct WaveWeights {
    std::vector<Eigen::Matrix2d> T, I0, I1;
};

class WaveStepper {
public:
    WaveStepper(const ModelPtr& model, double eps) : model_(model), eps_(eps) {}

    const WaveWeights& weights(double h) {
        auto it = cache_.find(h);
        if (it != cache_.end()) return it->second;
        WaveWeights w;
        const int N = model_->modeCount();
        w.T.resize(N);
        w.I0.resize(N);
        w.I1.resize(N);
        for (int k = 0; k < N; ++k)
            ModeFlow::propagatorWithIntegrals(eps_, model_->eigenvalues(k), h,
                                              w.T[k], w.I0[k], w.I1[k]);
        return cache_.emplace(h, std::move(w)).first->second;
    }

    // One step of size h with internal halving on fixed-point failure.
    void step(Eigen::VectorXd& u, Eigen::VectorXd& v, const NonlinearitySpec& f,
              double h, const StepControls& c, int depth = 0) {
        if (depth > c.max_halvings)
            throw ConvergenceError("mild step fixed point diverged after max halvings");
        const WaveWeights& w = weights(h);
        const int N = model_->modeCount();
        const Eigen::VectorXd g0 = nemitski(f, Field(u, model_)).c;

        Eigen::VectorXd lu(N), lv(N);  // exact linear propagation of (u,v)
        for (int k = 0; k < N; ++k) {
            lu(k) = w.T[k](0, 0) * u(k) + w.T[k](0, 1) * v(k);
            lv(k) = w.T[k](1, 0) * u(k) + w.T[k](1, 1) * v(k);
        }
        // predictor: constant-source Duhamel
        Eigen::VectorXd pu(N), pv(N);
        for (int k = 0; k < N; ++k) {
            const double a = g0(k) / eps_;
            pu(k) = lu(k) + w.I0[k](0, 1) * a;
            pv(k) = lv(k) + w.I0[k](1, 1) * a;
        }
        const double scale = 1.0 + std::sqrt(u.squaredNorm() + v.squaredNorm());
        bool converged = false;
        for (int it = 0; it < c.fp_max_iter; ++it) {
            const Eigen::VectorXd g1 = nemitski(f, Field(pu, model_)).c;
            Eigen::VectorXd nu(N), nv(N);
            for (int k = 0; k < N; ++k) {
                const double a = g1(k) / eps_;
                const double d = (g1(k) - g0(k)) / (eps_ * h);
                nu(k) = lu(k) + w.I0[k](0, 1) * a - w.I1[k](0, 1) * d;
                nv(k) = lv(k) + w.I0[k](1, 1) * a - w.I1[k](1, 1) * d;
            }
            const double delta = std::sqrt((nu - pu).squaredNorm() + (nv - pv).squaredNorm());
            pu.swap(nu);
            pv.swap(nv);
            if (delta <= c.fp_tol * scale) { converged = true; break; }
            if (!std::isfinite(delta) || delta > 1e6 * scale) break;
        }
        if (!converged) {
            step(u, v, f, h / 2.0, c, depth + 1);
            step(u, v, f, h / 2.0, c, depth + 1);
            return;
        }
        u.swap(pu);
        v.swap(pv);
    }

private:
    ModelPtr model_;
    double eps_;
    std::map<double, WaveWeights> cache_;
};

struct ParabolicWeights {
    Eigen::VectorXd E, q, s1;
};

class ParabolicStepper {
public:
    explicit ParabolicStepper(const ModelPtr& model) : model_(model) {}

    const ParabolicWeights& weights(double h) {
        auto it = cache_.find(h);
        if (it != cache_.end()) return it->second;
        ParabolicWeights w;
        const int N = model_->modeCount();
        w.E.resize(N);
        w.q.resize(N);
        w.s1.resize(N);
        for (int k = 0; k < N; ++k)
            ModeFlow::parabolicWeights(model_->eigenvalues(k), h, w.E(k), w.q(k), w.s1(k));
        return cache_.emplace(h, std::move(w)).first->second;
    }

    void step(Eigen::VectorXd& u, const NonlinearitySpec& f, double h,
              const StepControls& c, int depth = 0) {
        if (depth > c.max_halvings)
            throw ConvergenceError("parabolic step fixed point diverged after max halvings");
        const ParabolicWeights& w = weights(h);
        const Eigen::VectorXd g0 = nemitski(f, Field(u, model_)).c;
        const Eigen::VectorXd lu = w.E.cwiseProduct(u);
        Eigen::VectorXd pu = lu + w.q.cwiseProduct(g0);
        const double scale = 1.0 + u.norm();
        bool converged = false;
        for (int it = 0; it < c.fp_max_iter; ++it) {
            const Eigen::VectorXd g1 = nemitski(f, Field(pu, model_)).c;
            Eigen::VectorXd nu = lu + w.q.cwiseProduct(g1) -
                                 w.s1.cwiseProduct(g1 - g0) / h;
            const double delta = (nu - pu).norm();
            pu.swap(nu);
            if (delta <= c.fp_tol * scale) { converged = true; break; }
            if (!std::isfinite(delta) || delta > 1e6 * scale) break;
        }
        if (!converged) {
            step(u, f, h / 2.0, c, depth + 1);
            step(u, f, h / 2.0, c, depth + 1);
            return;
        }
        u.swap(pu);
    }

private:
    ModelPtr model_;
    std::map<double, ParabolicWeights> cache_;
};

long long step_count(double T, double h) {
    const long long n = std::llround(T / h);
    if (n < 1 || std::abs(static_cast<double>(n) * h - T) > 1e-9 * std::max(1.0, T))
        throw ConfigError("window length T must be a positive multiple of the step h");
    return n;
}

void build_omega(Trajectory& traj, double max_lag) {
    const std::size_t n = traj.states.size();
    if (n < 2) return;
    const double dt = traj.storeDt();
    const std::size_t max_l =
        std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::floor(max_lag / dt + 1e-9)));
    const auto& lam = traj.states.front().u.model->eigenvalues;
    double running = 0.0;
    for (std::size_t l = 1; l <= max_l; ++l) {
        double worst = 0.0;
        for (std::size_t i = 0; i + l < n; ++i) {
            const Eigen::VectorXd d = traj.states[i + l].u.c - traj.states[i].u.c;
            worst = std::max(worst, std::sqrt(d.cwiseAbs2().dot(lam)));
        }
        running = std::max(running, worst);
        traj.omega.lag.push_back(static_cast<double>(l) * dt);
        traj.omega.omega.push_back(running);
    }
}

}  // namespace

StatePair mild_step(const StatePair& z, const NonlinearitySpec& f, double h,
                    const StepControls& controls) {
    if (h <= 0.0) throw std::invalid_argument("step size must be positive");
    WaveStepper stepper(z.u.model, z.epsilon);
    StatePair out = z;
    stepper.step(out.u.c, out.v.c, f, h, controls);
    return out;
}

int Trajectory::indexAt(double t) const {
    const double dt = storeDt();
    const long long i = std::llround((t - times.front()) / dt);
    if (i < 0 || i >= static_cast<long long>(times.size()) ||
        std::abs(times[static_cast<std::size_t>(i)] - t) > 1e-9 * std::max(1.0, std::abs(t)))
        throw std::invalid_argument("time is not on the stored trajectory grid");
    return static_cast<int>(i);
}

Eigen::VectorXd Trajectory::interpU(double t) const {
    const double dt = storeDt();
    double x = (t - times.front()) / dt;
    x = std::max(0.0, std::min(x, static_cast<double>(times.size() - 1)));
    const std::size_t i = static_cast<std::size_t>(std::floor(x));
    if (i + 1 >= times.size()) return states.back().u.c;
    const double w = x - static_cast<double>(i);
    return (1.0 - w) * states[i].u.c + w * states[i + 1].u.c;
}

Eigen::VectorXd Trajectory::interpV(double t) const {
    const double dt = storeDt();
    double x = (t - times.front()) / dt;
    x = std::max(0.0, std::min(x, static_cast<double>(times.size() - 1)));
    const std::size_t i = static_cast<std::size_t>(std::floor(x));
    if (i + 1 >= times.size()) return states.back().v.c;
    const double w = x - static_cast<double>(i);
    return (1.0 - w) * states[i].v.c + w * states[i + 1].v.c;
}

Eigen::VectorXd Trajectory::wAt(int index, const NonlinearitySpec& f) const {
    const StatePair& z = states.at(static_cast<std::size_t>(index));
    const auto& lam = z.u.model->eigenvalues;
    if (epsilon > 0.0) {
        const Eigen::VectorXd fu = nemitski(f, z.u).c;
        return (-z.v.c - lam.cwiseProduct(z.u.c) + fu) / epsilon;
    }
    // parabolic: w = d/dt u_t = -A0 v + Df(u)[v]
    const Eigen::VectorXd dfv = frechet_apply(f, z.u, z.v).c;
    return -lam.cwiseProduct(z.v.c) + dfv;
}

namespace {

Trajectory run_trajectory(const StatePair& initial, const Field* u0_parabolic,
                          const NonlinearitySpec& f, double T, double h,
                          const IntegrateOptions& opts, double t0) {
    const bool parabolic = (u0_parabolic != nullptr);
    const ModelPtr model = parabolic ? u0_parabolic->model : initial.u.model;
    const double eps = parabolic ? 0.0 : initial.epsilon;
    const auto& lam = model->eigenvalues;

    Trajectory traj;
    traj.epsilon = eps;
    traj.h = h;
    traj.t0 = t0;
    traj.store_stride = std::max(1, static_cast<int>(std::llround(opts.store_dt / h)));

    const long long n = step_count(T, h);

    Eigen::VectorXd u = parabolic ? u0_parabolic->c : initial.u.c;
    Eigen::VectorXd v = parabolic ? Eigen::VectorXd::Zero(model->modeCount()) : initial.v.c;

    WaveStepper wave(model, eps > 0.0 ? eps : 1.0);
    ParabolicStepper para(model);

    auto v_parabolic = [&](const Eigen::VectorXd& uc) {
        return (-lam.cwiseProduct(uc) + nemitski(f, Field(uc, model)).c).eval();
    };
    if (parabolic) v = v_parabolic(u);

    auto record = [&](long long k) {
        const double t = t0 + static_cast<double>(k) * h;
        Field fu(u, model), fv(v, model);
        const double uh1 = norm_H(fu, 1.0);
        const double vl2 = norm_H(fv, 0.0);
        traj.step_times.push_back(t);
        traj.u_h1.push_back(uh1);
        traj.v_l2.push_back(vl2);
        traj.a0u_l2.push_back(norm_H(fu, 2.0));
        traj.v_h1.push_back(norm_H(fv, 1.0));
        traj.lyap.push_back(0.5 * eps * vl2 * vl2 + 0.5 * uh1 * uh1 -
                            potential_integral(f, fu));
        traj.R = std::max(traj.R, uh1 * uh1 + eps * vl2 * vl2);
        traj.r_running.push_back(traj.R);
        if (k % traj.store_stride == 0) {
            traj.times.push_back(t);
            traj.states.push_back({fu, fv, eps, Level::Z0});
        }
        return uh1 + std::sqrt(std::max(eps, 0.0)) * vl2;
    };

    record(0);
    for (long long k = 1; k <= n; ++k) {
        if (parabolic) {
            para.step(u, f, h, opts.controls);
            v = v_parabolic(u);
        } else {
            wave.step(u, v, f, h, opts.controls);
        }
        const double znorm = record(k);
        if (!std::isfinite(znorm) || znorm > opts.blowup_ceiling) {
            traj.blew_up = true;
            break;
        }
    }
    build_omega(traj, opts.omega_max_lag);
    return traj;
}

}  // namespace

Trajectory integrate(const StatePair& initial, const NonlinearitySpec& f, double T,
                     double h, const IntegrateOptions& opts, double t0) {
    if (initial.epsilon <= 0.0 || initial.epsilon > 1.0)
        throw ConfigError("epsilon must lie in (0,1] for the wave flow");
    return run_trajectory(initial, nullptr, f, T, h, opts, t0);
}

Trajectory parabolic_integrate(const Field& u0, const NonlinearitySpec& f, double T,
                               double h, const IntegrateOptions& opts, double t0) {
    return run_trajectory(StatePair{}, &u0, f, T, h, opts, t0);
}

Trajectory window_trajectory(const Trajectory& traj, double t_from, double omega_max_lag) {
    Trajectory out;
    out.epsilon = traj.epsilon;
    out.h = traj.h;
    out.store_stride = traj.store_stride;
    out.blew_up = traj.blew_up;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (traj.times[i] < t_from - 1e-9) continue;
        out.times.push_back(traj.times[i]);
        out.states.push_back(traj.states[i]);
    }
    if (out.times.empty()) throw std::invalid_argument("window start beyond trajectory end");
    out.t0 = out.times.front();
    for (std::size_t i = 0; i < traj.step_times.size(); ++i) {
        if (traj.step_times[i] < t_from - 1e-9) continue;
        out.step_times.push_back(traj.step_times[i]);
        out.u_h1.push_back(traj.u_h1[i]);
        out.v_l2.push_back(traj.v_l2[i]);
        out.a0u_l2.push_back(traj.a0u_l2[i]);
        out.v_h1.push_back(traj.v_h1[i]);
        out.lyap.push_back(traj.lyap[i]);
        const double r = traj.u_h1[i] * traj.u_h1[i] +
                         traj.epsilon * traj.v_l2[i] * traj.v_l2[i];
        out.R = std::max(out.R, r);
        out.r_running.push_back(out.R);
    }
    build_omega(out, omega_max_lag);
    return out;
}

double lyapunov(const StatePair& z, const NonlinearitySpec& f) {
    const double vl2 = norm_H(z.v, 0.0);
    const double uh1 = norm_H(z.u, 1.0);
    return 0.5 * z.epsilon * vl2 * vl2 + 0.5 * uh1 * uh1 - potential_integral(f, z.u);
}

DissipationReport dissipation_check(const Trajectory& traj) {
    DissipationReport rep;
    rep.h = traj.h;
    const std::size_t n = traj.step_times.size();
    if (n < 3) return rep;
    double max_l = 0.0;
    for (double l : traj.lyap) max_l = std::max(max_l, std::abs(l));
    rep.mono_tolerance = 50.0 * traj.h * traj.h * (1.0 + max_l);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dldt = (traj.lyap[i + 1] - traj.lyap[i - 1]) / (2.0 * traj.h);
        rep.max_residual = std::max(rep.max_residual,
                                    std::abs(dldt + traj.v_l2[i] * traj.v_l2[i]));
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (traj.lyap[i + 1] > traj.lyap[i] + rep.mono_tolerance) { rep.monotone = false; break; }
    return rep;
}

}  // namespace specwave
