#include "specwave/linearized.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

namespace specwave {

void EnergyParams::validate(double lambda1) const {
    if (epsilon <= 0.0 || epsilon > 1.0) throw ConfigError("epsilon must lie in (0,1]");
    if (theta < 0.0) throw ConfigError("theta must be >= 0");
    const double dmax = std::min(0.5, lambda1 / 2.0);
    if (delta <= 0.0 || delta > dmax + 1e-12)
        throw ConfigError("delta must lie in (0, min(1/2, lambda1/2)]");
    if (rho <= 0.0 || rho > 0.5) throw ConfigError("rho must lie in (0, 1/2]");
    if (eta <= 0.0) throw ConfigError("eta must be positive");
}

FrozenOperator::FrozenOperator(const NonlinearitySpec& f, const Field& u_frozen, double theta)
    : theta_(theta) {
    const auto& model = *u_frozen.model;
    A_ = -multiplication_matrix(f, u_frozen);
    A_.diagonal() += model.eigenvalues;
    A_.diagonal().array() += theta;
    const double asym = (A_ - A_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, A_.cwiseAbs().maxCoeff()))
        throw ConvergenceError("frozen operator lost symmetry");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("frozen operator eigendecomposition failed");
    Q_ = es.eigenvectors();
    m_ = es.eigenvalues();
}

double FrozenOperator::normPlusSq(const Eigen::VectorXd& v) const {
    const Eigen::VectorXd y = Q_.transpose() * v;
    return y.cwiseAbs2().dot(m_);
}

double FrozenOperator::normMinusSq(const Eigen::VectorXd& v) const {
    if (!positiveDefinite())
        throw CertificateRefusal("frozen operator is not positive definite: theta below theta_rho");
    const Eigen::VectorXd y = Q_.transpose() * v;
    return y.cwiseAbs2().dot(m_.cwiseInverse());
}

double embedding_constant(const ModelPtr& model) {
    if (model->domain.dimension == 1)
        return std::max(1.0, std::pow(model->lambda1(), -0.25));
    return 1.5;  // 2D interpolation constant; override via configuration
}

ThetaRhoResult theta_rho(double rho, double R, const NonlinearitySpec& f,
                         const ModelPtr& model, int n_samples, std::uint64_t seed,
                         double embedding_override) {
    if (rho <= 0.0 || rho > 0.5) throw ConfigError("rho must lie in (0, 1/2]");
    if (R <= 0.0) throw ConfigError("R must be positive");
    ThetaRhoResult out;
    out.embedding_constant =
        embedding_override > 0.0 ? embedding_override : embedding_constant(model);
    out.u_max = out.embedding_constant * std::sqrt(R);
    out.derivative_bound = f.derivativeSupBound(out.u_max);
    const double lam1 = model->lambda1();
    out.theta_rho = std::max(0.0, 2.0 * out.derivative_bound / rho - lam1);
    out.samples = n_samples;

    // exact pencil verification of (equ3)/(equ4): generalized eigenvalues of
    // (A[theta,tau], A[theta]) must lie in [1-rho, 1+rho] for random freeze
    // states with ||u||_{H^1_0}^2 <= R
    Eigen::MatrixXd Atheta = Eigen::MatrixXd::Zero(model->modeCount(), model->modeCount());
    std::ostringstream log;
    for (int attempt = 0; attempt <= 10; ++attempt) {
        Atheta.setZero();
        Atheta.diagonal() = model->eigenvalues.array() + out.theta_rho;
        Rng rng(seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        bool ok = true;
        for (int s = 0; s < n_samples && ok; ++s) {
            const double r = std::sqrt(R) * std::sqrt(unif(rng));  // spread in [0, sqrt(R)]
            const Field u_frozen = random_field(model, rng, r);
            FrozenOperator frozen(f, u_frozen, out.theta_rho);
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(frozen.matrix(),
                                                                          Atheta);
            if (ges.info() != Eigen::Success)
                throw ConvergenceError("pencil eigensolve failed in theta_rho verification");
            const double gmin = ges.eigenvalues().minCoeff();
            const double gmax = ges.eigenvalues().maxCoeff();
            if (gmin < 1.0 - rho - 1e-12 || gmax > 1.0 + rho + 1e-12) {
                ok = false;
                log << "attempt " << attempt << ": pencil range [" << gmin << ", " << gmax
                    << "] outside [" << (1.0 - rho) << ", " << (1.0 + rho) << "] at sample "
                    << s << "; ";
            }
        }
        if (ok) {
            out.verified = true;
            out.doublings = attempt;
            out.log = log.str();
            return out;
        }
        out.theta_rho = std::max(1.0, 2.0 * out.theta_rho);
    }
    out.log = log.str();
    throw CertificateRefusal("theta_rho verification failed after 10 doublings: " + out.log);
}

namespace {

// Multiplication operator coefficients at a stored/interpolated trajectory time.
Eigen::MatrixXd mult_at(const Trajectory& traj, const NonlinearitySpec& f, double t) {
    const ModelPtr model = traj.states.front().u.model;
    return multiplication_matrix(f, Field(traj.interpU(t), model));
}

}  // namespace

Eigen::MatrixXd propagate_block(const Trajectory& traj, const NonlinearitySpec& f,
                                double eps, double theta, double s, double t,
                                Eigen::MatrixXd Z, int substeps_per_sample,
                                const SourceFn& source, const BlockObserver& observer) {
    if (t < s) throw std::invalid_argument("propagation requires t >= s");
    if (s < traj.windowStart() - 1e-9 || t > traj.windowEnd() + 1e-9)
        throw std::invalid_argument("propagation window exceeds the trajectory window");
    const ModelPtr model = traj.states.front().u.model;
    const int N = model->modeCount();
    if (Z.rows() != 2 * N) throw std::invalid_argument("state block must have 2N rows");

    const double k = traj.storeDt() / substeps_per_sample;
    const long long nsub = std::llround((t - s) / k);
    if (std::abs(nsub * k - (t - s)) > 1e-9)
        throw std::invalid_argument("propagation span must be a multiple of the substep");

    if (observer) observer(s, Z);
    Eigen::MatrixXd M_left = mult_at(traj, f, s);
    std::vector<Eigen::Matrix2d> T(N), I0(N), I1(N);
    for (long long n = 0; n < nsub; ++n) {
        const double t_left = s + static_cast<double>(n) * k;
        const double t_right = t_left + k;
        // frozen operator at the substep start
        Eigen::MatrixXd A = -M_left;
        A.diagonal() += (model->eigenvalues.array() + theta).matrix();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
        const Eigen::MatrixXd& Q = es.eigenvectors();
        const Eigen::VectorXd& m = es.eigenvalues();
        for (int j = 0; j < N; ++j)
            ModeFlow::propagatorWithIntegrals(eps, m(j), k, T[j], I0[j], I1[j]);

        // rotate into the frozen eigenbasis
        Eigen::MatrixXd V = Q.transpose() * Z.topRows(N);
        Eigen::MatrixXd W = Q.transpose() * Z.bottomRows(N);
        Eigen::VectorXd sig0, dsig;
        if (source) {
            sig0 = Q.transpose() * source(t_left);
            dsig = (Q.transpose() * source(t_right) - sig0).eval();
        }
        for (int j = 0; j < N; ++j) {
            const auto Tv = T[j];
            Eigen::RowVectorXd v_new = Tv(0, 0) * V.row(j) + Tv(0, 1) * W.row(j);
            Eigen::RowVectorXd w_new = Tv(1, 0) * V.row(j) + Tv(1, 1) * W.row(j);
            if (source) {
                // two-stage exact integration of the linear-in-time source
                const double su0 = I0[j](0, 1), sw0 = I0[j](1, 1);
                const double su1 = I1[j](0, 1) / k, sw1 = I1[j](1, 1) / k;
                v_new.array() += su0 * (sig0(j) + dsig(j)) - su1 * dsig(j);
                w_new.array() += sw0 * (sig0(j) + dsig(j)) - sw1 * dsig(j);
            }
            V.row(j) = v_new;
            W.row(j) = w_new;
        }
        Z.topRows(N) = Q * V;
        Z.bottomRows(N) = Q * W;

        // endpoint quadrature of the coefficient-variation correction:
        // the integrand vanishes at the substep start
        Eigen::MatrixXd M_right = mult_at(traj, f, t_right);
        Z.bottomRows(N) += (0.5 * k / eps) * ((M_right - M_left) * Z.topRows(N));
        M_left.swap(M_right);
        if (observer) observer(t_right, Z);
    }
    return Z;
}

StatePair propagate_U(const Trajectory& traj, const NonlinearitySpec& f, double theta,
                      double s, double t, const StatePair& initial) {
    const ModelPtr model = initial.u.model;
    const int N = model->modeCount();
    Eigen::MatrixXd Z(2 * N, 1);
    Z.topRows(N) = initial.u.c;
    Z.bottomRows(N) = initial.v.c;
    Z = propagate_block(traj, f, initial.epsilon, theta, s, t, std::move(Z));
    StatePair out = initial;
    out.u.c = Z.topRows(N);
    out.v.c = Z.bottomRows(N);
    return out;
}

double energy_E(const Eigen::VectorXd& v, const Eigen::VectorXd& w, Level level,
                const EnergyParams& p, const ModelPtr& model, const FrozenOperator* frozen) {
    const double d = p.delta;
    const Eigen::VectorXd dvw = d * v + w;
    if (frozen && !frozen->positiveDefinite())
        throw CertificateRefusal("frozen operator is not positive definite: theta below theta_rho");
    if (level == Level::Zm1) {
        auto norm_minus_sq = [&](const Eigen::VectorXd& x) {
            if (frozen) return frozen->normMinusSq(x);
            return x.cwiseAbs2().cwiseQuotient((model->eigenvalues.array() + p.theta).matrix()).sum();
        };
        return 0.5 * p.epsilon * norm_minus_sq(dvw) + 0.5 * v.squaredNorm() +
               0.5 * (p.epsilon * d * d - d) * norm_minus_sq(v);
    }
    auto norm_plus_sq = [&](const Eigen::VectorXd& x) {
        if (frozen) return frozen->normPlusSq(x);
        return x.cwiseAbs2().dot((model->eigenvalues.array() + p.theta).matrix());
    };
    return 0.5 * p.epsilon * dvw.squaredNorm() + 0.5 * norm_plus_sq(v) +
           0.5 * (p.epsilon * d * d - d) * v.squaredNorm();
}

double energy_E(const StatePair& vw, Level level, const EnergyParams& p,
                const FrozenOperator* frozen) {
    return energy_E(vw.u.c, vw.v.c, level, p, vw.u.model, frozen);
}

double choose_eta(const EnergyParams& p, const OmegaTable& omega, double ctilde,
                  double R, double alpha) {
    if (omega.lag.empty()) throw CertificateRefusal("empty modulus-of-continuity table");
    const double beta_h = 2.0 - alpha;
    const double pref = 2.0 * ctilde * std::pow(1.0 + 2.0 * std::pow(R, alpha), 2);
    double best = -1.0;
    for (std::size_t i = 0; i < omega.lag.size(); ++i) {
        if (pref * std::pow(omega.omega[i], 2.0 * beta_h) <= p.delta)
            best = omega.lag[i];
    }
    if (best <= 0.0)
        throw CertificateRefusal(
            "no admissible interval length eta: trajectory modulus of continuity too rough");
    return best;
}

DecayCertificate verify_interval_decay(const Trajectory& traj, const NonlinearitySpec& f,
                                       const EnergyParams& params, Level level,
                                       int basis_size, double fit_tol,
                                       int substeps_per_sample) {
    const ModelPtr model = traj.states.front().u.model;
    params.validate(model->lambda1());
    const int N = model->modeCount();
    const int basis = basis_size > 0 ? std::min(basis_size, 2 * N) : 2 * N;

    DecayCertificate cert;
    cert.level = level;
    cert.epsilon = params.epsilon;
    cert.theta = params.theta;
    cert.theta_rho = params.theta_rho;
    cert.rho = params.rho;
    cert.delta = params.delta;
    cert.basis_size = basis;
    cert.window_start = traj.windowStart();
    cert.window_end = traj.windowEnd();
    cert.compat_rho_eta =
        (1.0 + params.rho) / (1.0 - params.rho) * std::exp(-params.delta * params.eta / 2.0) <=
        1.0 + 1e-12;

    // snap eta to the stored sample grid
    const double dt = traj.storeDt();
    const long long eta_steps = std::max<long long>(1, std::llround(params.eta / dt));
    const double eta = static_cast<double>(eta_steps) * dt;
    cert.eta = eta;
    const double s = traj.windowStart();
    const double span = traj.windowEnd() - s;
    const int intervals = static_cast<int>(std::floor(span / eta + 1e-9));
    if (intervals < 2)
        throw CertificateRefusal("trajectory window shorter than two energy intervals");
    cert.intervals = intervals;
    const double t_end = s + intervals * eta;

    // weighted-orthonormal initial basis: W Z = I in the level's norm
    const Eigen::VectorXd lam_theta = (model->eigenvalues.array() + params.theta).matrix();
    Eigen::VectorXd wv(N), ww(N);
    const double sqeps = std::sqrt(params.epsilon);
    if (level == Level::Z0) {
        wv = lam_theta.cwiseSqrt();
        ww = Eigen::VectorXd::Constant(N, sqeps);
    } else {
        wv = Eigen::VectorXd::Ones(N);
        ww = sqeps * lam_theta.cwiseSqrt().cwiseInverse();
    }
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(2 * N, basis);
    for (int j = 0; j < basis; ++j) {
        if (j < N) Z(j, j) = 1.0 / wv(j);
        else Z(j, j) = 1.0 / ww(j - N);
    }

    double min_rate = std::numeric_limits<double>::infinity();
    double won3 = 0.0;
    std::vector<double> fit_t, fit_ln;

    // E_theta (unfrozen) of each column at the window start, for (won3)
    Eigen::VectorXd e0_unfrozen(basis);
    for (int c = 0; c < basis; ++c)
        e0_unfrozen(c) = energy_E(Z.col(c).head(N), Z.col(c).tail(N), level, params, model,
                                  nullptr);

    // frozen operator of the currently open interval (freeze at its start);
    // the end-of-interval energy is evaluated before re-freezing
    std::optional<FrozenOperator> fro;
    Eigen::VectorXd estart = Eigen::VectorXd::Zero(basis);

    auto obs = [&](double t, const Eigen::MatrixXd& state) {
        const long long step = std::llround((t - s) / dt);
        if (std::abs((t - s) - static_cast<double>(step) * dt) > 1e-9) return;
        if (step % eta_steps != 0 || t > t_end + 1e-9) return;
        const long long j = step / eta_steps;

        Eigen::MatrixXd WZ(2 * N, basis);
        WZ.topRows(N) = wv.asDiagonal() * state.topRows(N);
        WZ.bottomRows(N) = ww.asDiagonal() * state.bottomRows(N);
        const double op = Eigen::JacobiSVD<Eigen::MatrixXd>(WZ).singularValues()(0);
        cert.sample_times.push_back(t);
        cert.opnorm.push_back(op);
        fit_t.push_back(t - s);
        fit_ln.push_back(std::log(std::max(op, 1e-300)));

        for (int c = 0; c < basis; ++c) {
            const double e = energy_E(state.col(c).head(N), state.col(c).tail(N), level,
                                      params, model, nullptr);
            if (e0_unfrozen(c) > 0.0)
                won3 = std::max(won3,
                                e / e0_unfrozen(c) * std::exp(0.5 * params.delta * (t - s)));
        }

        if (j >= 1 && fro) {  // close interval j-1
            double worst_ratio = 0.0;
            for (int c = 0; c < basis; ++c) {
                const double e_end = energy_E(state.col(c).head(N), state.col(c).tail(N),
                                              level, params, model, &*fro);
                if (estart(c) <= 0.0) continue;
                const double ratio = e_end / estart(c);
                worst_ratio = std::max(worst_ratio, ratio);
                min_rate = std::min(min_rate, -std::log(std::max(ratio, 1e-300)) / eta);
            }
            cert.interval_index.push_back(static_cast<int>(j - 1));
            cert.interval_energy_ratio.push_back(worst_ratio);
        }
        if (j < intervals) {  // open interval j
            fro.emplace(f, Field(traj.interpU(t), model), params.theta);
            for (int c = 0; c < basis; ++c)
                estart(c) = energy_E(state.col(c).head(N), state.col(c).tail(N), level,
                                     params, model, &*fro);
        }
    };

    propagate_block(traj, f, params.epsilon, params.theta, s, t_end, Z,
                    substeps_per_sample, {}, obs);

    cert.sample_count = static_cast<int>(cert.sample_times.size());
    cert.min_interval_rate = min_rate;
    cert.won3_prefactor = won3;

    // log-linear fit of the operator norm over [s + 5 eta, t_end]
    const double fit_from = 5.0 * eta;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int nfit = 0;
    for (std::size_t i = 0; i < fit_t.size(); ++i) {
        if (fit_t[i] < fit_from - 1e-9) continue;
        sx += fit_t[i]; sy += fit_ln[i]; sxx += fit_t[i] * fit_t[i]; sxy += fit_t[i] * fit_ln[i];
        ++nfit;
    }
    if (nfit < 2) {  // short window: fit over everything past the first interval
        sx = sy = sxx = sxy = 0; nfit = 0;
        for (std::size_t i = 0; i < fit_t.size(); ++i) {
            if (fit_t[i] < eta - 1e-9) continue;
            sx += fit_t[i]; sy += fit_ln[i]; sxx += fit_t[i] * fit_t[i]; sxy += fit_t[i] * fit_ln[i];
            ++nfit;
        }
    }
    if (nfit < 2) throw CertificateRefusal("not enough samples to fit a decay rate");
    const double slope = (nfit * sxy - sx * sy) / (nfit * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / nfit;
    cert.rate = -slope;
    double rss = 0;
    int nres = 0;
    for (std::size_t i = 0; i < fit_t.size(); ++i) {
        if (fit_t[i] < fit_from - 1e-9) continue;
        const double r = fit_ln[i] - (intercept + slope * fit_t[i]);
        rss += r * r;
        ++nres;
    }
    cert.fit_residual = nres > 0 ? std::sqrt(rss / nres) : 0.0;
    // envelope prefactor: opnorm(t) <= M e^{-rate (t-s)} on every sample
    double menv = 0.0;
    for (std::size_t i = 0; i < fit_t.size(); ++i)
        menv = std::max(menv, cert.opnorm[i] * std::exp(cert.rate * fit_t[i]));
    cert.M = menv;

    cert.pass = (cert.min_interval_rate >= params.delta * (1.0 - fit_tol)) &&
                (cert.rate >= 0.5 * params.delta * (1.0 - fit_tol)) && std::isfinite(cert.M);
    std::ostringstream notes;
    notes << "energy sandwich asserted against the squared combination "
          << "||v||^2 + eps ||w||^2 in the level norms; operator norms measured in the "
          << "weighted Hilbert norm (equivalent to the sum norm within sqrt(2)).";
    if (!cert.compat_rho_eta)
        notes << " rho-eta compatibility ((1+rho)/(1-rho) e^{-delta eta/2} <= 1) does not"
              << " hold; (won3) prefactor recorded unconditionally.";
    cert.notes = notes.str();
    return cert;
}

}  // namespace specwave
