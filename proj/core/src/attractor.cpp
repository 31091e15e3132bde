#include "specwave/attractor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace specwave {

std::vector<Field> find_equilibria(const NonlinearitySpec& f, const ModelPtr& model,
                                   const std::vector<Field>& seeds, const NewtonOptions& opts) {
    std::vector<Field> roots;
    const auto& lam = model->eigenvalues;
    for (const Field& seed : seeds) {
        Eigen::VectorXd c = seed.c;
        bool converged = false;
        for (int it = 0; it < opts.max_iter; ++it) {
            const Field u(c, model);
            const Eigen::VectorXd G = lam.cwiseProduct(c) - nemitski(f, u).c;
            if (G.norm() <= opts.tol * (1.0 + c.norm())) { converged = true; break; }
            Eigen::MatrixXd J = -multiplication_matrix(f, u);
            J.diagonal() += lam;
            const Eigen::VectorXd step = J.fullPivLu().solve(G);
            c -= step;
            if (!c.allFinite() || c.norm() > opts.diverge) break;
        }
        if (!converged) continue;
        const Field root(c, model);
        if (norm_H(Field(lam.cwiseProduct(c) - nemitski(f, root).c, model), 0.0) > opts.accept)
            continue;
        bool dup = false;
        for (const Field& r : roots)
            if (norm_H(r - root, 1.0) <= opts.dedup_h1) { dup = true; break; }
        if (!dup) roots.push_back(root);
    }
    return roots;
}

std::vector<Field> equilibrium_seeds(const ModelPtr& model, int max_mode,
                                     const std::vector<double>& amplitudes) {
    std::vector<Field> seeds;
    seeds.push_back(Field::zero(model));
    const int mmax = std::min(max_mode, model->modeCount());
    for (int k = 1; k <= mmax; ++k)
        for (double a : amplitudes) {
            seeds.push_back(Field::mode(model, k, a));
            seeds.push_back(Field::mode(model, k, -a));
        }
    return seeds;
}

GammaResult gamma_map(const Field& u, const NonlinearitySpec& f) {
    const auto& lam = u.model->eigenvalues;
    const Eigen::VectorXd fu = nemitski(f, u).c;
    const Eigen::VectorXd a0u = lam.cwiseProduct(u.c);
    GammaResult g;
    g.displayed = {u, Field(a0u + fu, u.model), 0.0, Level::Z0};
    g.time_derivative = {u, Field(-a0u + fu, u.model), 0.0, Level::Z0};
    g.discrepancy_l2 = 2.0 * norm_H(u, 2.0);
    return g;
}

AttractorSample sample_attractor(double eps, const NonlinearitySpec& f, const ModelPtr& model,
                                 const EnsembleOptions& opts,
                                 const std::vector<Field>& equilibria) {
    AttractorSample sample;
    sample.epsilon = eps;

    // deterministic initial grid: low modes, alternating signs, amplitudes
    // ramping up to seed_amplitude
    std::vector<Field> initials;
    const int mmax = std::max(1, std::min(opts.max_seed_mode, model->modeCount()));
    const int per_mode = std::max(1, (opts.ensemble + mmax - 1) / mmax);
    const int levels = std::max(1, (per_mode + 1) / 2);
    for (int i = 0; i < opts.ensemble; ++i) {
        const int k = 1 + (i % mmax);
        const int j = i / mmax;
        const double amp = opts.seed_amplitude *
                           (static_cast<double>(j / 2 + 1) / static_cast<double>(levels)) *
                           (j % 2 == 0 ? 1.0 : -1.0);
        initials.push_back(Field::mode(model, k, amp));
    }

    const double T = opts.T_transient + opts.T_sample;
    std::vector<std::vector<StatePair>> collected(initials.size());
    parallel_for(initials.size(), opts.threads, [&](std::size_t i) {
        IntegrateOptions iopts = opts.integrate;
        iopts.store_dt = opts.sample_stride;
        Trajectory traj;
        if (eps > 0.0)
            traj = integrate({initials[i], Field::zero(model), eps, Level::Z0}, f, T,
                             opts.h, iopts);
        else
            traj = parabolic_integrate(initials[i], f, T, opts.h, iopts);
        if (traj.blew_up)
            throw ConvergenceError(
                "ensemble member blew up: dissipativeness hypothesis violated by the scenario");
        for (std::size_t s = 0; s < traj.times.size(); ++s)
            if (traj.times[s] >= opts.T_transient - 1e-9)
                collected[i].push_back(traj.states[s]);
    });
    for (auto& c : collected)
        for (auto& z : c) {
            z.epsilon = eps;
            sample.points.push_back(std::move(z));
            sample.provenance.push_back(Provenance::TrajectoryPoint);
        }
    for (const Field& e : equilibria) {
        sample.points.push_back({e, Field::zero(model), eps, Level::Z0});
        sample.provenance.push_back(Provenance::Equilibrium);
    }
    for (const auto& z : sample.points) {
        const double uh1 = norm_H(z.u, 1.0);
        const double vl2 = norm_H(z.v, 0.0);
        sample.R = std::max(sample.R, uh1 * uh1 + eps * vl2 * vl2);
    }
    return sample;
}

namespace {

double product_dist(const StatePair& a, const StatePair& b, ProductNorm norm) {
    const Field du = a.u - b.u;
    const Field dv = a.v - b.v;
    const double x = norm_H(du, 1.0);
    const double y = norm == ProductNorm::H1xL2 ? norm_H(dv, 0.0) : norm_H(dv, -1.0);
    return std::sqrt(x * x + y * y);
}

double spearman_against_index(const std::vector<double>& d) {
    const std::size_t n = d.size();
    std::vector<double> rank(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    for (std::size_t r = 0; r < n;) {  // average ranks over ties
        std::size_t r2 = r;
        while (r2 + 1 < n && d[order[r2 + 1]] == d[order[r]]) ++r2;
        const double avg = 0.5 * (static_cast<double>(r) + static_cast<double>(r2)) + 1.0;
        for (std::size_t k = r; k <= r2; ++k) rank[order[k]] = avg;
        r = r2 + 1;
    }
    const double mean = 0.5 * static_cast<double>(n + 1);
    double num = 0, di = 0, dr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = static_cast<double>(i + 1) - mean;
        const double yi = rank[i] - mean;
        num += xi * yi;
        di += xi * xi;
        dr += yi * yi;
    }
    if (di == 0 || dr == 0) return 0.0;
    return num / std::sqrt(di * dr);
}

}  // namespace

double semidistance(const AttractorSample& A, const AttractorSample& B, ProductNorm norm,
                    int threads) {
    if (A.points.empty() || B.points.empty())
        throw std::invalid_argument("semidistance of an empty sample");
    if (A.points.front().u.model.get() != B.points.front().u.model.get())
        throw std::invalid_argument("attractor samples use different spectral models");
    std::vector<double> mins(A.points.size());
    parallel_for(A.points.size(), threads, [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : B.points)
            best = std::min(best, product_dist(A.points[i], b, norm));
        mins[i] = best;
    });
    return *std::max_element(mins.begin(), mins.end());
}

double cloud_density(const AttractorSample& A, ProductNorm norm) {
    if (A.points.size() < 2) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < A.points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < A.points.size(); ++j) {
            if (i == j) continue;
            best = std::min(best, product_dist(A.points[i], A.points[j], norm));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

SemidistanceCurve upper_semicontinuity_sweep(const std::vector<double>& epsilons,
                                             const NonlinearitySpec& f, const ModelPtr& model,
                                             const EnsembleOptions& opts,
                                             const std::vector<Field>& equilibria,
                                             double trend_threshold, double terminal_factor,
                                             std::vector<AttractorSample>* samples_out,
                                             AttractorSample* parabolic_out) {
    if (epsilons.empty()) throw ConfigError("epsilon list is empty");
    SemidistanceCurve curve;
    curve.trend_threshold = trend_threshold;
    curve.terminal_factor = terminal_factor;
    curve.epsilons = epsilons;

    AttractorSample parabolic = sample_attractor(0.0, f, model, opts, equilibria);
    std::vector<AttractorSample> waves(epsilons.size());
    parallel_for(epsilons.size(), opts.threads, [&](std::size_t i) {
        EnsembleOptions inner = opts;
        inner.threads = 1;  // parallelism lives across the sweep
        waves[i] = sample_attractor(epsilons[i], f, model, inner, equilibria);
    });
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        curve.d_h1l2.push_back(semidistance(waves[i], parabolic, ProductNorm::H1xL2, opts.threads));
        curve.d_h1hm1.push_back(
            semidistance(waves[i], parabolic, ProductNorm::H1xHm1, opts.threads));
    }
    curve.density0 = cloud_density(parabolic, ProductNorm::H1xL2);
    const double dmax = *std::max_element(curve.d_h1l2.begin(), curve.d_h1l2.end());
    if (dmax <= 1e-12) {
        curve.spearman = -1.0;  // degenerate zero curve
        curve.trend_pass = true;
    } else {
        curve.spearman = spearman_against_index(curve.d_h1l2);
        curve.trend_pass = curve.spearman <= trend_threshold;
    }
    curve.terminal_pass = curve.d_h1l2.back() <= terminal_factor * std::max(curve.density0, 1e-12);
    curve.domination_pass = true;
    const double dom = std::max(1.0, 1.0 / std::sqrt(model->lambda1()));
    for (std::size_t i = 0; i < epsilons.size(); ++i)
        if (curve.d_h1hm1[i] > dom * curve.d_h1l2[i] * (1.0 + 1e-9)) curve.domination_pass = false;
    if (samples_out) *samples_out = std::move(waves);
    if (parabolic_out) *parabolic_out = std::move(parabolic);
    return curve;
}

}  // namespace specwave
