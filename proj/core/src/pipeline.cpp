#include "specwave/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "specwave/attractor.hpp"
#include "specwave/regularity.hpp"
#include "specwave/reports.hpp"

namespace specwave {

namespace {

namespace fs = std::filesystem;

std::string out_path(const PipelineContext& ctx, const std::string& name) {
    fs::create_directories(ctx.out_dir);
    return (fs::path(ctx.out_dir) / name).string();
}

void write_spectrum_csv(const PipelineContext& ctx, const ModelPtr& model) {
    CsvWriter csv(out_path(ctx, "spectrum.csv"), {"k", "lambda_k", "residual"});
    for (int k = 0; k < model->modeCount(); ++k)
        csv.row({static_cast<double>(k + 1), model->eigenvalues(k), model->residuals(k)});
}

void write_trajectory_csv(const PipelineContext& ctx, const Trajectory& traj) {
    CsvWriter csv(out_path(ctx, "trajectory.csv"),
                  {"t", "u_H1", "v_L2", "A0u_L2", "v_H1", "L", "R_running"});
    for (std::size_t i = 0; i < traj.step_times.size(); i += traj.store_stride)
        csv.row({traj.step_times[i], traj.u_h1[i], traj.v_l2[i], traj.a0u_l2[i],
                 traj.v_h1[i], traj.lyap[i], traj.r_running[i]});
    CsvWriter omega(out_path(ctx, "omega.csv"), {"lag", "omega"});
    for (std::size_t i = 0; i < traj.omega.lag.size(); ++i)
        omega.row({traj.omega.lag[i], traj.omega.omega[i]});
}

/// Deterministic growth-sample family: amplitude ladder over [0, r_max]
/// with seeded random directions.
std::vector<Field> growth_samples(const ModelPtr& model, std::uint64_t seed, int count,
                                  double r_max) {
    Rng rng(seed);
    std::vector<Field> samples;
    samples.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double r = r_max * static_cast<double>(i + 1) / count;
        samples.push_back(random_field(model, rng, r));
    }
    return samples;
}

std::vector<Field> shift_samples(const ModelPtr& model, std::uint64_t seed, int count) {
    Rng rng(seed);
    std::vector<Field> samples;
    samples.push_back(Field::mode(model, 1, 1.0));  // extremal mode first
    std::uniform_real_distribution<double> unif(0.1, 4.0);
    for (int i = 1; i < count; ++i) samples.push_back(random_field(model, rng, unif(rng)));
    return samples;
}

struct ThetaChain {
    double R = 0.0;
    double theta = 0.0;
    ThetaRhoResult tr;
    bool manual = false;
};

ThetaChain resolve_theta(const Scenario& scn, const ModelPtr& model, const NonlinearitySpec& f,
                         double measured_R, double manual_theta) {
    ThetaChain chain;
    chain.R = scn.R_declared > 0.0 ? scn.R_declared : measured_R;
    if (chain.R <= 0.0) chain.R = 1.0;
    chain.tr = theta_rho(scn.rho, chain.R, f, model, 200, scn.seed + 17, scn.embedding_C);
    if (manual_theta >= 0.0) {
        chain.theta = manual_theta;
        chain.manual = true;
    } else {
        chain.theta = chain.tr.theta_rho;
    }
    return chain;
}

Json cert_json(const DecayCertificate& cert) {
    Json j;
    j["level"] = cert.level == Level::Zm1 ? "Zm1" : "Z0";
    j["pass"] = cert.pass;
    j["M"] = cert.M;
    j["rate"] = cert.rate;
    j["theta"] = cert.theta;
    j["theta_rho"] = cert.theta_rho;
    j["eta"] = cert.eta;
    j["rho"] = cert.rho;
    j["delta"] = cert.delta;
    j["epsilon"] = cert.epsilon;
    j["fit_residual"] = cert.fit_residual;
    j["min_interval_rate"] = cert.min_interval_rate;
    j["won3_prefactor"] = cert.won3_prefactor;
    j["compat_rho_eta"] = cert.compat_rho_eta;
    j["intervals"] = cert.intervals;
    j["basis_size"] = cert.basis_size;
    j["window"] = {cert.window_start, cert.window_end};
    j["notes"] = cert.notes;
    return j;
}

Json growth_json(const GrowthReport& g) {
    Json j;
    for (const auto& e : g.estimates) {
        j[e.name] = {{"ctilde", e.ctilde}, {"worst_ratio", e.worst_ratio},
                     {"samples", e.samples}};
    }
    j["polynomial_form"] = g.polynomial_form;
    j["sample_count"] = g.sample_count;
    return j;
}

struct RunArtifacts {
    ModelPtr model;
    NonlinearitySpec f;
    Trajectory full;
    Trajectory window;
    GrowthReport growth;
};

RunArtifacts run_base(const PipelineContext& ctx, bool want_trajectory) {
    const Scenario& scn = ctx.scenario;
    RunArtifacts art;
    art.model = build_model(scn);
    art.f = build_nonlinearity(scn, art.model);
    art.growth = verify_growth(art.f, growth_samples(art.model, scn.seed + 3, 200, 4.0));
    if (want_trajectory) {
        IntegrateOptions opts;
        opts.store_dt = scn.store_dt;
        opts.omega_max_lag = scn.omega_max_lag;
        const Field u0 = build_initial(scn, art.model);
        art.full = integrate({u0, Field::zero(art.model), scn.epsilon, Level::Z0}, art.f,
                             scn.T, scn.h, opts);
        if (art.full.blew_up)
            throw ConvergenceError("base trajectory exceeded the blow-up ceiling");
        art.window = window_trajectory(art.full, scn.transient_T0, scn.omega_max_lag);
    }
    return art;
}

}  // namespace

int cmd_verify_hypotheses(const PipelineContext& ctx) {
    const Scenario& scn = ctx.scenario;
    Json j;
    j["scenario_hash"] = scenario_hash(scn);
    bool all_pass = true;
    auto clause = [&](const std::string& name, bool pass, Json detail) {
        detail["pass"] = pass;
        j["clauses"][name] = detail;
        all_pass = all_pass && pass;
    };

    ModelPtr model;
    try {
        model = eig_decompose(build_operator(scn), scn.domain.modes);
    } catch (const EllipticityError& e) {
        clause("Hyp1(1)", false, Json{{"error", e.what()}, {"grid_index", e.grid_index}});
        write_json(out_path(ctx, "hypotheses.json"), j);
        std::cerr << "verify-hypotheses: " << e.what() << "\n";
        return 1;
    } catch (const CoercivityError& e) {
        clause("Hyp1(2b)", false, Json{{"error", e.what()}, {"lambda_min", e.lambda_min}});
        write_json(out_path(ctx, "hypotheses.json"), j);
        std::cerr << "verify-hypotheses: " << e.what() << "\n";
        return 1;
    }
    write_spectrum_csv(ctx, model);

    {
        const CoefficientField coeffs = build_coefficients(scn);
        const auto bounds = coeffs.ellipticityBounds(scn.domain);
        clause("Hyp1(1)", bounds.a0 > 0.0,
               Json{{"a0", bounds.a0}, {"a1", bounds.a1}});
        clause("Hyp1(2a)", true, Json{{"C_nu", coeffs.beta.cwiseAbs().maxCoeff()},
                                      {"note", "bounded beta: C_nu = sup|beta| for every nu"}});
        clause("Hyp1(2b)", model->lambda1() > 0.0, Json{{"lambda1", model->lambda1()}});
    }

    if (!scn.has_mu) throw ConfigError("[nonlinearity] mu is required for hypothesis checks");
    const NonlinearitySpec f = build_nonlinearity(scn, model);

    // Hyp 2 / Hyp 3 Holder and Lipschitz spot checks on a u-lattice
    {
        const double R = scn.R_declared > 0.0 ? scn.R_declared : 4.0;
        const double u_max = 4.0 * std::sqrt(R);
        double worst2 = 0.0, worst3 = 0.0;
        const int nu = 61;
        const int m = model->domain.gridSize();
        const int gstride = std::max(1, m / 64);
        for (int g = 0; g < m; g += gstride) {
            for (int i = 0; i < nu; ++i) {
                for (int k = i + 1; k < nu; ++k) {
                    const double u1 = -u_max + 2.0 * u_max * i / (nu - 1);
                    const double u2 = -u_max + 2.0 * u_max * k / (nu - 1);
                    const double d = std::abs(u1 - u2);
                    const double den2 = (1.0 + std::pow(std::abs(u1), f.alpha) +
                                         std::pow(std::abs(u2), f.alpha)) *
                                        std::pow(d, f.beta_h);
                    worst2 = std::max(worst2, std::abs(f.fu(g, u1) - f.fu(g, u2)) / den2);
                    worst3 = std::max(worst3, std::abs(f.fuu(g, u1) - f.fuu(g, u2)) / d);
                }
            }
        }
        clause("Hyp2", worst2 <= f.holder_C * (1.0 + 1e-9),
               Json{{"measured", worst2}, {"declared_C", f.holder_C},
                    {"alpha", f.alpha}, {"beta_h", f.beta_h}});
        clause("Hyp3", worst3 <= f.hess_C * (1.0 + 1e-9),
               Json{{"measured", worst3}, {"declared_C", f.hess_C}});
        const DissipReport dr = check_dissipativeness(f, model, u_max);
        clause("Hyp4", dr.pass,
               Json{{"margin1", dr.margin1}, {"margin2", dr.margin2},
                    {"lattice_points", dr.lattice_points}, {"violation", dr.violation},
                    {"u_max", u_max}});
    }

    // shifted-norm inequality family at fixed probes
    {
        const auto samples = shift_samples(model, scn.seed + 5, 1000);
        Json shifts = Json::array();
        for (double theta : {0.0, 1.0, 3.0, 10.0}) {
            const ShiftReport rep = check_shift_inequalities(theta, samples);
            Json r{{"theta", theta}, {"pass", rep.pass}, {"violation", rep.violation}};
            for (const auto& e : rep.entries)
                r["tightest"][e.inequality] = e.tightest_ratio;
            all_pass = all_pass && rep.pass;
            shifts.push_back(r);
        }
        j["shift_inequalities"] = shifts;
    }

    const GrowthReport growth =
        verify_growth(f, growth_samples(model, scn.seed + 3, 200, 4.0));
    Json gj = growth_json(growth);
    gj["scenario_hash"] = scenario_hash(scn);
    write_json(out_path(ctx, "growth.json"), gj);
    j["growth"] = growth_json(growth);

    j["pass"] = all_pass;
    write_json(out_path(ctx, "hypotheses.json"), j);
    return all_pass ? 0 : 1;
}

int cmd_decay(const PipelineContext& ctx) {
    const Scenario& scn = ctx.scenario;
    RunArtifacts art = run_base(ctx, true);
    write_trajectory_csv(ctx, art.full);

    const ThetaChain chain =
        resolve_theta(scn, art.model, art.f, art.window.R, scn.run_theta);
    const Level level = scn.level == "Z0" ? Level::Z0 : Level::Zm1;
    const double ctilde = level == Level::Z0 ? art.growth.ctilde(3) : art.growth.ctilde(5);

    EnergyParams params;
    params.epsilon = scn.epsilon;
    params.theta = chain.theta;
    params.delta = scn.delta;
    params.rho = scn.rho;
    params.theta_rho = chain.tr.theta_rho;
    params.eta = choose_eta(params, art.window.omega, ctilde, chain.R, art.f.alpha);

    const DecayCertificate cert =
        verify_interval_decay(art.window, art.f, params, level, scn.basis_size);

    CsvWriter csv(out_path(ctx, "decay.csv"),
                  {"t", "opnorm", "interval", "interval_energy_ratio", "fitted_rate"});
    std::size_t ei = 0;
    for (std::size_t i = 0; i < cert.sample_times.size(); ++i) {
        double idx = -1.0, ratio = 1.0;
        if (i >= 1 && ei < cert.interval_index.size()) {
            idx = cert.interval_index[ei];
            ratio = cert.interval_energy_ratio[ei];
            ++ei;
        }
        csv.row({cert.sample_times[i], cert.opnorm[i], idx, ratio, cert.rate});
    }

    Json j = cert_json(cert);
    j["scenario_hash"] = scenario_hash(scn);
    ConstantsChain cc;
    cc.lambda1 = art.model->lambda1();
    cc.R = chain.R;
    cc.ctilde = ctilde;
    cc.rho = scn.rho;
    cc.theta_rho = chain.tr.theta_rho;
    cc.eta = params.eta;
    cc.delta = scn.delta;
    cc.M = cert.M;
    cc.rate = cert.rate;
    j["constants"] = cc.toJson();
    j["theta_selection"] = {{"manual", chain.manual},
                            {"derivative_bound", chain.tr.derivative_bound},
                            {"u_max", chain.tr.u_max},
                            {"embedding_constant", chain.tr.embedding_constant},
                            {"doublings", chain.tr.doublings},
                            {"verified", chain.tr.verified}};
    write_json(out_path(ctx, "certificate.json"), j);
    return cert.pass ? 0 : 1;
}

int cmd_regularity(const PipelineContext& ctx) {
    const Scenario& scn = ctx.scenario;
    RunArtifacts art = run_base(ctx, true);
    write_trajectory_csv(ctx, art.full);

    const double manual = scn.reg_theta >= 0.0 ? scn.reg_theta : scn.run_theta;
    const ThetaChain chain = resolve_theta(scn, art.model, art.f, art.window.R, manual);

    EnergyParams params;
    params.epsilon = scn.epsilon;
    params.theta = chain.theta;
    params.delta = scn.delta;
    params.rho = scn.rho;
    params.theta_rho = chain.tr.theta_rho;
    params.eta = choose_eta(params, art.window.omega, art.growth.ctilde(5), chain.R,
                            art.f.alpha);

    const DecayCertificate cert_m1 =
        verify_interval_decay(art.window, art.f, params, Level::Zm1, scn.basis_size);
    EnergyParams params0 = params;
    params0.eta = choose_eta(params, art.window.omega, art.growth.ctilde(3), chain.R,
                             art.f.alpha);
    const DecayCertificate cert_0 =
        verify_interval_decay(art.window, art.f, params0, Level::Z0, scn.basis_size);

    const VocResult voc =
        voc_reconstruct(art.window, art.f, params.theta, scn.tail_Tw, cert_0, scn.voc_tol);
    CsvWriter vcsv(out_path(ctx, "voc_error.csv"), {"t", "error", "tail_bound"});
    for (std::size_t i = 0; i < voc.times.size(); ++i)
        vcsv.row({voc.times[i], voc.error[i], voc.tail_bound[i]});

    RegularityReport th1 =
        theorem1_check(art.window, art.f, params0, cert_0, art.growth, voc, scn.R_declared);
    const LambdaReport lam = lambda_derivative_check(art.window, art.f, params0);
    const KReport kr = integral_bound_K(art.window);

    Theorem2Options t2opts;
    t2opts.T = scn.T;
    t2opts.h = scn.h;
    t2opts.window_T0 = scn.sweep_transient_T0;
    t2opts.uniformity_factor = scn.uniformity_factor;
    t2opts.R_declared = scn.R_declared;
    t2opts.embedding_override = scn.embedding_C;
    t2opts.threads = ctx.threads;
    t2opts.integrate.store_dt = scn.store_dt;
    t2opts.integrate.omega_max_lag = scn.omega_max_lag;
    const Field u0 = build_initial(scn, art.model);
    const Theorem2Result th2 =
        theorem2_sweep(scn.reg_epsilon_list, {u0, Field::zero(art.model), 1.0, Level::Z0},
                       art.f, params0, t2opts);

    const CnuResult cnu =
        derive_C_nu(art.f, art.model, chain.R, params.delta, scn.embedding_C);

    Json j;
    j["scenario_hash"] = scenario_hash(scn);
    auto rep_json = [](const RegularityReport& r) {
        return Json{{"epsilon", r.epsilon},
                    {"theta", r.theta},
                    {"sup_A0u_sq", r.sup_a0u_sq},
                    {"sup_v_H1_sq", r.sup_v_h1_sq},
                    {"sup_eps_w_sq", r.sup_eps_w_sq},
                    {"sup_sum", r.sup_sum},
                    {"th1_bound", r.th1_bound},
                    {"th2_bound", r.th2_bound},
                    {"R_used", r.R_used},
                    {"K_measured", r.K_measured},
                    {"K_telescope", r.K_telescope},
                    {"C_nu", r.C_nu},
                    {"pass", r.pass},
                    {"notes", r.notes}};
    };
    j["theorem1"] = rep_json(th1);
    j["theorem1"]["urka_fd_mismatch"] = th1.urka_fd_mismatch;
    j["theorem1"]["urka_fd_tolerance"] = th1.urka_fd_tolerance;
    j["voc"] = {{"max_error", voc.max_error},
                {"tail_at_Tw", voc.tail_at_Tw},
                {"quad_budget", voc.quad_budget},
                {"bridge_max", voc.bridge_max},
                {"Tw", voc.Tw},
                {"pass", voc.pass},
                {"notes", voc.notes}};
    j["lambda_identity"] = {{"max_residual", lam.max_residual},
                            {"tolerance", lam.tolerance},
                            {"pass", lam.pass},
                            {"notes", lam.notes}};
    j["lemma_integral"] = {{"K_measured", kr.K_measured},
                           {"K_telescope", kr.K_telescope},
                           {"K_apriori", kr.K_apriori},
                           {"pass", kr.pass}};
    j["certificates"] = {{"Zm1", cert_json(cert_m1)}, {"Z0", cert_json(cert_0)}};
    Json sweep = Json::array();
    for (const auto& r : th2.reports) sweep.push_back(rep_json(r));
    j["theorem2"] = {{"reports", sweep},
                     {"band_ratio", th2.band_ratio},
                     {"uniformity_factor", th2.uniformity_factor},
                     {"uniform_pass", th2.uniform_pass},
                     {"bounds_pass", th2.bounds_pass},
                     {"pass", th2.pass}};

    ConstantsChain cc;
    cc.lambda1 = art.model->lambda1();
    cc.R = chain.R;
    cc.ctilde = art.growth.ctilde(1);
    cc.rho = scn.rho;
    cc.theta_rho = chain.tr.theta_rho;
    cc.eta = params.eta;
    cc.delta = scn.delta;
    cc.M = cert_0.M;
    cc.rate = cert_0.rate;
    cc.K = kr.K_measured;
    cc.C_nu = cnu.C_nu;
    j["constants"] = cc.toJson();
    const bool pass = th1.pass && lam.pass && kr.pass && th2.pass && cert_m1.pass &&
                      cert_0.pass && voc.pass;
    j["pass"] = pass;
    write_json(out_path(ctx, "regularity.json"), j);
    return pass ? 0 : 1;
}

int cmd_attractor_sweep(const PipelineContext& ctx) {
    const Scenario& scn = ctx.scenario;
    if (!scn.has_mu)
        throw ConfigError("[nonlinearity] mu is required for attractor commands");
    const ModelPtr model = build_model(scn);
    const NonlinearitySpec f = build_nonlinearity(scn, model);

    const double R = scn.R_declared > 0.0 ? scn.R_declared : 4.0;
    const DissipReport dr = check_dissipativeness(f, model, 4.0 * std::sqrt(R));
    if (!dr.pass) {
        std::cerr << "attractor-sweep: " << dr.violation << "\n";
        return 1;
    }

    const auto equilibria = find_equilibria(f, model, equilibrium_seeds(model));

    EnsembleOptions opts;
    opts.ensemble = scn.ensemble;
    opts.T_transient = scn.att_T_transient;
    opts.T_sample = scn.att_T_sample;
    opts.h = scn.h;
    opts.sample_stride = scn.sample_stride;
    opts.seed_amplitude = scn.seed_amplitude;
    opts.threads = ctx.threads;

    std::vector<AttractorSample> waves;
    AttractorSample parabolic;
    const SemidistanceCurve curve = upper_semicontinuity_sweep(
        scn.att_epsilon_list, f, model, opts, equilibria, scn.trend_threshold,
        scn.terminal_factor, &waves, &parabolic);

    auto dump_sample = [&](const AttractorSample& s, const std::string& tag) {
        CsvWriter csv(out_path(ctx, "attractor_eps" + tag + ".csv"),
                      {"id", "provenance", "u_H1", "v_L2", "v_Hm1"});
        for (std::size_t i = 0; i < s.points.size(); ++i)
            csv.row({static_cast<double>(i),
                     s.provenance[i] == Provenance::Equilibrium ? 0.0 : 1.0,
                     norm_H(s.points[i].u, 1.0), norm_H(s.points[i].v, 0.0),
                     norm_H(s.points[i].v, -1.0)});
    };
    dump_sample(parabolic, "0");
    for (std::size_t i = 0; i < waves.size(); ++i) {
        std::ostringstream tag;
        tag << scn.att_epsilon_list[i];
        dump_sample(waves[i], tag.str());
    }
    CsvWriter csv(out_path(ctx, "semidistance.csv"), {"epsilon", "d_H1xL2", "d_H1xHm1"});
    for (std::size_t i = 0; i < curve.epsilons.size(); ++i)
        csv.row({curve.epsilons[i], curve.d_h1l2[i], curve.d_h1hm1[i]});

    Json j;
    j["scenario_hash"] = scenario_hash(scn);
    j["epsilons"] = curve.epsilons;
    j["d_H1xL2"] = curve.d_h1l2;
    j["d_H1xHm1"] = curve.d_h1hm1;
    j["density0"] = curve.density0;
    j["spearman"] = curve.spearman;
    j["trend_pass"] = curve.trend_pass;
    j["terminal_pass"] = curve.terminal_pass;
    j["domination_pass"] = curve.domination_pass;
    j["equilibria"] = equilibria.size();
    j["gamma_convention"] = "v = u_t = -A0 u + f(u) (time-derivative reading; "
                            "displayed-formula images recorded per equilibrium diagnostic)";
    Json diag = Json::array();
    for (const auto& e : equilibria) {
        const GammaResult g = gamma_map(e, f);
        diag.push_back({{"u_H1", norm_H(e, 1.0)},
                        {"gamma_discrepancy_L2", g.discrepancy_l2}});
    }
    j["gamma_diagnostics"] = diag;
    const bool pass = curve.trend_pass && curve.terminal_pass && curve.domination_pass;
    j["pass"] = pass;
    write_json(out_path(ctx, "attractor.json"), j);
    return pass ? 0 : 1;
}

int cmd_report(const std::string& out_dir) {
    namespace fs = std::filesystem;
    auto load = [&](const char* name, Json& j) {
        const fs::path p = fs::path(out_dir) / name;
        if (!fs::exists(p)) return false;
        std::ifstream in(p);
        in >> j;
        return true;
    };
    bool any = false;
    Json j;
    std::cout << "=== specwave report (" << out_dir << ") ===\n";
    if (load("hypotheses.json", j)) {
        any = true;
        std::cout << "[hypotheses] pass=" << j.value("pass", false) << "\n";
        if (j.contains("clauses"))
            for (auto& [k, v] : j["clauses"].items())
                std::cout << "  " << k << ": " << (v.value("pass", false) ? "pass" : "FAIL")
                          << "\n";
    }
    if (load("growth.json", j)) {
        any = true;
        std::cout << "[growth]";
        for (const char* n : {"n1", "n2", "n3", "n4", "n5"})
            if (j.contains(n)) std::cout << " " << n << "=" << j[n]["ctilde"].dump();
        std::cout << "\n";
    }
    if (load("certificate.json", j)) {
        any = true;
        std::cout << "[decay] level=" << j.value("level", "?")
                  << " pass=" << j.value("pass", false) << " M=" << j.value("M", 0.0)
                  << " rate=" << j.value("rate", 0.0) << " theta=" << j.value("theta", 0.0)
                  << "\n";
    }
    if (load("regularity.json", j)) {
        any = true;
        std::cout << "[regularity] pass=" << j.value("pass", false);
        if (j.contains("theorem1"))
            std::cout << " th1.sup=" << j["theorem1"].value("sup_sum", 0.0)
                      << " th1.bound=" << j["theorem1"].value("th1_bound", 0.0);
        if (j.contains("theorem2"))
            std::cout << " th2.band=" << j["theorem2"].value("band_ratio", 0.0);
        std::cout << "\n";
    }
    if (load("attractor.json", j)) {
        any = true;
        std::cout << "[attractor] pass=" << j.value("pass", false)
                  << " spearman=" << j.value("spearman", 0.0)
                  << " density0=" << j.value("density0", 0.0) << "\n";
    }
    if (!any) {
        std::cout << "no report artifacts found\n";
        return 1;
    }
    return 0;
}

}  // namespace specwave
