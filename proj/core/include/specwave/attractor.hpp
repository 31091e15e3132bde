#pragma once

#include <string>
#include <vector>

#include "specwave/semiflow.hpp"

namespace specwave {

struct NewtonOptions {
    int max_iter = 50;
    double tol = 1e-12;       // convergence on the L^2 residual
    double accept = 1e-10;    // residual bound for accepted roots
    double diverge = 1e8;
    double dedup_h1 = 1e-6;   // pairwise H^1_0 distance for deduplication
};

/// Newton iteration on A0 u = f(u) in spectral coordinates; converged roots
/// are deduplicated. Diverging seeds are skipped (count reported via log).
std::vector<Field> find_equilibria(const NonlinearitySpec& f, const ModelPtr& model,
                                   const std::vector<Field>& seeds,
                                   const NewtonOptions& opts = {});

/// Deterministic low-mode seed family: 0 and +-amp phi_k.
std::vector<Field> equilibrium_seeds(const ModelPtr& model, int max_mode = 4,
                                     const std::vector<double>& amplitudes = {0.5, 1.5});

enum class Provenance { Equilibrium, TrajectoryPoint };

/// Finite sample of an attractor: trajectory tails plus equilibria.
struct AttractorSample {
    double epsilon = 1.0;  // 0 = parabolic (points are Gamma images)
    std::vector<StatePair> points;
    std::vector<Provenance> provenance;
    double R = 0.0;  // max over points of ||u||_{H^1_0}^2 + eps ||v||_{L^2}^2
};

struct EnsembleOptions {
    int ensemble = 32;
    double T_transient = 50.0;
    double T_sample = 20.0;
    double h = 1e-3;
    double sample_stride = 0.5;   // spacing of collected cloud points
    double seed_amplitude = 1.0;  // scale of the deterministic initial grid
    int max_seed_mode = 4;
    int threads = 1;
    IntegrateOptions integrate;
};

/// Integrate the deterministic ensemble, discard the transient, collect the
/// tail window and union with the equilibria. For eps = 0 the parabolic flow
/// is used and v carries the time-derivative reading u_t = -A0 u + f(u).
AttractorSample sample_attractor(double eps, const NonlinearitySpec& f, const ModelPtr& model,
                                 const EnsembleOptions& opts,
                                 const std::vector<Field>& equilibria);

/// Gamma map diagnostics: the displayed formula (u, A0 u + f(u)) and the
/// parabolic time-derivative reading (u, -A0 u + f(u)), with their L^2 gap.
struct GammaResult {
    StatePair displayed;
    StatePair time_derivative;
    double discrepancy_l2 = 0.0;
};
GammaResult gamma_map(const Field& u, const NonlinearitySpec& f);

enum class ProductNorm { H1xL2, H1xHm1 };

/// Exact sup-inf semidistance between finite samples in the product norm.
double semidistance(const AttractorSample& A, const AttractorSample& B, ProductNorm norm,
                    int threads = 1);

/// Max nearest-neighbour spacing inside a cloud (sampling density proxy).
double cloud_density(const AttractorSample& A, ProductNorm norm);

struct SemidistanceCurve {
    std::vector<double> epsilons;
    std::vector<double> d_h1l2, d_h1hm1;
    double density0 = 0.0;       // A_0 cloud sampling density (H1 x L2)
    double spearman = 0.0;       // rank correlation of d_h1l2 against list index
    bool trend_pass = false;     // correlation <= threshold (or degenerate zero curve)
    bool terminal_pass = false;  // last d <= terminal_factor * density0
    bool domination_pass = false;
    double trend_threshold = -0.9;
    double terminal_factor = 3.0;
};

/// d(A_eps, A_0) over the epsilon list in both product norms, with the
/// upper-semicontinuity verdict.
SemidistanceCurve upper_semicontinuity_sweep(const std::vector<double>& epsilons,
                                             const NonlinearitySpec& f, const ModelPtr& model,
                                             const EnsembleOptions& opts,
                                             const std::vector<Field>& equilibria,
                                             double trend_threshold = -0.9,
                                             double terminal_factor = 3.0,
                                             std::vector<AttractorSample>* samples_out = nullptr,
                                             AttractorSample* parabolic_out = nullptr);

}  // namespace specwave
