#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "specwave/nonlinearity.hpp"
#include "specwave/operator_core.hpp"

namespace specwave {

/// One scenario = one config file: every section validated up front,
/// referenced files resolved relative to the config location.
struct Scenario {
    // [domain]
    DomainSpec domain;
    // [coefficients]
    double a_const = 1.0;
    std::string a_file;
    double beta_const = 0.0;
    std::string beta_file;
    double a0_declared = 0.0, a1_declared = 0.0;
    // [nonlinearity]
    std::string nl_kind = "polynomial";
    std::map<int, double> poly_const;
    std::map<int, std::string> poly_file;
    double mu = 1.0;
    double c_const = 0.0;
    std::string c_file;
    double alpha = 1.0, beta_h = 1.0, C = 1.0;
    bool has_mu = false;
    // [run]
    double epsilon = 1.0;
    double run_theta = -1.0;  // <0 = auto (theta_rho chain)
    double h = 1e-3, T = 60.0, transient_T0 = 50.0;
    std::string initial_kind = "mode";  // zero | mode | file
    int initial_mode = 1;
    double initial_amplitude = 0.1;
    std::string initial_file;
    double store_dt = 0.01, omega_max_lag = 1.0;
    // [decay]
    double rho = 0.5, delta = 0.25;
    std::string level = "Zm1";
    int basis_size = 0;
    double R_declared = 0.0;  // 0 = measured
    // [regularity]
    double reg_theta = -1.0;
    double tail_Tw = 10.0;
    std::vector<double> reg_epsilon_list{1.0, 0.5, 0.25, 0.125, 0.0625};
    double uniformity_factor = 2.0;
    double voc_tol = 0.0;
    double sweep_transient_T0 = 5.0;
    double embedding_C = 0.0;  // 0 = derived
    // [attractor]
    int ensemble = 32;
    double att_T_transient = 50.0, att_T_sample = 20.0;
    std::vector<double> att_epsilon_list{1.0, 0.5, 0.25, 0.125};
    double trend_threshold = -0.9;
    double terminal_factor = 3.0;
    double sample_stride = 0.5;
    double seed_amplitude = 1.0;

    std::uint64_t seed = 1;
    std::string raw_text;   // for hashing
    std::string base_dir;   // for resolving file references

    void validate() const;
};

Scenario parse_scenario(const std::string& text, const std::string& base_dir);
Scenario load_scenario(const std::string& path);

/// Coefficient fields per the scenario's [coefficients] section.
CoefficientField build_coefficients(const Scenario& scn);
/// Assemble + decompose per the scenario's [domain]/[coefficients].
AssembledOperator build_operator(const Scenario& scn);
ModelPtr build_model(const Scenario& scn);
NonlinearitySpec build_nonlinearity(const Scenario& scn, const ModelPtr& model);
Field build_initial(const Scenario& scn, const ModelPtr& model);

/// Whitespace-separated grid file (gridSize values).
Eigen::VectorXd load_grid_field(const std::string& path, int expected_size);

}  // namespace specwave
