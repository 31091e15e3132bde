#include "specwave/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace specwave {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("key '" + key + "': cannot parse number from '" + v + "'");
    }
}

int to_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("key '" + key + "': cannot parse integer from '" + v + "'");
    }
}

std::vector<double> to_list(const std::string& v, const std::string& key) {
    std::vector<double> out;
    std::string s = v;
    for (auto& ch : s)
        if (ch == ',') ch = ' ';
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(to_double(tok, key));
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
    Scenario scn;
    scn.raw_text = text;
    scn.base_dir = base_dir;
    scn.domain.grid_n = {256, 0};
    scn.domain.modes = 32;

    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    bool lengths_set = false;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            static const char* known[] = {"domain", "coefficients", "nonlinearity",
                                          "run", "decay", "regularity", "attractor", "global"};
            bool ok = false;
            for (const char* k : known) ok = ok || section == k;
            if (!ok) throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");

        auto unknown = [&]() {
            throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
        };
        if (section == "domain") {
            if (key == "dimension") scn.domain.dimension = to_int(val, key);
            else if (key == "lengths") {
                const auto l = to_list(val, key);
                if (l.size() > 2) throw ConfigError("lengths takes at most two values");
                scn.domain.lengths[0] = l[0];
                scn.domain.lengths[1] = l.size() > 1 ? l[1] : l[0];
                lengths_set = true;
            } else if (key == "grid_n") {
                const auto l = to_list(val, key);
                scn.domain.grid_n[0] = static_cast<int>(l[0]);
                scn.domain.grid_n[1] = l.size() > 1 ? static_cast<int>(l[1])
                                                    : static_cast<int>(l[0]);
            } else if (key == "modes_N") scn.domain.modes = to_int(val, key);
            else if (key == "fd_order") scn.domain.fd_order = to_int(val, key);
            else unknown();
        } else if (section == "coefficients") {
            if (key == "a_const") scn.a_const = to_double(val, key);
            else if (key == "a_file") scn.a_file = val;
            else if (key == "beta_const") scn.beta_const = to_double(val, key);
            else if (key == "beta_file") scn.beta_file = val;
            else if (key == "a0") scn.a0_declared = to_double(val, key);
            else if (key == "a1") scn.a1_declared = to_double(val, key);
            else unknown();
        } else if (section == "nonlinearity") {
            if (key == "kind") scn.nl_kind = val;
            else if (key == "mu") { scn.mu = to_double(val, key); scn.has_mu = true; }
            else if (key == "c_const") scn.c_const = to_double(val, key);
            else if (key == "c_file") scn.c_file = val;
            else if (key == "alpha") scn.alpha = to_double(val, key);
            else if (key == "beta_h") scn.beta_h = to_double(val, key);
            else if (key == "C") scn.C = to_double(val, key);
            else if (key.size() > 1 && key[0] == 'p') {
                const std::string tail = key.substr(1);
                const auto us = tail.find('_');
                if (us == std::string::npos) unknown();
                const int p = to_int(tail.substr(0, us), key);
                const std::string what = tail.substr(us + 1);
                if (p < 0 || p > 9) throw ConfigError("polynomial power out of range: " + key);
                if (what == "const") scn.poly_const[p] = to_double(val, key);
                else if (what == "file") scn.poly_file[p] = val;
                else unknown();
            } else unknown();
        } else if (section == "run") {
            if (key == "epsilon") scn.epsilon = to_double(val, key);
            else if (key == "theta") scn.run_theta = (val == "auto") ? -1.0 : to_double(val, key);
            else if (key == "h") scn.h = to_double(val, key);
            else if (key == "T") scn.T = to_double(val, key);
            else if (key == "transient_T0") scn.transient_T0 = to_double(val, key);
            else if (key == "store_dt") scn.store_dt = to_double(val, key);
            else if (key == "omega_max_lag") scn.omega_max_lag = to_double(val, key);
            else if (key == "initial") {
                std::istringstream vs(val);
                std::string kind;
                vs >> kind;
                if (kind == "zero") scn.initial_kind = "zero";
                else if (kind == "mode") {
                    scn.initial_kind = "mode";
                    if (!(vs >> scn.initial_mode >> scn.initial_amplitude))
                        throw ConfigError("initial = mode K A");
                } else if (kind == "file") {
                    scn.initial_kind = "file";
                    if (!(vs >> scn.initial_file)) throw ConfigError("initial = file PATH");
                } else throw ConfigError("initial must be zero | mode K A | file PATH");
            } else unknown();
        } else if (section == "decay") {
            if (key == "rho") scn.rho = to_double(val, key);
            else if (key == "delta") scn.delta = to_double(val, key);
            else if (key == "level") scn.level = val;
            else if (key == "basis_size") scn.basis_size = to_int(val, key);
            else if (key == "R") scn.R_declared = to_double(val, key);
            else unknown();
        } else if (section == "regularity") {
            if (key == "theta") scn.reg_theta = (val == "auto") ? -1.0 : to_double(val, key);
            else if (key == "tail_Tw") scn.tail_Tw = to_double(val, key);
            else if (key == "epsilon_list") scn.reg_epsilon_list = to_list(val, key);
            else if (key == "uniformity_factor") scn.uniformity_factor = to_double(val, key);
            else if (key == "voc_tol") scn.voc_tol = to_double(val, key);
            else if (key == "sweep_transient_T0") scn.sweep_transient_T0 = to_double(val, key);
            else if (key == "embedding_C") scn.embedding_C = to_double(val, key);
            else unknown();
        } else if (section == "attractor") {
            if (key == "ensemble") scn.ensemble = to_int(val, key);
            else if (key == "T_transient") scn.att_T_transient = to_double(val, key);
            else if (key == "T_sample") scn.att_T_sample = to_double(val, key);
            else if (key == "epsilon_list") scn.att_epsilon_list = to_list(val, key);
            else if (key == "trend_threshold") scn.trend_threshold = to_double(val, key);
            else if (key == "tolerance") scn.terminal_factor = to_double(val, key);
            else if (key == "sample_stride") scn.sample_stride = to_double(val, key);
            else if (key == "seed_amplitude") scn.seed_amplitude = to_double(val, key);
            else unknown();
        } else if (section == "global") {
            if (key == "seed") scn.seed = static_cast<std::uint64_t>(to_int(val, key));
            else unknown();
        }
    }
    if (!lengths_set) scn.domain.lengths = {M_PI, M_PI};
    scn.validate();
    return scn;
}

void Scenario::validate() const {
    domain.validate();
    if (epsilon <= 0.0 || epsilon > 1.0) throw ConfigError("[run] epsilon must lie in (0,1]");
    if (h <= 0.0 || T <= 0.0) throw ConfigError("[run] h and T must be positive");
    if (store_dt < h) throw ConfigError("[run] store_dt must be >= h");
    if (nl_kind != "polynomial")
        throw ConfigError("[nonlinearity] kind must be 'polynomial' in scenario files");
    if (std::abs(alpha + beta_h - 2.0) > 1e-12)
        throw ConfigError("[nonlinearity] alpha + beta_h must equal 2");
    if (level != "Zm1" && level != "Z0") throw ConfigError("[decay] level must be Zm1 or Z0");
    if (rho <= 0.0 || rho > 0.5) throw ConfigError("[decay] rho must lie in (0, 1/2]");
    for (double e : reg_epsilon_list)
        if (e <= 0.0 || e > 1.0) throw ConfigError("[regularity] epsilon_list entries in (0,1]");
    for (double e : att_epsilon_list)
        if (e <= 0.0 || e > 1.0) throw ConfigError("[attractor] epsilon_list entries in (0,1]");
    auto check_file = [&](const std::string& rel, const char* what) {
        if (rel.empty()) return;
        const std::filesystem::path p = std::filesystem::path(base_dir) / rel;
        if (!std::filesystem::exists(p))
            throw ConfigError(std::string(what) + " file does not exist: " + p.string());
    };
    check_file(a_file, "coefficient");
    check_file(beta_file, "coefficient");
    check_file(c_file, "dissipativeness");
    check_file(initial_file, "initial-data");
    for (const auto& [p, f] : poly_file) check_file(f, "polynomial-coefficient");
}

Eigen::VectorXd load_grid_field(const std::string& path, int expected_size) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open field file: " + path);
    std::vector<double> vals;
    double x;
    while (in >> x) vals.push_back(x);
    if (static_cast<int>(vals.size()) != expected_size)
        throw ConfigError("field file " + path + " has " + std::to_string(vals.size()) +
                          " values, expected " + std::to_string(expected_size));
    return Eigen::Map<Eigen::VectorXd>(vals.data(), expected_size);
}

CoefficientField build_coefficients(const Scenario& scn) {
    const int m = scn.domain.gridSize();
    CoefficientField coeffs = CoefficientField::constant(scn.domain, scn.a_const, scn.beta_const);
    const auto resolve = [&](const std::string& rel) {
        return (std::filesystem::path(scn.base_dir) / rel).string();
    };
    if (!scn.a_file.empty()) {
        coeffs.a11 = load_grid_field(resolve(scn.a_file), m);
        if (scn.domain.dimension == 2) coeffs.a22 = coeffs.a11;
    }
    if (!scn.beta_file.empty()) coeffs.beta = load_grid_field(resolve(scn.beta_file), m);
    coeffs.a0_declared = scn.a0_declared;
    coeffs.a1_declared = scn.a1_declared;
    return coeffs;
}

AssembledOperator build_operator(const Scenario& scn) {
    return assemble_operator(scn.domain, build_coefficients(scn));
}

ModelPtr build_model(const Scenario& scn) {
    return eig_decompose(build_operator(scn), scn.domain.modes);
}

NonlinearitySpec build_nonlinearity(const Scenario& scn, const ModelPtr& model) {
    const int m = model->domain.gridSize();
    NonlinearitySpec f;
    f.kind = NonlinearitySpec::Kind::Polynomial;
    int pmax = -1;
    for (const auto& [p, v] : scn.poly_const) pmax = std::max(pmax, p);
    for (const auto& [p, v] : scn.poly_file) pmax = std::max(pmax, p);
    f.powers.resize(static_cast<std::size_t>(pmax + 1));
    for (const auto& [p, v] : scn.poly_const)
        if (v != 0.0) f.powers[static_cast<std::size_t>(p)] = Eigen::VectorXd::Constant(m, v);
    const auto resolve = [&](const std::string& rel) {
        return (std::filesystem::path(scn.base_dir) / rel).string();
    };
    for (const auto& [p, file] : scn.poly_file)
        f.powers[static_cast<std::size_t>(p)] = load_grid_field(resolve(file), m);
    f.alpha = scn.alpha;
    f.beta_h = scn.beta_h;
    f.holder_C = scn.C;
    f.hess_C = scn.C;
    f.mu = scn.mu;
    if (!scn.c_file.empty()) f.c_dissip = load_grid_field(resolve(scn.c_file), m);
    else f.c_dissip = Eigen::VectorXd::Constant(m, scn.c_const);
    f.validate(m);
    return f;
}

Field build_initial(const Scenario& scn, const ModelPtr& model) {
    if (scn.initial_kind == "zero") return Field::zero(model);
    if (scn.initial_kind == "mode")
        return Field::mode(model, scn.initial_mode, scn.initial_amplitude);
    const auto path = (std::filesystem::path(scn.base_dir) / scn.initial_file).string();
    const Eigen::VectorXd grid = load_grid_field(path, model->domain.gridSize());
    return Field(model->project(grid), model);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace specwave
