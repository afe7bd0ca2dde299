#include "rtl/serialize.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rtl {

using nlohmann::json;

namespace {

json modes_json_1d(const TorusField& f) {
    json arr = json::array();
    for (int k = -f.K; k <= f.K; ++k) {
        const Complex c = f.c(k);
        if (c == Complex{0.0, 0.0}) continue;
        arr.push_back({{"k", k}, {"re", c.real()}, {"im", c.imag()}});
    }
    return arr;
}

json modes_json_2d(const SpaceTimeField& f) {
    json arr = json::array();
    for (int k = -f.K_x; k <= f.K_x; ++k)
        for (int l = -f.K_t; l <= f.K_t; ++l) {
            const Complex c = f.c(k, l);
            if (c == Complex{0.0, 0.0}) continue;
            arr.push_back({{"k", k}, {"l", l}, {"re", c.real()}, {"im", c.imag()}});
        }
    return arr;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

SpaceTimeField preset_field(const std::string& name) {
    SpaceTimeField V(8, 8, true);
    if (name == "resonant-cos") {  // cos(x + t)
        V.c(1, 1) = 0.5;
        V.c(-1, -1) = 0.5;
    } else if (name == "stable-shifted-cos") {  // 2 + cos(x + t)
        V.c(0, 0) = 2.0;
        V.c(1, 1) = 0.5;
        V.c(-1, -1) = 0.5;
    } else if (name == "nonresonant-cos") {  // cos(x - t)
        V.c(1, -1) = 0.5;
        V.c(-1, 1) = 0.5;
    } else if (name == "degenerate-tangent") {  // 1 + cos(x + t)
        V.c(0, 0) = 1.0;
        V.c(1, 1) = 0.5;
        V.c(-1, -1) = 0.5;
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    return V;
}

std::vector<std::string> preset_names() {
    return {"resonant-cos", "stable-shifted-cos", "nonresonant-cos", "degenerate-tangent"};
}

SpaceTimeField config_field(const ExperimentConfig& cfg) {
    if (!cfg.preset.empty()) return preset_field(cfg.preset);
    SpaceTimeField V(cfg.K_x, cfg.K_t, true);
    for (const auto& mode : cfg.modes) {
        const int k = static_cast<int>(mode[0]);
        const int l = static_cast<int>(mode[1]);
        if (std::abs(k) > cfg.K_x || std::abs(l) > cfg.K_t)
            throw ConfigError("mode (" + std::to_string(k) + "," + std::to_string(l) +
                              ") outside cutoffs");
        V.c(k, l) = Complex{mode[2], mode[3]};
    }
    V.symmetrize_real();
    return V;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json j;
    j["version"] = ExperimentConfig::kSchemaVersion;
    j["m"] = cfg.m;
    j["epsilon"] = cfg.epsilon;
    json V;
    if (!cfg.preset.empty()) {
        V["preset"] = cfg.preset;
    } else {
        V["K_x"] = cfg.K_x;
        V["K_t"] = cfg.K_t;
        json arr = json::array();
        for (const auto& mode : cfg.modes)
            arr.push_back({{"k", mode[0]}, {"l", mode[1]}, {"re", mode[2]}, {"im", mode[3]}});
        V["modes"] = arr;
    }
    j["V"] = V;
    j["solver"] = {{"K", cfg.solver.K},
                   {"dt", cfg.solver.dt},
                   {"T", cfg.solver.T},
                   {"sample_dt", cfg.solver.sample_dt},
                   {"scheme", cfg.solver.scheme}};
    j["normal_form"] = {{"N", cfg.normal_form_N}};
    j["escape"] = {{"sigma", cfg.escape_sigma}};
    j["datum"] = {{"xi0", cfg.datum_xi0}};
    j["s"] = cfg.s;
    j["horizon_factor"] = cfg.horizon_factor;
    j["eps_budget"] = cfg.eps_budget;
    j["seeds"] = {{"master", cfg.seed}};
    j["output"] = {{"dir", cfg.output_dir}};
    return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        ExperimentConfig cfg;
        if (j.contains("version") && j["version"].get<std::string>() !=
                                         ExperimentConfig::kSchemaVersion)
            throw ConfigError("unsupported config version");
        if (j.contains("m")) cfg.m = j["m"].get<int>();
        if (cfg.m < 1) throw ConfigError("m must be a positive integer");
        if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
        if (j.contains("V")) {
            const json& V = j["V"];
            if (V.contains("preset")) {
                cfg.preset = V["preset"].get<std::string>();
                preset_field(cfg.preset);  // validate the name
            } else {
                if (V.contains("K_x")) cfg.K_x = V["K_x"].get<int>();
                if (V.contains("K_t")) cfg.K_t = V["K_t"].get<int>();
                if (V.contains("modes"))
                    for (const auto& mode : V["modes"])
                        cfg.modes.push_back({mode["k"].get<double>(), mode["l"].get<double>(),
                                             mode["re"].get<double>(),
                                             mode.value("im", 0.0)});
            }
        }
        if (j.contains("solver")) {
            const json& s = j["solver"];
            if (s.contains("K")) cfg.solver.K = s["K"].get<int>();
            if (s.contains("dt")) cfg.solver.dt = s["dt"].get<double>();
            if (s.contains("T")) cfg.solver.T = s["T"].get<double>();
            if (s.contains("sample_dt")) cfg.solver.sample_dt = s["sample_dt"].get<double>();
            if (s.contains("scheme")) cfg.solver.scheme = s["scheme"].get<std::string>();
            if (cfg.solver.scheme != "cayley-midpoint")
                throw ConfigError("unknown scheme: " + cfg.solver.scheme);
            if (cfg.solver.K < 2) throw ConfigError("solver.K too small");
            if (cfg.solver.T <= 0.0) throw ConfigError("solver.T must be positive");
        }
        if (j.contains("normal_form")) cfg.normal_form_N = j["normal_form"]["N"].get<int>();
        if (cfg.normal_form_N < 1) throw ConfigError("normal_form.N must be >= 1");
        if (j.contains("escape")) cfg.escape_sigma = j["escape"]["sigma"].get<double>();
        if (j.contains("datum")) cfg.datum_xi0 = j["datum"]["xi0"].get<int>();
        if (j.contains("s")) cfg.s = j["s"].get<double>();
        if (j.contains("horizon_factor")) cfg.horizon_factor = j["horizon_factor"].get<double>();
        if (j.contains("eps_budget")) cfg.eps_budget = j["eps_budget"].get<double>();
        if (j.contains("seeds")) cfg.seed = j["seeds"]["master"].get<std::uint64_t>();
        if (j.contains("output")) cfg.output_dir = j["output"]["dir"].get<std::string>();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config schema violation: ") + e.what());
    }
}

std::string field_to_json(const TorusField& f) {
    json j;
    j["K"] = f.K;
    j["is_real"] = f.is_real;
    j["modes"] = modes_json_1d(f);
    return j.dump(2) + "\n";
}

std::string field_to_json(const SpaceTimeField& f) {
    json j;
    j["K_x"] = f.K_x;
    j["K_t"] = f.K_t;
    j["is_real"] = f.is_real;
    j["modes"] = modes_json_2d(f);
    return j.dump(2) + "\n";
}

TorusField torus_field_from_json(const std::string& text) {
    json j = json::parse(text);
    TorusField f(j["K"].get<int>(), j["is_real"].get<bool>());
    for (const auto& mode : j["modes"])
        f.c(mode["k"].get<int>()) = Complex{mode["re"].get<double>(), mode["im"].get<double>()};
    return f;
}

SpaceTimeField space_time_field_from_json(const std::string& text) {
    json j = json::parse(text);
    SpaceTimeField f(j["K_x"].get<int>(), j["K_t"].get<int>(), j["is_real"].get<bool>());
    for (const auto& mode : j["modes"])
        f.c(mode["k"].get<int>(), mode["l"].get<int>()) =
            Complex{mode["re"].get<double>(), mode["im"].get<double>()};
    return f;
}

std::string classification_to_json(const ClassificationReport& rep) {
    json j;
    j["verdict"] = to_string(rep.verdict);
    json zeros = json::array();
    for (const auto& z : rep.zeros)
        zeros.push_back({{"x0", z.location},
                         {"slope", z.slope},
                         {"residual", z.refinement_residual},
                         {"sign_change", z.from_sign_change}});
    j["zeros"] = zeros;
    j["nu"] = rep.nu;
    j["min_abs_value"] = rep.min_abs_value;
    j["tolerances"] = {{"zero_tol", rep.tolerances.zero_tol},
                       {"degeneracy_tol", rep.tolerances.degeneracy_tol},
                       {"stable_margin", rep.tolerances.stable_margin},
                       {"resonance_tol", rep.tolerances.resonance_tol}};
    j["truncated_resonant_modes"] = rep.truncated_resonant_modes;
    return j.dump(2) + "\n";
}

std::string chain_to_json(const NormalFormChain& chain) {
    json j;
    j["m"] = chain.m;
    j["epsilon"] = chain.epsilon;
    j["translation_applied"] = chain.translation_applied;
    json steps = json::array();
    for (const auto& st : chain.steps) {
        json s;
        s["beta"] = json::parse(field_to_json(st.beta));
        s["invertibility_margin"] = st.invertibility_margin;
        s["composition_residual"] = st.composition_residual;
        steps.push_back(s);
    }
    j["steps"] = steps;
    j["resonant_average"] = json::parse(field_to_json(chain.resonant_avg));
    j["Z"] = json::parse(field_to_json(chain.Z));
    j["remainder_norm"] = chain.remainder_norm;
    if (chain.m_hat) j["m_hat"] = *chain.m_hat;
    if (chain.lambda) j["lambda"] = json::parse(field_to_json(*chain.lambda));
    return j.dump(2) + "\n";
}

std::string growth_report_to_json(const GrowthReport& rep) {
    json j;
    j["s"] = rep.s;
    j["epsilon"] = rep.epsilon;
    j["gamma_fit"] = rep.gamma_fit;
    j["fit_window"] = {rep.fit_t0, rep.fit_t1};
    j["r_squared"] = rep.r_squared;
    j["predicted_rate"] = rep.predicted_rate;
    j["delta1"] = rep.delta1;
    j["delta2"] = rep.delta2;
    j["beta_calibrated"] = rep.beta_calibrated;
    j["virial_satisfied_fraction"] = rep.virial_satisfied_fraction;
    j["escape_margin"] = rep.escape_margin;
    j["saturation_time"] = rep.saturation_time;
    return j.dump(2) + "\n";
}

std::string stability_report_to_json(const StabilityReport& rep) {
    json j;
    j["epsilon"] = rep.epsilon;
    j["N"] = rep.N;
    j["horizon"] = rep.horizon;
    j["m_hat"] = rep.m_hat;
    j["flatness_residual"] = rep.flatness_residual;
    json sup = json::object(), rsup = json::object();
    for (const auto& [s, r] : rep.sup_ratio) sup[fmt(s)] = r;
    for (const auto& [s, r] : rep.reduced_sup_ratio) rsup[fmt(s)] = r;
    j["sup_ratio"] = sup;
    j["reduced_sup_ratio"] = rsup;
    j["reduced_drift_rate"] = rep.reduced_drift_rate;
    return j.dump(2) + "\n";
}

std::string dichotomy_report_to_json(const DichotomyReport& rep) {
    json j;
    j["unstable"] = json::parse(growth_report_to_json(rep.unstable));
    j["gamma_stable"] = rep.gamma_stable;
    j["stable_fit_window"] = {rep.stable_fit_t0, rep.stable_fit_t1};
    j["gamma_ratio"] = rep.ratio;
    return j.dump(2) + "\n";
}

std::string escape_to_json(const EscapeFunction& E) {
    json j;
    j["sigma"] = E.sigma;
    j["nu"] = E.nu;
    j["delta_verified"] = E.delta_verified;
    j["ell_difference_bound"] = E.ell_difference_bound;
    j["eta_derivative_bound"] = E.eta_derivative_bound;
    json W = json::array();
    for (const auto& p : E.W_region.parts) W.push_back({p.lo, p.hi});
    j["W_region"] = W;
    j["profile"] = json::parse(field_to_json(E.atilde));
    json zp = json::array(), zm = json::array();
    for (const auto& z : E.flow.K_plus) zp.push_back({{"x0", z.location}, {"slope", z.slope}});
    for (const auto& z : E.flow.K_minus) zm.push_back({{"x0", z.location}, {"slope", z.slope}});
    j["K_plus"] = zp;
    j["K_minus"] = zm;
    return j.dump(2) + "\n";
}

std::string escape_profile_csv(const EscapeFunction& E, const TorusField& X) {
    EscapeVerification ver = verify_escape(E.atilde, X, static_cast<int>(E.grid_x.size()));
    std::ostringstream os;
    os << "x,g,atilde\n";
    for (Eigen::Index i = 0; i < ver.grid_x.size(); ++i)
        os << fmt(ver.grid_x(i)) << "," << fmt(ver.bracket(i)) << ","
           << fmt(ver.atilde_values(i)) << "\n";
    return os.str();
}

std::string norms_csv(const std::vector<double>& times,
                      const std::map<double, std::vector<double>>& series) {
    std::ostringstream os;
    os << "t,s,norm\n";
    for (const auto& [s, vals] : series)
        for (size_t i = 0; i < times.size() && i < vals.size(); ++i)
            os << fmt(times[i]) << "," << fmt(s) << "," << fmt(vals[i]) << "\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open for writing: " + path);
    os << content;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace rtl
