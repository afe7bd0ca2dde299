#ifndef RTL_SERIALIZE_HPP
#define RTL_SERIALIZE_HPP

#include <array>
#include <string>
#include <vector>

#include "rtl/classical_dynamics.hpp"
#include "rtl/evolve.hpp"
#include "rtl/normal_form.hpp"
#include "rtl/resonance.hpp"
#include "rtl/spectral.hpp"

// JSON and CSV serialization for configs and reports. All writers are
// deterministic: keys are emitted sorted, doubles round-trip exactly, and
// nothing time- or machine-dependent is included.

namespace rtl {

struct SolverConfig {
    int K = 128;
    double dt = 0.0;  // 0: default step rule
    double T = 100.0;
    double sample_dt = 0.25;
    std::string scheme = "cayley-midpoint";
};

struct ExperimentConfig {
    static constexpr const char* kSchemaVersion = "1";

    int m = 1;
    double epsilon = 0.1;
    std::string preset;                 // named V, or empty when modes are given
    std::vector<std::array<double, 4>> modes;  // {k, l, re, im}
    int K_x = 8;
    int K_t = 8;
    SolverConfig solver;
    int normal_form_N = 1;
    double escape_sigma = 0.01;
    int datum_xi0 = 40;
    double s = 1.0;
    double horizon_factor = 1.0;
    double eps_budget = 0.1;
    std::uint64_t seed = 12345;
    std::string output_dir = "out";
};

// Known presets: resonant-cos, stable-shifted-cos, nonresonant-cos,
// degenerate-tangent. Throws ConfigError for unknown names.
SpaceTimeField preset_field(const std::string& name);
std::vector<std::string> preset_names();

// The V described by the config (preset wins over the mode list).
SpaceTimeField config_field(const ExperimentConfig& cfg);

std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig parse_config(const std::string& text);

std::string field_to_json(const TorusField& f);
std::string field_to_json(const SpaceTimeField& f);
TorusField torus_field_from_json(const std::string& text);
SpaceTimeField space_time_field_from_json(const std::string& text);

std::string classification_to_json(const ClassificationReport& rep);
std::string chain_to_json(const NormalFormChain& chain);
std::string growth_report_to_json(const GrowthReport& rep);
std::string stability_report_to_json(const StabilityReport& rep);
std::string dichotomy_report_to_json(const DichotomyReport& rep);
std::string escape_to_json(const EscapeFunction& E);

std::string escape_profile_csv(const EscapeFunction& E, const TorusField& X);
std::string norms_csv(const std::vector<double>& times,
                      const std::map<double, std::vector<double>>& series);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace rtl

#endif
