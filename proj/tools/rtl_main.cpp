// rtl: experiment runner for the resonant transport laboratory.
//
// Subcommands: classify, reduce, escape, evolve, dichotomy. Each reads an
// optional JSON config (plus a --preset shortcut), runs the corresponding
// pipeline, and writes machine-readable artifacts into the output directory:
// JSON for reports, CSV for series. The fully resolved config is written
// next to every result so runs are reproducible byte for byte.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "rtl/serialize.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    int jobs = 1;
};

rtl::ExperimentConfig load_config(const CliArgs& args) {
    rtl::ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = rtl::parse_config(rtl::read_file(args.config_path));
    if (!args.preset.empty()) cfg.preset = args.preset;
    if (cfg.preset.empty() && cfg.modes.empty() && args.config_path.empty())
        throw rtl::ConfigError("no potential given: pass --config or --preset");
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (const char* env = std::getenv("RTL_OUTPUT_DIR")) cfg.output_dir = env;
    return cfg;
}

std::string out_path(const rtl::ExperimentConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

void emit_resolved(const rtl::ExperimentConfig& cfg) {
    rtl::write_file(out_path(cfg, "resolved_config.json"), rtl::serialize_config(cfg));
}

int run_classify(const CliArgs& args) {
    auto cfg = load_config(args);
    emit_resolved(cfg);
    auto rep = rtl::classify(rtl::config_field(cfg), cfg.m);
    const std::string text = rtl::classification_to_json(rep);
    rtl::write_file(out_path(cfg, "classification.json"), text);
    std::cout << text;
    return 0;
}

int run_reduce(const CliArgs& args) {
    auto cfg = load_config(args);
    emit_resolved(cfg);
    const auto V = rtl::config_field(cfg);
    auto chain = rtl::normal_form_reduce(V, cfg.m, cfg.epsilon, cfg.normal_form_N);

    // constant-coefficient step and flatness report where the regime allows it
    std::string flatness = "{\n  \"applicable\": false\n}\n";
    auto rep = rtl::classify(V, cfg.m);
    if (rep.verdict == rtl::Verdict::Stable) {
        rtl::TorusField X_eff = chain.resonant_avg;
        for (int k = -X_eff.K; k <= X_eff.K; ++k) X_eff.c(k) += cfg.epsilon * chain.Z.c(k);
        X_eff.symmetrize_real();
        auto red = rtl::constant_coefficient_reduce(X_eff);
        chain.m_hat = red.m_hat;
        chain.lambda = red.lambda;
        flatness = std::string("{\n  \"applicable\": true,\n  \"m_hat\": ") +
                   std::to_string(red.m_hat) + ",\n  \"flatness_residual\": " +
                   std::to_string(red.flatness_residual) + "\n}\n";
    }
    const std::string text = rtl::chain_to_json(chain);
    rtl::write_file(out_path(cfg, "chain.json"), text);
    rtl::write_file(out_path(cfg, "flatness.json"), flatness);
    std::cout << text;
    return 0;
}

int run_escape(const CliArgs& args) {
    auto cfg = load_config(args);
    emit_resolved(cfg);
    const auto V = rtl::config_field(cfg);
    const auto X = rtl::resonant_average(V, cfg.m);
    auto E = rtl::build_escape(X, cfg.escape_sigma);
    const std::string text = rtl::escape_to_json(E);
    rtl::write_file(out_path(cfg, "escape_margin.json"), text);
    rtl::write_file(out_path(cfg, "escape_profile.csv"), rtl::escape_profile_csv(E, X));
    std::cout << text;
    return 0;
}

int run_evolve(const CliArgs& args) {
    auto cfg = load_config(args);
    emit_resolved(cfg);
    const auto V = rtl::config_field(cfg);
    const auto rep = rtl::classify(V, cfg.m);

    rtl::ExperimentOptions opts;
    opts.K = cfg.solver.K;
    opts.dt = cfg.solver.dt;
    opts.sample_dt = cfg.solver.sample_dt;
    opts.sigma = cfg.escape_sigma;
    opts.xi0 = cfg.datum_xi0;
    opts.seed = cfg.seed;

    if (rep.verdict == rtl::Verdict::Unstable) {
        auto growth = rtl::instability_experiment(V, cfg.m, cfg.epsilon, cfg.s,
                                                  cfg.solver.T, cfg.datum_xi0, opts);
        const std::string text = rtl::growth_report_to_json(growth);
        rtl::write_file(out_path(cfg, "growth_report.json"), text);
        std::map<double, std::vector<double>> series;
        series[growth.s] = growth.norm_values;
        series[-1.0] = growth.virial_values;  // s = -1 row carries A(t)
        rtl::write_file(out_path(cfg, "norms.csv"), rtl::norms_csv(growth.times, series));
        std::cout << text;
    } else if (rep.verdict == rtl::Verdict::Stable) {
        auto stab = rtl::stability_experiment(V, cfg.m, cfg.epsilon, cfg.normal_form_N,
                                              {0.0, cfg.s}, cfg.horizon_factor, opts);
        const std::string text = rtl::stability_report_to_json(stab);
        rtl::write_file(out_path(cfg, "growth_report.json"), text);
        rtl::write_file(out_path(cfg, "norms.csv"),
                        rtl::norms_csv(stab.times, stab.norm_series));
        std::cout << text;
    } else {
        throw rtl::WrongRegime("evolve: potential classified Degenerate; repair it first");
    }
    return 0;
}

int run_dichotomy(const CliArgs& args) {
    auto cfg = load_config(args);
    emit_resolved(cfg);
    rtl::ExperimentOptions opts;
    opts.K = cfg.solver.K;
    opts.dt = cfg.solver.dt;
    opts.sample_dt = cfg.solver.sample_dt;
    opts.sigma = cfg.escape_sigma;
    opts.xi0 = cfg.datum_xi0;
    auto rep = rtl::dichotomy_experiment(rtl::preset_field("stable-shifted-cos"),
                                         rtl::preset_field("resonant-cos"), cfg.m,
                                         cfg.epsilon, cfg.s, cfg.solver.T, opts, args.jobs);
    const std::string text = rtl::dichotomy_report_to_json(rep);
    rtl::write_file(out_path(cfg, "dichotomy.json"), text);
    std::map<double, std::vector<double>> series;
    series[cfg.s] = rep.stable_norms;
    rtl::write_file(out_path(cfg, "stable_norms.csv"),
                    rtl::norms_csv(rep.stable_times, series));
    series.clear();
    series[cfg.s] = rep.unstable.norm_values;
    rtl::write_file(out_path(cfg, "unstable_norms.csv"),
                    rtl::norms_csv(rep.unstable.times, series));
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"resonant transport laboratory"};
    app.require_subcommand(1);

    CliArgs args;
    for (const char* name : {"classify", "reduce", "escape", "evolve", "dichotomy"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", args.config_path, "JSON experiment config");
        sub->add_option("--preset", args.preset, "named potential preset");
        sub->add_option("--out", args.out_dir, "output directory");
        sub->add_option("--jobs", args.jobs, "parallel workers for paired runs");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("classify")) return run_classify(args);
        if (app.got_subcommand("reduce")) return run_reduce(args);
        if (app.got_subcommand("escape")) return run_escape(args);
        if (app.got_subcommand("evolve")) return run_evolve(args);
        if (app.got_subcommand("dichotomy")) return run_dichotomy(args);
    } catch (const rtl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const rtl::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
