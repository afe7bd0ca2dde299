#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "rtl/serialize.hpp"

using namespace rtl;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RTL_CLI_BINARY) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config serialization round-trips byte-identically") {
    ExperimentConfig cfg;
    cfg.preset = "resonant-cos";
    cfg.epsilon = 0.05;
    cfg.solver.K = 512;
    cfg.solver.T = 123.25;
    cfg.seed = 987654321;
    const std::string a = serialize_config(cfg);
    const std::string b = serialize_config(parse_config(a));
    CHECK(a == b);

    ExperimentConfig modes;
    modes.modes.push_back({1.0, -1.0, 0.5, 0.0});
    modes.modes.push_back({-1.0, 1.0, 0.5, 0.0});
    modes.K_x = 4;
    modes.K_t = 4;
    modes.epsilon = 0.017;
    const std::string c = serialize_config(modes);
    CHECK(c == serialize_config(parse_config(c)));
}

TEST_CASE("config validation errors") {
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("{\"m\": 0}"), ConfigError);
    CHECK_THROWS_AS(parse_config("{\"V\": {\"preset\": \"no-such\"}}"), ConfigError);
    CHECK_THROWS_AS(parse_config("{\"solver\": {\"scheme\": \"euler\"}}"), ConfigError);
}

TEST_CASE("field json round trip") {
    SpaceTimeField V = preset_field("degenerate-tangent");
    SpaceTimeField W = space_time_field_from_json(field_to_json(V));
    CHECK((W.coeffs - V.coeffs).norm() == 0.0);
    CHECK(W.K_x == V.K_x);
}

TEST_CASE("cli classify on presets") {
    const fs::path out = fs::temp_directory_path() / "rtl_test_classify";
    fs::remove_all(out);
    CHECK(run_cli("classify --preset resonant-cos --out " + out.string()) == 0);
    const std::string text = read_file((out / "classification.json").string());
    CHECK(text.find("\"verdict\": \"Unstable\"") != std::string::npos);
    CHECK(fs::exists(out / "resolved_config.json"));

    // determinism: identical bytes on a second run
    const std::string again_path = (out / "classification.json").string();
    CHECK(run_cli("classify --preset resonant-cos --out " + out.string()) == 0);
    CHECK(read_file(again_path) == text);
    fs::remove_all(out);
}

TEST_CASE("cli empty mode list is Degenerate with exit 0") {
    const fs::path out = fs::temp_directory_path() / "rtl_test_empty";
    const fs::path cfgp = out / "cfg.json";
    fs::create_directories(out);
    ExperimentConfig cfg;  // no preset, no modes: V = 0
    write_file(cfgp.string(), serialize_config(cfg));
    CHECK(run_cli("classify --config " + cfgp.string() + " --out " + out.string()) == 0);
    const std::string text = read_file((out / "classification.json").string());
    CHECK(text.find("\"verdict\": \"Degenerate\"") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("cli exit codes for config errors") {
    CHECK(run_cli("classify --preset no-such-preset --out /tmp/rtl_err") == 2);
    CHECK(run_cli("classify") == 2);  // no potential given
    CHECK(run_cli("bogus-subcommand") == 2);
}

TEST_CASE("cli escape subcommand emits margin and profile") {
    const fs::path out = fs::temp_directory_path() / "rtl_test_escape";
    fs::remove_all(out);
    CHECK(run_cli("escape --preset resonant-cos --out " + out.string()) == 0);
    const std::string text = read_file((out / "escape_margin.json").string());
    CHECK(text.find("delta_verified") != std::string::npos);
    const std::string csv = read_file((out / "escape_profile.csv").string());
    CHECK(csv.rfind("x,g,atilde", 0) == 0);
    fs::remove_all(out);
}

TEST_CASE("RTL_OUTPUT_DIR overrides the output root") {
    const fs::path out = fs::temp_directory_path() / "rtl_test_envdir";
    fs::remove_all(out);
    const std::string cmd = std::string("RTL_OUTPUT_DIR=") + out.string() + " " +
                            RTL_CLI_BINARY +
                            " classify --preset nonresonant-cos --out /tmp/ignored_dir"
                            " > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(out / "classification.json"));
    fs::remove_all(out);
}
