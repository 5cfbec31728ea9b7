#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracflow/app.hpp"
#include "fracflow/errors.hpp"

using namespace fracflow;
namespace fs = std::filesystem;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(FRACFLOW_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("defaults round-trip through the resolved echo") {
    const RunConfig d;
    CHECK(parse_config_text(echo_config(d)) == d);
    CHECK(parse_config_text("") == d);
  }

  TEST_CASE("edited values round-trip") {
    RunConfig c;
    c.kernel.alpha = 0.3;
    c.grid.h = 1.0 / 48;
    c.initial.shape = "ellipse";
    c.flow.c1 = -0.1 / 3;
    c.flow.field_dumps = true;
    c.validation.harnesses = {"oracle", "audit"};
    c.validation.oracle_radii = {0.25, 4.0};
    c.study.values = {0.1, 0.2};
    c.output_dir = "somewhere/else";
    c.seed = 99;
    CHECK(parse_config_text(echo_config(c)) == c);
  }

  TEST_CASE("errors name the offending key") {
    CHECK(message_of("[kernel]\nbogus = 1\n").find("kernel.bogus") != std::string::npos);
    CHECK(message_of("[kernel]\nalpha = abc\n").find("kernel.alpha") != std::string::npos);
    CHECK(message_of("[kernel]\nalpha = 1.5\n").find("kernel.alpha") != std::string::npos);
    CHECK(message_of("[grid]\nh = -1\n").find("grid.h") != std::string::npos);
    CHECK(message_of("alpha = 0.5\n") != "");
  }

  TEST_CASE("simulate writes its outputs") {
    RunConfig c;
    c.grid.extent = 0.75;
    c.grid.h = 1.0 / 16;
    c.initial.radius = 0.2;
    c.flow.t_end = 0.002;
    c.flow.field_dumps = true;
    c.output_dir = (fs::temp_directory_path() / "fracflow_unit_simulate").string();
    fs::remove_all(c.output_dir);
    std::ostringstream log;
    CHECK(cmd_simulate(c, log) == kExitOk);
    for (const char* f : {"stats.csv", "contour_0.csv", "field_0.csv", "config.resolved.ini"})
      CHECK(fs::exists(fs::path(c.output_dir) / f));
    CHECK(load_config((fs::path(c.output_dir) / "config.resolved.ini").string()) == c);
    fs::remove_all(c.output_dir);
  }

  TEST_CASE("a shape that does not fit the grid is a configuration error") {
    RunConfig c;
    c.grid.extent = 1.0;
    c.initial.radius = 0.99;
    c.output_dir = (fs::temp_directory_path() / "fracflow_unit_bad").string();
    std::ostringstream log;
    CHECK(cmd_simulate(c, log) == kExitConfig);
    fs::remove_all(c.output_dir);
  }

  TEST_CASE("command-line exit codes") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == kExitConfig);
    CHECK(run_cli("simulate /nonexistent/config.ini") == kExitConfig);
    const fs::path dir = fs::temp_directory_path() / "fracflow_unit_cli";
    fs::create_directories(dir);
    {
      std::ofstream(dir / "bad.ini") << "[kernel]\nalpha = 2\n";
      std::ofstream(dir / "audit.ini") << "[kernel]\nvariant = power_law_unchecked\nalpha = 1\n"
                                       << "[validation]\nharnesses = audit\n[output]\ndir = " << (dir / "out").string()
                                       << "\n";
    }
    CHECK(run_cli("validate " + (dir / "bad.ini").string()) == kExitConfig);
    CHECK(run_cli("validate " + (dir / "audit.ini").string()) == kExitHarnessFail);
    fs::remove_all(dir);
  }
}
