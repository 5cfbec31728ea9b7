#include <CLI11.hpp>
#include <iostream>

#include "fracflow/app.hpp"
#include "fracflow/errors.hpp"
#include "fracflow/parallel.hpp"

int main(int argc, char** argv) {
  using namespace fracflow;
  CLI::App app{"Level-set simulator for fractional mean curvature flow"};
  app.footer("\n" + config_help() + "\n" + outputs_help());
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::Range(1, 256));

  std::string config_path;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, std::ostream&);
  };
  const Sub subs[] = {
      {"simulate", "run the flow; writes stats.csv and contour_{k}.csv", cmd_simulate},
      {"curvature", "evaluate kappa on the band of the initial field; writes curvature.csv", cmd_curvature},
      {"validate", "run the selected harnesses; exit 0 iff all pass", cmd_validate},
      {"study", "run a convergence study family; writes study_{family}.csv", cmd_study},
  };
  for (const Sub& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("config", config_path, "INI config file")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  set_thread_count(threads);

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  for (const Sub& s : subs)
    if (app.got_subcommand(s.name)) return s.run(cfg, std::cerr);
  return kExitConfig;
}
