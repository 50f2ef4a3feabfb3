#include "CLI11.hpp"

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "dtnlab/config.hpp"
#include "dtnlab/errors.hpp"
#include "dtnlab/experiments.hpp"
#include "dtnlab/report.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string format;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config_path, "JSON config file; defaults apply when absent")
      ->check(CLI::ExistingFile);
  sub->add_option("--out", flags.out_dir, "output directory (overrides config)");
  sub->add_option("--seed", flags.seed, "seed override");
  sub->add_option("--format", flags.format, "rows file format")
      ->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for boundary spectral data and DtN maps"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> experiments = {
      {"eig", "eigensystem with Weyl fit and trace growth diagnostics"},
      {"dtn", "Dirichlet-to-Neumann matrix, direct Schur vs spectral series"},
      {"distance", "weighted spectral distance between two potentials"},
      {"lemma-check", "series solution identities over random potentials and probes"},
      {"stability", "distance vs DtN difference ratios across a pair sweep"},
      {"resolvent-limit", "remainder decay under large spectral shifts"},
      {"incomplete", "complex shifted DtN differences along a parabolic contour"},
      {"uniqueness", "tail distance detection of distinct potentials"},
      {"series", "truncation behaviour of the three-term difference split"},
  };

  CommonFlags flags;
  for (const auto& [name, desc] : experiments) add_common(app.add_subcommand(name, desc), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    dtnlab::config::RunConfig cfg = flags.config_path.empty()
                                        ? dtnlab::config::default_config(name)
                                        : dtnlab::config::load_config(flags.config_path, name);
    if (sub->count("--seed")) cfg.seed = flags.seed;
    if (sub->count("--out")) cfg.out = flags.out_dir;
    if (sub->count("--format")) cfg.format = flags.format;

    const dtnlab::report::ExperimentReport rep = dtnlab::lab::run_experiment(cfg);
    const std::string summary = dtnlab::report::write_report(rep, cfg.out, cfg.format);

    for (const auto& c : rep.checks)
      std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name << "  value=" << c.value
                << "  threshold=" << c.threshold << "  (" << c.relation << ")\n";
    std::cout << (rep.passed() ? "OK" : "FAILED") << "  " << rep.experiment << " on " << rep.grid
              << "  [" << rep.elapsed_ms << " ms]\n"
              << "summary: " << summary << "\n";
    return rep.passed() ? 0 : 1;
  } catch (const dtnlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dtnlab::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
}
