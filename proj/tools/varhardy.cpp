// Command-line driver: runs a suite or an operator probe and writes the
// JSON and CSV reports. Exit codes: 0 all checks pass, 1 some check fails,
// 2 usage error (bad preset, bad flag, out-of-range setting), 3 runtime failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "varhardy/harness.hpp"

using varhardy::ExperimentConfig;

int main(int argc, char** argv) {
  CLI::App app{"Weighted local Hardy spaces with variable exponents: numerical probes"};
  app.set_version_flag("--version", varhardy::kVersion);

  std::string command;
  std::string suite;
  std::string config_path;
  ExperimentConfig cli;
  app.add_option("command", command, "suite | norm | maximal | awconst | atoms | lp | wavelet | list")
      ->required()
      ->check(CLI::IsMember({"suite", "norm", "maximal", "awconst", "atoms", "lp", "wavelet", "list"}));
  auto* suite_pos = app.add_option("suite_id", suite, "suite id E1..E9 (for the suite command)");
  auto* suite_opt = app.add_option("--suite", suite, "suite id E1..E9");
  suite_pos->excludes(suite_opt);
  app.add_option("--config", config_path, "JSON file with the same keys as the flags");
  auto* n_opt = app.add_option("--n", cli.dim, "dimension (1 or 2)");
  auto* t_opt = app.add_option("--T", cli.half_width, "window half-width (power of two)");
  auto* m_opt = app.add_option("--m", cli.level, "lattice level, h = 2^-m, in [5, 12]");
  auto* p_opt = app.add_option("--p", cli.exponent, "exponent preset");
  auto* w_opt = app.add_option("--w", cli.weight, "weight preset");
  auto* seed_opt = app.add_option("--seed", cli.seed, "random seed");
  auto* out_opt = app.add_option("--out", cli.out, "report path stem (writes .json and .csv)");
  auto* fam_opt = app.add_option("--family-size", cli.family_size, "members per test family");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (command == "list") {
    std::cout << varhardy::list_presets();
    return 0;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = varhardy::load_config(config_path, cfg);
    cfg.command = command;
    if (!suite.empty()) cfg.suite = suite;
    if (n_opt->count()) cfg.dim = cli.dim;
    if (t_opt->count()) cfg.half_width = cli.half_width;
    if (m_opt->count()) cfg.level = cli.level;
    if (p_opt->count()) cfg.exponent = cli.exponent;
    if (w_opt->count()) cfg.weight = cli.weight;
    if (seed_opt->count()) cfg.seed = cli.seed;
    if (out_opt->count()) cfg.out = cli.out;
    if (fam_opt->count()) cfg.family_size = cli.family_size;
    varhardy::validate(cfg);
  } catch (const varhardy::PresetError& e) {
    std::cerr << "invalid preset: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    const varhardy::SuiteReport rep = varhardy::run_suite(cfg);
    varhardy::write_report(rep, cfg.out);
    int failed = 0;
    for (const auto& r : rep.records) {
      if (r.pass) continue;
      ++failed;
      std::cout << "FAIL " << r.name << " " << r.quantity << ": m=" << r.value_m << " m+1=" << r.value_m1;
      if (!r.note.empty()) std::cout << " (" << r.note << ")";
      std::cout << "\n";
    }
    std::cout << rep.suite << ": " << rep.records.size() - failed << "/" << rep.records.size() << " checks pass in "
              << rep.wall_seconds << " s; report " << cfg.out << ".json\n";
    return rep.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
