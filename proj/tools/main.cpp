#include <CLI11.hpp>

#include <iostream>

#include "gindex/error.hpp"
#include "gindex/lab.hpp"

namespace lab = gindex::lab;

namespace {

void print_verdicts(const lab::RunRecord& rec) {
  for (const auto& e : rec.experiments) {
    std::cout << "[" << lab::to_string(e.outcome) << "] " << e.kind << ": " << e.summary << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical index lab for elliptic operators with group actions on the circle"};
  app.set_version_flag("--version", std::string(lab::version()));
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 1;

  auto* run = app.add_subcommand("run", "Run the experiments of a config and write the reports");
  run->add_option("config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Report directory (default: the config's output field)");
  run->add_option("--threads", threads, "Experiments run concurrently")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Check a config against the schema");
  validate->add_option("config", config_path, "JSON config")->required()->check(CLI::ExistingFile);

  auto* calibrate = app.add_subcommand("calibrate-sign", "Run the winding family and record the index sign");
  calibrate->add_option("--out", out_dir, "Report directory")->default_val("calibration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto cfg = lab::load_config(config_path);
      std::cout << "valid " << lab::config_hash(cfg) << "\n";
      return 0;
    }
    if (*run) {
      const auto cfg = lab::load_config(config_path);
      if (out_dir.empty()) out_dir = cfg.output.empty() ? "out" : cfg.output;
      const auto rec = lab::run(cfg, threads);
      lab::emit_reports(rec, out_dir);
      print_verdicts(rec);
      std::cout << "reports in " << out_dir << " (config " << rec.config_hash << ")\n";
      return lab::exit_code(rec.outcome());
    }
    if (*calibrate) {
      const auto rec = lab::calibrate_sign();
      lab::emit_reports(rec, out_dir);
      const auto& e = rec.experiments.front();
      std::ofstream(std::filesystem::path(out_dir) / "sign_convention.json") << e.payload.dump(2) << "\n";
      print_verdicts(rec);
      return lab::exit_code(rec.outcome());
    }
  } catch (const gindex::Error& e) {
    std::cerr << "gindex: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
