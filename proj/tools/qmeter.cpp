#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "qmeter/config.hpp"
#include "qmeter/errors.hpp"
#include "qmeter/io.hpp"
#include "qmeter/selftest.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string out_dir;
  std::string format;
  int workers = -1;
  bool strict = false;
  bool dry_run = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& fl) {
  cmd->add_option("--out", fl.out_dir, "Output directory (default: config)");
  cmd->add_option("--format", fl.format, "Dataset format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--workers", fl.workers,
                  "Worker threads (0 = hardware concurrency)");
  cmd->add_flag("--strict", fl.strict,
                "Escalate integrator resolution warnings to errors");
  cmd->add_flag("--dry-run", fl.dry_run,
                "Write the resolved config and stop");
}

void apply_flags(qmeter::RunConfig& cfg, const CommonFlags& fl) {
  if (!fl.out_dir.empty()) {
    cfg.out_dir = fl.out_dir;
    cfg.echo["out_dir"] = fl.out_dir;
  }
  if (!fl.format.empty()) {
    cfg.format = fl.format;
    cfg.echo["format"] = fl.format;
  }
  if (fl.workers >= 0) {
    int w = fl.workers;
    if (w == 0) {
      unsigned hw = std::thread::hardware_concurrency();
      w = hw > 0 ? static_cast<int>(hw) : 1;
    }
    cfg.sweep.workers = w;
    cfg.echo["workers"] = w;
  }
  if (fl.strict) {
    cfg.sweep.integrator.strict = true;
    cfg.echo["strict"] = true;
  }
  cfg.dry_run = fl.dry_run;
}

int execute(qmeter::RunConfig cfg) {
  fs::create_directories(cfg.out_dir);
  qmeter::write_text((fs::path(cfg.out_dir) / "resolved_config.json").string(),
                     qmeter::resolved_json(cfg).dump(2) + "\n");
  if (cfg.dry_run) {
    std::cout << "dry run: resolved config written to " << cfg.out_dir
              << "/resolved_config.json\n";
    return 0;
  }

  auto t0 = std::chrono::steady_clock::now();
  qmeter::ExperimentResult result = qmeter::run_sweep(cfg.sweep);
  double wall = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();

  std::size_t ok = 0, failed = 0;
  for (const auto& rec : result.points) {
    if (rec.error.empty()) {
      ++ok;
    } else {
      ++failed;
      std::cerr << "point failed: " << rec.error << "\n";
    }
  }

  const std::string ext = cfg.format == "json" ? ".json" : ".csv";
  std::vector<std::string> written;
  for (const qmeter::Dataset& ds : qmeter::build_datasets(cfg, result)) {
    std::string path = (fs::path(cfg.out_dir) / (ds.name + ext)).string();
    if (cfg.format == "json") {
      qmeter::write_json_records(path, ds.table);
    } else {
      qmeter::write_csv(path, ds.table);
    }
    written.push_back(ds.name + ext);
  }
  qmeter::write_text(
      (fs::path(cfg.out_dir) / "diagnostics.json").string(),
      qmeter::diagnostics_json(cfg, result, wall).dump(2) + "\n");

  std::cout << "spec " << result.spec_hash << ": " << ok << " point"
            << (ok == 1 ? "" : "s") << " done";
  if (failed > 0) std::cout << ", " << failed << " failed";
  std::cout << " in " << wall << " s\n";
  std::cout << "wrote " << cfg.out_dir << "/{resolved_config.json, "
            << "diagnostics.json";
  for (const std::string& name : written) std::cout << ", " << name;
  std::cout << "}\n";

  if (ok == 0) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Qubit-meter quench simulator"};
  app.require_subcommand(1);

  std::string config_path;
  CommonFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a JSON config");
  run_cmd->add_option("config", config_path, "Path to the config file")
      ->required();
  add_common_flags(run_cmd, run_flags);

  std::string figure_id;
  CommonFlags preset_flags;
  CLI::App* preset_cmd =
      app.add_subcommand("preset", "Run a named figure preset");
  preset_cmd->add_option("figure", figure_id, "Preset id (f1a..f3d)")
      ->required();
  add_common_flags(preset_cmd, preset_flags);

  CLI::App* selftest_cmd =
      app.add_subcommand("selftest", "Run the built-in consistency checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (selftest_cmd->parsed()) {
      return qmeter::run_selftest(std::cout) == 0 ? 0 : 1;
    }
    if (run_cmd->parsed()) {
      qmeter::RunConfig cfg = qmeter::parse_config(config_path);
      apply_flags(cfg, run_flags);
      if (cfg.out_dir.empty()) cfg.out_dir = "out";
      return execute(std::move(cfg));
    }
    qmeter::RunConfig cfg = qmeter::preset_config(figure_id);
    apply_flags(cfg, preset_flags);
    if (cfg.out_dir.empty()) cfg.out_dir = "out";
    // Keep preset outputs apart when the user did not pick a directory.
    if (preset_flags.out_dir.empty()) {
      cfg.out_dir = (fs::path("out") / figure_id).string();
      cfg.echo["out_dir"] = cfg.out_dir;
    }
    return execute(std::move(cfg));
  } catch (const qmeter::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
