// curvlab: config-driven curvature verification campaigns.
#include <iostream>

#include <CLI11.hpp>

#include "curvlab/config.hpp"
#include "curvlab/parallel.hpp"
#include "curvlab/runner.hpp"

namespace cli = curvlab::cli;

namespace {

void summarize(const cli::RunResult& res, std::ostream& out) {
  const auto& rep = res.report;
  for (const auto& c : rep.at("checks")) {
    out << (c.at("passed").get<bool>() ? "PASS " : "FAIL ") << c.at("name").get<std::string>() << '\n';
  }
  for (const auto& w : rep.at("warnings")) out << "warning: " << w.get<std::string>() << '\n';
  if (rep.contains("error")) out << "error: " << rep.at("error").get<std::string>() << '\n';
  out << "status: " << rep.at("status").get<std::string>() << " (exit " << res.exit_code << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature of direct-image bundles: verification campaigns"};
  app.set_version_flag("--version", std::string(cli::kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned threads = 1;
  auto* run = app.add_subcommand("run", "Run a campaign and write its report");
  run->add_option("config", config_path, "Config file (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (default: $CURVLAB_OUT_DIR or ./curvlab-out)");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config against the schema");
  validate->add_option("config", validate_path, "Config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfigError;
  }

  if (*validate) {
    try {
      const auto cfg = cli::load_config(validate_path);
      std::cout << "valid: " << cfg.command << " '" << cfg.name << "'\n";
      return cli::kExitPass;
    } catch (const curvlab::InvalidArgument& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return cli::kExitConfigError;
    }
  }

  cli::Config cfg;
  try {
    cfg = cli::load_config(config_path);
  } catch (const curvlab::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfigError;
  }
  curvlab::parallel::set_threads(threads);
  const cli::RunResult res = cli::run(cfg);
  summarize(res, std::cout);
  const auto dir = cli::resolve_output_dir(out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir), cfg);
  try {
    cli::write_outputs(res, dir, cfg.name);
  } catch (const curvlab::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitConfigError;
  }
  std::cout << "report: " << (dir / (cfg.name + ".report.json")).string() << '\n';
  return res.exit_code;
}
