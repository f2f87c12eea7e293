// site: score transferability metrics over a benchmark and emit reports.
//
//   site validate --config run.json
//   site score    --config run.json [--threads N]
//   site evaluate --config run.json
//   site audit    --config run.json

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "site/site.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Transferability metric scoring and benchmark diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string data_root;
  unsigned threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--data-root", data_root, "directory holding manifest.json and features");
  };
  auto* validate = app.add_subcommand("validate", "check the manifest and every feature file");
  auto* score = app.add_subcommand("score", "score every (metric, model, dataset) triple");
  auto* evaluate = app.add_subcommand("evaluate", "summary, ablation, fidelity and scatter tables");
  auto* audit = app.add_subcommand("audit", "benchmark construction checklist");
  for (auto* sub : {validate, score, evaluate, audit}) add_common(sub);
  score->add_option("--threads", threads, "worker threads (0 = hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : site::kExitUsage;
  }

  try {
    auto cfg = site::load_run_config(config_path,
                                     data_root.empty() ? std::nullopt : std::optional<site::fs::path>(data_root));
    if (threads) cfg.threads = threads;
    if (*validate) return site::cmd_validate(cfg, std::cout);
    if (*score) return site::cmd_score(cfg, std::cout, std::cerr);
    if (*evaluate) return site::cmd_evaluate(cfg, std::cout);
    return site::cmd_audit(cfg, std::cout, std::cerr);
  } catch (const site::Error& e) {
    std::cerr << "error [" << site::to_string(e.code()) << "]: " << e.what() << '\n';
    return e.code() == site::Errc::usage ? site::kExitUsage : site::kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return site::kExitFailure;
  }
}
