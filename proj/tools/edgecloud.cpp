#include <CLI11.hpp>
#include <iostream>

#include "edgecloud/error.hpp"
#include "edgecloud/experiment.hpp"

using namespace edgecloud;

int main(int argc, char** argv) {
  CLI::App app{"Edge-cloud video analytics scheduling experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string ablation;
  std::string policy = "cdio";
  std::vector<std::string> matrix_ablations{"rpp", "cdco", "both"};

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "root seed (overrides the config)");
    cmd->add_option("--out", out_dir, "output directory (overrides the config)");
    cmd->add_option("--ablation", ablation, "active modules: rpp, cdco or both")
        ->check(CLI::IsMember({"rpp", "cdco", "both"}));
  };
  CLI::App* train = app.add_subcommand("train", "train the preference predictor on simulator labels");
  CLI::App* run = app.add_subcommand("run", "simulate one policy and write its trace and report");
  CLI::App* matrix = app.add_subcommand("matrix", "every policy x version x bandwidth mode");
  for (auto* cmd : {train, run, matrix}) add_common(cmd);
  run->add_option("--policy", policy, "cdio, all_edge, all_cloud, random or greedy")
      ->check(CLI::IsMember({"cdio", "all_edge", "all_cloud", "random", "greedy"}));
  matrix->add_option("--ablations", matrix_ablations, "scheduler variants to include: rpp, cdco, both")
      ->check(CLI::IsMember({"rpp", "cdco", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? experiment::kExitOk : experiment::kExitConfig;
  }

  try {
    config::RunConfig cfg = config_path.empty() ? config::parse(R"({"schema_version": 1})") : config::load(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!ablation.empty()) cfg.ablation = policies::parse_ablation(ablation);
    cfg.validate();

    if (train->parsed()) return experiment::cmd_train(cfg, std::cout);
    if (run->parsed()) return experiment::cmd_run(cfg, policy, std::cout);
    std::vector<policies::Ablation> ablations;
    for (const auto& a : matrix_ablations) ablations.push_back(policies::parse_ablation(a));
    return experiment::cmd_matrix(cfg, ablations, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return experiment::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return experiment::kExitRuntime;
  }
}
