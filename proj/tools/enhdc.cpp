// enhdc: train, evaluate and sweep HDC ensemble classifiers.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "enhdc/commands.hpp"

namespace {

const std::vector<std::string> kVoting{"hard", "soft"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"enhdc - ensemble hyperdimensional computing classifiers"};
  app.require_subcommand(1);

  enhdc::TrainOptions train;
  std::uint64_t train_seed = 0;
  std::string train_voting;
  int retrain_epochs = 0;
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "train an ensemble and write a model and report");
  train_cmd->add_option("--config", train.config, "run config file")->required()->check(CLI::ExistingFile);
  auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "override [run] seed");
  auto* train_voting_opt = train_cmd->add_option("--voting", train_voting, "hard or soft")
                               ->check(CLI::IsMember(kVoting));
  auto* epochs_opt =
      train_cmd->add_option("--retrain-epochs", retrain_epochs, "override retraining epochs");
  auto* train_out_opt =
      train_cmd->add_option("--out", train_out, "directory for model.ehdc and report.json");
  train_cmd->add_flag("--votes", train.votes, "include per-sample vote records in the report");
  train_cmd->add_flag("--timing", train.timing, "include wall-clock timings in the report");

  enhdc::EvaluateOptions evaluate;
  std::string dataset, labels, label_column, eval_config, eval_out;
  std::string eval_voting;
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a saved model on a dataset");
  eval_cmd->add_option("--model", evaluate.model, "model file")->required();
  auto* dataset_opt =
      eval_cmd->add_option("--dataset", dataset, "dataset cache, IDX image file, or CSV file");
  auto* labels_opt = eval_cmd->add_option("--labels", labels, "IDX label file");
  auto* column_opt = eval_cmd->add_option("--label-column", label_column, "CSV label column");
  auto* eval_config_opt =
      eval_cmd->add_option("--config", eval_config, "run config whose test split is evaluated");
  auto* eval_voting_opt = eval_cmd->add_option("--voting", eval_voting, "hard or soft")
                              ->check(CLI::IsMember(kVoting));
  auto* eval_out_opt = eval_cmd->add_option("--out", eval_out, "report path");
  eval_cmd->add_flag("--votes", evaluate.votes, "include per-sample vote records in the report");
  dataset_opt->excludes(eval_config_opt);

  enhdc::SweepOptions sweep;
  std::uint64_t sweep_seed = 0;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment grid and write a CSV");
  sweep_cmd->add_option("--config", sweep.config, "sweep config file")->required()->check(CLI::ExistingFile);
  auto* sweep_seed_opt = sweep_cmd->add_option("--seed", sweep_seed, "override [sweep] seed");
  auto* sweep_out_opt = sweep_cmd->add_option("--out", sweep_out, "CSV output path");

  std::uint64_t width = 0, dim = 0, classes = 0, members = 0;
  auto* size_cmd = app.add_subcommand("size", "print the class-hypervector storage of a model");
  size_cmd->add_option("width", width, "bits per element (8 or 16)")->required();
  size_cmd->add_option("dim", dim, "hypervector dimension")->required();
  size_cmd->add_option("classes", classes, "number of classes")->required();
  size_cmd->add_option("members", members, "number of base classifiers")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? enhdc::kExitOk : enhdc::kExitUser;
  }

  if (*train_cmd) {
    if (*train_seed_opt) train.seed = train_seed;
    if (*train_voting_opt) train.voting = enhdc::voting_rule_from_string(train_voting);
    if (*epochs_opt) train.retrain_epochs = retrain_epochs;
    if (*train_out_opt) train.out_dir = train_out;
    return enhdc::cmd_train(train, std::cout, std::cerr);
  }
  if (*eval_cmd) {
    if (*dataset_opt) evaluate.dataset = dataset;
    if (*labels_opt) evaluate.labels = labels;
    if (*column_opt) evaluate.label_column = label_column;
    if (*eval_config_opt) evaluate.config = eval_config;
    if (*eval_voting_opt) evaluate.voting = enhdc::voting_rule_from_string(eval_voting);
    if (*eval_out_opt) evaluate.out = eval_out;
    return enhdc::cmd_evaluate(evaluate, std::cout, std::cerr);
  }
  if (*sweep_cmd) {
    if (*sweep_seed_opt) sweep.seed = sweep_seed;
    if (*sweep_out_opt) sweep.out = sweep_out;
    return enhdc::cmd_sweep(sweep, std::cout, std::cerr);
  }
  return enhdc::cmd_size(width, dim, classes, members, std::cout, std::cerr);
}
