#include <CLI11.hpp>

#include <iostream>

#include "seqmtl/cli/commands.hpp"

using namespace seqmtl;
using namespace seqmtl::cli;

namespace {

std::size_t parse_k(const std::string& s) {
  try {
    return parse_size_label(s);
  } catch (const Error&) {
    throw Error(ErrorKind::config, "invalid --k '" + s + "' (expected e.g. 1K, 6K, 21K)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BiLSTM-CRF multi-task sequence labeling experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode = "stl";
  std::string main_id;
  std::string k_label = "21K";
  std::size_t runs = 8;
  std::size_t jobs = 1;
  std::uint64_t seed = 1;
  bool no_checkpoints = false;

  auto* prepare = app.add_subcommand("prepare", "build sparsity-scenario manifests");
  prepare->add_option("--config", config_path, "experiment config (JSON)")->required();

  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--mode", mode, "stl, mtl or union")->capture_default_str();
    sub->add_option("--main", main_id, "main dataset id")->required();
    sub->add_option("--k", k_label, "training size: 1K, 6K, 12K or 21K")->capture_default_str();
    sub->add_option("--seed", seed, "search seed")->capture_default_str();
    sub->add_flag("--no-checkpoints", no_checkpoints, "do not write model checkpoints");
  };
  auto* train_cmd = app.add_subcommand("train", "train one model with a sampled configuration");
  add_run_options(train_cmd);
  auto* search = app.add_subcommand("search", "random hyperparameter search");
  add_run_options(search);
  search->add_option("--runs", runs, "number of runs")->capture_default_str();
  search->add_option("--jobs", jobs, "parallel workers")->capture_default_str()->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "results grid and learning curves");
  report->add_option("--config", config_path, "experiment config (JSON)")->required();

  SyntheticSpec synth;
  std::string out_path;
  std::string types = "claim,premise";
  auto* gen = app.add_subcommand("gen-synth", "write a synthetic BIO corpus");
  gen->add_option("--out", out_path, "output file")->required();
  gen->add_option("--tokens", synth.min_tokens, "minimum token count")->capture_default_str();
  gen->add_option("--seed", synth.seed, "generator seed")->capture_default_str();
  gen->add_option("--types", types, "comma-separated component types")->capture_default_str();
  gen->add_option("--id", synth.id, "dataset id")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prepare) {
      cmd_prepare(load_config(config_path));
    } else if (*train_cmd || *search) {
      Workspace ws(load_config(config_path));
      SearchRequest req;
      req.mode = parse_mode(mode);
      req.main = main_id;
      req.k = parse_k(k_label);
      req.seed = seed;
      req.save_checkpoints = !no_checkpoints;
      if (*train_cmd) {
        req.runs = 1;
        req.resume = false;
      } else {
        req.runs = runs;
        req.jobs = jobs;
      }
      const auto records = cmd_search(ws, req);
      if (!records.empty() && usable(records).empty()) return training_failure;
    } else if (*report) {
      const auto files = cmd_report(load_config(config_path));
      std::ifstream in(files.report);
      std::cout << in.rdbuf();
      std::cerr << "wrote " << files.report.string() << " and " << files.curves.string() << '\n';
    } else if (*gen) {
      synth.types.clear();
      std::stringstream ss(types);
      for (std::string t; std::getline(ss, t, ',');)
        if (!t.empty()) synth.types.push_back(t);
      if (synth.types.empty()) throw Error(ErrorKind::config, "--types must name at least one type");
      cmd_gen_synth(synth, out_path);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return data_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return training_failure;
  }
  return ok;
}
