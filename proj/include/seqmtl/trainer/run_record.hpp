#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqmtl/model/config.hpp"
#include "seqmtl/optim/nadam.hpp"

namespace seqmtl {

enum class TrainMode { stl, mtl, union_baseline };

inline std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::stl: return "stl";
    case TrainMode::mtl: return "mtl";
    case TrainMode::union_baseline: return "union";
  }
  return "stl";
}

inline TrainMode parse_mode(const std::string& s) {
  if (s == "stl") return TrainMode::stl;
  if (s == "mtl") return TrainMode::mtl;
  if (s == "union" || s == "bl") return TrainMode::union_baseline;
  throw Error(ErrorKind::config, "unknown mode '" + s + "' (expected stl, mtl or union)");
}

struct TrainPlan {
  TrainMode mode = TrainMode::stl;
  std::string main;
  std::vector<std::string> aux;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  NadamOptions nadam;
};

inline void to_json(nlohmann::json& j, const TrainPlan& p) {
  j = nlohmann::json{{"mode", to_string(p.mode)},
                     {"main", p.main},
                     {"aux", p.aux},
                     {"batch_size", p.batch_size},
                     {"max_epochs", p.max_epochs},
                     {"patience", p.patience},
                     {"seed", p.seed},
                     {"clip_norm", p.clip_norm},
                     {"nadam",
                      {{"learning_rate", p.nadam.learning_rate},
                       {"beta1", p.nadam.beta1},
                       {"beta2", p.nadam.beta2},
                       {"epsilon", p.nadam.epsilon},
                       {"schedule_decay", p.nadam.schedule_decay}}}};
}

inline void from_json(const nlohmann::json& j, TrainPlan& p) {
  p.mode = parse_mode(j.at("mode").get<std::string>());
  j.at("main").get_to(p.main);
  j.at("aux").get_to(p.aux);
  j.at("batch_size").get_to(p.batch_size);
  j.at("max_epochs").get_to(p.max_epochs);
  j.at("patience").get_to(p.patience);
  j.at("seed").get_to(p.seed);
  j.at("clip_norm").get_to(p.clip_norm);
  const auto& n = j.at("nadam");
  n.at("learning_rate").get_to(p.nadam.learning_rate);
  n.at("beta1").get_to(p.nadam.beta1);
  n.at("beta2").get_to(p.nadam.beta2);
  n.at("epsilon").get_to(p.nadam.epsilon);
  n.at("schedule_decay").get_to(p.nadam.schedule_decay);
}

/// One training run; the unit of top-k selection and significance testing.
struct RunRecord {
  std::size_t run_id = 0;
  std::string dataset;
  std::size_t k = 0;
  ModelConfig config;
  TrainPlan plan;
  bool completed = false;
  std::string failure;
  double dev_score = 0.0;
  double test_score = 0.0;
  std::map<std::string, double> per_label_f1;
  std::size_t epochs_trained = 0;
  std::size_t best_epoch = 0;
  std::size_t invalid_o_to_i = 0;
  std::size_t invalid_initial_i = 0;
  std::size_t invalid_type_mismatch = 0;
  std::string checkpoint;
  double wall_seconds = 0.0;
};

inline void to_json(nlohmann::json& j, const RunRecord& r) {
  j = nlohmann::json{{"run_id", r.run_id},
                     {"dataset", r.dataset},
                     {"k", r.k},
                     {"config", r.config},
                     {"plan", r.plan},
                     {"completed", r.completed},
                     {"failure", r.failure},
                     {"dev_score", r.dev_score},
                     {"test_score", r.test_score},
                     {"per_label_f1", r.per_label_f1},
                     {"epochs_trained", r.epochs_trained},
                     {"best_epoch", r.best_epoch},
                     {"invalid_bio",
                      {{"o_to_i", r.invalid_o_to_i},
                       {"initial_i", r.invalid_initial_i},
                       {"type_mismatch", r.invalid_type_mismatch}}},
                     {"checkpoint", r.checkpoint},
                     {"wall_seconds", r.wall_seconds}};
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
  j.at("run_id").get_to(r.run_id);
  j.at("dataset").get_to(r.dataset);
  j.at("k").get_to(r.k);
  j.at("config").get_to(r.config);
  j.at("plan").get_to(r.plan);
  j.at("completed").get_to(r.completed);
  j.at("failure").get_to(r.failure);
  j.at("dev_score").get_to(r.dev_score);
  j.at("test_score").get_to(r.test_score);
  j.at("per_label_f1").get_to(r.per_label_f1);
  j.at("epochs_trained").get_to(r.epochs_trained);
  j.at("best_epoch").get_to(r.best_epoch);
  const auto& ib = j.at("invalid_bio");
  ib.at("o_to_i").get_to(r.invalid_o_to_i);
  ib.at("initial_i").get_to(r.invalid_initial_i);
  ib.at("type_mismatch").get_to(r.invalid_type_mismatch);
  j.at("checkpoint").get_to(r.checkpoint);
  j.at("wall_seconds").get_to(r.wall_seconds);
}

// results.csv: one row per run. Scores are macro-F1 in [0, 1].

inline const char* kResultsHeader =
    "run_id,dataset,mode,k,plan_seed,model_seed,layout,input_dropout,recurrent_dropout,embedding,status,dev_f1,"
    "test_f1,epochs,best_epoch,invalid_o_to_i,checkpoint";

inline std::string results_row(const RunRecord& r) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << r.run_id << ',' << r.dataset << ',' << to_string(r.plan.mode) << ',' << r.k << ',' << r.plan.seed << ','
     << r.config.seed << ',' << r.config.layout() << ',' << num(r.config.input_dropout) << ','
     << num(r.config.recurrent_dropout) << ',' << r.config.embedding << ',' << (r.completed ? "ok" : "failed") << ','
     << num(r.dev_score) << ',' << num(r.test_score) << ',' << r.epochs_trained << ',' << r.best_epoch << ','
     << r.invalid_o_to_i << ',' << r.checkpoint;
  return os.str();
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline RunRecord parse_results_row(const std::string& line) {
  const auto f = split_csv(line);
  if (f.size() != 17) throw Error(ErrorKind::malformed_line, "results row has " + std::to_string(f.size()) + " fields");
  try {
    RunRecord r;
    r.run_id = std::stoull(f[0]);
    r.dataset = f[1];
    r.plan.mode = parse_mode(f[2]);
    r.plan.main = f[1];
    r.k = std::stoull(f[3]);
    r.plan.seed = std::stoull(f[4]);
    r.config.seed = std::stoull(f[5]);
    r.config.layers.clear();
    std::stringstream ls(f[6]);
    for (std::string part; std::getline(ls, part, 'x');) r.config.layers.push_back(std::stoull(part));
    r.config.input_dropout = std::stod(f[7]);
    r.config.recurrent_dropout = std::stod(f[8]);
    r.config.embedding = f[9];
    r.completed = f[10] == "ok";
    r.dev_score = std::stod(f[11]);
    r.test_score = std::stod(f[12]);
    r.epochs_trained = std::stoull(f[13]);
    r.best_epoch = std::stoull(f[14]);
    r.invalid_o_to_i = std::stoull(f[15]);
    r.checkpoint = f[16];
    return r;
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::malformed_line, "unparseable results row: " + line);
  }
}

inline std::vector<RunRecord> read_results(std::istream& in) {
  std::vector<RunRecord> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      if (line.rfind("run_id,", 0) == 0) continue;
    }
    if (line.empty()) continue;
    out.push_back(parse_results_row(line));
  }
  return out;
}

}  // namespace seqmtl
