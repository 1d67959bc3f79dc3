#pragma once

// Experiment lifecycle behind the seqmtl command line:
//   prepare   build and persist sparsity-scenario manifests
//   train     one run (sampled config) for a main task, mode and size
//   search    n runs, append-only results with resume
//   report    results grid and learning-curve CSV
//   gen-synth write a synthetic corpus
//
// Layout of the output directory:
//   scenarios/<dataset>/<k>.json
//   runs/<dataset>/<mode>/<k>/run_<id>.json (+ .ckpt)
//   results.csv, report.txt, curves.csv

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqmtl/data/corpus.hpp"
#include "seqmtl/data/embeddings.hpp"
#include "seqmtl/data/scenarios.hpp"
#include "seqmtl/data/synthetic.hpp"
#include "seqmtl/eval/report.hpp"
#include "seqmtl/optim/search_space.hpp"
#include "seqmtl/trainer/search.hpp"
#include "seqmtl/trainer/trainer.hpp"

namespace seqmtl::cli {

namespace fs = std::filesystem;

enum ExitCode : int { ok = 0, config_error = 2, data_error = 3, training_failure = 4 };

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::config:
      return config_error;
    case ErrorKind::io:
    case ErrorKind::malformed_line:
    case ErrorKind::unknown_tag_prefix:
    case ErrorKind::ragged_dimension:
    case ErrorKind::insufficient_coverage:
    case ErrorKind::insufficient_data:
    case ErrorKind::empty_records:
    case ErrorKind::missing_k:
      return data_error;
    default:
      return training_failure;
  }
}

struct DatasetEntry {
  std::string id;
  fs::path path;
};

struct ExperimentConfig {
  std::vector<DatasetEntry> datasets;
  std::map<std::string, fs::path> embeddings;
  std::size_t embedding_dim = 50;
  std::uint64_t scenario_seed = 1;
  fs::path output_dir = "out";
  SearchSpace space;
  ScenarioSizes sizes;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::size_t top_k = 10;
  double min_embedding_coverage = 0.3;
};

inline ExperimentConfig parse_config(const nlohmann::json& j, const fs::path& base_dir = {}) {
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  try {
    ExperimentConfig c;
    std::set<std::string> ids;
    for (const auto& d : j.at("datasets")) {
      DatasetEntry e{d.at("id").get<std::string>(), resolve(d.at("path").get<std::string>())};
      if (!ids.insert(e.id).second) throw Error(ErrorKind::config, "duplicate dataset id '" + e.id + "'");
      if (!fs::exists(e.path)) throw Error(ErrorKind::config, "dataset file not found: " + e.path.string());
      c.datasets.push_back(std::move(e));
    }
    if (j.contains("embeddings")) {
      for (const auto& [id, p] : j.at("embeddings").items()) {
        const fs::path path = resolve(p.get<std::string>());
        if (!fs::exists(path)) throw Error(ErrorKind::config, "embedding file not found: " + path.string());
        c.embeddings[id] = path;
      }
    }
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.scenario_seed = j.value("scenario_seed", c.scenario_seed);
    c.output_dir = resolve(j.value("output_dir", std::string("out")));
    if (j.contains("search_space")) j.at("search_space").get_to(c.space);
    if (j.contains("scenario_sizes")) {
      const auto& s = j.at("scenario_sizes");
      c.sizes.train = s.value("train", c.sizes.train);
      c.sizes.dev = s.value("dev", c.sizes.dev);
      c.sizes.test_min = s.value("test_min", c.sizes.test_min);
      if (s.contains("subsets")) s.at("subsets").get_to(c.sizes.subsets);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      c.batch_size = t.value("batch_size", c.batch_size);
      c.max_epochs = t.value("max_epochs", c.max_epochs);
      c.patience = t.value("patience", c.patience);
    }
    c.top_k = j.value("top_k", c.top_k);
    c.min_embedding_coverage = j.value("min_embedding_coverage", c.min_embedding_coverage);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("invalid config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

inline Dataset load_dataset(const DatasetEntry& e) {
  std::ifstream in(e.path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + e.path.string());
  try {
    return parse_corpus(in, e.id);
  } catch (const Error& err) {
    throw Error(err.kind(), "dataset '" + e.id + "': " + err.what());
  }
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file_atomic(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, p);
}

inline fs::path scenario_path(const ExperimentConfig& c, const std::string& dataset, std::size_t k) {
  return c.output_dir / "scenarios" / dataset / (size_label(k) + ".json");
}

/// Writes one manifest per training size for every dataset. Returns the paths.
inline std::vector<fs::path> cmd_prepare(const ExperimentConfig& c, std::ostream& log = std::cerr) {
  std::vector<fs::path> written;
  for (const auto& entry : c.datasets) {
    const Dataset ds = load_dataset(entry);
    if (ds.repaired_tags) log << entry.id << ": normalized " << ds.repaired_tags << " invalid I-tags to B\n";
    ScenarioSet set;
    try {
      set = build_scenarios(ds, c.scenario_seed, c.sizes);
    } catch (const Error& e) {
      throw Error(e.kind(), "dataset '" + entry.id + "': " + e.what());
    }
    const std::uint64_t hash = dataset_hash(ds);
    for (const auto& [k, sc] : set) {
      const fs::path p = scenario_path(c, entry.id, k);
      write_file_atomic(p, scenario_manifest(sc, hash).dump(2) + "\n");
      written.push_back(p);
      log << entry.id << " " << size_label(k) << ": " << token_count(sc.train) << " train / " << token_count(sc.dev)
          << " dev / " << token_count(sc.test) << " test tokens\n";
    }
  }
  return written;
}

/// Loaded corpora and embedding tables shared by all runs of one invocation.
class Workspace {
 public:
  explicit Workspace(ExperimentConfig c) : config_(std::move(c)) {
    for (const auto& e : config_.datasets) datasets_.emplace(e.id, load_dataset(e));
  }

  const ExperimentConfig& config() const { return config_; }

  const Dataset& dataset(const std::string& id) const {
    auto it = datasets_.find(id);
    if (it == datasets_.end()) throw Error(ErrorKind::config, "unknown dataset '" + id + "'");
    return it->second;
  }

  std::vector<const Dataset*> auxes_for(const std::string& main) const {
    std::vector<const Dataset*> out;
    for (const auto& e : config_.datasets)
      if (e.id != main) out.push_back(&datasets_.at(e.id));
    return out;
  }

  /// Pretrained vectors when configured, otherwise seeded random vectors.
  const EmbeddingTable& embeddings(const std::string& id) {
    std::lock_guard lock(mu_);
    if (auto it = tables_.find(id); it != tables_.end()) return *it->second;
    std::set<std::string> vocab;
    for (const auto& [_, ds] : datasets_) {
      auto v = collect_vocab(ds);
      vocab.insert(v.begin(), v.end());
    }
    std::unique_ptr<EmbeddingTable> t;
    if (auto p = config_.embeddings.find(id); p != config_.embeddings.end()) {
      std::ifstream in(p->second);
      if (!in) throw Error(ErrorKind::io, "cannot read " + p->second.string());
      t = std::make_unique<EmbeddingTable>(load_embeddings(in, vocab, config_.min_embedding_coverage));
    } else {
      t = std::make_unique<EmbeddingTable>(EmbeddingTable::random(vocab, config_.embedding_dim, fnv1a(id)));
    }
    return *tables_.emplace(id, std::move(t)).first->second;
  }

  MainTask main_task(const std::string& id, std::size_t k, nlohmann::json* manifest_ref = nullptr) const {
    const fs::path p = scenario_path(config_, id, k);
    if (!fs::exists(p)) {
      throw Error(ErrorKind::config, "missing scenario manifest " + p.string() + " (run 'prepare' first)");
    }
    const std::string text = read_file(p);
    const auto j = nlohmann::json::parse(text);
    const Dataset& ds = dataset(id);
    if (manifest_ref) *manifest_ref = {{"path", p.string()}, {"hash", hex64(fnv1a(text))}};
    return seqmtl::main_task(ds, scenario_from_manifest(ds, j));
  }

 private:
  ExperimentConfig config_;
  std::map<std::string, Dataset> datasets_;
  std::map<std::string, std::unique_ptr<EmbeddingTable>> tables_;
  std::mutex mu_;
};

inline fs::path results_path(const ExperimentConfig& c) { return c.output_dir / "results.csv"; }

inline std::vector<RunRecord> read_results_file(const fs::path& p) {
  if (!fs::exists(p)) return {};
  std::ifstream in(p);
  return read_results(in);
}

inline void append_result(const fs::path& p, const RunRecord& r) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const bool fresh = !fs::exists(p) || fs::file_size(p) == 0;
  std::ofstream out(p, std::ios::app);
  if (!out) throw Error(ErrorKind::io, "cannot append to " + p.string());
  if (fresh) out << kResultsHeader << '\n';
  out << results_row(r) << '\n';
  out.flush();
}

struct SearchRequest {
  TrainMode mode = TrainMode::stl;
  std::string main;
  std::size_t k = 0;
  std::size_t runs = 8;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  bool save_checkpoints = true;
  bool resume = true;  // false: always run, numbering after the recorded runs
};

/// Runs the missing part of a search; records already in results.csv for the
/// same (main, mode, k) and run id are kept and skipped.
inline std::vector<RunRecord> cmd_search(Workspace& ws, const SearchRequest& req, std::ostream& log = std::cerr) {
  const ExperimentConfig& c = ws.config();
  const auto auxes = ws.auxes_for(req.main);
  if (req.mode == TrainMode::mtl && auxes.empty()) {
    throw Error(ErrorKind::config, "mode mtl needs auxiliary datasets; only '" + req.main + "' is configured");
  }
  nlohmann::json manifest_ref;
  const MainTask main = ws.main_task(req.main, req.k, &manifest_ref);

  TrainPlan base;
  base.mode = req.mode;
  base.main = req.main;
  for (const auto* a : auxes) base.aux.push_back(a->id);
  if (req.mode == TrainMode::stl) base.aux.clear();
  base.batch_size = c.batch_size;
  base.max_epochs = c.max_epochs;
  base.patience = c.patience;

  std::set<std::size_t> done;
  for (const auto& r : read_results_file(results_path(c))) {
    if (r.dataset == req.main && r.plan.mode == req.mode && r.k == req.k) done.insert(r.run_id);
  }
  const std::size_t offset = req.resume || done.empty() ? 0 : *done.rbegin() + 1;
  std::vector<RunSpec> todo;
  for (auto& spec : plan_search(c.space, base, req.runs, req.seed)) {
    spec.run_id += offset;
    if (!req.resume || !done.contains(spec.run_id)) todo.push_back(std::move(spec));
  }
  if (todo.size() < req.runs) log << "resuming: " << req.runs - todo.size() << " runs already recorded\n";
  for (const auto& spec : todo) ws.embeddings(spec.config.embedding);  // load once, before the workers start

  const fs::path run_dir = c.output_dir / "runs" / req.main / to_string(req.mode) / size_label(req.k);
  auto run = [&](const RunSpec& spec) {
    TrainOptions opts;
    const fs::path stem = run_dir / ("run_" + std::to_string(spec.run_id));
    if (req.save_checkpoints) opts.checkpoint = fs::path(stem.string() + ".ckpt");
    RunRecord r = train(spec.plan, spec.config, main, auxes, ws.embeddings(spec.config.embedding), opts);
    r.run_id = spec.run_id;
    nlohmann::json manifest = r;
    manifest["scenario_manifest"] = manifest_ref;
    manifest["search_seed"] = req.seed;
    write_file_atomic(fs::path(stem.string() + ".json"), manifest.dump(2) + "\n");
    return r;
  };
  auto collect = [&](const RunRecord& r) {
    append_result(results_path(c), r);
    if (r.completed) {
      log << req.main << " " << to_string(req.mode) << " " << size_label(req.k) << " run " << r.run_id
          << ": dev " << r.dev_score << " test " << r.test_score << " (" << r.epochs_trained << " epochs)\n";
    } else {
      log << req.main << " " << to_string(req.mode) << " " << size_label(req.k) << " run " << r.run_id
          << " FAILED: " << r.failure << '\n';
    }
  };
  auto records = run_search(todo, run, collect, req.jobs);
  if (!todo.empty() && usable(records).empty()) log << "warning: every run of this search failed\n";
  return records;
}

struct ReportFiles {
  fs::path report;
  fs::path curves;
  Report content;
};

inline ReportFiles cmd_report(const ExperimentConfig& c) {
  const auto records = read_results_file(results_path(c));
  if (records.empty()) throw Error(ErrorKind::empty_records, "no results in " + results_path(c).string());
  ReportFiles f;
  f.content = build_report(records, c.top_k);
  f.report = c.output_dir / "report.txt";
  f.curves = c.output_dir / "curves.csv";
  std::ostringstream rep, cur;
  write_report(rep, f.content);
  write_curves_csv(cur, f.content.curves);
  write_file_atomic(f.report, rep.str());
  write_file_atomic(f.curves, cur.str());
  return f;
}

inline void cmd_gen_synth(const SyntheticSpec& spec, const fs::path& out) {
  std::ostringstream os;
  write_corpus(os, generate_synthetic(spec));
  write_file_atomic(out, os.str());
}

}  // namespace seqmtl::cli
