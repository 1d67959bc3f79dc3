#pragma once

// Text checkpoint, version 1:
//
//   seqmtl-checkpoint 1
//   config <json>
//   input_dim <n>
//   tasks <n>
//   task <id> <|T|> <type>...
//   params <n>
//   param <name> <rows> <cols>
//   <rows*cols hex floats>
//
// Values are written as hexadecimal floats, so a load reproduces every bit.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "seqmtl/model/task_model.hpp"

namespace seqmtl {

inline constexpr int kCheckpointVersion = 1;

inline void write_checkpoint(std::ostream& out, TaskModel& model) {
  out << "seqmtl-checkpoint " << kCheckpointVersion << '\n';
  out << "config " << nlohmann::json(model.config()).dump() << '\n';
  out << "input_dim " << model.input_dim() << '\n';
  out << "tasks " << model.heads().size() << '\n';
  for (const auto& [id, h] : model.heads()) {
    out << "task " << id << ' ' << h.tags.types().size();
    for (const auto& t : h.tags.types()) out << ' ' << t;
    out << '\n';
  }
  const auto params = model.parameters();
  out << "params " << params.size() << '\n';
  char buf[64];
  for (const Parameter* p : params) {
    out << "param " << p->name << ' ' << p->value.rows() << ' ' << p->value.cols() << '\n';
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%a", p->value[i]);
      out << (i ? " " : "") << buf;
    }
    out << '\n';
  }
}

inline TaskModel read_checkpoint(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string w;
    if (!(in >> w) || w != word) throw Error(ErrorKind::malformed_line, "checkpoint: expected '" + word + "'");
  };
  expect("seqmtl-checkpoint");
  int version = 0;
  in >> version;
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::malformed_line, "checkpoint: unsupported version " + std::to_string(version));
  }
  expect("config");
  std::string json_line;
  std::getline(in >> std::ws, json_line);
  const ModelConfig config = nlohmann::json::parse(json_line).get<ModelConfig>();
  expect("input_dim");
  std::size_t input_dim = 0;
  in >> input_dim;
  TaskModel model(config, input_dim);
  expect("tasks");
  std::size_t n_tasks = 0;
  in >> n_tasks;
  for (std::size_t i = 0; i < n_tasks; ++i) {
    expect("task");
    std::string id;
    std::size_t n_types = 0;
    in >> id >> n_types;
    std::vector<std::string> types(n_types);
    for (auto& t : types) in >> t;
    model.add_task(id, TagSet(types));
  }
  expect("params");
  std::size_t n_params = 0;
  in >> n_params;
  auto params = model.parameters();
  if (n_params != params.size()) throw Error(ErrorKind::malformed_line, "checkpoint: parameter count mismatch");
  for (Parameter* p : params) {
    expect("param");
    std::string name;
    std::size_t rows = 0, cols = 0;
    in >> name >> rows >> cols;
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols()) {
      throw Error(ErrorKind::malformed_line, "checkpoint: unexpected parameter '" + name + "'");
    }
    std::string tok;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      if (!(in >> tok)) throw Error(ErrorKind::malformed_line, "checkpoint: truncated parameter " + name);
      char* end = nullptr;
      p->value[i] = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str()) throw Error(ErrorKind::malformed_line, "checkpoint: bad number '" + tok + "'");
    }
  }
  if (!in) throw Error(ErrorKind::malformed_line, "checkpoint: truncated");
  return model;
}

/// Writes to a sibling temporary file and renames it into place.
inline void save_checkpoint(const std::filesystem::path& path, TaskModel& model) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    write_checkpoint(out, model);
    if (!out) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline TaskModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  return read_checkpoint(in);
}

}  // namespace seqmtl
