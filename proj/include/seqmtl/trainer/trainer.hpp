#pragma once

// Single-task, multi-task and union-baseline training with dev-based early
// stopping. One run is strictly sequential: the step order is part of the
// semantics and is fixed by TrainPlan::seed.

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seqmtl/data/batching.hpp"
#include "seqmtl/data/scenarios.hpp"
#include "seqmtl/data/union.hpp"
#include "seqmtl/eval/metrics.hpp"
#include "seqmtl/model/checkpoint.hpp"
#include "seqmtl/optim/nadam.hpp"
#include "seqmtl/trainer/run_record.hpp"
#include "seqmtl/trainer/schedule.hpp"

namespace seqmtl {

/// Main-task data: its tag set and the three splits of one scenario.
struct MainTask {
  std::string id;
  TagSet tags;
  std::vector<Document> train;
  std::vector<Document> dev;
  std::vector<Document> test;
  std::size_t k = 0;
};

inline MainTask main_task(const Dataset& ds, const SparsityScenario& sc) {
  return {ds.id, ds.tagset, sc.train, sc.dev, sc.test, sc.k};
}

struct TrainOptions {
  std::optional<std::filesystem::path> checkpoint;
  std::function<void(std::size_t epoch, double loss, double dev)> on_epoch;
};

struct Evaluation {
  std::vector<TagSequence> gold;
  std::vector<TagSequence> pred;
};

/// Viterbi-decodes every sentence of `docs` with the head `task`; predictions
/// are mapped into the gold tag set by name (unknown types become O).
inline Evaluation decode(TaskModel& model, const std::string& task, const TagSet& target,
                         const std::vector<Document>& docs, const EmbeddingTable& table) {
  const auto head_map = tag_map(model.head(task).tags, target);
  Evaluation ev;
  for (const Sentence* s : sentences_of(docs)) {
    auto pred = model.predict(embed(*s, table), task);
    for (auto& p : pred) p = head_map[p];
    ev.gold.push_back(gold_tags(*s));
    ev.pred.push_back(std::move(pred));
  }
  return ev;
}

inline double score(const Evaluation& ev, const TagSet& tags) {
  const auto labels = all_labels(tags);
  return macro_f1(ev.gold, ev.pred, labels);
}

namespace detail {

struct TaskPool {
  std::string id;
  const std::vector<Document>* docs;
};

}  // namespace detail

/// One optimizer step on `task`: mean NLL over the batch, backward, global
/// norm clipping, Nadam. Only the trunk and that task's head are touched.
inline double train_step(TaskModel& model, Nadam& opt, const std::string& task, const Batch& batch,
                         const EmbeddingTable& table, Rng& rng, double clip_norm) {
  auto params = model.trunk_parameters();
  for (auto* p : model.head_parameters(task)) params.push_back(p);
  for (auto* p : params) p->zero_grad();
  double total = 0.0;
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const Sentence* s : batch) {
    Graph g;
    const auto masks = model.masks(rng, true);
    const auto gold = gold_tags(*s);
    const NodeRef loss = g.scale(model.loss(g, embed(*s, table), gold, task, masks), w);
    total += g.forward(loss);
    g.backward(loss);
  }
  clip_global_norm(params, clip_norm);
  opt.step(params);
  return total;
}

/// Trains one model. Auxiliary datasets are used in full (MTL) or pooled with
/// the main training split (union baseline); they are ignored for STL.
inline RunRecord train(const TrainPlan& plan, const ModelConfig& config, const MainTask& main,
                       const std::vector<const Dataset*>& auxes, const EmbeddingTable& table,
                       const TrainOptions& options = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.dataset = main.id;
  rec.k = main.k;
  rec.config = config;
  rec.plan = plan;
  if (plan.mode == TrainMode::mtl && auxes.empty()) {
    throw Error(ErrorKind::config, "multi-task training needs at least one auxiliary dataset");
  }
  if (plan.max_epochs == 0) throw Error(ErrorKind::config, "max_epochs must be at least 1");

  // The union baseline trains one head over the pooled label space.
  std::optional<Dataset> pooled;
  std::vector<detail::TaskPool> pools;
  TaskModel model(config, table.dim());
  if (plan.mode == TrainMode::union_baseline) {
    Dataset main_train{main.id, main.tags, main.train, 0};
    pooled = union_datasets(main_train, auxes);
    model.add_task(main.id, pooled->tagset);
    pools.push_back({main.id, &pooled->documents});
  } else {
    model.add_task(main.id, main.tags);
    pools.push_back({main.id, &main.train});
    if (plan.mode == TrainMode::mtl) {
      for (const Dataset* a : auxes) {
        if (a->id == main.id) throw Error(ErrorKind::config, "auxiliary task id equals main task id '" + a->id + "'");
        model.add_task(a->id, a->tagset);
        pools.push_back({a->id, &a->documents});
      }
    }
  }

  Nadam opt(plan.nadam);
  Rng rng(derive_seed(plan.seed, "train"));
  double best_dev = -1.0;
  std::vector<Matrix> best;
  std::size_t since_best = 0;
  try {
    for (std::size_t epoch = 1; epoch <= plan.max_epochs; ++epoch) {
      std::vector<std::vector<Batch>> batches;
      for (const auto& p : pools) batches.push_back(make_batches(*p.docs, plan.batch_size, rng));
      std::vector<std::size_t> aux_sizes;
      for (std::size_t i = 1; i < batches.size(); ++i) aux_sizes.push_back(batches[i].size());
      const auto schedule = epoch_schedule(batches[0].size(), aux_sizes, rng);
      double epoch_loss = 0.0;
      for (const auto& step : schedule) {
        const double l =
            train_step(model, opt, pools[step.task].id, batches[step.task][step.batch], table, rng, plan.clip_norm);
        if (!std::isfinite(l)) throw Error(ErrorKind::non_finite_loss, "loss diverged");
        epoch_loss += l;
      }
      const double dev = score(decode(model, main.id, main.tags, main.dev, table), main.tags);
      rec.epochs_trained = epoch;
      if (options.on_epoch) options.on_epoch(epoch, epoch_loss, dev);
      if (dev > best_dev) {
        best_dev = dev;
        best = model.snapshot();
        rec.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= plan.patience) {
        break;
      }
      if (best_dev >= 1.0) break;  // cannot improve further
    }
  } catch (const Error& e) {
    const auto k = e.kind();
    if (k != ErrorKind::non_finite_value && k != ErrorKind::non_finite_gradient && k != ErrorKind::non_finite_loss) {
      throw;
    }
    rec.completed = false;
    rec.failure = e.what();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
  }

  model.restore(best);
  rec.dev_score = best_dev;
  const Evaluation test = decode(model, main.id, main.tags, main.test, table);
  rec.test_score = score(test, main.tags);
  const auto labels = all_labels(main.tags);
  const auto per = per_label_scores(test.gold, test.pred, labels);
  for (std::size_t i = 0; i < labels.size(); ++i) rec.per_label_f1[main.tags.name(labels[i])] = per[i].f1;
  const InvalidBio inv = count_invalid_bio(test.pred);
  rec.invalid_o_to_i = inv.o_to_i;
  rec.invalid_initial_i = inv.initial_i;
  rec.invalid_type_mismatch = inv.type_mismatch;
  rec.completed = true;
  if (options.checkpoint) {
    save_checkpoint(*options.checkpoint, model);
    rec.checkpoint = options.checkpoint->string();
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace seqmtl
