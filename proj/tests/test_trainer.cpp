#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "seqmtl/data/embeddings.hpp"
#include "seqmtl/data/synthetic.hpp"
#include "seqmtl/model/checkpoint.hpp"
#include "seqmtl/trainer/schedule.hpp"
#include "seqmtl/eval/selection.hpp"
#include "seqmtl/trainer/search.hpp"
#include "seqmtl/trainer/trainer.hpp"
#include "support.hpp"

using namespace seqmtl;

namespace {

std::vector<Document> take(const std::vector<Document>& docs, std::size_t& next, std::size_t tokens) {
  std::vector<Document> out;
  std::size_t n = 0;
  while (n < tokens && next < docs.size()) {
    n += docs[next].token_count();
    out.push_back(docs[next++]);
  }
  return out;
}

// A small, easy corpus split into train/dev/test by whole documents.
struct Fixture {
  Dataset data;
  Dataset aux;
  MainTask main;
  EmbeddingTable table{8};

  explicit Fixture(std::size_t train_tokens = 300, std::uint64_t seed = 3) {
    SyntheticSpec s;
    s.id = "main";
    s.min_tokens = train_tokens + 600;
    s.seed = seed;
    s.cues_per_type = 3;
    s.fillers = 30;
    s.component_rate = 0.2;
    data = generate_synthetic(s);
    SyntheticSpec a = s;
    a.id = "aux";
    a.types = {"major", "minor"};
    a.min_tokens = 600;
    a.seed = seed + 100;
    aux = generate_synthetic(a);
    std::size_t next = 0;
    main.id = "main";
    main.tags = data.tagset;
    main.k = train_tokens;
    main.train = take(data.documents, next, train_tokens);
    main.dev = take(data.documents, next, 300);
    main.test = take(data.documents, next, 300);
    auto vocab = collect_vocab(data);
    const auto more = collect_vocab(aux);
    vocab.insert(more.begin(), more.end());
    table = EmbeddingTable::random(vocab, 8, 5);
  }
};

TrainPlan plan(TrainMode mode, std::size_t epochs = 3, std::uint64_t seed = 1) {
  TrainPlan p;
  p.mode = mode;
  p.main = "main";
  p.batch_size = 8;
  p.max_epochs = epochs;
  p.patience = epochs;
  p.seed = seed;
  return p;
}

ModelConfig small_config(std::uint64_t seed = 1) {
  ModelConfig c;
  c.layers = {6};
  c.input_dropout = 0.1;
  c.recurrent_dropout = 0.1;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Schedule, CountsPerTask) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const auto s = epoch_schedule(7, {50, 3}, rng);
    ASSERT_EQ(s.size(), 21u);
    std::map<std::size_t, std::size_t> per_task;
    std::set<std::size_t> main_batches;
    for (const auto& e : s) {
      ++per_task[e.task];
      if (e.task == 0) main_batches.insert(e.batch);
      if (e.task == 1) ASSERT_LT(e.batch, 50u);
      if (e.task == 2) ASSERT_LT(e.batch, 3u);
    }
    for (std::size_t t = 0; t < 3; ++t) ASSERT_EQ(per_task[t], 7u);
    ASSERT_EQ(main_batches.size(), 7u);
  }
}

TEST(Schedule, NoAuxiliaryTasksGivesMainBatchesOnly) {
  Rng rng(1);
  const auto s = epoch_schedule(5, {}, rng);
  ASSERT_EQ(s.size(), 5u);
  std::set<std::size_t> seen;
  for (const auto& e : s) {
    EXPECT_EQ(e.task, 0u);
    seen.insert(e.batch);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(Schedule, DeterministicAndInterleaved) {
  Rng a(9), b(9);
  const auto sa = epoch_schedule(10, {4, 4}, a);
  EXPECT_EQ(sa, epoch_schedule(10, {4, 4}, b));
  // Shuffled: across seeds, the main task does not always come first.
  std::size_t main_first = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r(seed);
    const auto s = epoch_schedule(10, {4}, r);
    main_first += std::all_of(s.begin(), s.begin() + 10, [](const auto& e) { return e.task == 0; });
  }
  EXPECT_LT(main_first, 5u);
}

TEST(Schedule, EmptyPoolsAreRejected) {
  Rng rng(1);
  EXPECT_THROW(epoch_schedule(0, {3}, rng), Error);
  EXPECT_THROW(epoch_schedule(3, {3, 0}, rng), Error);
}

TEST(TrainStep, AuxStepLeavesMainHeadUntouched) {
  Fixture f;
  TaskModel model(small_config(), f.table.dim());
  model.add_task("main", f.data.tagset);
  model.add_task("aux", f.aux.tagset);
  std::vector<Matrix> main_before;
  for (auto* p : model.head_parameters("main")) main_before.push_back(p->value);
  std::vector<Matrix> trunk_before;
  for (auto* p : model.trunk_parameters()) trunk_before.push_back(p->value);
  Nadam opt;
  Rng rng(2);
  const auto batches = make_batches(f.aux.documents, 4, rng);
  train_step(model, opt, "aux", batches.at(0), f.table, rng, 5.0);
  const auto main_after = model.head_parameters("main");
  for (std::size_t i = 0; i < main_after.size(); ++i) EXPECT_EQ(main_after[i]->value, main_before[i]) << main_after[i]->name;
  bool changed = false;
  const auto trunk = model.trunk_parameters();
  for (std::size_t i = 0; i < trunk.size(); ++i) changed |= !(trunk[i]->value == trunk_before[i]);
  EXPECT_TRUE(changed);
}

TEST(Train, StlSmokeRun) {
  Fixture f;
  const RunRecord r = train(plan(TrainMode::stl), small_config(), f.main, {}, f.table);
  ASSERT_TRUE(r.completed) << r.failure;
  EXPECT_GE(r.dev_score, 0.0);
  EXPECT_LE(r.dev_score, 1.0);
  EXPECT_GE(r.test_score, 0.0);
  EXPECT_LE(r.test_score, 1.0);
  EXPECT_EQ(r.per_label_f1.size(), f.data.tagset.size());
  EXPECT_GE(r.epochs_trained, 1u);
  EXPECT_LE(r.epochs_trained, 3u);
  EXPECT_GE(r.best_epoch, 1u);
  EXPECT_LE(r.best_epoch, r.epochs_trained);
  EXPECT_EQ(r.dataset, "main");
}

TEST(Train, SameSeedSameRecord) {
  Fixture f;
  const RunRecord a = train(plan(TrainMode::mtl), small_config(), f.main, {&f.aux}, f.table);
  const RunRecord b = train(plan(TrainMode::mtl), small_config(), f.main, {&f.aux}, f.table);
  EXPECT_EQ(a.dev_score, b.dev_score);
  EXPECT_EQ(a.test_score, b.test_score);
  EXPECT_EQ(a.per_label_f1, b.per_label_f1);
  EXPECT_EQ(a.best_epoch, b.best_epoch);
}

TEST(Train, UnionWithoutAuxiliariesEqualsStl) {
  Fixture f;
  const RunRecord s = train(plan(TrainMode::stl, 4), small_config(), f.main, {}, f.table);
  const RunRecord u = train(plan(TrainMode::union_baseline, 4), small_config(), f.main, {}, f.table);
  EXPECT_EQ(s.dev_score, u.dev_score);
  EXPECT_EQ(s.test_score, u.test_score);
  EXPECT_EQ(s.best_epoch, u.best_epoch);
}

TEST(Train, UnionWithAuxiliaryUsesPooledLabels) {
  Fixture f;
  const RunRecord u = train(plan(TrainMode::union_baseline, 2), small_config(), f.main, {&f.aux}, f.table);
  ASSERT_TRUE(u.completed);
  // Scored on the main tag set only.
  EXPECT_EQ(u.per_label_f1.size(), f.data.tagset.size());
}

TEST(Train, MtlWithCopyOfMainTracksStl) {
  // A duplicated task adds no conflicting signal; both settings should land
  // close to each other once trained to convergence.
  Fixture f(600, 21);
  Dataset copy{"copy", f.data.tagset, f.main.train, 0};
  double stl = 0.0, mtl = 0.0;
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    auto p = plan(TrainMode::stl, 40, seed);
    p.patience = 8;
    stl += train(p, small_config(seed), f.main, {}, f.table).test_score / 2.0;
    p.mode = TrainMode::mtl;
    mtl += train(p, small_config(seed), f.main, {&copy}, f.table).test_score / 2.0;
  }
  EXPECT_NEAR(mtl, stl, 0.05) << "stl " << stl << " mtl " << mtl;
}

TEST(Train, TestScoreComesFromBestDevCheckpoint) {
  Fixture f;
  testing_support::TempDir dir("best");
  std::vector<double> devs;
  TrainOptions opts;
  opts.checkpoint = dir.path() / "m.ckpt";
  opts.on_epoch = [&](std::size_t, double, double dev) { devs.push_back(dev); };
  auto p = plan(TrainMode::stl, 8);
  p.nadam.learning_rate = 0.02;
  const RunRecord r = train(p, small_config(), f.main, {}, f.table, opts);
  ASSERT_TRUE(r.completed);
  ASSERT_EQ(devs.size(), r.epochs_trained);
  const auto best = std::max_element(devs.begin(), devs.end());
  EXPECT_EQ(r.dev_score, *best);
  EXPECT_EQ(r.best_epoch, static_cast<std::size_t>(best - devs.begin()) + 1);

  TaskModel restored = load_checkpoint(*opts.checkpoint);
  EXPECT_EQ(score(decode(restored, "main", f.main.tags, f.main.dev, f.table), f.main.tags), r.dev_score);
  EXPECT_EQ(score(decode(restored, "main", f.main.tags, f.main.test, f.table), f.main.tags), r.test_score);
}

TEST(Train, PatienceStopsEarly) {
  Fixture f;
  auto p = plan(TrainMode::stl, 50);
  p.patience = 1;
  p.nadam.learning_rate = 1e-9;  // dev cannot improve after the first epoch
  const RunRecord r = train(p, small_config(), f.main, {}, f.table);
  EXPECT_EQ(r.epochs_trained, 2u);
  EXPECT_EQ(r.best_epoch, 1u);
}

TEST(Train, DivergenceMarksRunFailed) {
  Fixture f;
  // Inputs so large that the first pre-activations overflow.
  EmbeddingTable huge(8);
  huge.set_unknown(std::vector<double>(8, 1e308));
  const RunRecord r = train(plan(TrainMode::stl, 3), small_config(), f.main, {}, huge);
  EXPECT_FALSE(r.completed);
  EXPECT_FALSE(r.failure.empty());
  EXPECT_THROW(select_top_k({r}, 1), Error);
}

TEST(Train, InvalidPlansAreConfigErrors) {
  Fixture f;
  try {
    train(plan(TrainMode::mtl), small_config(), f.main, {}, f.table);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
  EXPECT_THROW(train(plan(TrainMode::stl, 0), small_config(), f.main, {}, f.table), Error);
  Dataset same{"main", f.data.tagset, f.main.train, 0};
  EXPECT_THROW(train(plan(TrainMode::mtl), small_config(), f.main, {&same}, f.table), Error);
}

TEST(Search, PlanIsDeterministicWithDistinctSeeds) {
  SearchSpace space;
  const auto a = plan_search(space, plan(TrainMode::stl), 4, 77);
  const auto b = plan_search(space, plan(TrainMode::stl), 4, 77);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a[i].run_id, i);
    EXPECT_EQ(a[i].config, b[i].config);
    EXPECT_EQ(a[i].plan.seed, b[i].plan.seed);
    seeds.insert(a[i].plan.seed);
  }
  EXPECT_EQ(seeds.size(), 4u);
  EXPECT_THROW(plan_search(space, plan(TrainMode::stl), 0, 1), Error);
}

TEST(Search, ParallelRunsMatchSequential) {
  Fixture f;
  SearchSpace space;
  space.layouts = {{4}, {5}};
  auto specs = plan_search(space, plan(TrainMode::stl, 2), 4, 5);
  RunFn run = [&](const RunSpec& s) { return train(s.plan, s.config, f.main, {}, f.table); };
  std::size_t collected = 0;
  const auto seq = run_search(specs, run, [&](const RunRecord&) { ++collected; }, 1);
  const auto par = run_search(specs, run, {}, 3);
  EXPECT_EQ(collected, 4u);
  ASSERT_EQ(par.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(seq[i].run_id, i);
    EXPECT_EQ(par[i].run_id, i);
    EXPECT_EQ(seq[i].test_score, par[i].test_score);
    EXPECT_EQ(seq[i].dev_score, par[i].dev_score);
  }
}

TEST(Search, FailuresDoNotAbortTheSearch) {
  SearchSpace space;
  const auto specs = plan_search(space, plan(TrainMode::stl), 3, 1);
  RunFn run = [](const RunSpec& s) -> RunRecord {
    if (s.run_id == 1) throw std::runtime_error("boom");
    RunRecord r;
    r.completed = s.run_id != 2;
    return r;
  };
  const auto recs = run_search(specs, run);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_FALSE(recs[1].completed);
  EXPECT_EQ(recs[1].failure, "boom");
  EXPECT_EQ(usable(recs).size(), 1u);
  RunFn all_fail = [](const RunSpec&) -> RunRecord { throw std::runtime_error("x"); };
  EXPECT_TRUE(usable(run_search(specs, all_fail)).empty());
}

TEST(RunRecord, JsonAndCsvRoundTrip) {
  RunRecord r;
  r.run_id = 12;
  r.dataset = "essays";
  r.k = 6000;
  r.config.layers = {100, 100};
  r.config.input_dropout = 0.3141592653589793;
  r.config.embedding = "komninos";
  r.config.seed = 99;
  r.plan = plan(TrainMode::mtl, 50, 1234567890123ULL);
  r.plan.aux = {"a", "b"};
  r.completed = true;
  r.dev_score = 0.123456789012345;
  r.test_score = 2.0 / 3.0;
  r.per_label_f1 = {{"O", 0.9}, {"B-claim", 0.25}};
  r.epochs_trained = 17;
  r.best_epoch = 11;
  r.invalid_o_to_i = 4;
  r.checkpoint = "out/x.ckpt";
  r.wall_seconds = 1.5;

  const RunRecord j = nlohmann::json(r).get<RunRecord>();
  EXPECT_EQ(nlohmann::json(j), nlohmann::json(r));

  const RunRecord c = parse_results_row(results_row(r));
  EXPECT_EQ(c.run_id, r.run_id);
  EXPECT_EQ(c.dataset, r.dataset);
  EXPECT_EQ(c.k, r.k);
  EXPECT_EQ(c.plan.mode, r.plan.mode);
  EXPECT_EQ(c.plan.seed, r.plan.seed);
  EXPECT_EQ(c.config.layers, r.config.layers);
  EXPECT_EQ(c.config.input_dropout, r.config.input_dropout);
  EXPECT_EQ(c.dev_score, r.dev_score);
  EXPECT_EQ(c.test_score, r.test_score);
  EXPECT_EQ(c.completed, r.completed);
  EXPECT_EQ(c.checkpoint, r.checkpoint);
  EXPECT_THROW(parse_results_row("1,2,3"), Error);
}
