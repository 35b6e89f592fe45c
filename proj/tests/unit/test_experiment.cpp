#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "astcost/errors.hpp"
#include "astcost/report.hpp"
#include "astcost/split.hpp"
#include "astcost/sweep.hpp"
#include "astcost/synth.hpp"
#include "astcost/trainer.hpp"
#include "astcost/workloads.hpp"

namespace fs = std::filesystem;
using namespace astcost;
using namespace astcost::experiment;

namespace {

// Table 1 metadata with one single-node stand-in graph per configuration.
Dataset paper_shaped() {
  Dataset ds;
  ds.feature_dim = 1;
  ds.type_vocab_size = 1;
  ds.workloads = resnet18_workloads();
  for (const auto& w : ds.workloads) {
    for (std::size_t i = 0; i < w.config_count; ++i) {
      ds.graphs.push_back({w.id, AstGraph(1, {}, 1, {0.0}, {0}, 1.0 + static_cast<double>(i), 0)});
    }
  }
  return ds;
}

Dataset small_synth(std::uint64_t seed = 1) {
  synth::SynthConfig cfg;
  cfg.seed = seed;
  cfg.graphs_per_workload = 4;
  return synth::generate(cfg);
}

TrainOptions quick(std::size_t epochs = 3) {
  TrainOptions o;
  o.optimizer.max_epochs = epochs;
  o.batch_size = 8;
  return o;
}

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

RunResult fake_result(const std::string& spec, double fraction, std::uint64_t seed, double train, double test) {
  RunResult r;
  r.spec = spec;
  r.fraction = fraction;
  r.seed = seed;
  r.train_l1 = train;
  r.test_l1 = test;
  r.test_samples = {{1.0, 1.5}, {2.0, 1.0}};
  return r;
}

}  // namespace

TEST_CASE("fractions and subsample counts") {
  CHECK(paper_fractions() == std::vector<double>{0.05, 0.10, 0.15, 0.20, 0.25, 0.50, 0.75, 1.0});
  CHECK(subsample_count(0.05, 100) == 5);
  CHECK(subsample_count(0.1, 30) == 3);  // 0.1 * 30 is 3.0000000000000004
  CHECK(subsample_count(0.15, 20) == 3);
  CHECK(subsample_count(0.05, 2666) == 134);
  CHECK(subsample_count(1.0, 7) == 7);
  CHECK(subsample_count(0.01, 1) == 1);
}

TEST_CASE("split counts on the paper's workload table") {
  const Dataset ds = paper_shaped();
  REQUIRE(ds.graphs.size() == 6852);
  SplitPlan plan;
  const Split s = make_split(ds, plan);
  CHECK(s.test.size() == 784 + 672 + 768 + 576 + 360 + 360);
  CHECK(s.test.size() == 3520);
  CHECK(s.train.size() + s.validation.size() == 3332);
  CHECK(s.validation.size() == 666);  // floor(0.2 * 3332)
  CHECK(s.unused.empty());

  std::set<std::string> test_ids;
  for (std::size_t i : s.test) test_ids.insert(ds.graphs[i].workload_id);
  CHECK(test_ids == std::set<std::string>{"C3", "C5", "C6", "C7", "C10", "C11"});
  CHECK(std::is_sorted(s.test.begin(), s.test.end()));
}

TEST_CASE("split partitions the dataset for every fraction") {
  const Dataset ds = paper_shaped();
  Split first;
  for (double f : paper_fractions()) {
    for (std::uint64_t seed : {0u, 1u}) {
      SplitPlan plan;
      plan.fraction = f;
      plan.seed = seed;
      const Split s = make_split(ds, plan);
      CHECK(s.train.size() == subsample_count(f, 2666));
      CHECK(s.validation.size() == 666);
      std::vector<std::size_t> all;
      for (const auto* part : {&s.train, &s.validation, &s.test, &s.unused}) all.insert(all.end(), part->begin(), part->end());
      std::sort(all.begin(), all.end());
      CHECK(all.size() == ds.graphs.size());
      CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
      if (first.test.empty()) first = s;
      CHECK(s.test == first.test);
    }
  }
}

TEST_CASE("split determinism and seed dependence") {
  const Dataset ds = paper_shaped();
  SplitPlan plan;
  plan.seed = 4;
  const Split a = make_split(ds, plan);
  const Split b = make_split(ds, plan);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  plan.seed = 5;
  const Split c = make_split(ds, plan);
  CHECK(as_set(a.validation) != as_set(c.validation));

  // Smaller fractions keep a prefix of the same shuffled training list.
  plan.seed = 4;
  plan.fraction = 0.25;
  const Split d = make_split(ds, plan);
  CHECK(std::equal(d.train.begin(), d.train.end(), a.train.begin()));
}

TEST_CASE("split errors") {
  const Dataset ds = paper_shaped();
  SplitPlan plan;
  plan.train_workloads = {"C1", "C99"};
  CHECK_THROWS_AS(make_split(ds, plan), DataError);
  plan = {};
  plan.validation_fraction = 0.0;
  CHECK_THROWS_AS(make_split(ds, plan), std::invalid_argument);
  plan.validation_fraction = 1.0;
  CHECK_THROWS_AS(make_split(ds, plan), std::invalid_argument);
  plan = {};
  plan.fraction = 0.0;
  CHECK_THROWS_AS(make_split(ds, plan), std::invalid_argument);
  plan.fraction = 1.5;
  CHECK_THROWS_AS(make_split(ds, plan), std::invalid_argument);

  Dataset tiny;
  tiny.workloads.push_back({.id = "A"});
  tiny.workloads.push_back({.id = "B"});
  tiny.graphs.push_back({"B", AstGraph(1, {}, 1, {0.0}, {0}, 1.0, 0)});
  plan = {};
  plan.train_workloads = {"A"};
  CHECK_THROWS_AS(make_split(tiny, plan), DataError);
}

TEST_CASE("run stems and cell seeds") {
  CHECK(run_stem("GCN1", 0.2, 1) == "GCN1_0.2_1");
  CHECK(run_stem("MLP3", 1.0, 0) == "MLP3_1_0");
  CHECK(run_stem("Curve", 0.05, 2) == "Curve_0.05_2");
  std::set<std::uint64_t> seeds;
  for (const auto& spec : models::ModelSpec::labels()) {
    for (double f : paper_fractions()) {
      for (std::uint64_t s : {0u, 1u, 2u}) seeds.insert(cell_seed(s, spec, f));
    }
  }
  CHECK(seeds.size() == 168);
}

TEST_CASE("train_model contract") {
  const Dataset ds = small_synth();
  SplitPlan plan;
  const Split split = make_split(ds, plan);
  const auto spec = models::ModelSpec::from_label("GCN1");
  const TrainOutcome a = train_model(spec, ds, split, quick(4), 1, 1.0);
  const TrainOutcome b = train_model(spec, ds, split, quick(4), 1, 1.0);
  CHECK(a.result == b.result);
  CHECK(a.result.epochs_run == 4);
  CHECK(a.result.val_history.size() == 4);
  CHECK(a.result.best_epoch >= 1);
  CHECK(a.result.best_epoch <= 4);
  CHECK(a.result.val_history[a.result.best_epoch - 1] ==
        *std::min_element(a.result.val_history.begin(), a.result.val_history.end()));
  CHECK(a.result.train_count == split.train.size());
  CHECK(a.result.test_count == split.test.size());
  CHECK(a.result.test_samples.size() == split.test.size());
  CHECK(a.result.spec == "GCN1");
  // Restored weights are the ones evaluated.
  CHECK(evaluate_l1(a.model, ds, split.test) == a.result.test_l1);
  CHECK(evaluate_l1(a.model, ds, split.validation) == a.result.val_l1);
  const auto preds = predict_indices(a.model, ds, split.test);
  for (std::size_t i = 0; i < preds.size(); ++i) CHECK(a.result.test_samples[i].prediction == preds[i]);

  const TrainOutcome c = train_model(spec, ds, split, quick(4), 2, 1.0);
  CHECK_FALSE(c.result == a.result);
}

TEST_CASE("train_model learns a constant target") {
  synth::SynthConfig cfg;
  cfg.seed = 3;
  cfg.graphs_per_workload = 16;
  Dataset ds = synth::generate(cfg);
  for (auto& lg : ds.graphs) lg.graph = lg.graph.with_runtime(2.5);
  const Split split = make_split(ds, {});
  TrainOptions o;
  o.batch_size = 8;
  for (const char* label : {"MLP1", "GCN1", "Curve"}) {
    const auto spec = models::ModelSpec::from_label(label);
    const models::Surrogate untrained(spec, {ds.feature_dim, ds.type_vocab_size, 20}, cell_seed(0, label, 1.0));
    const auto r = train_model(spec, ds, split, o, 0, 1.0).result;
    // Unseen workloads carry unseen feature rows, so the fit is close but not exact.
    CHECK_MESSAGE(r.test_l1 < 0.1 * 2.5, label);
    CHECK_MESSAGE(r.test_l1 < 0.2 * evaluate_l1(untrained, ds, split.test), label);
    CHECK(r.epochs_run <= 200);
  }
}

TEST_CASE("train_model with log targets and an empty validation split") {
  const Dataset ds = small_synth(4);
  Split split = make_split(ds, {});
  split.validation.clear();
  TrainOptions o = quick(3);
  o.log_target = true;
  const auto r = train_model(models::ModelSpec::from_label("MLP1"), ds, split, o, 0, 1.0).result;
  CHECK(r.val_count == 0);
  CHECK(r.val_l1 == 0.0);
  CHECK(r.val_history.size() == 3);
  for (const auto& s : r.test_samples) CHECK(s.prediction > 0.0);
}

TEST_CASE("train_model failures") {
  const Dataset ds = small_synth();
  Split split = make_split(ds, {});
  TrainOptions o = quick(3);
  o.optimizer.learning_rate = 1e300;
  CHECK_THROWS_WITH_AS(train_model(models::ModelSpec::from_label("MLP1"), ds, split, o, 0, 1.0),
                       doctest::Contains("MLP1"), DivergenceError);
  Split empty = split;
  empty.train.clear();
  CHECK_THROWS_AS(train_model(models::ModelSpec::from_label("MLP1"), ds, empty, quick(), 0, 1.0), DataError);
}

TEST_CASE("run results round-trip") {
  RunResult r = fake_result("GCN2", 0.15, 2, 0.1, 0.30000000000000004);
  r.val_history = {1.0 / 3.0, 0.25};
  r.epochs_run = 2;
  r.best_epoch = 2;
  r.train_count = 10;
  const fs::path p = fs::temp_directory_path() / "astcost_test_run.json";
  save_run_result(p, r);
  CHECK(load_run_result(p) == r);
  fs::remove(p);
  CHECK_THROWS_AS(load_run_result(p), DataError);
}

TEST_CASE("sweep") {
  const Dataset ds = small_synth();
  SweepConfig cfg;
  cfg.specs = {"MLP1", "GCN1"};
  cfg.fractions = {0.5, 1.0};
  cfg.seeds = {0, 1};
  cfg.options = quick(2);
  std::atomic<int> callbacks{0};
  cfg.on_result = [&](const RunResult&) { ++callbacks; };
  const auto serial = sweep(ds, cfg);
  REQUIRE(serial.size() == 8);
  CHECK(callbacks == 8);
  CHECK(serial[0].spec == "MLP1");
  CHECK(serial[0].fraction == 0.5);
  CHECK(serial[1].seed == 1);
  CHECK(serial[7].spec == "GCN1");
  CHECK(serial[7].fraction == 1.0);

  cfg.jobs = 3;
  cfg.on_result = nullptr;
  CHECK(sweep(ds, cfg) == serial);

  const TrainOutcome direct = run_cell(ds, cfg, "GCN1", 0.5, 1);
  CHECK(direct.result == serial[5]);
  SplitPlan plan;
  plan.fraction = 0.5;
  plan.seed = 1;
  CHECK(train_model(models::ModelSpec::from_label("GCN1"), ds, make_split(ds, plan), cfg.options, 1, 0.5).result ==
        serial[5]);

  cfg.specs = {"MLP1", "Nope"};
  CHECK_THROWS_AS(sweep(ds, cfg), std::invalid_argument);
}

TEST_CASE("sweep failures name the cell") {
  const Dataset ds = small_synth();
  SweepConfig cfg;
  cfg.specs = {"MLP1"};
  cfg.fractions = {1.0};
  cfg.seeds = {2};
  cfg.options = quick(2);
  cfg.options.optimizer.learning_rate = 1e300;
  CHECK_THROWS_WITH(sweep(ds, cfg), doctest::Contains("seed 2"));
}

TEST_CASE("mean and standard error") {
  const std::vector<double> v = {2.0, 2.5, 3.0};
  const MeanStderr m = mean_stderr(v);
  CHECK(m.mean == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(m.std_error == doctest::Approx(0.5 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(m.std_error == doctest::Approx(0.2887).epsilon(1e-3));
  const std::vector<double> same = {1.7, 1.7, 1.7};
  CHECK(mean_stderr(same).std_error == 0.0);
  const std::vector<double> one = {4.0};
  CHECK(mean_stderr(one).mean == 4.0);
  CHECK(mean_stderr(one).std_error == 0.0);
}

TEST_CASE("summaries") {
  std::vector<RunResult> results;
  for (std::uint64_t s = 0; s < 3; ++s) {
    results.push_back(fake_result("GCN1", 1.0, s, 1.0, 2.0 + 0.5 * static_cast<double>(s)));
    results.push_back(fake_result("MLP1", 1.0, s, 1.5, 3.0));
    results.push_back(fake_result("MLP1", 0.05, s, 0.5, 4.0));
  }
  const auto rows = summarize(results);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].fraction == 0.05);
  CHECK(rows[1].model == "MLP1");
  CHECK(rows[2].model == "GCN1");
  CHECK(rows[2].runs == 3);
  CHECK(rows[2].test.mean == doctest::Approx(2.5));
  CHECK(rows[2].test.std_error == doctest::Approx(0.5 / std::sqrt(3.0)));

  std::reverse(results.begin(), results.end());
  const auto again = summarize(results);
  CHECK(summary_csv(again) == summary_csv(rows));

  const std::string csv = summary_csv(rows);
  CHECK(csv.starts_with("subset,model,train_loss,test_loss,train_stderr,test_stderr\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const std::string table = summary_table(rows);
  CHECK(table.find("2.50 ± 0.29") != std::string::npos);
  CHECK(scatter_csv(results[0]) == "target,error\n1,0.5\n2,-1\n");
}

TEST_CASE("histograms") {
  const std::vector<double> v = {0, 1, 2, 3, 4, 5, 6, 7, 8, 10};
  const auto bins = histogram(v, 5);
  REQUIRE(bins.size() == 5);
  CHECK(bins[0].lo == 0.0);
  CHECK(bins[4].hi == 10.0);
  CHECK(bins[0].count == 2);
  CHECK(bins[4].count == 2);  // 8 and the maximum 10
  std::size_t total = 0;
  for (const auto& b : bins) total += b.count;
  CHECK(total == v.size());
  const std::vector<double> flat = {3, 3, 3};
  const auto one = histogram(flat, 4);
  std::size_t flat_total = 0;
  for (const auto& b : one) flat_total += b.count;
  CHECK(flat_total == 3);
  CHECK(histogram_csv(bins).starts_with("bin_lo,bin_hi,count\n"));
  CHECK_THROWS_AS(histogram(v, 0), std::invalid_argument);
}

TEST_CASE("write_report") {
  std::vector<RunResult> results = {fake_result("MLP1", 1.0, 0, 1, 2), fake_result("GCN1", 1.0, 0, 1, 1)};
  const fs::path out = fs::temp_directory_path() / "astcost_test_report";
  fs::remove_all(out);
  write_report(out, results, {}, 7);
  CHECK(fs::exists(out / "summary.csv"));
  CHECK(fs::exists(out / "summary.txt"));
  CHECK(fs::exists(out / "scatter_MLP1_1_0.csv"));
  CHECK(fs::exists(out / "scatter_GCN1_1_0.csv"));
  std::ifstream hist(out / "target_hist.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(hist, line)) ++lines;
  CHECK(lines == 8);
  CHECK_THROWS_AS(write_report(out, std::vector<RunResult>{}), std::invalid_argument);
  fs::remove_all(out);
}
