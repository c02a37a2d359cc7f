#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "mccp/adaptive_mc.hpp"
#include "mccp/dataset.hpp"
#include "mccp/rng.hpp"

using namespace mccp;

namespace {

std::string temp_path(const std::string& name) {
  return "/tmp/mccp_test_" + name;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("load_csv: parses features and regression target") {
  const std::string path = temp_path("reg.csv");
  write_text(path,
             "a,b,target\n"
             "1.0,2.0,3.5\n"
             "4.0,5.5,-1.25\n");
  const TabularDataset ds = load_csv(path, "target", Task::Regression);
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 2);
  CHECK(ds.columns == std::vector<std::string>{"a", "b"});
  CHECK(ds.target_name == "target");
  CHECK_FALSE(ds.is_classification);
  CHECK(ds.X[1][1] == 5.5);
  CHECK(ds.y[1] == -1.25);
  CHECK(ds.dropped_rows == 0);
  std::remove(path.c_str());
}

TEST_CASE("load_csv: target column anywhere, classification labels typed") {
  const std::string path = temp_path("cls.csv");
  write_text(path,
             "label,x,y\n"
             "0,1.0,2.0\n"
             "2,3.0,4.0\n"
             "1,5.0,6.0\n");
  const TabularDataset ds = load_csv(path, "label", Task::Classification);
  CHECK(ds.size() == 3);
  CHECK(ds.dim() == 2);
  CHECK(ds.is_classification);
  CHECK(ds.labels == std::vector<int>{0, 2, 1});
  CHECK(ds.num_classes() == 3);
  // Fractional class index is dropped with a warning, not truncated.
  write_text(path,
             "label,x,y\n"
             "0,1.0,2.0\n"
             "1.5,3.0,4.0\n");
  const TabularDataset bad = load_csv(path, "label", Task::Classification);
  CHECK(bad.size() == 1);
  CHECK(bad.dropped_rows == 1);
  std::remove(path.c_str());
}

TEST_CASE("load_csv: bad cells drop the row with a located warning") {
  const std::string path = temp_path("drop.csv");
  write_text(path,
             "a,b,target\n"
             "1.0,2.0,3.0\n"
             "1.0,oops,4.0\n"
             "inf,0.0,5.0\n"
             "2.0,3.0,6.0\n");
  const TabularDataset ds = load_csv(path, "target", Task::Regression);
  CHECK(ds.size() == 2);
  CHECK(ds.dropped_rows == 2);
  REQUIRE(ds.warnings.size() == 2);
  // The warning names the row and the column of the offending cell.
  CHECK(ds.warnings[0].find("row 3") != std::string::npos);
  CHECK(ds.warnings[0].find("'b'") != std::string::npos);
  CHECK(ds.warnings[1].find("row 4") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("load_csv: error contracts") {
  const std::string path = temp_path("err.csv");
  write_text(path, "a,b,target\n1.0,2.0,3.0\n");
  CHECK_THROWS_WITH_AS(load_csv(path, "strength", Task::Regression),
                       doctest::Contains("strength"), std::runtime_error);
  CHECK_THROWS_AS(load_csv("/nonexistent/nope.csv", "t", Task::Regression),
                  std::runtime_error);
  write_text(path, "a,b,target\nx,y,z\n");
  CHECK_THROWS_WITH_AS(load_csv(path, "target", Task::Regression),
                       doctest::Contains("no usable rows"), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("write_csv then load_csv reproduces values exactly") {
  const std::string path = temp_path("roundtrip.csv");
  TabularDataset ds = synth_concrete_like(120, 99);
  write_csv(path, ds);
  const TabularDataset back = load_csv(path, ds.target_name, Task::Regression);
  REQUIRE(back.size() == ds.size());
  REQUIRE(back.dim() == ds.dim());
  CHECK(back.columns == ds.columns);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.X[i] == ds.X[i]);  // 17 significant digits: value-exact
    CHECK(back.y[i] == ds.y[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("split: frozen size arithmetic 100 -> (80, 5, 15)") {
  SplitSpec spec;
  spec.test_fraction = 0.2;
  spec.calibration_fraction_of_test = 0.25;
  spec.seed = 7;
  const SplitIndices idx = split(100, spec);
  CHECK(idx.train.size() == 80);
  CHECK(idx.calibration.size() == 5);
  CHECK(idx.validation.size() == 15);
  CHECK(idx.warnings.size() == 1);  // 5 < 10 counts as degenerate
}

TEST_CASE("split: deterministic, disjoint and exhaustive") {
  Rng rng(408);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 40 + rng.next_below(400);
    SplitSpec spec;
    spec.test_fraction = rng.next_uniform(0.15, 0.5);
    spec.calibration_fraction_of_test = rng.next_uniform(0.1, 0.6);
    spec.seed = rng.next_u64();
    const SplitIndices a = split(n, spec);
    const SplitIndices b = split(n, spec);
    CHECK(a.train == b.train);
    CHECK(a.calibration == b.calibration);
    CHECK(a.validation == b.validation);

    std::set<std::size_t> all;
    for (auto i : a.train) all.insert(i);
    for (auto i : a.calibration) all.insert(i);
    for (auto i : a.validation) all.insert(i);
    CHECK(all.size() == n);  // disjoint (no duplicates) and exhaustive
    CHECK(*all.rbegin() == n - 1);
  }
  // Different seeds give different shuffles.
  SplitSpec s1;
  s1.seed = 1;
  SplitSpec s2;
  s2.seed = 2;
  CHECK(split(200, s1).train != split(200, s2).train);
}

TEST_CASE("split: tiny calibration fraction floors at one point with warning") {
  SplitSpec spec;
  spec.test_fraction = 0.4;  // test block of 40 on n = 100
  spec.calibration_fraction_of_test = 0.02;
  const SplitIndices idx = split(100, spec);
  CHECK(idx.calibration.size() == 1);  // max(1, round(0.8))
  CHECK(idx.validation.size() == 39);
  REQUIRE(!idx.warnings.empty());
  CHECK(idx.warnings[0].find("degenerate") != std::string::npos);
}

TEST_CASE("split: invalid fractions and empty blocks throw") {
  SplitSpec bad;
  bad.test_fraction = 1.2;
  CHECK_THROWS_AS(split(100, bad), std::invalid_argument);
  SplitSpec tiny;
  tiny.test_fraction = 0.2;
  tiny.calibration_fraction_of_test = 0.25;
  CHECK_THROWS_AS(split(4, tiny), std::invalid_argument);
}

TEST_CASE("subset: picks rows in order and keeps metadata") {
  const TabularDataset ds = synth_blobs(30, 3, 2, 4.0, 5);
  const TabularDataset sub = subset(ds, {2, 0, 29});
  REQUIRE(sub.size() == 3);
  CHECK(sub.X[0] == ds.X[2]);
  CHECK(sub.X[1] == ds.X[0]);
  CHECK(sub.labels == std::vector<int>{ds.labels[2], ds.labels[0],
                                       ds.labels[29]});
  CHECK(sub.columns == ds.columns);
  CHECK(sub.is_classification);
  CHECK_THROWS_AS(subset(ds, {30}), std::out_of_range);
}

TEST_CASE("synth_blobs: determinism, balance, and separation limit") {
  const TabularDataset a = synth_blobs(300, 3, 4, 2.0, 42);
  const TabularDataset b = synth_blobs(300, 3, 4, 2.0, 42);
  CHECK(a.X == b.X);
  CHECK(a.labels == b.labels);
  CHECK(a.dim() == 4);
  int counts[3] = {0, 0, 0};
  for (int label : a.labels) counts[label]++;
  CHECK(counts[0] == 100);
  CHECK(counts[1] == 100);
  CHECK(counts[2] == 100);

  // Distant blobs: nearest-center assignment recovers almost every label.
  const TabularDataset far = synth_blobs(600, 4, 3, 50.0, 17);
  const double tau = 6.283185307179586;
  int wrong = 0;
  for (std::size_t i = 0; i < far.size(); ++i) {
    int best = -1;
    double best_d = 1e300;
    for (int c = 0; c < 4; ++c) {
      const double cx = 50.0 * std::cos(tau * c / 4.0);
      const double cy = 50.0 * std::sin(tau * c / 4.0);
      const double d = (far.X[i][0] - cx) * (far.X[i][0] - cx) +
                       (far.X[i][1] - cy) * (far.X[i][1] - cy);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best != far.labels[i]) ++wrong;
  }
  CHECK(wrong == 0);

  CHECK_THROWS_AS(synth_blobs(25, 3, 2, 1.0, 0), std::invalid_argument);
}

TEST_CASE("synth_hetero: generator matches its documented law") {
  const TabularDataset ds = synth_hetero(20000, 11);
  CHECK(ds.size() == 20000);
  CHECK(ds.dim() == 1);
  const TabularDataset again = synth_hetero(20000, 11);
  CHECK(ds.X == again.X);
  CHECK(ds.y == again.y);

  // Standardized residuals must be standard normal.
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double x = ds.X[i][0];
    CHECK(x >= -2.0);
    CHECK(x < 2.0);
    const double z = (ds.y[i] - std::sin(2.0 * x)) / (0.1 + 0.4 * std::abs(x));
    mean += z;
    sq += z * z;
  }
  mean /= double(ds.size());
  sq = sq / double(ds.size()) - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(20000.0));
  CHECK(sq == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("normal_quantile: reference values and the documented 1.645 curve") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-6));
  CHECK(normal_quantile(0.05) == doctest::Approx(-1.6448536270).epsilon(1e-6));
  CHECK(normal_quantile(0.0001) == doctest::Approx(-3.719016485).epsilon(1e-6));
  // Symmetry and monotonicity.
  Rng rng(409);
  double prev = normal_quantile(1e-6);
  for (double p = 0.01; p < 1.0; p += 0.01) {
    const double q = normal_quantile(p);
    CHECK(q > prev);
    prev = q;
    CHECK(q == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-7));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);

  // The upper quantile curve of the heteroscedastic generator.
  for (double x : {-1.7, -0.3, 0.0, 0.9, 1.9}) {
    CHECK(hetero_quantile_curve(x, 0.95) ==
          doctest::Approx(std::sin(2.0 * x) +
                          1.645 * (0.1 + 0.4 * std::abs(x)))
              .epsilon(1e-3));
  }
}

TEST_CASE("synth_concrete_like: shape, determinism, finite mixed scales") {
  const TabularDataset ds = synth_concrete_like(1030, 3);
  CHECK(ds.size() == 1030);
  CHECK(ds.dim() == 8);
  const TabularDataset again = synth_concrete_like(1030, 3);
  CHECK(ds.X == again.X);
  CHECK(ds.y == again.y);
  double ymin = 1e300, ymax = -1e300;
  for (double v : ds.y) {
    CHECK(std::isfinite(v));
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  CHECK(ymax - ymin > 10.0);  // non-degenerate target spread
  // Feature columns live on visibly different scales (age vs. coarse agg).
  double age_mean = 0.0, coarse_mean = 0.0;
  for (const auto& row : ds.X) {
    age_mean += row[7];
    coarse_mean += row[5];
  }
  CHECK(coarse_mean / age_mean > 5.0);
}

TEST_CASE("normalizer: train-fitted stats, applied unchanged to other splits") {
  TabularDataset ds;
  ds.is_classification = false;
  ds.columns = {"v"};
  ds.target_name = "t";
  ds.X = {{0.0}, {2.0}, {10.0}, {20.0}};
  ds.y = {1.0, 3.0, 100.0, 200.0};
  const std::vector<std::size_t> train = {0, 1};

  const Normalizer nz = Normalizer::fit(ds, train, true);
  CHECK(nz.feature_mean[0] == 1.0);
  CHECK(nz.feature_stddev[0] == 1.0);  // population stddev of {0,2}
  CHECK(nz.target_mean == 2.0);
  CHECK(nz.target_stddev == 1.0);

  // Validation rows are transformed with TRAIN stats: no refit.
  CHECK(nz.transform({10.0})[0] == 9.0);
  CHECK(nz.transform({20.0})[0] == 19.0);
  CHECK(nz.transform_target(100.0) == 98.0);
  CHECK(nz.inverse_target(nz.transform_target(123.456)) ==
        doctest::Approx(123.456));

  const TabularDataset scaled = nz.apply(ds);
  CHECK(scaled.X[0][0] == -1.0);
  CHECK(scaled.X[1][0] == 1.0);
  // Transformed train block is centered; the other rows are visibly not.
  CHECK(scaled.X[0][0] + scaled.X[1][0] == 0.0);
  CHECK(scaled.X[2][0] + scaled.X[3][0] > 10.0);
}

TEST_CASE("normalizer: classification labels never touched, zero-spread guard") {
  TabularDataset ds = synth_blobs(40, 2, 2, 3.0, 21);
  for (auto& row : ds.X) row[1] = 7.0;  // constant feature
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < 20; ++i) train.push_back(i);
  const Normalizer nz = Normalizer::fit(ds, train, true);
  CHECK(nz.standardize_targets == false);  // ignored on classification
  CHECK(nz.feature_stddev[1] == 1.0);      // guard against divide-by-zero
  const TabularDataset scaled = nz.apply(ds);
  CHECK(scaled.labels == ds.labels);
}

TEST_CASE("replay file: round trip is bit-exact") {
  ReplayFile replay;
  replay.dim = 3;
  replay.declared_passes = 4;
  Rng rng(410);
  for (int s = 0; s < 5; ++s) {
    std::vector<Vec> passes;
    for (int p = 0; p < 4; ++p) {
      Vec v = {rng.next_normal(), rng.next_double() * 1e-300,
               -rng.next_uniform(0.0, 1e18)};
      passes.push_back(v);
    }
    replay.records[s] = passes;
  }
  replay.records[2][1] = {0.1, 1.0 / 3.0, 5e-324};  // awkward bit patterns

  const std::string path = temp_path("replay.csv");
  write_replay(path, replay);
  const ReplayFile back = read_replay(path);
  CHECK(back.dim == 3);
  CHECK(back.declared_passes == 4);
  REQUIRE(back.records.size() == 5);
  for (const auto& [id, passes] : replay.records) {
    REQUIRE(back.records.count(id) == 1);
    const auto& got = back.records.at(id);
    REQUIRE(got.size() == passes.size());
    for (std::size_t p = 0; p < passes.size(); ++p) {
      CHECK(got[p] == passes[p]);  // bitwise: hex-float serialization
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("replay file: non-contiguous passes are rejected") {
  const std::string path = temp_path("replay_bad.csv");
  write_text(path,
             "sample_id,pass,dim0\n"
             "0,0,0x1p+0\n"
             "0,2,0x1p+1\n");
  CHECK_THROWS_WITH_AS(read_replay(path), doctest::Contains("contiguous"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("replay predictor: serves recorded passes, then reports exhaustion") {
  ReplayFile replay;
  replay.dim = 2;
  replay.declared_passes = 3;
  replay.records[7] = {{0.1, 0.9}, {0.3, 0.7}, {0.5, 0.5}};

  ReplayPredictor pred(&replay, 7);
  CHECK(pred.output_dim() == 2);
  Rng rng(0);
  Vec out;
  pred.predict_once({}, rng, out);
  CHECK(out == Vec{0.1, 0.9});
  pred.predict_once({}, rng, out);
  CHECK(out == Vec{0.3, 0.7});
  pred.predict_deterministic({}, out);
  CHECK(out == Vec{0.1, 0.9});  // pass 0, cursor untouched
  pred.predict_once({}, rng, out);
  CHECK(out == Vec{0.5, 0.5});
  CHECK_THROWS_WITH_AS(pred.predict_once({}, rng, out),
                       doctest::Contains("sample 7"), std::runtime_error);

  CHECK_THROWS_AS(ReplayPredictor(&replay, 99), std::invalid_argument);
}

TEST_CASE("replay predictor: recorded MC stream reproduces batch moments") {
  // Record a real stochastic net, then replay it through the MC machinery:
  // the moments must match the original run bit-for-bit.
  MlpSpec spec{{2, 16, 3}, 0.5, Head::Softmax};
  Rng init(411);
  Mlp net = init_mlp(spec, init);
  MlpPredictor live(&net);

  const Vec x = {0.2, -0.4};
  ReplayFile replay;
  replay.dim = 3;
  replay.declared_passes = 25;
  Rng record_rng(500);
  std::vector<Vec> passes;
  for (int p = 0; p < 25; ++p) {
    Vec out;
    live.predict_once(x, record_rng, out);
    passes.push_back(out);
  }
  replay.records[0] = passes;

  const std::string path = temp_path("replay_mc.csv");
  write_replay(path, replay);
  const ReplayFile back = read_replay(path);
  ReplayPredictor replayed(&back, 0);

  Rng live_rng(500), replay_rng(123);  // replay ignores its rng
  const AdaptiveResult a = batch_mc_dropout(live, x, 25, live_rng);
  const AdaptiveResult b = batch_mc_dropout(replayed, x, 25, replay_rng);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
  std::remove(path.c_str());
}

}  // TEST_SUITE
