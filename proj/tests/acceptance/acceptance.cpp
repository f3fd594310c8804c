// Copyright 2026 The SQN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
// fails. Arguments select criteria by exact name; none runs all.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sqn/encoder.hpp"
#include "sqn/experiments.hpp"
#include "sqn/metrics.hpp"
#include "sqn/model.hpp"
#include "sqn/query_network.hpp"
#include "sqn/trainer.hpp"

namespace sqn {
namespace {

using Clock = std::chrono::steady_clock;
using T = Tensor<double>;
using M = Matrix<double>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

M random_matrix(Index r, Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  M m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

const SeedBundle kSeeds{};
constexpr double kDeskRatio = 0.005;

const Benchmark& bench() {
  static const Benchmark b = desk_benchmark(kSeeds);
  return b;
}

// --- K-NN exactness -------------------------------------------------------

Outcome knn_exactness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<Index> size(1, 2048);
  Index mismatches = 0, queries = 0;
  for (int cloud = 0; cloud < 200; ++cloud) {
    const Index n = size(rng);
    Positions p = oracle::random_positions(n, rng);
    // Snap a quarter of the clouds to a coarse lattice so equal distances occur.
    if (cloud % 4 == 0) p = (p * 4.f).array().round().matrix() / 4.f;
    const auto index = build_index(p);
    std::uniform_int_distribution<Index> kdist(1, std::min<Index>(16, n));
    for (int q = 0; q < 10; ++q) {
      const Index k = kdist(rng);
      const Eigen::RowVector3f query =
          q % 2 == 0 ? Eigen::RowVector3f(oracle::random_positions(1, rng, 1.1f).row(0)) : Eigen::RowVector3f(p.row(q % n));
      mismatches += index.knn(query, k) != oracle::brute_knn(p, query, k);
      ++queries;
    }
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 10.0,
          std::to_string(queries) + " queries, " + std::to_string(mismatches) + " mismatches, " + fmt("%.2f s", t)};
}

// --- Gradient correctness -------------------------------------------------

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::vector<std::pair<std::string, double>> errors;
  auto record = [&](const std::string& name, const oracle::GradCheck& g) { errors.emplace_back(name, g.max_rel_error); };

  const Positions pos = oracle::random_positions(24, rng);
  const Index k = 5;
  const auto nb = build_index(pos).knn_batch(pos, k);
  const M raw = relative_position_codes<double>(pos, nb, k);

  {  // relative position MLP
    Parameters<double> p;
    p.add("w", random_matrix(kRelativeCodeWidth, 6, rng, 0.5));
    p.add("b", random_matrix(1, 6, rng, 0.1));
    const M proj = random_matrix(raw.rows(), 6, rng);
    record("locse", oracle::check_gradients(p, [&](auto& ps) {
             return sum(mul(relative_position_encoding(T::constant(raw), ps.get("w"), ps.get("b")), T::constant(proj)));
           }));
  }
  {  // attentive pooling
    Parameters<double> p;
    p.add("f", random_matrix(24 * k, 6, rng));
    p.add("gate", random_matrix(6, 6, rng, 0.5));
    const M proj = random_matrix(24, 6, rng);
    record("attentive_pooling", oracle::check_gradients(p, [&](auto& ps) {
             return sum(mul(attentive_pooling(ps.get("f"), ps.get("gate"), k), T::constant(proj)));
           }));
  }
  {  // full block
    Parameters<double> p;
    init_lfa_block(p, "b", 3, 6, rng);
    p.add("x", random_matrix(24, 3, rng));
    const M proj = random_matrix(24, 6, rng);
    record("lfa_block", oracle::check_gradients(p, [&](auto& ps) {
             return sum(mul(lfa_block(pos, ps.get("x"), nb, k, ps, "b"), T::constant(proj)));
           }));
  }
  {  // interpolation into the four levels
    HierarchicalFeatures<double> hf;
    Parameters<double> p;
    const std::array<Index, 4> sizes{40, 12, 5, 2};
    for (int l = 0; l < kNumLevels; ++l) {
      hf.levels[l].positions = oracle::random_positions(sizes[l], rng);
      hf.levels[l].index = std::make_shared<const SpatialIndex>(hf.levels[l].positions);
      p.add("f" + std::to_string(l), random_matrix(sizes[l], 3, rng));
    }
    const Positions queries = oracle::random_positions(8, rng);
    const M proj = random_matrix(8, 12, rng);
    record("interpolation", oracle::check_gradients(p, [&](auto& ps) {
             auto h = hf;
             for (int l = 0; l < kNumLevels; ++l) h.levels[l].features = ps.get("f" + std::to_string(l));
             return sum(mul(query_features(h, queries, QueryConfig{}).features, T::constant(proj)));
           }));
  }
  {  // head
    Parameters<double> p;
    init_head(p, 12, {10, 8}, 4, rng);
    p.add("x", random_matrix(9, 12, rng));
    const M proj = random_matrix(9, 4, rng);
    record("head_mlp", oracle::check_gradients(p, [&](auto& ps) {
             return sum(mul(classify(ps.get("x"), ps), T::constant(proj)));
           }));
  }
  {  // masked loss
    Parameters<double> p;
    p.add("logits", random_matrix(10, 4, rng));
    const std::vector<Label> y{0, 1, 2, 3, 3, 2, 1, 0, 0, 2};
    const std::vector<double> w{0.7, 1.3, 1.0, 1.0};
    record("masked_loss", oracle::check_gradients(p, [&](auto& ps) { return masked_loss(ps.get("logits"), y, w); }));
  }
  double worst = 0.0;
  std::string detail;
  for (const auto& [name, e] : errors) {
    worst = std::max(worst, e);
    detail += name + "=" + fmt("%.1e", e) + " ";
  }
  const double t = seconds_since(t0);
  return {worst < 1e-4 && t < 60.0, detail + fmt("(%.2f s)", t)};
}

// --- Interpolation contract -------------------------------------------------

Outcome interpolation_contract() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1e-4, 2.0);
  QueryConfig cfg;
  bool ok = true;
  for (int t = 0; t < 10000 && ok; ++t) {
    std::vector<double> d(1 + t % 25);
    for (double& x : d) x = u(rng);
    if (t % 7 == 0) d[d.size() / 2] = d[0];  // repeated distances
    const auto w = interpolation_weights(d, cfg);
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    ok = ok && std::abs(s - 1.0) <= 1e-6;
    for (std::size_t i = 0; i < w.size(); ++i) {
      ok = ok && w[i] >= 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) ok = ok && !(d[i] < d[j] && w[i] < w[j]);
    }
  }
  // Coincident queries against a real encoding: every level stores the point.
  const auto& b = bench();
  const auto model = init_model(b.config.encoder, b.config.query, 4, false, 3);
  const auto hf = encode_cloud(model, b.train_cloud);
  const auto& deepest = hf.levels[kNumLevels - 1];
  QueryResult<float> r;
  {
    NoGradGuard g;
    r = query_features(hf, deepest.positions, model.query);
  }
  bool exact = true;
  for (Index q = 0; q < deepest.positions.rows(); ++q) {
    Index col = 0;
    for (int l = 0; l < kNumLevels; ++l) {
      const auto& lv = hf.levels[l];
      // Row of this point in level l.
      Index row = -1;
      for (Index i = 0; i < lv.positions.rows(); ++i) {
        if (lv.positions.row(i) == deepest.positions.row(q)) row = i;
      }
      const auto width = lv.features.cols();
      exact = exact && row >= 0 &&
              (r.features.value().row(q).segment(col, width).array() == lv.features.value().row(row).array()).all();
      col += width;
    }
  }
  return {ok && exact, std::string("weights ") + (ok ? "ok" : "violated") + ", coincident queries " +
                           (exact ? "bit-exact" : "differ") + " at all levels"};
}

// --- Masked supervision ------------------------------------------------------

Outcome masked_supervision() {
  const auto& b = bench();
  const auto model = init_model(b.config.encoder, b.config.query, 4, false, 9);
  const auto labels = sample_sparse_labels(b.train_cloud, kDeskRatio, 1);
  auto params = model.params.cast<double>();
  auto hf = encode(b.train_cloud.positions, T::constant(input_features<double>(b.train_cloud, false)), params,
                   model.encoder, model.encoder.seed);
  // Treat every level's features as leaves so their gradients are observable.
  for (auto& lv : hf.levels) lv.features = T::parameter(lv.features.value());
  Positions queries(static_cast<Index>(labels.size()), 3);
  for (std::size_t i = 0; i < labels.size(); ++i) queries.row(static_cast<Index>(i)) = b.train_cloud.positions.row(labels.indices[i]);
  const auto r = query_features(hf, queries, model.query);
  const std::vector<double> w(4, 1.0);
  backward(masked_loss(classify(r.features, params), labels.labels, w));
  bool zero_outside = true;
  Index reached = 0;
  Index untouched = 0;
  for (int l = 0; l < kNumLevels; ++l) {
    const std::set<Index> gathered(r.levels[l].indices.begin(), r.levels[l].indices.end());
    const auto& g = hf.levels[l].features.grad();
    for (Index i = 0; i < g.rows(); ++i) {
      const bool touched = gathered.contains(i);
      const double mag = g.row(i).cwiseAbs().maxCoeff();
      if (!touched) {
        ++untouched;
        zero_outside = zero_outside && mag == 0.0;
      } else {
        reached += mag > 0.0;
      }
    }
  }
  // Loss over a full-cloud prediction only reads the labeled rows.
  std::mt19937_64 rng(3);
  const Index n = b.train_cloud.size();
  M logits = random_matrix(n, 4, rng);
  auto masked = [&](const M& full) {
    return masked_loss(gather(T::constant(full), labels.indices), labels.labels, w).item();
  };
  const double before = masked(logits);
  const std::set<Index> labeled(labels.indices.begin(), labels.indices.end());
  for (Index i = 0; i < n; ++i) {
    if (!labeled.contains(i)) logits.row(i) = random_matrix(1, 4, rng, 10.0);
  }
  const bool unchanged = masked(logits) == before;
  return {zero_outside && reached > 0 && unchanged,
          std::to_string(untouched) + " ungathered rows with " + (zero_outside ? "zero" : "NONZERO") +
              " gradient, " + std::to_string(reached) + " gathered rows reached, loss " + (unchanged ? "unchanged" : "CHANGED") + " by unlabeled predictions"};
}

// --- Metrics oracle ------------------------------------------------------------

Outcome metrics_oracle() {
  bool ok = true;
  auto near = [&](double a, double b) { ok = ok && std::abs(a - b) <= 1e-9; };
  {
    const std::vector<Label> t{0, 0, 0, 1}, p{0, 0, 1, 1};
    const auto cm = accumulate(t, p, 2);
    near(miou(cm), 7.0 / 12.0);
    near(oa(cm), 0.75);
    near(macc(cm), 5.0 / 6.0);
    const auto cm4 = accumulate(t, p, 4);  // classes 2, 3 have empty union
    near(miou(cm4), 7.0 / 12.0);
  }
  {
    const std::vector<Label> t{0, 0, 0, 1, 1, 2}, p{0, 0, 1, 1, 2, 2};
    const auto cm = accumulate(t, p, 3);
    near(miou(cm), (2.0 / 3 + 1.0 / 3 + 1.0 / 2) / 3);
    near(oa(cm), 4.0 / 6);
    near(macc(cm), (2.0 / 3 + 1.0 / 2 + 1.0) / 3);
  }
  // Random cases against a direct loop.
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = 2 + trial % 6;
    std::uniform_int_distribution<int> lab(0, c - 1);
    std::vector<Label> t(300), p(300);
    for (std::size_t i = 0; i < 300; ++i) {
      t[i] = static_cast<Label>(lab(rng));
      p[i] = rng() % 3 == 0 ? static_cast<Label>(lab(rng)) : t[i];
    }
    double sum_iou = 0.0, sum_rec = 0.0;
    int n_iou = 0, n_rec = 0;
    std::size_t correct = 0;
    for (int k = 0; k < c; ++k) {
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < 300; ++i) {
        tp += t[i] == k && p[i] == k;
        fp += t[i] != k && p[i] == k;
        fn += t[i] == k && p[i] != k;
      }
      if (tp + fp + fn > 0) {
        sum_iou += static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
        ++n_iou;
      }
      if (tp + fn > 0) {
        sum_rec += static_cast<double>(tp) / static_cast<double>(tp + fn);
        ++n_rec;
      }
      correct += tp;
    }
    const auto cm = accumulate(t, p, c);
    near(miou(cm), sum_iou / n_iou);
    near(macc(cm), sum_rec / n_rec);
    near(oa(cm), static_cast<double>(correct) / 300.0);
  }
  return {ok, ok ? "hand cases (incl. 7/12) and 50 random cases within 1e-9" : "mismatch"};
}

// --- Desk-scale learning ---------------------------------------------------------

Outcome desk_learning() {
  const auto& b = bench();
  const auto t0 = Clock::now();
  const auto labels = sample_sparse_labels(b.train_cloud, kDeskRatio, kSeeds.labels);
  const auto cell = run_cell(b, labels, b.config);
  const double t = seconds_since(t0);
  const int epochs = b.config.train.epochs;
  return {cell.oa >= 0.90 && cell.miou >= 0.75 && epochs <= 200 && t < 600.0,
          std::to_string(labels.size()) + " labels, test OA " + fmt("%.4f", cell.oa) + " mIoU " +
              fmt("%.4f", cell.miou) + ", " + std::to_string(epochs) + " epochs" +
              (cell.retrained ? " + pseudo-label stage" : "") + ", " + fmt("%.1f s", t)};
}

// --- Degradation shape -------------------------------------------------------------

Outcome degradation_shape() {
  const auto t0 = Clock::now();
  const auto r = degradation_sweep(bench(), {0.1, 0.01, 0.001, 0.0001});
  const double t = seconds_since(t0);
  std::vector<double> m;
  std::string detail;
  for (const auto& c : r.cells) {
    m.push_back(c.miou);
    detail += c.label + ":" + fmt("%.3f", c.miou) + "(" + std::to_string(c.num_labels) + ") ";
  }
  bool monotone = true;
  for (std::size_t i = 1; i < m.size(); ++i) monotone = monotone && m[i] <= m[i - 1];
  const double high_drop = m[0] - m[1];
  const double low_drop = m[1] - m[3];
  const bool shape = low_drop >= 2.0 * high_drop;
  return {monotone && shape && t < 3600.0, detail + "drops " + fmt("%.3f", high_drop) + " vs " + fmt("%.3f", low_drop) +
                                               ", " + fmt("%.0f s", t)};
}

// --- Query-level ablation -------------------------------------------------------------

Outcome level_ablation() {
  const auto t0 = Clock::now();
  const auto subsets = default_level_subsets();
  const auto r = query_level_ablation(bench(), kDeskRatio, subsets, {0, 1, 2});
  const double all = r.mean_miou("1+2+3+4");
  bool ok = r.mean_miou("4") > r.mean_miou("1");
  std::string detail;
  for (const auto& label : r.labels()) {
    detail += "{" + label + "}:" + fmt("%.3f", r.mean_miou(label)) + " ";
    if (label != "1+2+3+4") ok = ok && all >= r.mean_miou(label);
  }
  return {ok, detail + fmt("(%.0f s)", seconds_since(t0))};
}

// --- K robustness -------------------------------------------------------------------------

Outcome k_robustness() {
  const auto t0 = Clock::now();
  const auto r = k_sweep(bench(), kDeskRatio, {1, 3, 5, 10, 25});
  double lo = 1.0, hi = 0.0;
  std::string detail;
  for (const auto& c : r.cells) {
    lo = std::min(lo, c.miou);
    hi = std::max(hi, c.miou);
    detail += "K=" + c.label + ":" + fmt("%.3f", c.miou) + " ";
  }
  return {hi - lo <= 0.05, detail + "spread " + fmt("%.1f points", 100 * (hi - lo)) + fmt(" (%.0f s)", seconds_since(t0))};
}

// --- Seed sensitivity -------------------------------------------------------------------------

Outcome seed_sensitivity_check() {
  const auto t0 = Clock::now();
  const auto r = seed_sensitivity(bench(), kDeskRatio, 5);
  std::vector<double> m;
  for (const auto& c : r.cells) m.push_back(c.miou);
  const auto s = mean_std(m);
  return {s.stddev <= 0.03, "mIoU " + fmt("%.3f", s.mean) + " +- " + fmt("%.1f points", 100 * s.stddev) +
                                fmt(" over 5 seeds (%.0f s)", seconds_since(t0))};
}

// --- Reproducibility ------------------------------------------------------------------------------

Outcome reproducibility() {
  // Shortened desk run, executed twice from the same seed bundle; the
  // seconds column is wall-clock and excluded.
  const auto t0 = Clock::now();
  const Benchmark b1 = desk_benchmark(kSeeds);
  const Benchmark b2 = desk_benchmark(kSeeds);
  auto cfg = b1.config;
  cfg.train.epochs = 4;
  cfg.train.retrain = RetrainMode::On;
  const auto l1 = sample_sparse_labels(b1.train_cloud, kDeskRatio, kSeeds.labels);
  const auto l2 = sample_sparse_labels(b2.train_cloud, kDeskRatio, kSeeds.labels);
  const auto r1 = train_weakly(b1.train_cloud, l1, cfg.encoder, cfg.query, cfg.train);
  const auto r2 = train_weakly(b2.train_cloud, l2, cfg.encoder, cfg.query, cfg.train);
  auto same_log = [](const std::vector<EpochLog>& a, const std::vector<EpochLog>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].epoch != b[i].epoch || a[i].loss != b[i].loss || a[i].train_acc != b[i].train_acc) return false;
    }
    return true;
  };
  const bool logs = same_log(r1.log, r2.log) && same_log(r1.retrain_log, r2.retrain_log);
  const bool ckpt = encode_checkpoint(r1.model.params) == encode_checkpoint(r2.model.params);
  const bool scenes = b1.train_cloud.positions == b2.train_cloud.positions && b1.test_cloud.positions == b2.test_cloud.positions;
  const bool preds = predict(r1.model, b1.test_cloud) == predict(r2.model, b2.test_cloud);
  return {logs && ckpt && scenes && preds,
          std::string("logs ") + (logs ? "identical" : "DIFFER") + ", checkpoints " + (ckpt ? "identical" : "DIFFER") +
              ", predictions " + (preds ? "identical" : "DIFFER") + fmt(" (%.0f s)", seconds_since(t0))};
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

}  // namespace
}  // namespace sqn

int main(int argc, char** argv) {
  using namespace sqn;
  const Criterion criteria[] = {
      {"knn_exactness", knn_exactness},
      {"gradient_correctness", gradient_correctness},
      {"interpolation_contract", interpolation_contract},
      {"masked_supervision", masked_supervision},
      {"metrics_oracle", metrics_oracle},
      {"desk_learning", desk_learning},
      {"degradation_shape", degradation_shape},
      {"query_level_ablation", level_ablation},
      {"k_robustness", k_robustness},
      {"seed_sensitivity", seed_sensitivity_check},
      {"reproducibility", reproducibility},
  };
  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    bool selected = argc < 2;
    for (int i = 1; i < argc; ++i) selected = selected || std::string(c.name) == argv[i];
    if (!selected) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 && ran > 0 ? 0 : 1;
}
