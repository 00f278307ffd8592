// Acceptance suite for the adaptation library. Runs nine checks and prints
// one pass/fail line each; exit status is the number of failed checks.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "core/adapt.hpp"
#include "core/gradcheck.hpp"
#include "core/losses.hpp"
#include "core/memory.hpp"
#include "core/refine.hpp"

using namespace sfuda;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %d. %s — %s\n", ok ? "PASS" : "FAIL", index, name, detail.c_str());
  if (!ok) ++g_failures;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RealVector random_prob(int c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealVector p(c);
  double sum = 0.0;
  for (double& x : p) {
    x = u(rng) + 1e-9;
    sum += x;
  }
  for (double& x : p) x /= sum;
  return p;
}

RealVector random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  RealVector v(dim);
  double n;
  do {
    for (double& x : v) x = d(rng);
    n = norm(v);
  } while (n < 1e-6);
  return l2_normalize(v);
}

void check_gradient_integrity() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool ok = true;
  for (const GradCheckResult& r : run_gradient_checks(100, 1e-4)) {
    worst = std::max(worst, r.max_relative_error);
    ok = ok && r.passed;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && secs < 30.0;
  char buf[128];
  std::snprintf(buf, sizeof buf, "max rel err %.3g, %.1f s", worst, secs);
  report(1, "gradient integrity (finite differences)", ok, buf);
}

void check_weighting() {
  bool ok = uncertainty_weight({1.0, 0.0, 0.0}, WeightingMode::kExponential) == 1.0;
  ok = ok && std::abs(uncertainty_weight({0.25, 0.25, 0.25, 0.25}, WeightingMode::kExponential) -
                      std::exp(-1.0)) <= 1e-12;

  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> classes(2, 8);
  std::vector<std::pair<double, double>> points;
  for (int t = 0; t < 1000; ++t) {
    const RealVector p = random_prob(classes(rng), rng);
    const double w = uncertainty_weight(p, WeightingMode::kExponential);
    ok = ok && w >= std::exp(-1.0) - 1e-12 && w <= 1.0;
    points.emplace_back(normalized_entropy(p), w);
  }
  std::sort(points.begin(), points.end());
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].first > points[i - 1].first + 1e-12)
      ok = ok && points[i].second < points[i - 1].second;
  report(2, "uncertainty weighting endpoints and monotonicity", ok, "1000 random vectors");
}

void check_exclusion_oracle() {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<int> t_len(1, 8);
  std::uniform_int_distribution<int> labels(0, 9);
  std::uniform_int_distribution<int> q_len(0, 64);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int nq = q_len(rng);
    TemporalQueue queue(64);
    std::vector<std::vector<int>> snaps;
    std::vector<RealVector> keys;
    for (int i = 0; i < nq; ++i) {
      std::vector<int> h(t_len(rng));
      for (int& l : h) l = labels(rng);
      snaps.push_back(h);
      keys.push_back(random_unit(3, rng));
    }
    if (nq > 0) queue.push(keys, snaps);
    std::vector<int> query(t_len(rng));
    for (int& l : query) l = labels(rng);

    const std::vector<bool> got = exclusion_mask(query, queue);
    for (int i = 0; i < nq; ++i) {
      bool shared = false;
      const std::vector<int>& s = snaps[i];
      const std::size_t overlap = std::min(query.size(), s.size());
      for (std::size_t j = 1; j <= overlap; ++j)
        shared = shared || query[query.size() - j] == s[s.size() - j];
      if (got[i] != !shared) ++mismatches;
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%d mismatches / 1000 instances", mismatches);
  report(3, "temporal exclusion mask equals brute-force oracle", mismatches == 0, buf);
}

void check_knn_and_voting_oracle() {
  std::mt19937_64 rng(103);
  bool ok = true;
  std::uniform_int_distribution<int> n_slots(3, 512);
  for (int t = 0; t < 200; ++t) {
    const int n = n_slots(rng);
    FeatureBank bank(512);
    std::vector<std::pair<std::int64_t, RealVector>> entries;
    for (int i = 0; i < n; ++i) {
      const RealVector f = random_unit(4, rng);
      bank.update(i, f, RealVector(2, 0.5));
      entries.emplace_back(i, f);
    }
    const RealVector query = random_unit(4, rng);
    std::uniform_int_distribution<int> kd(1, std::min(n - 1, 16));
    const int k = kd(rng);
    const std::int64_t exclude = t % 2 == 0 ? 0 : -1;

    std::vector<std::pair<double, std::int64_t>> oracle;
    for (const auto& [id, f] : entries) {
      if (id == exclude) continue;
      oracle.emplace_back(cosine_distance(query, f), id);
    }
    std::sort(oracle.begin(), oracle.end());
    const auto got = bank.knn(query, k, exclude);
    for (int i = 0; i < k; ++i) ok = ok && got[i].first == oracle[i].second;
  }

  std::uniform_int_distribution<int> preds_n(1, 12);
  for (int t = 0; t < 200; ++t) {
    std::vector<RealVector> preds(preds_n(rng));
    for (RealVector& p : preds) p = random_prob(4, rng);
    const RealVector got = soft_vote(preds);
    for (int j = 0; j < 4; ++j) {
      double mean = 0.0;
      for (const RealVector& p : preds) mean += p[j];
      mean /= static_cast<double>(preds.size());
      ok = ok && std::abs(got[j] - mean) <= 1e-12;
    }
  }
  report(4, "k-NN and soft-vote equal exhaustive oracles", ok, "200 banks, 200 vote batches");
}

void check_masking_contract() {
  std::mt19937_64 rng(104);
  bool ok = true;
  for (int t = 0; t < 200; ++t) {
    const RealVector q = random_unit(5, rng);
    const RealVector k_pos = random_unit(5, rng);
    std::uniform_int_distribution<int> nq(1, 8);
    const int n = nq(rng);
    std::vector<RealVector> keys;
    std::vector<std::vector<int>> hist;
    for (int i = 0; i < n; ++i) {
      keys.push_back(random_unit(5, rng));
      hist.push_back({i});
    }
    TemporalQueue queue(16);
    queue.push(keys, hist);

    const ContrastiveLoss all_masked =
        contrastive_loss(q, k_pos, queue, std::vector<bool>(n, false), 0.07);
    ok = ok && std::abs(all_masked.value) <= 1e-12;

    std::vector<bool> mask(n, true);
    mask[n - 1] = false;
    TemporalQueue shorter(16);
    shorter.push(std::vector<RealVector>(keys.begin(), keys.end() - 1),
                 std::vector<std::vector<int>>(hist.begin(), hist.end() - 1));
    const ContrastiveLoss with_masked = contrastive_loss(q, k_pos, queue, mask, 0.07);
    const ContrastiveLoss without =
        contrastive_loss(q, k_pos, shorter, std::vector<bool>(n - 1, true), 0.07);
    ok = ok && with_masked.value == without.value &&
         with_masked.grad_query == without.grad_query;
  }
  report(5, "masked negatives are bit-identical no-ops", ok, "200 random instances");
}

struct TrendData {
  std::vector<double> full_final, source_only, pl_final, pl_initial, refine_only_final;
  std::vector<double> t1_final, t5_final;
  AuditReport audit;  // accumulated over the full-pipeline runs
  double max_run_seconds = 0.0;
};

TrendData run_trend_suite() {
  TrendData d;
  AdaptationConfig full;  // frozen defaults: two-moons, 45-degree shift
  AdaptationConfig refine_only = full;
  refine_only.contrastive = false;
  refine_only.negative_learning = false;
  refine_only.temporal_exclusion = false;
  refine_only.uncertainty_reweighting = false;
  AdaptationConfig t1 = full;
  t1.history_len = 1;

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RunResult r = run_adaptation(full, seed);
    d.full_final.push_back(r.metrics.back().target_accuracy);
    d.t5_final.push_back(r.metrics.back().target_accuracy);
    d.source_only.push_back(r.source_only_target_accuracy);
    d.pl_final.push_back(r.metrics.back().pseudo_label_accuracy);
    d.pl_initial.push_back(r.initial_pseudo_label_accuracy);
    d.audit.prob_vectors_checked += r.audit.prob_vectors_checked;
    d.audit.simplex_violations += r.audit.simplex_violations;
    d.audit.ema_checks += r.audit.ema_checks;
    d.audit.ema_violations += r.audit.ema_violations;
    d.max_run_seconds = std::max(d.max_run_seconds, r.wall_seconds);

    d.refine_only_final.push_back(run_adaptation(refine_only, seed).metrics.back().target_accuracy);
    d.t1_final.push_back(run_adaptation(t1, seed).metrics.back().target_accuracy);
  }
  return d;
}

void check_adaptation_trend(const TrendData& d) {
  const double full_med = median(d.full_final);
  const double src_med = median(d.source_only);
  const double refine_med = median(d.refine_only_final);
  const bool gain = full_med >= src_med + 0.10;
  const bool pl = median(d.pl_final) > median(d.pl_initial);
  const bool vs_refine = full_med >= refine_med + 0.03;
  const bool fast = d.max_run_seconds < 60.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "full %.3f vs source-only %.3f, refine-only %.3f; pl %.3f -> %.3f; slowest run %.1f s",
                full_med, src_med, refine_med, median(d.pl_initial), median(d.pl_final),
                d.max_run_seconds);
  report(6, "end-to-end adaptation gain on rotated two-moons (5 seeds)",
         gain && pl && vs_refine && fast, buf);
}

void check_queue_length_sweep(const TrendData& d) {
  const double t5 = median(d.t5_final);
  const double t1 = median(d.t1_final);
  char buf[64];
  std::snprintf(buf, sizeof buf, "median T=5 %.3f vs T=1 %.3f", t5, t1);
  report(7, "history length 5 beats length 1 (5 seeds)", t5 >= t1, buf);
}

void check_determinism() {
  namespace fs = std::filesystem;
  AdaptationConfig c;
  c.data.n_source = 120;
  c.data.n_target = 120;
  c.epochs = 5;
  c.source_epochs = 20;
  const fs::path dir = fs::temp_directory_path() / "sfuda_acceptance_det";
  fs::create_directories(dir);
  const auto run_to = [&](const fs::path& p) {
    write_metrics_csv(run_adaptation(c, 7).metrics, p.string());
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string a = run_to(dir / "a.csv");
  const std::string b = run_to(dir / "b.csv");
  fs::remove_all(dir);
  report(8, "repeated runs produce byte-identical metrics", !a.empty() && a == b,
         std::to_string(a.size()) + " bytes compared");
}

void check_invariant_audit(const TrendData& d) {
  const bool ok = d.audit.prob_vectors_checked >= 10000 && d.audit.simplex_violations == 0 &&
                  d.audit.ema_checks > 0 && d.audit.ema_violations == 0;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%lld prob vectors, %lld simplex / %lld ema violations",
                d.audit.prob_vectors_checked, d.audit.simplex_violations, d.audit.ema_violations);
  report(9, "simplex audit and momentum-envelope invariant", ok, buf);
}

}  // namespace

int main() {
  check_gradient_integrity();
  check_weighting();
  check_exclusion_oracle();
  check_knn_and_voting_oracle();
  check_masking_contract();
  const TrendData trend = run_trend_suite();
  check_adaptation_trend(trend);
  check_queue_length_sweep(trend);
  check_determinism();
  check_invariant_audit(trend);
  std::printf("%s (%d/9 passed)\n", g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              9 - g_failures);
  return g_failures;
}
