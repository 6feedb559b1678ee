#include "drmil/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <map>
#include <random>

#include "doctest.h"

using namespace drmil;

namespace {

BagEval make_eval(std::string id, std::vector<double> scores,
                  std::vector<double> p) {
  BagEval view;
  view.bag_id = std::move(id);
  view.scores = std::move(scores);
  view.p = std::move(p);
  view.indices.resize(view.scores.size());
  for (std::size_t i = 0; i < view.indices.size(); ++i) {
    view.indices[i] = static_cast<int>(i);
  }
  return view;
}

}  // namespace

TEST_CASE("f_entropy values and symmetry") {
  CHECK(f_entropy(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(f_entropy(0.0) == 0.0);
  CHECK(f_entropy(1.0) == 0.0);
  for (double f : {0.1, 0.25, 0.42, 0.9}) {
    CHECK(f_entropy(f) == doctest::Approx(f_entropy(1.0 - f)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(f_entropy(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(f_entropy(1.1), std::invalid_argument);
}

TEST_CASE("pf_select reproduces the two-bag exploration trace") {
  const std::vector<BagEval> bags = {
      make_eval("A", {0.05, 0.02, 0.01}, {0.40, 0.35, 0.25}),
      make_eval("B", {0.25, 0.10}, {0.6, 0.4}),
  };
  QueryLedger ledger;
  SamplerConfig cfg;
  cfg.th_pf = 0.3;
  cfg.k = 2;
  cfg.bsize = 3;
  const QuerySet q = pf_select(bags, ledger, cfg);
  REQUIRE(q.size() == 3);
  CHECK(q[0].bag_id == "A");
  CHECK(q[0].instance_index == 0);
  CHECK(q[1].bag_id == "A");
  CHECK(q[1].instance_index == 1);
  CHECK(q[2].bag_id == "B");
  CHECK(q[2].instance_index == 0);
  for (const QueryItem& item : q) CHECK(item.source == QuerySource::kPF);

  // Determinism: identical inputs, identical output.
  const QuerySet again = pf_select(bags, ledger, cfg);
  REQUIRE(again.size() == q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(again[i].bag_id == q[i].bag_id);
    CHECK(again[i].instance_index == q[i].instance_index);
  }
}

TEST_CASE("pf_select falls back to entropy when no bag is difficult") {
  const std::vector<BagEval> bags = {
      make_eval("A", {0.60, 0.52}, {0.55, 0.45}),
      make_eval("B", {0.45, 0.97}, {0.4, 0.6}),
  };
  QueryLedger ledger;
  SamplerConfig cfg;
  cfg.th_pf = 0.3;
  cfg.th_h = 0.4;
  cfg.k = 2;
  cfg.bsize = 2;
  const QuerySet q = pf_select(bags, ledger, cfg);
  REQUIRE(q.size() == 2);
  for (const QueryItem& item : q) {
    CHECK(item.source == QuerySource::kEntropy);
    CHECK(item.entropy >= cfg.th_h);
  }
  // Highest entropy first: A#1 (0.52) then A#0 (0.60)... entropy orders them.
  CHECK(q[0].bag_id == "A");
  CHECK(q[0].instance_index == 1);
}

TEST_CASE("pf_select skips bags with a revealed positive") {
  const std::vector<BagEval> bags = {
      make_eval("A", {0.05, 0.02}, {0.6, 0.4}),
      make_eval("B", {0.10, 0.08}, {0.7, 0.3}),
  };
  QueryLedger ledger;
  ledger.add("A", 1, 1);  // A already yielded a positive
  SamplerConfig cfg;
  cfg.th_pf = 0.3;
  cfg.th_h = 1e9;  // keep phase 2 empty
  cfg.k = 2;
  cfg.bsize = 4;
  const QuerySet q = pf_select(bags, ledger, cfg);
  REQUIRE(q.size() == 2);
  CHECK(q[0].bag_id == "B");
  CHECK(q[1].bag_id == "B");
}

TEST_CASE("pf_select re-admits bags whose queries were all negative") {
  const std::vector<BagEval> bags = {
      make_eval("A", {0.05, 0.02, 0.04}, {0.5, 0.2, 0.3}),
  };
  QueryLedger ledger;
  ledger.add("A", 0, 0);  // previously queried, revealed negative
  SamplerConfig cfg;
  cfg.th_pf = 0.3;
  cfg.th_h = 1e9;
  cfg.k = 2;
  cfg.bsize = 2;
  const QuerySet q = pf_select(bags, ledger, cfg);
  REQUIRE(q.size() == 2);
  CHECK(q[0].instance_index == 2);  // next best f among unqueried
  CHECK(q[1].instance_index == 1);
}

TEST_CASE("pf phase-1 items come from difficult bags only") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SamplerConfig cfg;
  cfg.th_pf = 0.3;
  cfg.th_h = 0.469;
  cfg.k = 2;
  cfg.bsize = 6;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<BagEval> bags;
    for (int b = 0; b < 4; ++b) {
      std::vector<double> scores(5), p(5);
      double sum = 0.0;
      for (int i = 0; i < 5; ++i) {
        scores[i] = unif(rng);
        p[i] = unif(rng) + 1e-3;
        sum += p[i];
      }
      for (double& v : p) v /= sum;
      bags.push_back(make_eval("bag" + std::to_string(b), scores, p));
    }
    QueryLedger ledger;
    const QuerySet q = pf_select(bags, ledger, cfg);
    REQUIRE(static_cast<int>(q.size()) <= cfg.bsize);
    std::map<std::string, int> per_bag;
    for (const QueryItem& item : q) {
      if (item.source == QuerySource::kPF) {
        ++per_bag[item.bag_id];
        // The bag's argmax-p score must be at or below the threshold.
        for (const BagEval& bag : bags) {
          if (bag.bag_id != item.bag_id) continue;
          std::size_t best = 0;
          for (std::size_t i = 1; i < bag.p.size(); ++i) {
            if (bag.p[i] > bag.p[best]) best = i;
          }
          REQUIRE(bag.scores[best] <= cfg.th_pf);
        }
      } else {
        REQUIRE(item.entropy >= cfg.th_h);
      }
    }
    for (const auto& [id, count] : per_bag) REQUIRE(count <= cfg.k);
    // No duplicates.
    std::map<std::pair<std::string, int>, int> seen;
    for (const QueryItem& item : q) {
      REQUIRE(++seen[{item.bag_id, item.instance_index}] == 1);
    }
  }
}

TEST_CASE("entropy_select ordering and ledger exclusion") {
  const std::vector<BagEval> one = {
      make_eval("A", {0.5, 0.99, 0.01}, {0.4, 0.3, 0.3})};
  QueryLedger ledger;
  QuerySet q = entropy_select(one, ledger, 1);
  REQUIRE(q.size() == 1);
  CHECK(q[0].instance_index == 0);

  ledger.add("A", 0, 0);
  q = entropy_select(one, ledger, 3);
  REQUIRE(q.size() == 2);
  CHECK(q[0].instance_index != 0);
  CHECK(q[1].instance_index != 0);

  // All-ties: tie-break order is (bag id, index).
  const std::vector<BagEval> ties = {
      make_eval("B", {0.5, 0.5}, {0.5, 0.5}),
      make_eval("A", {0.5, 0.5}, {0.5, 0.5}),
  };
  QueryLedger empty;
  q = entropy_select(ties, empty, 3);
  REQUIRE(q.size() == 3);
  CHECK(q[0].bag_id == "A");
  CHECK(q[0].instance_index == 0);
  CHECK(q[1].bag_id == "A");
  CHECK(q[1].instance_index == 1);
  CHECK(q[2].bag_id == "B");
  CHECK(q[2].instance_index == 0);
}

TEST_CASE("random_select is seeded, capped and near-uniform") {
  const std::vector<BagEval> bags = {
      make_eval("A", {0.2, 0.3, 0.4}, {0.3, 0.3, 0.4}),
      make_eval("B", {0.1, 0.6}, {0.5, 0.5}),
  };
  QueryLedger ledger;
  std::mt19937_64 rng1(9), rng2(9);
  const QuerySet a = random_select(bags, ledger, 3, rng1);
  const QuerySet b = random_select(bags, ledger, 3, rng2);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].bag_id == b[i].bag_id);
    CHECK(a[i].instance_index == b[i].instance_index);
  }

  std::mt19937_64 rng3(10);
  const QuerySet whole = random_select(bags, ledger, 50, rng3);
  CHECK(whole.size() == 5);

  // Selection frequency per instance within 3 standard errors of uniform.
  std::map<std::pair<std::string, int>, int> counts;
  std::mt19937_64 rng4(11);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    for (const QueryItem& item : random_select(bags, ledger, 2, rng4)) {
      ++counts[{item.bag_id, item.instance_index}];
    }
  }
  const double expected = 2.0 / 5.0;  // P(selected) per instance
  const double se = std::sqrt(expected * (1 - expected) / trials);
  for (const auto& [key, count] : counts) {
    const double freq = static_cast<double>(count) / trials;
    CHECK(std::abs(freq - expected) <= 3.0 * se + 1e-9);
  }
}

TEST_CASE("repeated exploration sweeps a fixed bag or stops at a positive") {
  // Scores fixed below th_pf; k = 2; one positive hidden at index 4.
  std::vector<double> scores{0.05, 0.04, 0.08, 0.02, 0.06, 0.01, 0.03};
  std::vector<int> labels{0, 0, 0, 0, 1, 0, 0};
  std::vector<double> p(7, 1.0 / 7.0);
  SamplerConfig cfg;
  cfg.th_pf = 0.3;
  cfg.th_h = 1e9;
  cfg.k = 2;
  cfg.bsize = 2;
  QueryLedger ledger;
  const int max_steps = (7 + cfg.k - 1) / cfg.k;
  bool positive_found = false;
  int queried = 0;
  for (int step = 0; step < max_steps; ++step) {
    const QuerySet q =
        pf_select({make_eval("A", scores, p)}, ledger, cfg);
    if (positive_found) {
      REQUIRE(q.empty());
      break;
    }
    for (const QueryItem& item : q) {
      ledger.add("A", item.instance_index, labels[item.instance_index]);
      ++queried;
      if (labels[item.instance_index] == 1) positive_found = true;
    }
  }
  CHECK((positive_found || queried == 7));
}
