#include "drmil/scorer.hpp"

#include <algorithm>
#include <stdexcept>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "doctest.h"

using namespace drmil;

namespace {

ScorerParams zero_params(int dim) {
  ScorerParams p = init_scorer(0, dim);
  for (auto* v : {&p.w1, &p.b1, &p.w2, &p.b2, &p.w3}) {
    std::fill(v->begin(), v->end(), 0.0);
  }
  p.b3 = 0.0;
  return p;
}

std::vector<double> random_input(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(dim);
  for (double& v : x) v = gauss(rng);
  return x;
}

// Flattened view for finite-difference sweeps.
std::vector<double*> param_slots(ScorerParams& p) {
  std::vector<double*> slots;
  for (auto* v : {&p.w1, &p.b1, &p.w2, &p.b2, &p.w3}) {
    for (double& x : *v) slots.push_back(&x);
  }
  slots.push_back(&p.b3);
  return slots;
}

std::vector<double> grad_flat(const ScorerGrad& g) {
  std::vector<double> flat;
  for (const auto* v : {&g.w1, &g.b1, &g.w2, &g.b2, &g.w3}) {
    flat.insert(flat.end(), v->begin(), v->end());
  }
  flat.push_back(g.b3);
  return flat;
}

}  // namespace

TEST_CASE("zero parameters score 0.5 everywhere") {
  const ScorerParams p = zero_params(5);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto x = random_input(rng, 5);
    CHECK(forward(p, x, Mode::kEval, 0.0, nullptr) == doctest::Approx(0.5));
  }
}

TEST_CASE("eval forward is deterministic and dropout 0 matches eval") {
  std::mt19937_64 rng(11);
  const ScorerParams p = init_scorer(11, 7);
  const auto x = random_input(rng, 7);
  const double a = forward(p, x, Mode::kEval, 0.0, nullptr);
  const double b = forward(p, x, Mode::kEval, 0.0, nullptr);
  CHECK(a == b);
  std::mt19937_64 train_rng(5);
  CHECK(forward(p, x, Mode::kTrain, 0.0, &train_rng) == a);
  CHECK(a > 0.0);
  CHECK(a < 1.0);
}

TEST_CASE("train mode without an RNG is rejected; wrong dim too") {
  const ScorerParams p = init_scorer(2, 4);
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(forward(p, x, Mode::kTrain, 0.5, nullptr),
                  std::invalid_argument);
  const std::vector<double> short_x{1.0, 2.0};
  CHECK_THROWS_AS(forward(p, short_x, Mode::kEval, 0.0, nullptr),
                  std::invalid_argument);
}

TEST_CASE("init is reproducible, seeds differ, scores start near 0.5") {
  const ScorerParams a = init_scorer(42, 6);
  const ScorerParams b = init_scorer(42, 6);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  CHECK(a.w3 == b.w3);
  const ScorerParams c = init_scorer(43, 6);
  CHECK(a.w1 != c.w1);

  std::mt19937_64 rng(9);
  double sum = 0.0;
  for (int t = 0; t < 1000; ++t) {
    sum += forward(a, random_input(rng, 6), Mode::kEval, 0.0, nullptr);
  }
  CHECK(sum / 1000.0 == doctest::Approx(0.5).epsilon(0.2));
  CHECK(std::abs(sum / 1000.0 - 0.5) < 0.1);
}

TEST_CASE("backward matches central finite differences in eval mode") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 3; ++trial) {
    ScorerParams p = init_scorer(100 + trial, 4);
    const auto x = random_input(rng, 4);
    ForwardCache cache;
    forward(p, x, Mode::kEval, 0.0, nullptr, &cache);
    const ScorerGrad g = backward(p, cache, 1.0);
    const auto analytic = grad_flat(g);
    auto slots = param_slots(p);
    REQUIRE(analytic.size() == slots.size());
    const double h = 1e-5;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const double keep = *slots[i];
      *slots[i] = keep + h;
      const double up = forward(p, x, Mode::kEval, 0.0, nullptr);
      *slots[i] = keep - h;
      const double dn = forward(p, x, Mode::kEval, 0.0, nullptr);
      *slots[i] = keep;
      const double fd = (up - dn) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-4});
      REQUIRE(std::abs(fd - analytic[i]) / denom <= 1e-4);
    }
  }
}

TEST_CASE("backward reuses the train-mode dropout masks") {
  std::mt19937_64 rng(33);
  ScorerParams p = init_scorer(7, 5);
  const auto x = random_input(rng, 5);
  std::mt19937_64 mask_rng(77);
  ForwardCache cache;
  forward(p, x, Mode::kTrain, 0.6, &mask_rng, &cache);
  const ScorerGrad g = backward(p, cache, 2.0);
  // Units dropped in the forward pass must carry no weight gradient.
  for (int i = 0; i < kHidden1; ++i) {
    if (cache.keep1[i] == 0.0) {
      for (int j = 0; j < 5; ++j) {
        CHECK(g.w1[static_cast<std::size_t>(i) * 5 + j] == 0.0);
      }
    }
  }
}

TEST_CASE("dscore 0 yields a zero gradient; sum of grads is grad of sum") {
  std::mt19937_64 rng(13);
  ScorerParams p = init_scorer(19, 3);
  const auto x1 = random_input(rng, 3);
  const auto x2 = random_input(rng, 3);
  ForwardCache c1, c2;
  forward(p, x1, Mode::kEval, 0.0, nullptr, &c1);
  forward(p, x2, Mode::kEval, 0.0, nullptr, &c2);

  const ScorerGrad zero = backward(p, c1, 0.0);
  for (double v : grad_flat(zero)) CHECK(v == 0.0);

  ScorerGrad sum = backward(p, c1, 0.7);
  sum.accumulate(backward(p, c2, -0.4));
  ScorerGrad batch = backward(p, c1, 0.7);
  const ScorerGrad second = backward(p, c2, -0.4);
  batch.accumulate(second);
  CHECK(grad_flat(sum) == grad_flat(batch));
}

TEST_CASE("sgd_step semantics") {
  ScorerParams p = init_scorer(5, 3);
  std::mt19937_64 rng(55);
  const auto x = random_input(rng, 3);
  ForwardCache cache;
  forward(p, x, Mode::kEval, 0.0, nullptr, &cache);
  const ScorerGrad g1 = backward(p, cache, 1.0);
  const ScorerGrad g2 = backward(p, cache, -0.3);

  const ScorerParams unchanged = sgd_step(p, g1, 0.0);
  CHECK(unchanged.w1 == p.w1);
  CHECK(unchanged.b3 == p.b3);

  // step(step(p, g1), g2) == p - lr (g1 + g2)
  const double lr = 0.05;
  const ScorerParams two = sgd_step(sgd_step(p, g1, lr), g2, lr);
  ScorerGrad both = g1;
  both.accumulate(g2);
  const ScorerParams one = sgd_step(p, both, lr);
  for (std::size_t i = 0; i < two.w1.size(); ++i) {
    CHECK(two.w1[i] == doctest::Approx(one.w1[i]).epsilon(1e-12));
  }
  CHECK(two.b3 == doctest::Approx(one.b3).epsilon(1e-12));

  ScorerGrad bad = g1;
  bad.w2[0] = std::nan("");
  CHECK_THROWS_AS(sgd_step(p, bad, lr), std::runtime_error);
}

TEST_CASE("scores stay strictly inside (0,1) even at huge logits") {
  ScorerParams p = zero_params(2);
  p.b3 = 1e6;  // clamped to +kLogitClamp
  const std::vector<double> x{0.0, 0.0};
  const double s = forward(p, x, Mode::kEval, 0.0, nullptr);
  CHECK(s < 1.0);
  CHECK(s > 0.0);
  p.b3 = -1e6;
  const double t = forward(p, x, Mode::kEval, 0.0, nullptr);
  CHECK(t > 0.0);
  CHECK(t < 1.0);
}

TEST_CASE("checkpoint round trip is exact") {
  const ScorerParams p = init_scorer(91, 6);
  const std::string path = "scorer_ck_test.json";
  save_scorer(p, 91, path);
  const ScorerCheckpoint ck = load_scorer(path);
  CHECK(ck.seed == 91);
  CHECK(ck.params.input_dim == 6);
  CHECK(ck.params.w1 == p.w1);
  CHECK(ck.params.b1 == p.b1);
  CHECK(ck.params.w2 == p.w2);
  CHECK(ck.params.b2 == p.b2);
  CHECK(ck.params.w3 == p.w3);
  CHECK(ck.params.b3 == p.b3);
  std::remove(path.c_str());
}
