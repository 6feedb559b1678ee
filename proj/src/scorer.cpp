#include "drmil/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace drmil {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

bool finite_all(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

std::size_t ScorerParams::parameter_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + 1;
}

bool ScorerParams::all_finite() const {
  return finite_all(w1) && finite_all(b1) && finite_all(w2) && finite_all(b2) &&
         finite_all(w3) && std::isfinite(b3);
}

void ScorerGrad::accumulate(const ScorerGrad& other) {
  auto add = [](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  };
  add(w1, other.w1);
  add(b1, other.b1);
  add(w2, other.w2);
  add(b2, other.b2);
  add(w3, other.w3);
  b3 += other.b3;
}

void ScorerGrad::scale(double s) {
  for (auto* v : {&w1, &b1, &w2, &b2, &w3}) {
    for (double& x : *v) x *= s;
  }
  b3 *= s;
}

bool ScorerGrad::all_finite() const {
  return finite_all(w1) && finite_all(b1) && finite_all(w2) && finite_all(b2) &&
         finite_all(w3) && std::isfinite(b3);
}

ScorerParams init_scorer(std::uint64_t seed, int input_dim) {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  ScorerParams p;
  p.input_dim = input_dim;
  p.w1.resize(static_cast<std::size_t>(kHidden1) * input_dim);
  p.b1.assign(kHidden1, 0.0);
  p.w2.resize(static_cast<std::size_t>(kHidden2) * kHidden1);
  p.b2.assign(kHidden2, 0.0);
  p.w3.resize(kHidden2);
  p.b3 = 0.0;

  std::mt19937_64 rng(seed);
  auto fill = [&](std::vector<double>& w, int fan_in) {
    std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(fan_in),
                                                1.0 / std::sqrt(fan_in));
    for (double& x : w) x = dist(rng);
  };
  fill(p.w1, input_dim);
  fill(p.w2, kHidden1);
  fill(p.w3, kHidden2);
  return p;
}

ScorerGrad zero_grad(int input_dim) {
  ScorerGrad g;
  g.input_dim = input_dim;
  g.w1.assign(static_cast<std::size_t>(kHidden1) * input_dim, 0.0);
  g.b1.assign(kHidden1, 0.0);
  g.w2.assign(static_cast<std::size_t>(kHidden2) * kHidden1, 0.0);
  g.b2.assign(kHidden2, 0.0);
  g.w3.assign(kHidden2, 0.0);
  g.b3 = 0.0;
  return g;
}

double forward(const ScorerParams& params, std::span<const double> x, Mode mode,
               double dropout_rate, std::mt19937_64* rng, ForwardCache* cache) {
  if (static_cast<int>(x.size()) != params.input_dim) {
    throw std::invalid_argument("feature row has wrong dimension");
  }
  if (mode == Mode::kTrain && dropout_rate > 0.0 && rng == nullptr) {
    throw std::invalid_argument("train-mode forward needs an RNG for dropout");
  }
  const bool drop = mode == Mode::kTrain && dropout_rate > 0.0;
  const double keep_scale = drop ? 1.0 / (1.0 - dropout_rate) : 1.0;
  std::bernoulli_distribution keep(1.0 - dropout_rate);

  std::vector<double> z1(kHidden1), a1(kHidden1);
  std::vector<double> keep1;
  if (drop) keep1.resize(kHidden1);
  for (int i = 0; i < kHidden1; ++i) {
    double z = params.b1[i];
    const double* row = &params.w1[static_cast<std::size_t>(i) * params.input_dim];
    for (int j = 0; j < params.input_dim; ++j) z += row[j] * x[j];
    z1[i] = z;
    double a = z > 0.0 ? z : 0.0;
    if (drop) {
      keep1[i] = keep(*rng) ? keep_scale : 0.0;
      a *= keep1[i];
    }
    a1[i] = a;
  }

  std::vector<double> z2(kHidden2), a2(kHidden2);
  std::vector<double> keep2;
  if (drop) keep2.resize(kHidden2);
  for (int i = 0; i < kHidden2; ++i) {
    double z = params.b2[i];
    const double* row = &params.w2[static_cast<std::size_t>(i) * kHidden1];
    for (int j = 0; j < kHidden1; ++j) z += row[j] * a1[j];
    z2[i] = z;
    double a = z > 0.0 ? z : 0.0;
    if (drop) {
      keep2[i] = keep(*rng) ? keep_scale : 0.0;
      a *= keep2[i];
    }
    a2[i] = a;
  }

  double logit = params.b3;
  for (int j = 0; j < kHidden2; ++j) logit += params.w3[j] * a2[j];
  const bool clamped = std::abs(logit) > kLogitClamp;
  const double bounded = std::clamp(logit, -kLogitClamp, kLogitClamp);
  const double score = sigmoid(bounded);

  if (cache != nullptr) {
    cache->x.assign(x.begin(), x.end());
    cache->z1 = std::move(z1);
    cache->a1 = std::move(a1);
    cache->z2 = std::move(z2);
    cache->a2 = std::move(a2);
    cache->keep1 = std::move(keep1);
    cache->keep2 = std::move(keep2);
    cache->logit = bounded;
    cache->score = score;
    cache->clamped = clamped;
  }
  return score;
}

ScorerGrad backward(const ScorerParams& params, const ForwardCache& cache,
                    double dscore) {
  if (static_cast<int>(cache.x.size()) != params.input_dim ||
      static_cast<int>(cache.a2.size()) != kHidden2) {
    throw std::invalid_argument("stale or mismatched forward cache");
  }
  ScorerGrad g = zero_grad(params.input_dim);
  if (dscore == 0.0) return g;

  const double s = cache.score;
  // Saturated (clamped) logits are flat, matching the forward clamp.
  const double dlogit = cache.clamped ? 0.0 : dscore * s * (1.0 - s);
  g.b3 = dlogit;
  std::vector<double> da2(kHidden2);
  for (int j = 0; j < kHidden2; ++j) {
    g.w3[j] = dlogit * cache.a2[j];
    da2[j] = dlogit * params.w3[j];
  }

  std::vector<double> da1(kHidden1, 0.0);
  for (int i = 0; i < kHidden2; ++i) {
    double d = da2[i];
    if (!cache.keep2.empty()) d *= cache.keep2[i];
    d = cache.z2[i] > 0.0 ? d : 0.0;
    g.b2[i] = d;
    double* wrow = &g.w2[static_cast<std::size_t>(i) * kHidden1];
    const double* prow = &params.w2[static_cast<std::size_t>(i) * kHidden1];
    for (int j = 0; j < kHidden1; ++j) {
      wrow[j] = d * cache.a1[j];
      da1[j] += d * prow[j];
    }
  }

  for (int i = 0; i < kHidden1; ++i) {
    double d = da1[i];
    if (!cache.keep1.empty()) d *= cache.keep1[i];
    d = cache.z1[i] > 0.0 ? d : 0.0;
    g.b1[i] = d;
    double* wrow = &g.w1[static_cast<std::size_t>(i) * params.input_dim];
    for (int j = 0; j < params.input_dim; ++j) {
      wrow[j] = d * cache.x[j];
    }
  }
  return g;
}

void AdagradState::apply(ScorerParams& params, const ScorerGrad& grad,
                         double learning_rate) {
  if (!grad.all_finite()) {
    throw std::runtime_error("adagrad: non-finite gradient");
  }
  if (!initialized) {
    accum = zero_grad(params.input_dim);
    initialized = true;
  }
  constexpr double kEps = 1e-8;
  auto update = [&](std::vector<double>& w, const std::vector<double>& g,
                    std::vector<double>& acc) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc[i] += g[i] * g[i];
      w[i] -= learning_rate * g[i] / (std::sqrt(acc[i]) + kEps);
    }
  };
  update(params.w1, grad.w1, accum.w1);
  update(params.b1, grad.b1, accum.b1);
  update(params.w2, grad.w2, accum.w2);
  update(params.b2, grad.b2, accum.b2);
  update(params.w3, grad.w3, accum.w3);
  accum.b3 += grad.b3 * grad.b3;
  params.b3 -= learning_rate * grad.b3 / (std::sqrt(accum.b3) + kEps);
}

ScorerParams sgd_step(ScorerParams params, const ScorerGrad& grad,
                      double learning_rate) {
  if (!grad.all_finite()) {
    throw std::runtime_error("sgd_step: non-finite gradient");
  }
  auto apply = [&](std::vector<double>& w, const std::vector<double>& g) {
    if (w.size() != g.size()) {
      throw std::invalid_argument("sgd_step: shape mismatch");
    }
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= learning_rate * g[i];
  };
  apply(params.w1, grad.w1);
  apply(params.b1, grad.b1);
  apply(params.w2, grad.w2);
  apply(params.b2, grad.b2);
  apply(params.w3, grad.w3);
  params.b3 -= learning_rate * grad.b3;
  return params;
}

void save_scorer(const ScorerParams& params, std::uint64_t seed,
                 const std::string& path) {
  nlohmann::json j;
  j["input_dim"] = params.input_dim;
  j["seed"] = seed;
  j["w1"] = params.w1;
  j["b1"] = params.b1;
  j["w2"] = params.w2;
  j["b2"] = params.b2;
  j["w3"] = params.w3;
  j["b3"] = params.b3;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for write: " + path);
  out << j.dump(2) << "\n";
}

ScorerCheckpoint load_scorer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  ScorerCheckpoint ck;
  ck.seed = j.at("seed").get<std::uint64_t>();
  ck.params.input_dim = j.at("input_dim").get<int>();
  ck.params.w1 = j.at("w1").get<std::vector<double>>();
  ck.params.b1 = j.at("b1").get<std::vector<double>>();
  ck.params.w2 = j.at("w2").get<std::vector<double>>();
  ck.params.b2 = j.at("b2").get<std::vector<double>>();
  ck.params.w3 = j.at("w3").get<std::vector<double>>();
  ck.params.b3 = j.at("b3").get<double>();
  const auto& p = ck.params;
  if (p.w1.size() != static_cast<std::size_t>(kHidden1) * p.input_dim ||
      p.b1.size() != kHidden1 ||
      p.w2.size() != static_cast<std::size_t>(kHidden2) * kHidden1 ||
      p.b2.size() != kHidden2 || p.w3.size() != kHidden2) {
    throw std::runtime_error("checkpoint has inconsistent layer shapes");
  }
  return ck;
}

}  // namespace drmil
