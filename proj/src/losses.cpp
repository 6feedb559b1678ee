#include "drmil/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace drmil {

namespace {

double max_of(std::span<const double> f) {
  if (f.empty()) throw std::invalid_argument("empty score sequence");
  return *std::max_element(f.begin(), f.end());
}

// Lowest index attaining the maximum.
std::size_t argmax_of(std::span<const double> f) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (f[i] > f[best]) best = i;
  }
  return best;
}

double hinge(double positive_value, double negative_max) {
  return std::max(0.0, 1.0 - positive_value + negative_max);
}

// Indices of the k largest entries (ties by lowest index), in index order so
// value summation matches the mean-score path exactly when k = n.
std::vector<std::size_t> topk_indices(std::span<const double> f, int k) {
  std::vector<std::size_t> order(f.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

double ms_mil_loss(std::span<const double> f_pos, std::span<const double> f_neg) {
  return hinge(max_of(f_pos), max_of(f_neg));
}

PairGrad ms_mil_loss_grad(std::span<const double> f_pos,
                          std::span<const double> f_neg) {
  PairGrad g;
  g.dpos.assign(f_pos.size(), 0.0);
  g.dneg.assign(f_neg.size(), 0.0);
  if (ms_mil_loss(f_pos, f_neg) > 0.0) {
    g.dpos[argmax_of(f_pos)] = -1.0;
    g.dneg[argmax_of(f_neg)] = 1.0;
  }
  return g;
}

double topk_mil_loss(std::span<const double> f_pos,
                     std::span<const double> f_neg, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > f_pos.size()) {
    throw std::invalid_argument("topk_mil_loss: k out of range");
  }
  const auto idx = topk_indices(f_pos, k);
  double s = 0.0;
  for (std::size_t i : idx) s += f_pos[i];
  return hinge(s / k, max_of(f_neg));
}

PairGrad topk_mil_loss_grad(std::span<const double> f_pos,
                            std::span<const double> f_neg, int k) {
  PairGrad g;
  g.dpos.assign(f_pos.size(), 0.0);
  g.dneg.assign(f_neg.size(), 0.0);
  if (topk_mil_loss(f_pos, f_neg, k) > 0.0) {
    for (std::size_t i : topk_indices(f_pos, k)) {
      g.dpos[i] = -1.0 / k;
    }
    g.dneg[argmax_of(f_neg)] = 1.0;
  }
  return g;
}

double variance_regularized_loss(std::span<const double> f_pos,
                                 std::span<const double> f_neg, double c) {
  return hinge(variance_regularized_value(f_pos, c), max_of(f_neg));
}

std::pair<double, RobustWeights> drbl_hinge_loss(std::span<const double> f_pos,
                                                 std::span<const double> f_neg,
                                                 const DroConfig& cfg) {
  RobustWeights w = robust_weights(f_pos, cfg);
  return {hinge(w.value, max_of(f_neg)), std::move(w)};
}

PairGrad drbl_loss_grad(std::span<const double> f_pos,
                        std::span<const double> f_neg, const DroConfig& cfg) {
  auto [loss, w] = drbl_hinge_loss(f_pos, f_neg, cfg);
  PairGrad g;
  g.dpos.assign(f_pos.size(), 0.0);
  g.dneg.assign(f_neg.size(), 0.0);
  if (loss > 0.0) {
    // p* maximizes a linear form over a set that does not depend on f, so
    // holding it fixed gives the exact envelope gradient.
    for (std::size_t i = 0; i < f_pos.size(); ++i) g.dpos[i] = -w.p[i];
    g.dneg[argmax_of(f_neg)] = 1.0;
  }
  return g;
}

double bce_loss(std::span<const double> f, std::span<const int> labels) {
  if (f.empty() || f.size() != labels.size()) {
    throw std::invalid_argument("bce_loss: need equal-length nonempty inputs");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] > 0.0 && f[i] < 1.0)) {
      throw std::invalid_argument("bce_loss: scores must lie in (0,1)");
    }
    s += labels[i] == 1 ? std::log(f[i]) : std::log(1.0 - f[i]);
  }
  return -s / static_cast<double>(f.size());
}

namespace {

struct PairLossEval {
  double loss = 0.0;
  PairGrad grad;
  RobustWeights weights;  // only meaningful for kDrbl
};

PairLossEval eval_pair(std::span<const double> f_pos,
                       std::span<const double> f_neg, const DroConfig& dro,
                       LossKind kind, int topk) {
  PairLossEval out;
  switch (kind) {
    case LossKind::kDrbl: {
      auto [loss, w] = drbl_hinge_loss(f_pos, f_neg, dro);
      out.loss = loss;
      out.weights = std::move(w);
      out.grad.dpos.assign(f_pos.size(), 0.0);
      out.grad.dneg.assign(f_neg.size(), 0.0);
      if (loss > 0.0) {
        for (std::size_t i = 0; i < f_pos.size(); ++i) {
          out.grad.dpos[i] = -out.weights.p[i];
        }
        out.grad.dneg[argmax_of(f_neg)] = 1.0;
      }
      break;
    }
    case LossKind::kMs:
      out.loss = ms_mil_loss(f_pos, f_neg);
      out.grad = ms_mil_loss_grad(f_pos, f_neg);
      break;
    case LossKind::kTopk: {
      const int k = std::min<int>(topk, static_cast<int>(f_pos.size()));
      out.loss = topk_mil_loss(f_pos, f_neg, k);
      out.grad = topk_mil_loss_grad(f_pos, f_neg, k);
      break;
    }
  }
  return out;
}

}  // namespace

LossBreakdown hybrid_loss(const MilDataset& data, const BagPairBatch& batch,
                          const QueryLedger& ledger, const ScorerParams& params,
                          const DroConfig& dro, double beta) {
  return hybrid_loss_param_grad(data, batch, ledger, params, dro, beta,
                                LossKind::kDrbl, 1, Mode::kEval, 0.0, nullptr,
                                nullptr);
}

LossBreakdown hybrid_loss_param_grad(const MilDataset& data,
                                     const BagPairBatch& batch,
                                     const QueryLedger& ledger,
                                     const ScorerParams& params,
                                     const DroConfig& dro, double beta,
                                     LossKind kind, int topk, Mode mode,
                                     double dropout_rate, std::mt19937_64* rng,
                                     ScorerGrad* grad_out) {
  if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
  LossBreakdown out;
  if (grad_out != nullptr) *grad_out = zero_grad(params.input_dim);
  const bool want_grad = grad_out != nullptr;

  const std::size_t num_pairs = batch.pairs.size();
  for (const auto& [pos, neg] : batch.pairs) {
    if (pos->bag_label != 1 || neg->bag_label != -1) {
      throw std::invalid_argument("pair batch must hold (+1, -1) bag pairs");
    }
    std::vector<ForwardCache> pos_caches, neg_caches;
    std::vector<double> f_pos, f_neg;
    auto score_bag = [&](const Bag& bag, std::vector<double>& f,
                         std::vector<ForwardCache>& caches) {
      for (std::size_t i = 0; i < bag.instances.size(); ++i) {
        if (!bag.live[i]) continue;
        ForwardCache cache;
        const double s =
            forward(params, bag.instances[i].features, mode, dropout_rate, rng,
                    want_grad ? &cache : nullptr);
        f.push_back(s);
        if (want_grad) caches.push_back(std::move(cache));
      }
    };
    score_bag(*pos, f_pos, pos_caches);
    score_bag(*neg, f_neg, neg_caches);

    PairLossEval pe = eval_pair(f_pos, f_neg, dro, kind, topk);
    out.drbl += pe.loss / static_cast<double>(num_pairs);
    if (kind == LossKind::kDrbl) {
      out.p_per_bag[pos->id] = pe.weights;
    }
    if (want_grad && pe.loss > 0.0) {
      const double w = 1.0 / static_cast<double>(num_pairs);
      for (std::size_t i = 0; i < f_pos.size(); ++i) {
        if (pe.grad.dpos[i] != 0.0) {
          grad_out->accumulate(
              backward(params, pos_caches[i], w * pe.grad.dpos[i]));
        }
      }
      for (std::size_t i = 0; i < f_neg.size(); ++i) {
        if (pe.grad.dneg[i] != 0.0) {
          grad_out->accumulate(
              backward(params, neg_caches[i], w * pe.grad.dneg[i]));
        }
      }
    }
  }

  // BCE over the full ledger.
  if (beta > 0.0 && ledger.cumulative_count() > 0) {
    const double m = static_cast<double>(ledger.cumulative_count());
    double s = 0.0;
    for (const auto& [bag_id, entries] : ledger.all()) {
      const Bag* bag = data.find_bag(bag_id);
      if (bag == nullptr) {
        throw std::invalid_argument("ledger references unknown bag " + bag_id);
      }
      for (const auto& [idx, label] : entries) {
        ForwardCache cache;
        const double fi =
            forward(params, bag->instances[idx].features, mode, dropout_rate,
                    rng, want_grad ? &cache : nullptr);
        s += label == 1 ? std::log(fi) : std::log(1.0 - fi);
        if (want_grad) {
          const double dfi =
              beta * (-1.0 / m) * (label == 1 ? 1.0 / fi : -1.0 / (1.0 - fi));
          grad_out->accumulate(backward(params, cache, dfi));
        }
      }
    }
    out.bce = -s / m;
  }

  out.total = out.drbl + beta * out.bce;
  return out;
}

}  // namespace drmil
