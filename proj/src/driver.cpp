#include "drmil/driver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace drmil {

double mean_average_precision(std::span<const double> scores,
                              std::span<const int> labels) {
  if (scores.empty() || scores.size() != labels.size()) {
    throw std::invalid_argument("mean_average_precision: bad input lengths");
  }
  long total_pos = 0;
  for (int t : labels) {
    if (t != 0 && t != 1) {
      throw std::invalid_argument("mean_average_precision: labels must be 0/1");
    }
    total_pos += t;
  }
  if (total_pos == 0) {
    throw std::invalid_argument("mean_average_precision: no positives");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  double ap = 0.0;
  double recall_prev = 0.0;
  long tp = 0, seen = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // One threshold group per distinct score.
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += labels[order[j]];
      ++seen;
      ++j;
    }
    const double precision = static_cast<double>(tp) / seen;
    const double recall = static_cast<double>(tp) / total_pos;
    ap += (recall - recall_prev) * precision;
    recall_prev = recall;
    i = j;
  }
  return ap;
}

double pooled_map(const std::vector<const std::vector<Bag>*>& groups,
                  const ScorerParams& params) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto* group : groups) {
    for (const Bag& bag : *group) {
      for (const Instance& ins : bag.instances) {
        scores.push_back(
            forward(params, ins.features, Mode::kEval, 0.0, nullptr));
        labels.push_back(ins.oracle_label);
      }
    }
  }
  return mean_average_precision(scores, labels);
}

namespace {

struct TrainerState {
  std::mt19937_64 rng;
  AdagradState opt;
};

// One epoch: shuffle both sides, zip into pairs, and take one averaged update
// per pair batch on the hybrid objective.
TrainLogRow run_epoch(const MilDataset& data, ScorerParams& params,
                      const ALConfig& cfg, const QueryLedger& ledger,
                      TrainerState& state, int epoch) {
  std::mt19937_64& rng = state.rng;
  std::vector<const Bag*> pos, neg;
  for (const Bag& b : data.train_pos) pos.push_back(&b);
  for (const Bag& b : data.train_neg) neg.push_back(&b);
  for (std::size_t i = pos.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(pos[i - 1], pos[pick(rng)]);
  }
  for (std::size_t i = neg.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(neg[i - 1], neg[pick(rng)]);
  }
  const std::size_t pairs = std::min(pos.size(), neg.size());
  const std::size_t batch_size =
      cfg.train.pairs_per_batch > 0
          ? static_cast<std::size_t>(cfg.train.pairs_per_batch)
          : std::max<std::size_t>(pairs, 1);

  TrainLogRow row;
  row.epoch = epoch;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < pairs; start += batch_size) {
    BagPairBatch batch;
    for (std::size_t i = start; i < std::min(pairs, start + batch_size); ++i) {
      batch.pairs.emplace_back(pos[i], neg[i]);
    }
    ScorerGrad grad;
    const LossBreakdown lb = hybrid_loss_param_grad(
        data, batch, ledger, params, cfg.dro, cfg.beta, cfg.loss, cfg.topk,
        Mode::kTrain, cfg.train.dropout_rate, &rng, &grad);
    if (cfg.train.optimizer == Optimizer::kAdagrad) {
      state.opt.apply(params, grad, cfg.train.learning_rate);
    } else {
      params = sgd_step(std::move(params), grad, cfg.train.learning_rate);
    }
    row.drbl += lb.drbl;
    row.bce += lb.bce;
    row.total += lb.total;
    ++batches;
  }
  if (batches > 0) {
    row.drbl /= static_cast<double>(batches);
    row.bce /= static_cast<double>(batches);
    row.total /= static_cast<double>(batches);
  }
  return row;
}

std::vector<BagEval> evaluate_positive_bags(const MilDataset& data,
                                            const ScorerParams& params,
                                            const DroConfig& dro) {
  std::vector<BagEval> views;
  views.reserve(data.train_pos.size());
  for (const Bag& bag : data.train_pos) {
    BagEval view;
    view.bag_id = bag.id;
    view.indices = bag.live_indices();
    view.scores = live_scores(bag, params);
    view.p = robust_weights(view.scores, dro).p;
    views.push_back(std::move(view));
  }
  return views;
}

}  // namespace

namespace {

PassiveResult passive_phase(const MilDataset& data, const ALConfig& cfg,
                            TrainerState& state) {
  if (data.train_pos.empty() || data.train_neg.empty()) {
    throw std::invalid_argument(
        "train_passive: need at least one positive and one negative bag");
  }
  PassiveResult out;
  state.rng.seed(cfg.seed);
  out.params = init_scorer(cfg.seed, data.feature_dim);
  QueryLedger empty;
  for (int e = 1; e <= cfg.train.epochs_initial; ++e) {
    out.log.push_back(run_epoch(data, out.params, cfg, empty, state, e));
    if (!std::isfinite(out.log.back().total)) {
      throw std::runtime_error("train_passive: non-finite epoch loss");
    }
  }
  return out;
}

}  // namespace

PassiveResult train_passive(const MilDataset& data, const ALConfig& cfg) {
  TrainerState state;
  return passive_phase(data, cfg, state);
}

std::vector<int> oracle_label(const MilDataset& data, const QuerySet& queries,
                              QueryLedger& ledger) {
  std::vector<int> labels;
  labels.reserve(queries.size());
  for (const QueryItem& q : queries) {
    const Bag* bag = data.find_bag(q.bag_id);
    if (bag == nullptr) {
      throw std::invalid_argument("oracle_label: unknown bag " + q.bag_id);
    }
    if (q.instance_index < 0 ||
        q.instance_index >= static_cast<int>(bag->instances.size())) {
      throw std::invalid_argument("oracle_label: index out of range");
    }
    if (!bag->live[q.instance_index]) {
      throw std::invalid_argument("oracle_label: instance already removed");
    }
    if (ledger.contains(q.bag_id, q.instance_index)) {
      throw std::invalid_argument("oracle_label: duplicate query");
    }
    const int label = bag->instances[q.instance_index].oracle_label;
    ledger.add(q.bag_id, q.instance_index, label);
    labels.push_back(label);
  }
  return labels;
}

ALResult run_al(const MilDataset& base, const ALConfig& cfg) {
  MilDataset data = base;  // working snapshot; mutations stay local
  data.validate();

  ALResult out;
  PassiveResult passive = train_passive(data, cfg);
  out.params = std::move(passive.params);
  out.train_log = std::move(passive.log);

  std::mt19937_64 train_rng(cfg.seed + 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 sampler_rng(cfg.seed ^ 0x5851f42d4c957f2dULL);

  const std::vector<const std::vector<Bag>*> train_groups = {&data.train_pos,
                                                             &data.train_neg};
  const std::vector<const std::vector<Bag>*> test_groups = {&data.test_pos,
                                                            &data.test_neg};
  out.curve.push_back({0, 0, pooled_map(train_groups, out.params),
                       pooled_map(test_groups, out.params)});

  for (int step = 1; step <= cfg.steps; ++step) {
    const auto views = evaluate_positive_bags(data, out.params, cfg.dro);
    QuerySet queries;
    switch (cfg.strategy) {
      case Strategy::kPF:
        queries = pf_select(views, out.ledger, cfg.sampler);
        break;
      case Strategy::kEntropy:
        queries = entropy_select(views, out.ledger, cfg.sampler.bsize);
        break;
      case Strategy::kRandom:
        queries = random_select(views, out.ledger, cfg.sampler.bsize,
                                sampler_rng);
        break;
    }
    if (queries.empty()) break;  // pool exhausted

    const std::vector<int> labels = oracle_label(data, queries, out.ledger);
    for (const QueryItem& q : queries) {
      out.query_log.push_back({step, q});
    }
    for (std::size_t i = 0; i < queries.size(); ++i) {
      if (labels[i] == 0) {
        Bag* bag = data.find_train_pos(queries[i].bag_id);
        *bag = remove_labeled_negative(*bag, queries[i].instance_index);
      }
    }
    data.validate();

    for (int e = 1; e <= cfg.train.epochs_per_step; ++e) {
      TrainLogRow row =
          run_epoch(data, out.params, cfg, out.ledger, train_rng, e);
      row.epoch = static_cast<int>(out.train_log.size()) + 1;
      out.train_log.push_back(row);
    }

    out.curve.push_back({step, static_cast<long>(out.ledger.cumulative_count()),
                         pooled_map(train_groups, out.params),
                         pooled_map(test_groups, out.params)});
  }
  return out;
}

}  // namespace drmil
