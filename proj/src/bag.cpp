#include "drmil/bag.hpp"

#include <cmath>
#include <stdexcept>

#include "drmil/scorer.hpp"

namespace drmil {

std::size_t Bag::live_count() const {
  std::size_t n = 0;
  for (auto flag : live) n += flag ? 1 : 0;
  return n;
}

std::vector<int> Bag::live_indices() const {
  std::vector<int> idx;
  idx.reserve(instances.size());
  for (std::size_t i = 0; i < live.size(); ++i) {
    if (live[i]) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

void Bag::validate(int expected_dim) const {
  if (bag_label != 1 && bag_label != -1) {
    throw std::runtime_error("bag " + id + ": bag_label must be +1 or -1");
  }
  if (instances.empty()) {
    throw std::runtime_error("bag " + id + ": empty");
  }
  if (live.size() != instances.size()) {
    throw std::runtime_error("bag " + id + ": live mask length mismatch");
  }
  if (live_count() == 0) {
    throw std::runtime_error("bag " + id + ": no live instances");
  }
  bool live_positive = false;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Instance& ins = instances[i];
    if (static_cast<int>(ins.features.size()) != expected_dim) {
      throw std::runtime_error("bag " + id + ": feature dimension mismatch");
    }
    for (double v : ins.features) {
      if (!std::isfinite(v)) {
        throw std::runtime_error("bag " + id + ": non-finite feature");
      }
    }
    if (ins.oracle_label != 0 && ins.oracle_label != 1) {
      throw std::runtime_error("bag " + id + ": instance label must be 0 or 1");
    }
    if (bag_label == -1 && ins.oracle_label == 1) {
      throw std::runtime_error("bag " + id +
                               ": negative bag holds a positive instance");
    }
    if (live[i] && ins.oracle_label == 1) live_positive = true;
  }
  if (bag_label == 1 && !live_positive) {
    throw std::runtime_error("bag " + id +
                             ": positive bag has no live positive instance");
  }
}

void MilDataset::validate() const {
  if (feature_dim < 1) throw std::runtime_error("feature_dim must be >= 1");
  for (const auto* group : {&train_pos, &train_neg, &test_pos, &test_neg}) {
    for (const Bag& b : *group) b.validate(feature_dim);
  }
  for (const Bag& b : train_pos) {
    if (b.bag_label != 1) throw std::runtime_error("train_pos bag not positive");
  }
  for (const Bag& b : test_pos) {
    if (b.bag_label != 1) throw std::runtime_error("test_pos bag not positive");
  }
  for (const Bag& b : train_neg) {
    if (b.bag_label != -1) throw std::runtime_error("train_neg bag not negative");
  }
  for (const Bag& b : test_neg) {
    if (b.bag_label != -1) throw std::runtime_error("test_neg bag not negative");
  }
}

const Bag* MilDataset::find_bag(const std::string& id) const {
  for (const auto* group : {&train_pos, &train_neg, &test_pos, &test_neg}) {
    for (const Bag& b : *group) {
      if (b.id == id) return &b;
    }
  }
  return nullptr;
}

Bag* MilDataset::find_train_pos(const std::string& id) {
  for (Bag& b : train_pos) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

bool QueryLedger::contains(const std::string& bag_id, int index) const {
  auto it = revealed_.find(bag_id);
  return it != revealed_.end() && it->second.count(index) > 0;
}

void QueryLedger::add(const std::string& bag_id, int index, int label) {
  if (label != 0 && label != 1) {
    throw std::invalid_argument("ledger label must be 0 or 1");
  }
  auto [it, inserted] = revealed_[bag_id].emplace(index, label);
  (void)it;
  if (!inserted) {
    throw std::invalid_argument("duplicate ledger entry for bag " + bag_id +
                                " index " + std::to_string(index));
  }
  ++count_;
}

bool QueryLedger::has_revealed_positive(const std::string& bag_id) const {
  auto it = revealed_.find(bag_id);
  if (it == revealed_.end()) return false;
  for (const auto& [idx, label] : it->second) {
    if (label == 1) return true;
  }
  return false;
}

const std::map<int, int>* QueryLedger::entries(const std::string& bag_id) const {
  auto it = revealed_.find(bag_id);
  return it == revealed_.end() ? nullptr : &it->second;
}

Bag remove_labeled_negative(const Bag& bag, int index) {
  if (bag.bag_label != 1) {
    throw std::invalid_argument("instances are only removed from positive bags");
  }
  if (index < 0 || index >= static_cast<int>(bag.instances.size())) {
    throw std::invalid_argument("remove_labeled_negative: index out of range");
  }
  if (!bag.live[index]) {
    throw std::invalid_argument("remove_labeled_negative: instance already removed");
  }
  if (bag.instances[index].oracle_label != 0) {
    throw std::invalid_argument(
        "remove_labeled_negative: refusing to remove a positive instance");
  }
  if (bag.live_count() <= 1) {
    throw std::runtime_error("remove_labeled_negative: bag " + bag.id +
                             " would become degenerate");
  }
  Bag out = bag;
  out.live[index] = 0;
  return out;
}

std::vector<double> live_scores(const Bag& bag, const ScorerParams& params) {
  if (bag.live_count() == 0) {
    throw std::invalid_argument("live_scores: bag has no live instances");
  }
  std::vector<double> out;
  out.reserve(bag.live_count());
  for (std::size_t i = 0; i < bag.instances.size(); ++i) {
    if (!bag.live[i]) continue;
    out.push_back(forward(params, bag.instances[i].features, Mode::kEval, 0.0,
                          nullptr));
  }
  return out;
}

}  // namespace drmil
