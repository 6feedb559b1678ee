#ifndef DRMIL_BAG_HPP
#define DRMIL_BAG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace drmil {

struct ScorerParams;

// One feature row inside a bag. oracle_label is ground truth held by the
// simulated annotator; learners must not read it before it has been queried.
struct Instance {
  std::vector<double> features;
  int oracle_label = 0;  // 0 or 1
};

// A bag keeps every instance it was built with; removal only flips the live
// flag so ledger indices stay stable across active-learning steps.
struct Bag {
  std::string id;
  int bag_label = -1;  // +1 or -1
  std::vector<Instance> instances;
  std::vector<std::uint8_t> live;

  std::size_t size() const { return instances.size(); }
  std::size_t live_count() const;
  std::vector<int> live_indices() const;

  // Enforces the MIL assumption: a positive bag holds a live positive
  // instance, a negative bag holds no positives. Throws std::runtime_error.
  void validate(int expected_dim) const;
};

struct MilDataset {
  int feature_dim = 0;
  std::vector<Bag> train_pos, train_neg, test_pos, test_neg;

  void validate() const;
  const Bag* find_bag(const std::string& id) const;
  Bag* find_train_pos(const std::string& id);
};

// Revealed (bag, instance) -> label pairs accumulated over AL steps.
class QueryLedger {
 public:
  bool contains(const std::string& bag_id, int index) const;
  // Throws std::invalid_argument on duplicate (bag, index) pairs.
  void add(const std::string& bag_id, int index, int label);
  bool has_revealed_positive(const std::string& bag_id) const;
  // nullptr when the bag has no entries.
  const std::map<int, int>* entries(const std::string& bag_id) const;
  std::size_t cumulative_count() const { return count_; }
  const std::map<std::string, std::map<int, int>>& all() const {
    return revealed_;
  }

 private:
  std::map<std::string, std::map<int, int>> revealed_;
  std::size_t count_ = 0;
};

// Masks out a revealed-negative instance of a positive bag and returns the
// updated snapshot. Throws if the instance is positive, dead, out of range,
// or the last live one.
Bag remove_labeled_negative(const Bag& bag, int index);

// Eval-mode scores of the live instances, in index order.
std::vector<double> live_scores(const Bag& bag, const ScorerParams& params);

}  // namespace drmil

#endif  // DRMIL_BAG_HPP
