#ifndef DRMIL_DRIVER_HPP
#define DRMIL_DRIVER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drmil/bag.hpp"
#include "drmil/dro.hpp"
#include "drmil/losses.hpp"
#include "drmil/sampler.hpp"
#include "drmil/scorer.hpp"

namespace drmil {

enum class Strategy { kPF, kEntropy, kRandom };

struct ALConfig {
  Strategy strategy = Strategy::kPF;
  int steps = 10;
  SamplerConfig sampler;
  DroConfig dro;
  TrainConfig train;
  double beta = 1.0;
  std::uint64_t seed = 0;
  // Bag-level loss used for training; kMs/kTopk exist for the baselines.
  LossKind loss = LossKind::kDrbl;
  int topk = 1;
};

struct ALCurveRow {
  int step = 0;
  long cumulative_queries = 0;
  double train_map = 0.0;
  double test_map = 0.0;
};
using ALCurve = std::vector<ALCurveRow>;

struct TrainLogRow {
  int epoch = 0;
  double drbl = 0.0;
  double bce = 0.0;
  double total = 0.0;
};

struct QueryLogRow {
  int step = 0;
  QueryItem item;
};

struct ALResult {
  ALCurve curve;
  ScorerParams params;
  QueryLedger ledger;
  std::vector<QueryLogRow> query_log;
  std::vector<TrainLogRow> train_log;
};

// Average precision of the pooled ranking, descending by score with tied
// scores collapsed into one threshold group:
// AP = sum_k (R_k - R_{k-1}) P_k. Labels are 0/1 with at least one positive.
double mean_average_precision(std::span<const double> scores,
                              std::span<const int> labels);

// Pooled instance-level mAP over every instance of the given bag groups.
double pooled_map(const std::vector<const std::vector<Bag>*>& groups,
                  const ScorerParams& params);

struct PassiveResult {
  ScorerParams params;
  std::vector<TrainLogRow> log;
};

// epochs_initial epochs of paired-bag training with an empty ledger.
PassiveResult train_passive(const MilDataset& data, const ALConfig& cfg);

// Full loop: passive training, then per step select/label/remove/fine-tune/
// evaluate. Ends early (with the curve so far) if a step yields no queries.
ALResult run_al(const MilDataset& data, const ALConfig& cfg);

// Simulated annotator: reveals the oracle labels of the queried instances
// into the ledger and returns them in query order. Throws on duplicate or
// dead-instance queries.
std::vector<int> oracle_label(const MilDataset& data, const QuerySet& queries,
                              QueryLedger& ledger);

}  // namespace drmil

#endif  // DRMIL_DRIVER_HPP
