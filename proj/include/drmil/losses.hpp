#ifndef DRMIL_LOSSES_HPP
#define DRMIL_LOSSES_HPP

#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drmil/bag.hpp"
#include "drmil/dro.hpp"
#include "drmil/scorer.hpp"

namespace drmil {

// Which bag-level loss drives training. kDrbl is the robust-likelihood hinge;
// kMs and kTopk are the max-score baselines.
enum class LossKind { kDrbl, kMs, kTopk };

// Positive/negative bag pairs formed by shuffling and zipping each epoch.
struct BagPairBatch {
  std::vector<std::pair<const Bag*, const Bag*>> pairs;
};

struct LossBreakdown {
  double drbl = 0.0;  // mean bag-pair hinge over the batch
  double bce = 0.0;   // over all ledger-labeled instances
  double total = 0.0;
  std::map<std::string, RobustWeights> p_per_bag;
};

// Gradient of a pair loss with respect to the positive/negative score vectors.
struct PairGrad {
  std::vector<double> dpos, dneg;
};

// max(0, 1 - max(f_pos) + max(f_neg)).
double ms_mil_loss(std::span<const double> f_pos, std::span<const double> f_neg);
PairGrad ms_mil_loss_grad(std::span<const double> f_pos,
                          std::span<const double> f_neg);

// max(0, 1 - mean(top-k of f_pos) + max(f_neg)).
double topk_mil_loss(std::span<const double> f_pos,
                     std::span<const double> f_neg, int k);
PairGrad topk_mil_loss_grad(std::span<const double> f_pos,
                            std::span<const double> f_neg, int k);

// max(0, 1 - [mean + C sqrt(Var/n)] + max(f_neg)).
double variance_regularized_loss(std::span<const double> f_pos,
                                 std::span<const double> f_neg, double c);

// max(0, 1 - robust value + max(f_neg)); the optimizing p is returned for the
// sampler.
std::pair<double, RobustWeights> drbl_hinge_loss(std::span<const double> f_pos,
                                                 std::span<const double> f_neg,
                                                 const DroConfig& cfg);

// Envelope gradient: -p* on the positive scores and +1 on the argmax negative
// (lowest index on ties) when the hinge is active, zeros otherwise.
PairGrad drbl_loss_grad(std::span<const double> f_pos,
                        std::span<const double> f_neg, const DroConfig& cfg);

// -(1/m) sum [t log f + (1-t) log(1-f)].
double bce_loss(std::span<const double> f, std::span<const int> labels);

// Mean DRBL hinge over the batch plus beta times the BCE over every
// ledger-labeled instance. Scores are eval-mode, so the value is
// deterministic.
LossBreakdown hybrid_loss(const MilDataset& data, const BagPairBatch& batch,
                          const QueryLedger& ledger, const ScorerParams& params,
                          const DroConfig& dro, double beta);

// Parameter gradient of the full hybrid objective, composed from the
// per-score envelope gradients and scorer backprop. Train mode draws fresh
// dropout masks from `rng` per forward pass; eval mode is deterministic.
// Returns the loss breakdown actually differentiated.
LossBreakdown hybrid_loss_param_grad(const MilDataset& data,
                                     const BagPairBatch& batch,
                                     const QueryLedger& ledger,
                                     const ScorerParams& params,
                                     const DroConfig& dro, double beta,
                                     LossKind kind, int topk, Mode mode,
                                     double dropout_rate, std::mt19937_64* rng,
                                     ScorerGrad* grad_out);

}  // namespace drmil

#endif  // DRMIL_LOSSES_HPP
