#ifndef DRMIL_SAMPLER_HPP
#define DRMIL_SAMPLER_HPP

#include <random>
#include <string>
#include <vector>

#include "drmil/bag.hpp"

namespace drmil {

struct SamplerConfig {
  double th_pf = 0.3;   // exploration threshold on the representative score
  double th_h = 0.469;  // entropy admission threshold for the fallback phase
  int bsize = 10;       // per-step query budget
  int k = 2;            // instances taken per explored bag
};

enum class QuerySource { kPF, kEntropy, kRandom };

struct QueryItem {
  std::string bag_id;
  int instance_index = 0;  // original index within the bag
  QuerySource source = QuerySource::kPF;
  double score = 0.0;
  double entropy = 0.0;
};

using QuerySet = std::vector<QueryItem>;

// Per-bag snapshot the strategies select from: live instances of one positive
// training bag with eval-mode scores and the robust weights, all parallel to
// `indices`.
struct BagEval {
  std::string bag_id;
  std::vector<int> indices;
  std::vector<double> scores;
  std::vector<double> p;
};

// Binary entropy -[f ln f + (1-f) ln(1-f)] with 0 ln 0 = 0.
double f_entropy(double f);

// Two-phase batch selection: explore bags whose most-representative
// (argmax-p) instance still scores at or below th_pf, ascending by that
// score, taking up to k top-scored unqueried instances per bag; any budget
// left goes to unqueried instances with entropy >= th_h, descending.
QuerySet pf_select(const std::vector<BagEval>& bags, const QueryLedger& ledger,
                   const SamplerConfig& cfg);

// Top-bsize unqueried instances by entropy, descending; ties by (bag, index).
QuerySet entropy_select(const std::vector<BagEval>& bags,
                        const QueryLedger& ledger, int bsize);

// Uniform sample without replacement from the unqueried pool.
QuerySet random_select(const std::vector<BagEval>& bags,
                       const QueryLedger& ledger, int bsize,
                       std::mt19937_64& rng);

}  // namespace drmil

#endif  // DRMIL_SAMPLER_HPP
