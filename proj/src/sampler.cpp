#include "drmil/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace drmil {

double f_entropy(double f) {
  if (f < 0.0 || f > 1.0) throw std::invalid_argument("f_entropy: f outside [0,1]");
  double h = 0.0;
  if (f > 0.0) h -= f * std::log(f);
  if (f < 1.0) h -= (1.0 - f) * std::log(1.0 - f);
  return h;
}

namespace {

struct Candidate {
  const BagEval* bag;
  std::size_t pos;  // position within the BagEval vectors
};

// Unqueried positions of one bag, i.e. live instances not in the ledger.
std::vector<std::size_t> open_positions(const BagEval& bag,
                                        const QueryLedger& ledger) {
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < bag.indices.size(); ++i) {
    if (!ledger.contains(bag.bag_id, bag.indices[i])) open.push_back(i);
  }
  return open;
}

void append_entropy_phase(const std::vector<BagEval>& bags,
                          const QueryLedger& ledger, double th_h, int budget,
                          QuerySource source, QuerySet& out) {
  std::vector<Candidate> cands;
  for (const BagEval& bag : bags) {
    for (std::size_t i : open_positions(bag, ledger)) {
      bool taken = false;
      for (const QueryItem& q : out) {
        if (q.bag_id == bag.bag_id && q.instance_index == bag.indices[i]) {
          taken = true;
          break;
        }
      }
      if (taken) continue;
      if (f_entropy(bag.scores[i]) >= th_h) cands.push_back({&bag, i});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    const double ha = f_entropy(a.bag->scores[a.pos]);
    const double hb = f_entropy(b.bag->scores[b.pos]);
    if (ha != hb) return ha > hb;
    if (a.bag->bag_id != b.bag->bag_id) return a.bag->bag_id < b.bag->bag_id;
    return a.bag->indices[a.pos] < b.bag->indices[b.pos];
  });
  for (const Candidate& c : cands) {
    if (static_cast<int>(out.size()) >= budget) break;
    out.push_back({c.bag->bag_id, c.bag->indices[c.pos], source,
                   c.bag->scores[c.pos], f_entropy(c.bag->scores[c.pos])});
  }
}

}  // namespace

QuerySet pf_select(const std::vector<BagEval>& bags, const QueryLedger& ledger,
                   const SamplerConfig& cfg) {
  QuerySet out;

  // Phase 1: rank candidate bags by the score of their most representative
  // unqueried instance.
  struct Unexplored {
    const BagEval* bag;
    double rep_score;
  };
  std::vector<Unexplored> unexplored;
  for (const BagEval& bag : bags) {
    const auto open = open_positions(bag, ledger);
    if (open.empty()) continue;
    std::size_t best = open.front();
    for (std::size_t i : open) {
      if (bag.p[i] > bag.p[best]) best = i;  // ties keep the lowest index
    }
    if (bag.scores[best] <= cfg.th_pf) {
      unexplored.push_back({&bag, bag.scores[best]});
    }
  }
  std::stable_sort(unexplored.begin(), unexplored.end(),
                   [](const Unexplored& a, const Unexplored& b) {
                     if (a.rep_score != b.rep_score) {
                       return a.rep_score < b.rep_score;
                     }
                     return a.bag->bag_id < b.bag->bag_id;
                   });

  for (const Unexplored& u : unexplored) {
    if (static_cast<int>(out.size()) >= cfg.bsize) break;
    // A bag with a revealed positive is considered explored already.
    if (ledger.has_revealed_positive(u.bag->bag_id)) continue;
    auto open = open_positions(*u.bag, ledger);
    std::stable_sort(open.begin(), open.end(), [&](std::size_t a, std::size_t b) {
      return u.bag->scores[a] > u.bag->scores[b];
    });
    int taken = 0;
    for (std::size_t i : open) {
      if (taken >= cfg.k || static_cast<int>(out.size()) >= cfg.bsize) break;
      out.push_back({u.bag->bag_id, u.bag->indices[i], QuerySource::kPF,
                     u.bag->scores[i], f_entropy(u.bag->scores[i])});
      ++taken;
    }
  }

  // Phase 2: fall back to high-entropy instances for any remaining budget.
  append_entropy_phase(bags, ledger, cfg.th_h, cfg.bsize, QuerySource::kEntropy,
                       out);
  return out;
}

QuerySet entropy_select(const std::vector<BagEval>& bags,
                        const QueryLedger& ledger, int bsize) {
  QuerySet out;
  append_entropy_phase(bags, ledger, 0.0, bsize, QuerySource::kEntropy, out);
  return out;
}

QuerySet random_select(const std::vector<BagEval>& bags,
                       const QueryLedger& ledger, int bsize,
                       std::mt19937_64& rng) {
  std::vector<Candidate> pool;
  for (const BagEval& bag : bags) {
    for (std::size_t i : open_positions(bag, ledger)) pool.push_back({&bag, i});
  }
  // Partial Fisher-Yates keeps the draw identical across standard libraries.
  const std::size_t take = std::min<std::size_t>(bsize, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  QuerySet out;
  for (std::size_t i = 0; i < take; ++i) {
    const Candidate& c = pool[i];
    out.push_back({c.bag->bag_id, c.bag->indices[c.pos], QuerySource::kRandom,
                   c.bag->scores[c.pos], f_entropy(c.bag->scores[c.pos])});
  }
  return out;
}

}  // namespace drmil
