#include "drmil/run_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace drmil {

namespace {

std::string g7(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.7g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  return out;
}

}  // namespace

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kPF: return "pf";
    case Strategy::kEntropy: return "entropy";
    case Strategy::kRandom: return "random";
  }
  return "pf";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "pf") return Strategy::kPF;
  if (name == "entropy") return Strategy::kEntropy;
  if (name == "random") return Strategy::kRandom;
  throw std::invalid_argument("unknown strategy: " + name);
}

std::string source_name(QuerySource s) {
  switch (s) {
    case QuerySource::kPF: return "PF";
    case QuerySource::kEntropy: return "ENTROPY";
    case QuerySource::kRandom: return "RANDOM";
  }
  return "PF";
}

void write_curve(const ALCurve& curve, const std::string& path) {
  auto out = open_out(path);
  out << "step,cumulative_queries,train_map,test_map\n";
  for (const ALCurveRow& r : curve) {
    out << r.step << ',' << r.cumulative_queries << ',' << g7(r.train_map)
        << ',' << g7(r.test_map) << '\n';
  }
}

void write_query_log(const std::vector<QueryLogRow>& log,
                     const std::string& path) {
  auto out = open_out(path);
  out << "step,bag_id,instance_index,source,score,entropy\n";
  for (const QueryLogRow& r : log) {
    out << r.step << ',' << r.item.bag_id << ',' << r.item.instance_index
        << ',' << source_name(r.item.source) << ',' << g7(r.item.score) << ','
        << g7(r.item.entropy) << '\n';
  }
}

void write_train_log(const std::vector<TrainLogRow>& log,
                     const std::string& path) {
  auto out = open_out(path);
  out << "epoch,drbl,bce,total\n";
  for (const TrainLogRow& r : log) {
    out << r.epoch << ',' << g7(r.drbl) << ',' << g7(r.bce) << ','
        << g7(r.total) << '\n';
  }
}

nlohmann::json config_to_json(const ALConfig& cfg) {
  return {
      {"strategy", strategy_name(cfg.strategy)},
      {"steps", cfg.steps},
      {"beta", cfg.beta},
      {"seed", cfg.seed},
      {"loss", cfg.loss == LossKind::kDrbl
                   ? "drbl"
                   : (cfg.loss == LossKind::kMs ? "ms" : "topk")},
      {"topk", cfg.topk},
      {"sampler",
       {{"th_pf", cfg.sampler.th_pf},
        {"th_h", cfg.sampler.th_h},
        {"bsize", cfg.sampler.bsize},
        {"k", cfg.sampler.k}}},
      {"dro",
       {{"lambda", cfg.dro.lambda},
        {"divergence",
         cfg.dro.divergence == Divergence::kChiSquare ? "chi2" : "kl"},
        {"variance_floor", cfg.dro.variance_floor}}},
      {"train",
       {{"learning_rate", cfg.train.learning_rate},
        {"dropout_rate", cfg.train.dropout_rate},
        {"epochs_initial", cfg.train.epochs_initial},
        {"epochs_per_step", cfg.train.epochs_per_step},
        {"pairs_per_batch", cfg.train.pairs_per_batch},
        {"seed", cfg.train.seed}}},
  };
}

void write_manifest(const nlohmann::json& manifest, const std::string& path) {
  auto out = open_out(path);
  out << manifest.dump(2) << '\n';
}

}  // namespace drmil
