#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "drmil/data_io.hpp"
#include "drmil/driver.hpp"
#include "drmil/run_io.hpp"
#include "drmil/scorer.hpp"
#include "drmil/verify.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;

void write_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << j.dump(2) << '\n';
}

struct GenArgs {
  std::string out;
  std::string config_path;
  drmil::SynthConfig cfg;
};

int run_gen(const GenArgs& args) {
  drmil::SynthConfig cfg = args.cfg;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw std::runtime_error("cannot open config: " + args.config_path);
    nlohmann::json j;
    in >> j;
    cfg.feature_dim = j.value("feature_dim", cfg.feature_dim);
    cfg.train_pos_bags = j.value("train_pos_bags", cfg.train_pos_bags);
    cfg.train_neg_bags = j.value("train_neg_bags", cfg.train_neg_bags);
    cfg.test_pos_bags = j.value("test_pos_bags", cfg.test_pos_bags);
    cfg.test_neg_bags = j.value("test_neg_bags", cfg.test_neg_bags);
    cfg.bag_size_min = j.value("bag_size_min", cfg.bag_size_min);
    cfg.bag_size_max = j.value("bag_size_max", cfg.bag_size_max);
    cfg.positives_min = j.value("positives_min", cfg.positives_min);
    cfg.positives_max = j.value("positives_max", cfg.positives_max);
    cfg.n_positive_modes = j.value("n_positive_modes", cfg.n_positive_modes);
    cfg.outlier_rate = j.value("outlier_rate", cfg.outlier_rate);
    cfg.cluster_separation = j.value("cluster_separation", cfg.cluster_separation);
    cfg.seed = j.value("seed", cfg.seed);
  }
  const drmil::MilDataset data = drmil::generate(cfg);
  drmil::write_dataset(data, args.out);

  nlohmann::json manifest = {
      {"command", "gen"},
      {"version", kVersion},
      {"seed", cfg.seed},
      {"config",
       {{"feature_dim", cfg.feature_dim},
        {"train_pos_bags", cfg.train_pos_bags},
        {"train_neg_bags", cfg.train_neg_bags},
        {"test_pos_bags", cfg.test_pos_bags},
        {"test_neg_bags", cfg.test_neg_bags},
        {"bag_size_min", cfg.bag_size_min},
        {"bag_size_max", cfg.bag_size_max},
        {"positives_min", cfg.positives_min},
        {"positives_max", cfg.positives_max},
        {"n_positive_modes", cfg.n_positive_modes},
        {"outlier_rate", cfg.outlier_rate},
        {"cluster_separation", cfg.cluster_separation}}},
      {"artifacts", {args.out}},
  };
  write_file(args.out + ".manifest.json", manifest);
  std::cout << "wrote " << args.out << "\n";
  return 0;
}

struct VerifyArgs {
  drmil::VerifyOptions opt;
  std::string out;
  bool inject_fault = false;
};

int run_verify(const VerifyArgs& args) {
  drmil::VerifyOptions opt = args.opt;
  if (args.inject_fault) opt.fault_bias = 1e-3;
  const auto results = drmil::run_verification(opt);
  nlohmann::json report = drmil::verification_report(opt, results);
  report["command"] = "verify";
  report["version"] = kVersion;
  if (!args.out.empty()) {
    write_file(args.out, report);
  }
  std::cout << report.dump(2) << "\n";
  return report["all_passed"].get<bool>() ? 0 : 1;
}

struct AlArgs {
  std::string data_path;
  std::string out_dir = ".";
  std::string strategy = "pf";
  drmil::ALConfig cfg;
  std::string divergence = "chi2";
  std::string loss = "drbl";
};

drmil::ALConfig resolve_al_config(const AlArgs& args, const std::string& strat) {
  drmil::ALConfig cfg = args.cfg;
  cfg.strategy = drmil::strategy_from_name(strat);
  cfg.dro.divergence = args.divergence == "kl" ? drmil::Divergence::kKl
                                               : drmil::Divergence::kChiSquare;
  if (args.loss == "ms") {
    cfg.loss = drmil::LossKind::kMs;
  } else if (args.loss == "topk") {
    cfg.loss = drmil::LossKind::kTopk;
  } else {
    cfg.loss = drmil::LossKind::kDrbl;
  }
  cfg.train.seed = cfg.seed;
  return cfg;
}

int run_al(const AlArgs& args) {
  const drmil::MilDataset data = drmil::read_dataset(args.data_path);
  fs::create_directories(args.out_dir);

  std::vector<std::string> strategies;
  if (args.strategy == "all") {
    strategies = {"pf", "entropy", "random"};
  } else {
    strategies = {args.strategy};
  }

  nlohmann::json artifacts = nlohmann::json::array();
  std::vector<drmil::ALResult> results;
  std::vector<drmil::ALConfig> configs;
  for (const std::string& strat : strategies) {
    const drmil::ALConfig cfg = resolve_al_config(args, strat);
    drmil::ALResult res = drmil::run_al(data, cfg);
    const std::string prefix = args.out_dir + "/" + strat;
    drmil::write_curve(res.curve, prefix + "_curve.csv");
    drmil::write_query_log(res.query_log, prefix + "_queries.csv");
    drmil::write_train_log(res.train_log, prefix + "_train.csv");
    drmil::save_scorer(res.params, cfg.seed, prefix + "_model.json");
    for (const char* suffix :
         {"_curve.csv", "_queries.csv", "_train.csv", "_model.json"}) {
      artifacts.push_back(prefix + suffix);
    }
    results.push_back(std::move(res));
    configs.push_back(cfg);
  }

  if (strategies.size() > 1) {
    // Merged comparison: one test_map column per strategy.
    const std::string path = args.out_dir + "/comparison.csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << "step,cumulative_queries";
    for (const auto& s : strategies) out << ",test_map_" << s;
    out << '\n';
    std::size_t rows = 0;
    for (const auto& r : results) rows = std::max(rows, r.curve.size());
    for (std::size_t i = 0; i < rows; ++i) {
      const auto& lead = results.front().curve;
      const auto& ref = i < lead.size() ? lead[i] : lead.back();
      out << ref.step << ',' << ref.cumulative_queries;
      for (const auto& r : results) {
        const auto& row = i < r.curve.size() ? r.curve[i] : r.curve.back();
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.7g", row.test_map);
        out << ',' << buf;
      }
      out << '\n';
    }
    artifacts.push_back(path);
  }

  nlohmann::json manifest = {
      {"command", "al"},
      {"version", kVersion},
      {"data", args.data_path},
      {"seed", args.cfg.seed},
      {"artifacts", artifacts},
  };
  nlohmann::json cfg_json = nlohmann::json::array();
  for (const auto& cfg : configs) cfg_json.push_back(drmil::config_to_json(cfg));
  manifest["configs"] = cfg_json;
  write_file(args.out_dir + "/manifest.json", manifest);
  std::cout << "wrote curves to " << args.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust multiple-instance learning with active sampling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  cmd_gen->add_option("--out", gen.out, "Output CSV path")->required();
  cmd_gen->add_option("--config", gen.config_path, "SynthConfig JSON file");
  cmd_gen->add_option("--seed", gen.cfg.seed, "RNG seed");
  cmd_gen->add_option("--dim", gen.cfg.feature_dim, "Feature dimension");
  cmd_gen->add_option("--train-pos", gen.cfg.train_pos_bags, "Positive training bags");
  cmd_gen->add_option("--train-neg", gen.cfg.train_neg_bags, "Negative training bags");
  cmd_gen->add_option("--test-pos", gen.cfg.test_pos_bags, "Positive test bags");
  cmd_gen->add_option("--test-neg", gen.cfg.test_neg_bags, "Negative test bags");
  cmd_gen->add_option("--bag-size", gen.cfg.bag_size_min, "Bag size (min when --bag-size-max set)");
  cmd_gen->add_option("--bag-size-max", gen.cfg.bag_size_max, "Bag size upper bound");
  cmd_gen->add_option("--min-pos", gen.cfg.positives_min, "Min positives per positive bag");
  cmd_gen->add_option("--max-pos", gen.cfg.positives_max, "Max positives per positive bag");
  cmd_gen->add_option("--modes", gen.cfg.n_positive_modes, "Positive cluster count");
  cmd_gen->add_option("--outlier-rate", gen.cfg.outlier_rate, "Outlier fraction among negatives");
  cmd_gen->add_option("--separation", gen.cfg.cluster_separation, "Positive cluster distance");

  VerifyArgs verify;
  CLI::App* cmd_verify =
      app.add_subcommand("verify", "Run the solver property suites");
  cmd_verify->add_option("--lambda", verify.opt.lambda, "Divergence ball scale");
  cmd_verify->add_option("--trials", verify.opt.probability_trials,
                         "Monte-Carlo trials for the probability bound");
  cmd_verify->add_option("--seed", verify.opt.seed, "RNG seed");
  cmd_verify->add_option("--out", verify.out, "Write the JSON report here too");
  cmd_verify->add_flag("--inject-fault", verify.inject_fault,
                       "Self-test: skew solver values so checks must fail");

  AlArgs al;
  CLI::App* cmd_al = app.add_subcommand("al", "Run the active-learning loop");
  cmd_al->add_option("--data", al.data_path, "Dataset CSV")->required();
  cmd_al->add_option("--out", al.out_dir, "Output directory");
  cmd_al->add_option("--strategy", al.strategy,
                     "pf | entropy | random | all")
      ->check(CLI::IsMember({"pf", "entropy", "random", "all"}));
  cmd_al->add_option("--steps", al.cfg.steps, "Query steps");
  cmd_al->add_option("--bsize", al.cfg.sampler.bsize, "Per-step budget");
  cmd_al->add_option("--k", al.cfg.sampler.k, "Instances per explored bag");
  cmd_al->add_option("--lambda", al.cfg.dro.lambda, "Divergence ball scale");
  cmd_al->add_option("--beta", al.cfg.beta, "Instance-loss weight");
  cmd_al->add_option("--divergence", al.divergence, "chi2 | kl")
      ->check(CLI::IsMember({"chi2", "kl"}));
  cmd_al->add_option("--th-pf", al.cfg.sampler.th_pf, "Exploration threshold");
  cmd_al->add_option("--th-h", al.cfg.sampler.th_h, "Entropy threshold");
  cmd_al->add_option("--lr", al.cfg.train.learning_rate, "Learning rate");
  cmd_al->add_option("--dropout", al.cfg.train.dropout_rate, "Dropout rate");
  cmd_al->add_option("--epochs-init", al.cfg.train.epochs_initial,
                     "Passive training epochs");
  cmd_al->add_option("--epochs-step", al.cfg.train.epochs_per_step,
                     "Fine-tuning epochs per step");
  cmd_al->add_option("--pairs-per-batch", al.cfg.train.pairs_per_batch,
                     "Bag pairs per SGD update (0 = whole epoch)");
  cmd_al->add_option("--seed", al.cfg.seed, "RNG seed");
  cmd_al->add_option("--loss", al.loss, "drbl | ms | topk")
      ->check(CLI::IsMember({"drbl", "ms", "topk"}));
  cmd_al->add_option("--topk", al.cfg.topk, "k for the topk loss");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage/config errors
  }

  try {
    if (cmd_gen->parsed()) {
      if (cmd_gen->count("--bag-size") > 0 &&
          cmd_gen->count("--bag-size-max") == 0) {
        gen.cfg.bag_size_max = gen.cfg.bag_size_min;
      }
      return run_gen(gen);
    }
    if (cmd_verify->parsed()) return run_verify(verify);
    if (cmd_al->parsed()) return run_al(al);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
