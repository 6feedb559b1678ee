#include "drmil/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace drmil {

void SynthConfig::validate() const {
  auto fail = [](const std::string& field) {
    throw std::invalid_argument("SynthConfig: invalid " + field);
  };
  if (feature_dim < 1) fail("feature_dim");
  if (train_pos_bags < 1) fail("train_pos_bags");
  if (train_neg_bags < 1) fail("train_neg_bags");
  if (test_pos_bags < 1) fail("test_pos_bags");
  if (test_neg_bags < 1) fail("test_neg_bags");
  if (bag_size_min < 1 || bag_size_max < bag_size_min) fail("bag_size");
  if (positives_min < 1 || positives_max < positives_min) fail("positives_per_bag");
  if (positives_max > bag_size_min) fail("positives_per_bag (exceeds bag_size)");
  if (n_positive_modes < 1) fail("n_positive_modes");
  if (outlier_rate < 0.0 || outlier_rate >= 1.0) fail("outlier_rate");
  if (cluster_separation < 0.0) fail("cluster_separation");
}

namespace {

std::vector<double> random_unit_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : v) {
      x = gauss(rng);
      norm2 += x * x;
    }
  } while (norm2 < 1e-12);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

struct Mixture {
  std::vector<std::vector<double>> positive_means;
  std::vector<std::vector<double>> background_means;
  double outlier_radius = 0.0;
};

Mixture build_mixture(const SynthConfig& cfg, std::mt19937_64& rng) {
  Mixture mix;
  for (int m = 0; m < cfg.n_positive_modes; ++m) {
    auto mean = random_unit_vector(cfg.feature_dim, rng);
    for (double& x : mean) x *= cfg.cluster_separation;
    mix.positive_means.push_back(std::move(mean));
  }
  std::normal_distribution<double> near_origin(0.0, 0.5);
  for (int m = 0; m < 2; ++m) {
    std::vector<double> mean(cfg.feature_dim);
    for (double& x : mean) x = near_origin(rng);
    mix.background_means.push_back(std::move(mean));
  }
  mix.outlier_radius = 10.0 * cfg.cluster_separation;
  return mix;
}

Instance draw_positive(const SynthConfig& cfg, const Mixture& mix,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, mix.positive_means.size() - 1);
  const auto& mean = mix.positive_means[pick(rng)];
  Instance ins;
  ins.oracle_label = 1;
  ins.features.resize(cfg.feature_dim);
  for (int d = 0; d < cfg.feature_dim; ++d) ins.features[d] = mean[d] + gauss(rng);
  return ins;
}

Instance draw_negative(const SynthConfig& cfg, const Mixture& mix,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Instance ins;
  ins.oracle_label = 0;
  ins.features.resize(cfg.feature_dim);
  if (unif(rng) < cfg.outlier_rate) {
    const auto dir = random_unit_vector(cfg.feature_dim, rng);
    for (int d = 0; d < cfg.feature_dim; ++d) {
      ins.features[d] = mix.outlier_radius * dir[d] + gauss(rng);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(
        0, mix.background_means.size() - 1);
    const auto& mean = mix.background_means[pick(rng)];
    for (int d = 0; d < cfg.feature_dim; ++d) {
      ins.features[d] = mean[d] + gauss(rng);
    }
  }
  return ins;
}

Bag make_bag(const SynthConfig& cfg, const Mixture& mix, const std::string& id,
             bool positive, std::mt19937_64& rng) {
  Bag bag;
  bag.id = id;
  bag.bag_label = positive ? 1 : -1;
  std::uniform_int_distribution<int> size_dist(cfg.bag_size_min,
                                               cfg.bag_size_max);
  const int size = size_dist(rng);
  int n_pos = 0;
  if (positive) {
    std::uniform_int_distribution<int> pos_dist(cfg.positives_min,
                                                cfg.positives_max);
    n_pos = std::min(pos_dist(rng), size);
  }
  for (int i = 0; i < size; ++i) {
    bag.instances.push_back(i < n_pos ? draw_positive(cfg, mix, rng)
                                      : draw_negative(cfg, mix, rng));
  }
  // Shuffle so positives are not always at the front.
  for (std::size_t i = bag.instances.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(bag.instances[i - 1], bag.instances[pick(rng)]);
  }
  bag.live.assign(bag.instances.size(), 1);
  return bag;
}

std::string zero_padded(int v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", v);
  return buf;
}

}  // namespace

MilDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const Mixture mix = build_mixture(cfg, rng);

  MilDataset data;
  data.feature_dim = cfg.feature_dim;
  for (int i = 0; i < cfg.train_pos_bags; ++i) {
    data.train_pos.push_back(
        make_bag(cfg, mix, "train_p" + zero_padded(i), true, rng));
  }
  for (int i = 0; i < cfg.train_neg_bags; ++i) {
    data.train_neg.push_back(
        make_bag(cfg, mix, "train_n" + zero_padded(i), false, rng));
  }
  for (int i = 0; i < cfg.test_pos_bags; ++i) {
    data.test_pos.push_back(
        make_bag(cfg, mix, "test_p" + zero_padded(i), true, rng));
  }
  for (int i = 0; i < cfg.test_neg_bags; ++i) {
    data.test_neg.push_back(
        make_bag(cfg, mix, "test_n" + zero_padded(i), false, rng));
  }
  data.validate();
  return data;
}

namespace {

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_bag(std::ofstream& out, const Bag& bag) {
  for (const Instance& ins : bag.instances) {
    out << bag.id << ',' << bag.bag_label << ',' << ins.oracle_label;
    for (double v : ins.features) out << ',' << format_float(v);
    out << '\n';
  }
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

[[noreturn]] void parse_fail(long line_no, const std::string& what) {
  throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " +
                           what);
}

}  // namespace

void write_dataset(const MilDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "bag_id,bag_label,instance_label";
  for (int d = 0; d < data.feature_dim; ++d) out << ",f_" << d;
  out << '\n';
  for (const auto* group :
       {&data.train_pos, &data.train_neg, &data.test_pos, &data.test_neg}) {
    for (const Bag& bag : *group) write_bag(out, bag);
  }
}

MilDataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("dataset is empty: " + path);
  }
  const auto header = split_line(line);
  if (header.size() < 4 || header[0] != "bag_id" || header[1] != "bag_label" ||
      header[2] != "instance_label") {
    throw std::runtime_error("dataset has a malformed header");
  }
  const int dim = static_cast<int>(header.size()) - 3;
  for (int d = 0; d < dim; ++d) {
    if (header[3 + d] != "f_" + std::to_string(d)) {
      throw std::runtime_error("dataset has a malformed header");
    }
  }

  MilDataset data;
  data.feature_dim = dim;
  Bag current;
  bool have_bag = false;
  long line_no = 1;

  auto flush_bag = [&]() {
    if (!have_bag) return;
    current.live.assign(current.instances.size(), 1);
    current.validate(dim);  // rejects e.g. a positive bag with no positive
    const bool train = current.id.rfind("train", 0) == 0;
    const bool test = current.id.rfind("test", 0) == 0;
    if (!train && !test) {
      throw std::runtime_error("bag " + current.id +
                               ": id must start with 'train' or 'test'");
    }
    auto& group = train ? (current.bag_label == 1 ? data.train_pos : data.train_neg)
                        : (current.bag_label == 1 ? data.test_pos : data.test_neg);
    group.push_back(std::move(current));
    current = Bag{};
    have_bag = false;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (static_cast<int>(fields.size()) != 3 + dim) {
      parse_fail(line_no, "expected " + std::to_string(3 + dim) + " fields, got " +
                              std::to_string(fields.size()));
    }
    const std::string& bag_id = fields[0];
    if (bag_id.empty()) parse_fail(line_no, "empty bag_id");
    int bag_label = 0;
    if (fields[1] == "1") {
      bag_label = 1;
    } else if (fields[1] == "-1") {
      bag_label = -1;
    } else {
      parse_fail(line_no, "bag_label must be 1 or -1");
    }
    int instance_label = 0;
    if (fields[2] == "0") {
      instance_label = 0;
    } else if (fields[2] == "1") {
      instance_label = 1;
    } else {
      parse_fail(line_no, "instance_label must be 0 or 1");
    }

    if (have_bag && bag_id != current.id) flush_bag();
    if (!have_bag) {
      // Rows must stay grouped: a bag id must not reappear later.
      if (data.find_bag(bag_id) != nullptr) {
        parse_fail(line_no, "bag " + bag_id + " rows are not contiguous");
      }
      current.id = bag_id;
      current.bag_label = bag_label;
      have_bag = true;
    } else if (bag_label != current.bag_label) {
      parse_fail(line_no, "bag " + bag_id + " has conflicting bag labels");
    }

    Instance ins;
    ins.oracle_label = instance_label;
    ins.features.resize(dim);
    for (int d = 0; d < dim; ++d) {
      const std::string& s = fields[3 + d];
      char* end = nullptr;
      ins.features[d] = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0' || !std::isfinite(ins.features[d])) {
        parse_fail(line_no, "bad float '" + s + "'");
      }
    }
    current.instances.push_back(std::move(ins));
  }
  flush_bag();
  if (data.train_pos.empty() && data.train_neg.empty() &&
      data.test_pos.empty() && data.test_neg.empty()) {
    throw std::runtime_error("dataset has no bags: " + path);
  }
  data.validate();
  return data;
}

}  // namespace drmil
