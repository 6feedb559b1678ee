#ifndef DRMIL_DATA_IO_HPP
#define DRMIL_DATA_IO_HPP

#include <cstdint>
#include <string>

#include "drmil/bag.hpp"

namespace drmil {

// Gaussian-mixture stand-in for real feature extractors: positive instances
// come from n_positive_modes unit-variance clusters placed cluster_separation
// away from the origin, negatives from a two-component background near the
// origin, with a fraction outlier_rate of negatives thrown 10x further out.
struct SynthConfig {
  int feature_dim = 8;
  int train_pos_bags = 30;
  int train_neg_bags = 30;
  int test_pos_bags = 20;
  int test_neg_bags = 20;
  int bag_size_min = 40;
  int bag_size_max = 40;
  int positives_min = 1;
  int positives_max = 3;
  int n_positive_modes = 2;
  double outlier_rate = 0.02;
  double cluster_separation = 3.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument naming the field
};

MilDataset generate(const SynthConfig& cfg);

// CSV with header bag_id,bag_label,instance_label,f_0,...,f_{D-1}; rows
// grouped by bag id; floats printed with 9 significant digits. The train/test
// split is carried by the bag id prefix ("train_" / "test_").
MilDataset read_dataset(const std::string& path);
void write_dataset(const MilDataset& data, const std::string& path);

}  // namespace drmil

#endif  // DRMIL_DATA_IO_HPP
