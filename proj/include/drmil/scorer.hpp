#ifndef DRMIL_SCORER_HPP
#define DRMIL_SCORER_HPP

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace drmil {

// Instance scorer f(x; w) in [0,1]: D -> 32 -> 16 -> 1, ReLU on the hidden
// layers, sigmoid on the output. Dropout (inverted) after each hidden
// activation in train mode.
inline constexpr int kHidden1 = 32;
inline constexpr int kHidden2 = 16;

// Logits are clamped to +-kLogitClamp so log(f) and log(1-f) stay finite.
inline constexpr double kLogitClamp = 30.0;

struct ScorerParams {
  int input_dim = 0;
  std::vector<double> w1;  // kHidden1 x input_dim, row-major
  std::vector<double> b1;  // kHidden1
  std::vector<double> w2;  // kHidden2 x kHidden1, row-major
  std::vector<double> b2;  // kHidden2
  std::vector<double> w3;  // kHidden2
  double b3 = 0.0;

  std::size_t parameter_count() const;
  bool all_finite() const;
};

// Gradient container, shape-congruent with ScorerParams.
struct ScorerGrad {
  int input_dim = 0;
  std::vector<double> w1, b1, w2, b2, w3;
  double b3 = 0.0;

  void accumulate(const ScorerGrad& other);
  void scale(double s);
  bool all_finite() const;
};

enum class Mode { kTrain, kEval };

// Everything backward() needs from the matching forward() call.
struct ForwardCache {
  std::vector<double> x;
  std::vector<double> z1, a1;      // layer-1 pre-activation / post ReLU+dropout
  std::vector<double> z2, a2;      // layer-2
  std::vector<double> keep1, keep2;  // inverted-dropout multipliers (1/(1-q) or 0)
  double logit = 0.0;
  double score = 0.0;
  bool clamped = false;
};

ScorerParams init_scorer(std::uint64_t seed, int input_dim);
ScorerGrad zero_grad(int input_dim);

// Forward pass. In train mode dropout masks are drawn from `rng` (required);
// eval mode is deterministic and applies no dropout. Fills `cache` when given.
double forward(const ScorerParams& params, std::span<const double> x, Mode mode,
               double dropout_rate, std::mt19937_64* rng,
               ForwardCache* cache = nullptr);

// d(dscore * score)/d(params), reusing the forward pass's dropout masks.
ScorerGrad backward(const ScorerParams& params, const ForwardCache& cache,
                    double dscore);

// params - learning_rate * grad. Throws if the gradient has non-finite entries.
ScorerParams sgd_step(ScorerParams params, const ScorerGrad& grad,
                      double learning_rate);

// Checkpoint IO: JSON with input_dim, seed and all layers in order.
void save_scorer(const ScorerParams& params, std::uint64_t seed,
                 const std::string& path);
struct ScorerCheckpoint {
  ScorerParams params;
  std::uint64_t seed = 0;
};
ScorerCheckpoint load_scorer(const std::string& path);

enum class Optimizer { kSgd, kAdagrad };

struct TrainConfig {
  double learning_rate = 0.01;
  double dropout_rate = 0.6;
  std::uint64_t seed = 0;
  int epochs_initial = 60;
  int epochs_per_step = 20;
  // Bag pairs averaged into one update; 0 batches the whole epoch.
  int pairs_per_batch = 0;
  Optimizer optimizer = Optimizer::kAdagrad;
};

// Per-parameter squared-gradient accumulator for Adagrad. The rare but
// consistent gradients that positive-mode instances emit would otherwise be
// drowned by the frequent noisy hinge pushes.
struct AdagradState {
  ScorerGrad accum;
  bool initialized = false;

  void apply(ScorerParams& params, const ScorerGrad& grad,
             double learning_rate);
};

}  // namespace drmil

#endif  // DRMIL_SCORER_HPP
