#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "feduhb/rng.hpp"

namespace feduhb {

/// Labeled examples with a fixed feature dimension. Image datasets keep
/// their (rows, cols) geometry; features are pixel intensities in [0,1].
struct Dataset {
  std::size_t feature_dim = 0;
  int num_classes = 0;
  std::size_t rows = 0;  // image geometry, 0 for non-image data
  std::size_t cols = 0;
  std::vector<double> features;  // row-major, num_examples x feature_dim
  std::vector<int> labels;

  std::size_t num_examples() const { return labels.size(); }
  std::span<const double> example(std::size_t i) const {
    return {features.data() + i * feature_dim, feature_dim};
  }
  std::span<double> mutable_example(std::size_t i) {
    return {features.data() + i * feature_dim, feature_dim};
  }
};

/// Disjoint assignment of example indices to clients; shards cover the
/// training subset and every client is non-empty.
struct PartitionPlan {
  std::vector<std::vector<std::size_t>> client_shards;
  std::size_t num_clients() const { return client_shards.size(); }
};

/// Backdoor trigger: a constant-intensity patch, by default with a
/// label rewrite (dirty-label). relabel = false gives the clean-label
/// variant: the patch is stamped but labels stay.
struct TriggerSpec {
  std::size_t row = 24;
  std::size_t col = 24;
  std::size_t height = 4;
  std::size_t width = 4;
  double value = 1.0;
  int target_label = 0;
  double poison_fraction = 0.5;
  bool relabel = true;
};

/// Parameters of the deterministic synthetic image generator: one
/// smooth template per class, Gaussian pixel noise, margins kept dark.
/// label_noise relabels that fraction of examples uniformly at random
/// (both splits), putting a floor under the achievable loss.
struct SyntheticImageSpec {
  std::size_t num_train = 2000;
  std::size_t num_test = 1000;
  std::size_t rows = 28;
  std::size_t cols = 28;
  int num_classes = 10;
  double noise = 0.25;
  double label_noise = 0.0;
  std::size_t margin = 5;
  std::size_t duplicates = 1;  // copies per unique training example
};

Dataset load_idx(const std::filesystem::path& image_path,
                 const std::filesystem::path& label_path);
void save_idx(const Dataset& data, const std::filesystem::path& image_path,
              const std::filesystem::path& label_path);

PartitionPlan partition_iid(const Dataset& data, std::size_t num_clients, RngStream rng);

/// Stamps the trigger patch onto one image (features mutated in place).
void stamp_trigger(std::span<double> image, std::size_t rows, std::size_t cols,
                   const TriggerSpec& spec);

/// Poisons ceil(poison_fraction * |shard|) of the given examples:
/// trigger stamped, label replaced by target_label. Selection is
/// seed-deterministic; untouched examples are bitwise unchanged.
/// Returns the indices that were poisoned.
std::vector<std::size_t> inject_backdoor(Dataset& data, std::span<const std::size_t> shard,
                                         const TriggerSpec& spec, RngStream rng);

/// Deterministic train/test pair of MNIST-shaped synthetic images.
/// Pixels are quantized to 8-bit so IDX round-trips are bit-exact.
std::pair<Dataset, Dataset> gen_synthetic_images(const SyntheticImageSpec& spec,
                                                 std::uint64_t seed);

}  // namespace feduhb
