#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "feduhb/dataset.hpp"
#include "feduhb/model.hpp"
#include "feduhb/param_vector.hpp"
#include "feduhb/rng.hpp"

namespace feduhb {

/// Membership-inference feature vector for one example: the target
/// model's softmax probabilities sorted in descending order.
std::vector<double> confidence_features(const ModelSpec& target_spec,
                                        const ParamVector& target_params,
                                        std::span<const double> x);

/// Binary classifier over confidence features: class 1 = member.
struct ShadowAttackModel {
  ModelSpec spec;          // logistic, input_dim = num_classes, 2 classes
  ParamVector params;
  double train_accuracy = 0.0;  // on its class-balanced training set
};

/// Trains the shadow attack on the pre-unlearning ("compromised")
/// model: members are the target clients' training examples,
/// non-members held-out test examples, class-balanced by subsampling
/// the larger side.
ShadowAttackModel train_shadow_attack(const ModelSpec& target_spec,
                                      const ParamVector& pre_unlearn_params,
                                      const Dataset& member_data,
                                      const Dataset& nonmember_data, RngStream rng);

struct MIAReport {
  double misr = 0.0;
  std::size_t member_classified = 0;
  std::size_t total = 0;
};

/// Fraction of target training examples the attack still classifies as
/// members, using features from the post-unlearning model.
MIAReport misr(const ShadowAttackModel& attack, const ModelSpec& target_spec,
               const ParamVector& post_unlearn_params, const Dataset& target_train);

struct BackdoorReport {
  double asr = 0.0;
  double clean_accuracy = 0.0;
  std::size_t eligible = 0;  // test examples with true label != target
  std::size_t hits = 0;
  TriggerSpec trigger;
};

/// Stamps the trigger on every eligible test example (true label !=
/// target) and measures the fraction predicted as the target label.
BackdoorReport asr(const ModelSpec& spec, const ParamVector& params, const Dataset& test,
                   const TriggerSpec& trigger);

}  // namespace feduhb
