#include "feduhb/attacks.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "feduhb/errors.hpp"

namespace feduhb {

std::vector<double> confidence_features(const ModelSpec& target_spec,
                                        const ParamVector& target_params,
                                        std::span<const double> x) {
  std::vector<double> probs = predict_proba(target_spec, target_params, x);
  std::sort(probs.begin(), probs.end(), std::greater<double>());
  return probs;
}

namespace {

Dataset feature_dataset(const ModelSpec& target_spec, const ParamVector& target_params,
                        const Dataset& members, const Dataset& nonmembers,
                        RngStream& rng) {
  const std::size_t per_class = std::min(members.num_examples(), nonmembers.num_examples());
  if (per_class == 0) {
    throw MetricError("attack setup: member and non-member sets must be non-empty");
  }
  auto pick = [&](const Dataset& d) {
    std::vector<std::size_t> idx(d.num_examples());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(idx);
    idx.resize(per_class);
    return idx;
  };
  const std::vector<std::size_t> member_idx = pick(members);
  const std::vector<std::size_t> nonmember_idx = pick(nonmembers);

  Dataset features;
  features.feature_dim = static_cast<std::size_t>(target_spec.num_classes);
  features.num_classes = 2;
  features.features.reserve(2 * per_class * features.feature_dim);
  features.labels.reserve(2 * per_class);
  auto append = [&](const Dataset& d, std::span<const std::size_t> idx, int label) {
    for (std::size_t i : idx) {
      const std::vector<double> f =
          confidence_features(target_spec, target_params, d.example(i));
      features.features.insert(features.features.end(), f.begin(), f.end());
      features.labels.push_back(label);
    }
  };
  append(nonmembers, nonmember_idx, 0);
  append(members, member_idx, 1);
  return features;
}

}  // namespace

ShadowAttackModel train_shadow_attack(const ModelSpec& target_spec,
                                      const ParamVector& pre_unlearn_params,
                                      const Dataset& member_data,
                                      const Dataset& nonmember_data, RngStream rng) {
  const Dataset features =
      feature_dataset(target_spec, pre_unlearn_params, member_data, nonmember_data, rng);

  ShadowAttackModel attack;
  attack.spec = ModelSpec{ModelKind::kLogistic,
                          static_cast<std::size_t>(target_spec.num_classes), 2, 0};
  attack.params = init_params(attack.spec, rng.derive(0xA77C));

  // Full-batch gradient descent; the feature space is tiny.
  std::vector<std::size_t> all(features.num_examples());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const double lr = 0.5;
  for (std::size_t it = 0; it < 400; ++it) {
    const GradResult g = grad(attack.spec, attack.params, features, all);
    attack.params = add_scaled(attack.params, -lr, g.gradient);
  }
  attack.train_accuracy = accuracy(attack.spec, attack.params, features);
  return attack;
}

MIAReport misr(const ShadowAttackModel& attack, const ModelSpec& target_spec,
               const ParamVector& post_unlearn_params, const Dataset& target_train) {
  if (target_train.num_examples() == 0) throw MetricError("misr: empty target data");
  if (attack.spec.input_dim != static_cast<std::size_t>(target_spec.num_classes)) {
    throw ShapeError("misr: attack feature dim does not match target model classes");
  }
  MIAReport report;
  report.total = target_train.num_examples();
  for (std::size_t i = 0; i < target_train.num_examples(); ++i) {
    const std::vector<double> f =
        confidence_features(target_spec, post_unlearn_params, target_train.example(i));
    const std::vector<double> p = predict_proba(attack.spec, attack.params, f);
    if (p[1] > 0.5) ++report.member_classified;
  }
  report.misr = double(report.member_classified) / double(report.total);
  return report;
}

BackdoorReport asr(const ModelSpec& spec, const ParamVector& params, const Dataset& test,
                   const TriggerSpec& trigger) {
  if (test.rows * test.cols != test.feature_dim || test.rows == 0) {
    throw MetricError("asr: test data has no image geometry");
  }
  BackdoorReport report;
  report.trigger = trigger;
  report.clean_accuracy = accuracy(spec, params, test);

  std::vector<double> stamped(test.feature_dim);
  for (std::size_t i = 0; i < test.num_examples(); ++i) {
    if (test.labels[i] == trigger.target_label) continue;  // excluded from ASR
    const auto x = test.example(i);
    std::copy(x.begin(), x.end(), stamped.begin());
    stamp_trigger(stamped, test.rows, test.cols, trigger);
    ++report.eligible;
    if (predict(spec, params, stamped) == trigger.target_label) ++report.hits;
  }
  if (report.eligible == 0) throw MetricError("asr: no eligible test examples");
  report.asr = double(report.hits) / double(report.eligible);
  return report;
}

}  // namespace feduhb
