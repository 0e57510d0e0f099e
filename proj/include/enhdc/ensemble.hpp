#pragma once

// Ensembles of diverse base classifiers combined by hard (majority) or soft
// (summed cosine) voting, plus model-size accounting.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "enhdc/classifier.hpp"
#include "enhdc/dataset.hpp"

namespace enhdc {

enum class VotingRule : std::uint8_t { Hard = 0, Soft = 1 };

[[nodiscard]] std::string_view to_string(VotingRule rule) noexcept;
[[nodiscard]] VotingRule voting_rule_from_string(std::string_view name);

struct EnsembleConfig {
  std::vector<BaseClassifierConfig> members;
  VotingRule voting = VotingRule::Hard;

  // Throws unless there is at least one member, every member config is
  // valid, and member seeds are pairwise distinct.
  void validate() const;
};

// The axes the diversity-enhanced preset cycles through.
struct DiversityAxes {
  std::vector<EncoderKind> encoders{EncoderKind::Record, EncoderKind::NGram};
  std::vector<std::size_t> dims{1000, 5000, 10000};
  std::vector<DataWidth> widths{DataWidth::Int8, DataWidth::Int16};
};

// `count` copies of `base` that differ only in their seed, member i getting
// derive_seed(seed, i).
[[nodiscard]] std::vector<BaseClassifierConfig> uniform_members(std::size_t count,
                                                                const BaseClassifierConfig& base,
                                                                Seed seed);

// Round-robin over encoders x dims x widths: member i takes
// encoders[i % E], dims[(i / E) % D], widths[(i / (E * D)) % W], so the
// encoder axis changes fastest. Other fields come from `base`; seeds as in
// uniform_members.
[[nodiscard]] std::vector<BaseClassifierConfig> diverse_members(std::size_t count,
                                                                const DiversityAxes& axes,
                                                                const BaseClassifierConfig& base,
                                                                Seed seed);

struct VoteRecord {
  std::vector<Prediction> members;
  std::size_t label = 0;
  // Votes per class (every rule fills this in).
  std::vector<std::size_t> votes;
  // Sum over members of each class similarity.
  std::vector<double> similarity_sums;
};

// Majority vote. Ties go to the tied class with the highest summed
// similarity, then to the lowest class index.
[[nodiscard]] VoteRecord vote_hard(std::span<const Prediction> predictions);
// argmax over classes of the summed similarities; ties to the lowest index.
// Throws if any member lacks a full similarity vector.
[[nodiscard]] VoteRecord vote_soft(std::span<const Prediction> predictions);
[[nodiscard]] VoteRecord vote(VotingRule rule, std::span<const Prediction> predictions);

class EnsembleModel {
 public:
  EnsembleModel(std::vector<BaseClassifier> members, VotingRule voting);

  [[nodiscard]] std::span<const BaseClassifier> members() const noexcept { return members_; }
  [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
  [[nodiscard]] std::size_t classes() const noexcept { return members_.front().classes(); }
  [[nodiscard]] VotingRule voting() const noexcept { return voting_; }
  void set_voting(VotingRule voting) noexcept { voting_ = voting; }

 private:
  std::vector<BaseClassifier> members_;
  VotingRule voting_;
};

// Trains every member on the full training set with its own configuration,
// retrains it for its configured epochs when `retrain` is set, then clips it
// to its storage width.
[[nodiscard]] EnsembleModel build_and_train(const EnsembleConfig& config, const Dataset& train,
                                            bool retrain);

[[nodiscard]] VoteRecord ensemble_infer(const EnsembleModel& model, std::span<const float> query);
[[nodiscard]] std::vector<VoteRecord> ensemble_infer(const EnsembleModel& model,
                                                     const Dataset& queries);

struct ModelSize {
  std::uint64_t bits = 0;
  [[nodiscard]] double kilobits() const noexcept { return static_cast<double>(bits) / 1000.0; }
  [[nodiscard]] double bytes() const noexcept { return static_cast<double>(bits) / 8.0; }
};

// width_bits * dim * classes * classifiers. Kb means kilobits (bits / 1000).
[[nodiscard]] ModelSize model_size_bits(std::uint64_t width_bits, std::uint64_t dim,
                                        std::uint64_t classes, std::uint64_t classifiers);
// Sum of the class-hypervector storage of every member.
[[nodiscard]] ModelSize model_size(const EnsembleModel& model);

}  // namespace enhdc
