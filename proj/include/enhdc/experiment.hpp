#pragma once

// Train/evaluate machinery shared by the train and sweep commands and the
// acceptance suite.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "enhdc/classifier.hpp"
#include "enhdc/dataset.hpp"
#include "enhdc/ensemble.hpp"

namespace enhdc {

// Test-set predictions of one member before and after retraining. Both sets
// come from the width-clipped memory.
struct MemberRun {
  BaseClassifierConfig config;
  std::vector<Prediction> raw_predictions;
  std::vector<Prediction> predictions;
  double raw_accuracy = 0.0;
  double accuracy = 0.0;
  std::vector<std::size_t> retrain_updates;
};

struct TrainedMember {
  MemberRun run;
  BaseClassifier model;
};

// Trains (and optionally retrains) one member, finalizes it, and predicts
// every test sample with both the raw and the retrained memory.
[[nodiscard]] TrainedMember run_member(const BaseClassifierConfig& config, const Dataset& train,
                                       const Dataset& test, bool retrain);

// run_member for every config, spread over up to `workers` threads (0 picks
// the hardware concurrency). Results are in config order and identical to a
// serial run.
[[nodiscard]] std::vector<TrainedMember> run_members(std::span<const BaseClassifierConfig> configs,
                                                     const Dataset& train, const Dataset& test,
                                                     bool retrain, unsigned workers = 0);

struct EnsembleEvaluation {
  std::vector<VoteRecord> votes;
  double accuracy = 0.0;
  double mean_member_accuracy = 0.0;
  // confusion[truth][predicted]
  std::vector<std::vector<std::size_t>> confusion;
};

// Votes the members' stored predictions sample by sample.
[[nodiscard]] EnsembleEvaluation evaluate_members(std::span<const MemberRun* const> members,
                                                  VotingRule voting, const Dataset& test,
                                                  bool use_raw = false);

// Ensemble test accuracy from a vote table.
[[nodiscard]] double vote_accuracy(std::span<const VoteRecord> votes, const Dataset& test);

// Memoizes MemberRun results per member configuration so that sweep cells
// sharing members (e.g. sizes 8 and 12 under one seed) train them once.
class MemberCache {
 public:
  MemberCache(const Dataset& train, const Dataset& test, bool retrain)
      : train_(train), test_(test), retrain_(retrain) {}

  const MemberRun& get(const BaseClassifierConfig& config);
  [[nodiscard]] std::size_t trained() const noexcept { return runs_.size(); }

 private:
  using Key = std::tuple<std::size_t, int, int, int, std::size_t, std::uint64_t, int, bool, int, bool>;

  const Dataset& train_;
  const Dataset& test_;
  bool retrain_;
  std::map<Key, MemberRun> runs_;
};

}  // namespace enhdc
