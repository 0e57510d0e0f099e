#include "enhdc/ensemble.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

#include "enhdc/random.hpp"

namespace enhdc {

std::string_view to_string(VotingRule rule) noexcept {
  return rule == VotingRule::Hard ? "hard" : "soft";
}

VotingRule voting_rule_from_string(std::string_view name) {
  if (name == "hard") {
    return VotingRule::Hard;
  }
  if (name == "soft") {
    return VotingRule::Soft;
  }
  throw std::invalid_argument("unknown voting rule '" + std::string(name) +
                              "' (expected hard or soft)");
}

void EnsembleConfig::validate() const {
  if (members.empty()) {
    throw std::invalid_argument("an ensemble needs at least one member");
  }
  std::set<std::uint64_t> seeds;
  for (const auto& m : members) {
    m.validate();
    if (!seeds.insert(m.seed.value).second) {
      throw std::invalid_argument("ensemble members must have distinct seeds");
    }
  }
}

std::vector<BaseClassifierConfig> uniform_members(std::size_t count,
                                                  const BaseClassifierConfig& base, Seed seed) {
  std::vector<BaseClassifierConfig> out(count, base);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].seed = derive_seed(seed, i);
  }
  return out;
}

std::vector<BaseClassifierConfig> diverse_members(std::size_t count, const DiversityAxes& axes,
                                                  const BaseClassifierConfig& base, Seed seed) {
  if (axes.encoders.empty() || axes.dims.empty() || axes.widths.empty()) {
    throw std::invalid_argument("every diversity axis needs at least one value");
  }
  const std::size_t ne = axes.encoders.size();
  const std::size_t nd = axes.dims.size();
  const std::size_t nw = axes.widths.size();
  auto out = uniform_members(count, base, seed);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].encoder = axes.encoders[i % ne];
    out[i].dim = axes.dims[(i / ne) % nd];
    out[i].width = axes.widths[(i / (ne * nd)) % nw];
  }
  return out;
}

namespace {

std::size_t class_count(std::span<const Prediction> predictions) {
  std::size_t k = 0;
  for (const auto& p : predictions) {
    k = std::max({k, p.similarities.size(), p.label + 1});
  }
  return k;
}

VoteRecord tally(std::span<const Prediction> predictions) {
  if (predictions.empty()) {
    throw std::invalid_argument("voting needs at least one prediction");
  }
  VoteRecord r;
  r.members.assign(predictions.begin(), predictions.end());
  const std::size_t k = class_count(predictions);
  r.votes.assign(k, 0);
  r.similarity_sums.assign(k, 0.0);
  for (const auto& p : predictions) {
    ++r.votes[p.label];
    for (std::size_t c = 0; c < p.similarities.size(); ++c) {
      r.similarity_sums[c] += p.similarities[c];
    }
  }
  return r;
}

}  // namespace

VoteRecord vote_hard(std::span<const Prediction> predictions) {
  VoteRecord r = tally(predictions);
  std::size_t best = 0;
  for (std::size_t c = 1; c < r.votes.size(); ++c) {
    if (r.votes[c] > r.votes[best] ||
        (r.votes[c] == r.votes[best] && r.similarity_sums[c] > r.similarity_sums[best])) {
      best = c;
    }
  }
  r.label = best;
  return r;
}

VoteRecord vote_soft(std::span<const Prediction> predictions) {
  VoteRecord r = tally(predictions);
  for (const auto& p : predictions) {
    if (p.similarities.size() != r.similarity_sums.size()) {
      throw std::invalid_argument("soft voting needs every member's full similarity vector");
    }
  }
  r.label = argmax(r.similarity_sums);
  return r;
}

VoteRecord vote(VotingRule rule, std::span<const Prediction> predictions) {
  return rule == VotingRule::Hard ? vote_hard(predictions) : vote_soft(predictions);
}

EnsembleModel::EnsembleModel(std::vector<BaseClassifier> members, VotingRule voting)
    : members_(std::move(members)), voting_(voting) {
  if (members_.empty()) {
    throw std::invalid_argument("an ensemble needs at least one member");
  }
  for (const auto& m : members_) {
    if (m.classes() != members_.front().classes() ||
        m.label_names() != members_.front().label_names()) {
      throw std::invalid_argument("ensemble members disagree on the label set");
    }
  }
}

EnsembleModel build_and_train(const EnsembleConfig& config, const Dataset& train, bool retrain) {
  config.validate();
  std::vector<BaseClassifier> members;
  members.reserve(config.members.size());
  for (const auto& member_config : config.members) {
    BaseClassifier model = enhdc::train(train, member_config);
    if (retrain) {
      enhdc::retrain(model, train, member_config.retrain_epochs);
    }
    model.finalize();
    members.push_back(std::move(model));
  }
  return EnsembleModel(std::move(members), config.voting);
}

VoteRecord ensemble_infer(const EnsembleModel& model, std::span<const float> query) {
  std::vector<Prediction> predictions;
  predictions.reserve(model.size());
  for (const auto& m : model.members()) {
    predictions.push_back(m.infer(query));
  }
  return vote(model.voting(), predictions);
}

std::vector<VoteRecord> ensemble_infer(const EnsembleModel& model, const Dataset& queries) {
  std::vector<VoteRecord> out;
  out.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    out.push_back(ensemble_infer(model, queries.row(i)));
  }
  return out;
}

ModelSize model_size_bits(std::uint64_t width_bits, std::uint64_t dim, std::uint64_t classes,
                          std::uint64_t classifiers) {
  if (width_bits == 0 || dim == 0 || classes == 0 || classifiers == 0) {
    throw std::invalid_argument("model size factors must all be positive");
  }
  return ModelSize{width_bits * dim * classes * classifiers};
}

ModelSize model_size(const EnsembleModel& model) {
  ModelSize total;
  for (const auto& m : model.members()) {
    total.bits += model_size_bits(static_cast<std::uint64_t>(bits(m.config().width)),
                                  m.config().dim, m.classes(), 1)
                      .bits;
  }
  return total;
}

}  // namespace enhdc
