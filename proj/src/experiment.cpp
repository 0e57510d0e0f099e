#include "enhdc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace enhdc {

TrainedMember run_member(const BaseClassifierConfig& config, const Dataset& train,
                         const Dataset& test, bool retrain) {
  BaseClassifier model = enhdc::train(train, config);
  const AssociativeMemory raw_memory = store_at_width(model.memory(), config.width, config.storage);
  MemberRun run;
  run.config = config;
  if (retrain) {
    run.retrain_updates = enhdc::retrain(model, train, config.retrain_epochs).updates_per_epoch;
  }
  model.finalize();

  std::size_t raw_correct = 0;
  std::size_t correct = 0;
  run.raw_predictions.reserve(test.size());
  run.predictions.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Hypervector query = model.encode(test.row(i));
    const auto truth = static_cast<std::size_t>(test.labels[i]);
    run.predictions.push_back(predict(model.memory(), query));
    run.raw_predictions.push_back(retrain ? predict(raw_memory, query) : run.predictions.back());
    raw_correct += run.raw_predictions.back().label == truth ? 1 : 0;
    correct += run.predictions.back().label == truth ? 1 : 0;
  }
  if (test.size() > 0) {
    run.raw_accuracy = static_cast<double>(raw_correct) / static_cast<double>(test.size());
    run.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  }
  return TrainedMember{std::move(run), std::move(model)};
}

std::vector<TrainedMember> run_members(std::span<const BaseClassifierConfig> configs,
                                       const Dataset& train, const Dataset& test, bool retrain,
                                       unsigned workers) {
  if (workers == 0) {
    workers = std::max(1U, std::thread::hardware_concurrency());
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, configs.size()));
  std::vector<std::optional<TrainedMember>> slots(configs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        slots[i].emplace(run_member(configs[i], train, test, retrain));
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    for (unsigned t = 0; t < workers; ++t) {
      threads.emplace_back(work);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  std::vector<TrainedMember> out;
  out.reserve(slots.size());
  for (auto& slot : slots) {
    out.push_back(std::move(*slot));
  }
  return out;
}

double vote_accuracy(std::span<const VoteRecord> votes, const Dataset& test) {
  if (votes.empty()) {
    return 0.0;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    correct += votes[i].label == static_cast<std::size_t>(test.labels.at(i)) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(votes.size());
}

EnsembleEvaluation evaluate_members(std::span<const MemberRun* const> members, VotingRule voting,
                                    const Dataset& test, bool use_raw) {
  if (members.empty()) {
    throw std::invalid_argument("an ensemble needs at least one member");
  }
  EnsembleEvaluation eval;
  const std::size_t k = test.classes();
  eval.confusion.assign(k, std::vector<std::size_t>(k, 0));
  eval.votes.reserve(test.size());
  std::vector<Prediction> predictions(members.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto& source = use_raw ? members[m]->raw_predictions : members[m]->predictions;
      predictions[m] = source.at(i);
    }
    eval.votes.push_back(vote(voting, predictions));
    const auto truth = static_cast<std::size_t>(test.labels[i]);
    if (truth < k && eval.votes.back().label < k) {
      ++eval.confusion[truth][eval.votes.back().label];
    }
  }
  eval.accuracy = vote_accuracy(eval.votes, test);
  double sum = 0.0;
  for (const auto* m : members) {
    sum += use_raw ? m->raw_accuracy : m->accuracy;
  }
  eval.mean_member_accuracy = sum / static_cast<double>(members.size());
  return eval;
}

const MemberRun& MemberCache::get(const BaseClassifierConfig& c) {
  const Key key{c.dim,
                bits(c.width),
                static_cast<int>(c.encoder),
                c.levels,
                c.window,
                c.seed.value,
                c.retrain_epochs,
                c.shuffle_retrain,
                static_cast<int>(c.storage),
                c.per_feature_quantizer};
  const auto it = runs_.find(key);
  if (it != runs_.end()) {
    return it->second;
  }
  return runs_.emplace(key, run_member(c, train_, test_, retrain_).run).first->second;
}

}  // namespace enhdc
