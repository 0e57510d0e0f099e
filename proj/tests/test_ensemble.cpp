#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "enhdc/ensemble.hpp"
#include "enhdc/random.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace enhdc;

namespace {

Prediction pred(std::size_t label, std::vector<double> sims) {
  return Prediction{label, std::move(sims)};
}

BaseClassifierConfig toy_base(std::size_t dim) {
  BaseClassifierConfig c;
  c.dim = dim;
  c.levels = 8;
  c.retrain_epochs = 3;
  return c;
}

}  // namespace

TEST_CASE("voting rule names") {
  CHECK(to_string(VotingRule::Hard) == "hard");
  CHECK(voting_rule_from_string("soft") == VotingRule::Soft);
  CHECK_THROWS(voting_rule_from_string("weighted"));
}

TEST_CASE("hard voting") {
  SUBCASE("strict majority") {
    const std::vector<Prediction> p{pred(0, {0.5, 0.1}), pred(0, {0.4, 0.3}), pred(1, {0.1, 0.9})};
    const auto r = vote_hard(p);
    CHECK(r.label == 0);
    CHECK(r.votes == std::vector<std::size_t>{2, 1});
  }
  SUBCASE("tie broken by summed similarity") {
    const std::vector<Prediction> p{pred(0, {0.60, 0.45}), pred(1, {0.30, 0.50})};
    const auto r = vote_hard(p);
    CHECK(r.similarity_sums[0] == doctest::Approx(0.90));
    CHECK(r.similarity_sums[1] == doctest::Approx(0.95));
    CHECK(r.label == 1);
  }
  SUBCASE("residual tie goes to the lowest index") {
    const std::vector<Prediction> p{pred(1, {0.5, 0.5, 0.5}), pred(2, {0.5, 0.5, 0.5})};
    CHECK(vote_hard(p).label == 1);
  }
  SUBCASE("unanimous vote ignores similarities") {
    const std::vector<Prediction> p{pred(2, {0.9, 0.9, 0.1}), pred(2, {0.9, 0.9, 0.1})};
    CHECK(vote_hard(p).label == 2);
  }
  SUBCASE("empty input") { CHECK_THROWS(vote_hard(std::vector<Prediction>{})); }
}

TEST_CASE("soft voting") {
  const std::vector<Prediction> p{pred(1, {0.5, 0.7, 0.1}), pred(0, {0.7, 0.8, 0.2})};
  const auto r = vote_soft(p);
  CHECK(r.similarity_sums[0] == doctest::Approx(1.2));
  CHECK(r.similarity_sums[1] == doctest::Approx(1.5));
  CHECK(r.similarity_sums[2] == doctest::Approx(0.3));
  CHECK(r.label == 1);
  CHECK(r.votes == std::vector<std::size_t>{1, 1, 0});

  const std::vector<Prediction> one{pred(2, {0.1, 0.2, 0.3})};
  CHECK(vote_soft(one).label == 2);

  const std::vector<Prediction> missing{pred(0, {0.5, 0.1}), pred(1, {})};
  CHECK_THROWS(vote_soft(missing));
  CHECK(vote(VotingRule::Soft, p).label == vote_soft(p).label);
  CHECK(vote(VotingRule::Hard, p).label == vote_hard(p).label);
}

TEST_CASE("hard and soft can disagree") {
  // A votes c0 by a hair; B and C vote c1 weakly; A is very confident in c0
  // on the other classes' expense.
  const std::vector<Prediction> p{pred(0, {0.95, -0.9}), pred(1, {0.30, 0.31}), pred(1, {0.30, 0.31})};
  CHECK(vote_hard(p).label == 1);
  CHECK(vote_soft(p).label == 0);
}

TEST_CASE("votes match the oracle and are order-invariant") {
  SplitMix64 rng(Seed{21});
  for (int t = 0; t < 500; ++t) {
    const std::size_t members = 1 + rng.below(6);
    const std::size_t k = 2 + rng.below(4);
    std::vector<Prediction> p;
    std::vector<std::size_t> labels;
    std::vector<std::vector<double>> sims;
    for (std::size_t m = 0; m < members; ++m) {
      std::vector<double> s(k);
      // Coarse values so that ties occur often.
      for (auto& v : s) v = static_cast<double>(rng.below(5)) / 4.0;
      const auto label = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
      p.push_back(pred(label, s));
      labels.push_back(label);
      sims.push_back(s);
    }
    const auto hard = vote_hard(p).label;
    const auto soft = vote_soft(p).label;
    CHECK(hard == oracle::majority(labels, sims, k));
    CHECK(soft == oracle::soft(sims, k));
    auto shuffled = p;
    shuffle(std::span<Prediction>(shuffled), rng);
    CHECK(vote_hard(shuffled).label == hard);
    CHECK(vote_soft(shuffled).label == soft);
  }
}

TEST_CASE("member presets") {
  const auto base = toy_base(500);
  const auto uniform = uniform_members(8, base, Seed{3});
  REQUIRE(uniform.size() == 8);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(uniform[i].seed == derive_seed(Seed{3}, i));
    CHECK(uniform[i].dim == 500);
    seeds.insert(uniform[i].seed.value);
  }
  CHECK(seeds.size() == 8);

  const DiversityAxes axes;
  const auto diverse = diverse_members(12, axes, base, Seed{3});
  REQUIRE(diverse.size() == 12);
  CHECK(diverse[0].encoder == EncoderKind::Record);
  CHECK(diverse[1].encoder == EncoderKind::NGram);
  CHECK(diverse[0].dim == 1000);
  CHECK(diverse[2].dim == 5000);
  CHECK(diverse[4].dim == 10000);
  CHECK(diverse[5].width == DataWidth::Int8);
  CHECK(diverse[6].width == DataWidth::Int16);
  CHECK(diverse[6].dim == 1000);
  CHECK(diverse[6].encoder == EncoderKind::Record);
  std::set<std::tuple<int, std::size_t, int>> cells;
  for (const auto& c : diverse) cells.insert({static_cast<int>(c.encoder), c.dim, bits(c.width)});
  CHECK(cells.size() == 12);
  CHECK(diverse[7].seed == uniform[7].seed);

  CHECK_THROWS(diverse_members(2, DiversityAxes{{}, {1000}, {DataWidth::Int8}}, base, Seed{1}));
}

TEST_CASE("ensemble config validation") {
  EnsembleConfig c;
  CHECK_THROWS(c.validate());
  c.members = uniform_members(3, toy_base(100), Seed{1});
  CHECK_NOTHROW(c.validate());
  c.members[2].seed = c.members[0].seed;
  CHECK_THROWS(c.validate());
  c.members[2].seed = Seed{999};
  c.members[1].levels = 1;
  CHECK_THROWS(c.validate());
}

TEST_CASE("build_and_train and inference") {
  const auto data = fixtures::blobs(300, 16, 3, 22, 0.5F);

  SUBCASE("one member equals its base classifier") {
    EnsembleConfig c{uniform_members(1, toy_base(400), Seed{5}), VotingRule::Hard};
    const auto model = build_and_train(c, data, true);
    auto base = train(data, c.members[0]);
    (void)retrain(base, data, c.members[0].retrain_epochs);
    base.finalize();
    CHECK(model.members()[0].memory() == base.memory());
    for (const auto rule : {VotingRule::Hard, VotingRule::Soft}) {
      EnsembleModel m = model;
      m.set_voting(rule);
      const auto votes = ensemble_infer(m, data);
      REQUIRE(votes.size() == data.size());
      for (std::size_t i = 0; i < data.size(); ++i) CHECK(votes[i].label == base.infer(data.row(i)).label);
    }
  }
  SUBCASE("distinct seeds give distinct memories") {
    EnsembleConfig c{uniform_members(8, toy_base(400), Seed{6}), VotingRule::Hard};
    const auto model = build_and_train(c, data, false);
    REQUIRE(model.size() == 8);
    for (std::size_t a = 0; a < 8; ++a) {
      for (std::size_t b = a + 1; b < 8; ++b) {
        CHECK_FALSE(model.members()[a].memory() == model.members()[b].memory());
        CHECK_FALSE(model.members()[a].encoder().level_memory()->operator[](0) ==
                    model.members()[b].encoder().level_memory()->operator[](0));
      }
    }
  }
  SUBCASE("diverse ensemble, batch order and sanity bound") {
    DiversityAxes axes{{EncoderKind::Record, EncoderKind::NGram}, {200, 400}, {DataWidth::Int8, DataWidth::Int16}};
    EnsembleConfig c{diverse_members(5, axes, toy_base(200), Seed{7}), VotingRule::Hard};
    const auto model = build_and_train(c, data, true);
    const auto votes = ensemble_infer(model, data);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(votes[i].label == ensemble_infer(model, data.row(i)).label);
      CHECK(votes[i].members.size() == 5);
      correct += votes[i].label == static_cast<std::size_t>(data.labels[i]) ? 1 : 0;
    }
    double worst = 1.0;
    for (const auto& m : model.members()) worst = std::min(worst, accuracy(m, data));
    CHECK(static_cast<double>(correct) / data.size() >= worst);
  }
  SUBCASE("members must share a label set") {
    auto other = data;
    other.label_names = {"x", "y", "z"};
    std::vector<BaseClassifier> members;
    members.push_back(train(data, toy_base(100)));
    auto c2 = toy_base(100);
    c2.seed = Seed{99};
    members.push_back(train(other, c2));
    CHECK_THROWS(EnsembleModel(std::move(members), VotingRule::Hard));
  }
}

TEST_CASE("model size") {
  CHECK(model_size_bits(8, 10000, 10, 1).bits == 800000);
  CHECK(model_size_bits(8, 10000, 10, 1).kilobits() == 800.0);
  CHECK(model_size_bits(8, 1000, 10, 8).kilobits() == 640.0);
  CHECK(model_size_bits(8, 10000, 12, 1).kilobits() == 960.0);
  CHECK(model_size_bits(8, 1000, 12, 8).kilobits() == 768.0);
  CHECK(model_size_bits(8, 10000, 12, 1).kilobits() - model_size_bits(8, 1000, 12, 8).kilobits() == 192.0);
  CHECK(model_size_bits(8, 1000, 12, 1).kilobits() == 96.0);
  CHECK(model_size_bits(16, 10000, 26, 1).bytes() == 520000.0);
  CHECK_THROWS(model_size_bits(0, 1000, 10, 1));
  CHECK_THROWS(model_size_bits(8, 1000, 10, 0));

  const auto data = fixtures::blobs(60, 4, 3, 1);
  DiversityAxes axes{{EncoderKind::Record}, {100, 200}, {DataWidth::Int8, DataWidth::Int16}};
  EnsembleConfig c{diverse_members(4, axes, toy_base(100), Seed{1}), VotingRule::Hard};
  const auto model = build_and_train(c, data, false);
  // 3 classes: 8*100 + 8*200 + 16*100 + 16*200
  CHECK(model_size(model).bits == 3 * (800 + 1600 + 1600 + 3200));
}
