#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "../oracles/naive_ranker.hpp"
#include "../support/fixtures.hpp"
#include "doctest.h"
#include "qa/binary_io.hpp"
#include "qa/checkpoint.hpp"
#include "qa/error.hpp"
#include "qa/optim.hpp"
#include "qa/rankings.hpp"
#include "qa/ranker.hpp"
#include "qa/rng.hpp"
#include "qa/synthetic.hpp"
#include "qa/trainer.hpp"

using namespace qa::ranker;
using qa::Matrix;

namespace {

RankerConfig unit_config() {
  RankerConfig c;
  c.k_disc = 1;
  c.d = c.m = c.q = c.h = 1;
  return c;
}

/// Every weight 1, every bias 0: A = S, K = tanh S, V = relu S, logit = relu(Y).
RankerParams unit_params() {
  auto p = RankerParams::zeros(unit_config());
  for (qa::ParamTensor* t : p.all()) {
    if (!t->name.starts_with("b_")) t->value.fill(1.0);
  }
  return p;
}

QuestionInstance instance_from(const std::vector<Matrix>& mats, std::size_t answer) {
  QuestionInstance inst;
  inst.question_id = "q";
  inst.answer_index = answer;
  for (std::size_t c = 0; c < mats.size(); ++c) {
    qa::disc::ScoreMatrix m;
    m.question_id = "q";
    m.candidate_index = c;
    m.row_ids = fixtures::rows_for(mats[c].rows());
    m.values = mats[c];
    for (std::size_t j = 0; j < mats[c].cols(); ++j) {
      m.doc_ids.push_back("c" + std::to_string(c) + "d" + std::to_string(j));
    }
    inst.candidates.push_back(std::move(m));
  }
  return inst;
}

std::vector<QuestionInstance> random_set(std::uint64_t seed, std::size_t n, std::size_t k) {
  qa::Rng rng(seed);
  std::vector<QuestionInstance> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(fixtures::random_instance(rng, "r" + std::to_string(i), k, {3, 2, 4, 1}));
  }
  return out;
}

}  // namespace

TEST_SUITE("ranker") {
  TEST_CASE("hand-computed single-width example") {
    const auto p = unit_params();
    const auto inst = instance_from({Matrix{{0.0, 1.0}}, Matrix{{0.0}}}, 0);
    const auto pred = predict(inst, p);
    // P = softmax([tanh 0, tanh 1]) and Y = P[1] since V = [0, 1].
    CHECK(pred.attention[0].weights[1] == doctest::Approx(0.6816997421945262).epsilon(1e-14));
    CHECK(pred.logits[0] == doctest::Approx(0.6816997421945262).epsilon(1e-14));
    CHECK(pred.logits[1] == 0.0);
    CHECK(pred.predicted_index == 0);
    CHECK(pred.probabilities[0] + pred.probabilities[1] == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("zero parameters give uniform attention and uniform answers") {
    RankerConfig c = fixtures::small_config(3);
    const auto p = RankerParams::zeros(c);
    qa::Rng rng(1);
    const auto inst = fixtures::random_instance(rng, "z", 3, {5, 2, 3, 4});
    const auto pred = predict(inst, p);
    for (double prob : pred.probabilities) CHECK(prob == doctest::Approx(0.25).epsilon(1e-15));
    for (double w : pred.attention[0].weights) CHECK(w == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(pred.predicted_index == 0);
    CHECK(question_loss(inst, p) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  }

  TEST_CASE("a single document takes all the attention") {
    const auto p = fixtures::random_params(fixtures::small_config(3), 4);
    qa::Rng rng(2);
    const auto inst = fixtures::random_instance(rng, "one", 3, {1, 1});
    const auto pred = predict(inst, p);
    CHECK(pred.attention[0].weights == std::vector<double>{1.0});
    CHECK(pred.attention[1].weights == std::vector<double>{1.0});
  }

  TEST_CASE("a candidate without documents has no evidence") {
    const auto p = fixtures::random_params(fixtures::small_config(3), 5);
    qa::Rng rng(3);
    const auto inst = fixtures::random_instance(rng, "empty", 3, {0, 4});
    const auto pred = predict(inst, p);
    CHECK(pred.attention[0].no_evidence);
    CHECK(pred.attention[0].weights.empty());
    const std::vector<double> zero(p.w_v.value.rows(), 0.0);
    CHECK(pred.logits[0] == score_candidate(zero, p));
    CHECK_FALSE(pred.attention[1].no_evidence);
  }

  TEST_CASE("matches the oracle on random instances") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto config = fixtures::small_config(1 + seed % 3);
      const auto p = fixtures::random_params(config, 100 + seed);
      qa::Rng rng(seed);
      const auto inst = fixtures::random_instance(rng, "o", config.k_disc, {1, 3, 6, 2});
      const auto pred = predict(inst, p);
      const auto naive = fixtures::to_naive(p);
      const auto mats = fixtures::candidate_mats(inst);
      const auto want = oracle::probabilities(naive, mats);
      for (std::size_t c = 0; c < want.size(); ++c) {
        CHECK(std::abs(pred.probabilities[c] - want[c]) <= 1e-12);
        const auto att = oracle::attend(naive, mats[c]);
        for (std::size_t j = 0; j < att.p.size(); ++j) {
          CHECK(std::abs(pred.attention[c].weights[j] - att.p[j]) <= 1e-12);
        }
      }
      CHECK(question_loss(inst, p) ==
            doctest::Approx(oracle::loss(naive, mats, *inst.answer_index)).epsilon(1e-12));
    }
  }

  TEST_CASE("tape gradients agree with central differences") {
    const auto config = fixtures::small_config(2);
    auto p = fixtures::random_params(config, 77);
    qa::Rng rng(77);
    const auto inst = fixtures::random_instance(rng, "g", 2, {3, 2, 4});
    p.zero_grad();
    qa::Tape tape;
    const auto nodes = ParamNodes::trainable(tape, p);
    tape.backward(record_loss(tape, nodes, inst));
    const auto tensors = p.all();
    const auto numeric = qa::finite_diff_grad([&] { return question_loss(inst, p); }, tensors, 1e-6);
    for (std::size_t t = 0; t < tensors.size(); ++t) {
      double diff = 0, na = 0, nn = 0;
      for (std::size_t e = 0; e < numeric[t].size(); ++e) {
        const double a = tensors[t]->grad.values()[e];
        const double n = numeric[t].values()[e];
        diff += (a - n) * (a - n);
        na += a * a;
        nn += n * n;
      }
      CAPTURE(tensors[t]->name);
      // Some biases get an exactly zero gradient here; the floor absorbs FD round-off.
      CHECK(std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-4}) < 1e-5);
    }
  }

  TEST_CASE("instance checks") {
    const auto p = fixtures::random_params(fixtures::small_config(3), 1);
    qa::Rng rng(1);
    auto single = fixtures::random_instance(rng, "s", 3, {2});
    CHECK_THROWS_AS(check_instance(single, 3), qa::Error);
    auto wrong_k = fixtures::random_instance(rng, "k", 2, {2, 2});
    CHECK_THROWS_AS(check_instance(wrong_k, 3), qa::Error);
    CHECK_THROWS_AS(predict(wrong_k, p), qa::Error);
    auto unlabeled = fixtures::random_instance(rng, "u", 3, {2, 2});
    unlabeled.answer_index.reset();
    CHECK_NOTHROW(predict(unlabeled, p));
    CHECK_THROWS_AS(question_loss(unlabeled, p), qa::Error);
  }

  TEST_CASE("initialization is seeded per tensor") {
    const auto c = fixtures::small_config(3);
    const auto a = RankerParams::initialize(c, 9);
    const auto b = RankerParams::initialize(c, 9);
    const auto other = RankerParams::initialize(c, 10);
    CHECK(a.w_k.value == b.w_k.value);
    CHECK_FALSE(a.w_k.value == other.w_k.value);
    CHECK(a.b_h1.value == Matrix(c.h, 1, 0.0));
    CHECK_NOTHROW(a.check_shapes(c));
    auto bigger = c;
    bigger.d = 9;
    CHECK_THROWS_AS(a.check_shapes(bigger), qa::Error);
  }

  TEST_CASE("config validation") {
    RankerConfig c;
    CHECK_NOTHROW(c.validate());
    c.d = 0;
    CHECK_THROWS_AS(c.validate(), qa::Error);
    c = {};
    c.beta1 = 1.0;
    CHECK_THROWS_AS(c.validate(), qa::Error);
    c = {};
    c.learning_rate = -1;
    CHECK_THROWS_AS(c.validate(), qa::Error);
  }
}

TEST_SUITE("trainer") {
  TEST_CASE("training is deterministic and independent of thread count") {
    const auto train_set = random_set(1, 40, 2);
    const auto dev_set = random_set(2, 10, 2);
    auto c = fixtures::small_config(2);
    c.epochs = 4;
    c.batch_size = 16;
    c.restarts = 2;
    const auto a = train(train_set, dev_set, c);
    const auto b = train(train_set, dev_set, c);
    c.threads = 3;
    const auto threaded = train(train_set, dev_set, c);
    for (std::size_t t = 0; t < a.params.all().size(); ++t) {
      CHECK(a.params.all()[t]->value == b.params.all()[t]->value);
      CHECK(a.params.all()[t]->value == threaded.params.all()[t]->value);
    }
    CHECK(a.log.size() == 8);
    CHECK(a.log.front().epoch == 1);
    CHECK(a.log.back().restart == 1);
    CHECK(a.best_loss == threaded.best_loss);
  }

  TEST_CASE("zero learning rate returns an initialization") {
    const auto train_set = random_set(3, 12, 1);
    auto c = fixtures::small_config(1);
    c.epochs = 2;
    c.restarts = 3;
    c.seed = 40;
    c.learning_rate = 0.0;
    const auto r = train(train_set, {}, c);
    const auto init = RankerParams::initialize(c, c.seed + r.best_restart);
    for (std::size_t t = 0; t < init.all().size(); ++t) {
      CHECK(r.params.all()[t]->value == init.all()[t]->value);
    }
  }

  TEST_CASE("the selected snapshot has the lowest dev loss seen") {
    const auto train_set = random_set(4, 30, 3);
    const auto dev_set = random_set(5, 10, 3);
    auto c = fixtures::small_config(3);
    c.epochs = 5;
    c.restarts = 2;
    std::size_t callbacks = 0;
    const auto r = train(train_set, dev_set, c, [&](const EpochRecord&) { ++callbacks; });
    CHECK(callbacks == r.log.size());
    double lowest = r.log.front().dev_loss;
    for (const auto& rec : r.log) lowest = std::min(lowest, rec.dev_loss);
    CHECK(r.best_loss == lowest);
    CHECK(evaluate_loss(dev_set, r.params).loss == doctest::Approx(lowest).epsilon(1e-12));
  }

  TEST_CASE("a separable task is learned") {
    qa::synth::TaskOptions opts;
    opts.questions = 120;
    const auto all = qa::synth::separable_task(opts);
    const std::vector<QuestionInstance> tr(all.begin(), all.begin() + 80);
    const std::vector<QuestionInstance> dev(all.begin() + 80, all.end());
    auto c = fixtures::small_config(3);
    c.epochs = 40;
    c.batch_size = 16;
    c.restarts = 1;
    c.learning_rate = 1e-2;
    const auto r = train(tr, dev, c);
    CHECK(evaluate_loss(dev, r.params).accuracy >= 0.95);
  }

  TEST_CASE("bad inputs") {
    const auto c = fixtures::small_config(2);
    CHECK_THROWS_AS(train({}, {}, c), qa::Error);
    auto unlabeled = random_set(6, 3, 2);
    unlabeled[1].answer_index.reset();
    CHECK_THROWS_AS(train(unlabeled, {}, c), qa::Error);
    const auto wrong_k = random_set(7, 3, 3);
    CHECK_THROWS_AS(train(wrong_k, {}, c), qa::Error);
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip is exact") {
    fixtures::TempDir dir("ckpt");
    Checkpoint ck;
    ck.config = fixtures::small_config(3);
    ck.config.seed = 12;
    ck.discriminators = fixtures::rows_for(3);
    ck.params = fixtures::random_params(ck.config, 12);
    save_checkpoint(ck, dir.file("m.qack"));
    const auto back = load_checkpoint(dir.file("m.qack"));
    CHECK(back.config == ck.config);
    CHECK(back.discriminators == ck.discriminators);
    for (std::size_t t = 0; t < ck.params.all().size(); ++t) {
      CHECK(back.params.all()[t]->value == ck.params.all()[t]->value);
    }
    save_checkpoint(back, dir.file("again.qack"));
    CHECK(qa::io::read_file(dir.file("m.qack")) == qa::io::read_file(dir.file("again.qack")));
  }

  TEST_CASE("damaged files") {
    fixtures::TempDir dir("ckbad");
    Checkpoint ck;
    ck.config = fixtures::small_config(2);
    ck.discriminators = fixtures::rows_for(2);
    ck.params = RankerParams::initialize(ck.config, 1);
    save_checkpoint(ck, dir.file("ok.qack"));
    const auto bytes = qa::io::read_file(dir.file("ok.qack"));
    const auto kind = [&](const std::string& contents) {
      qa::io::write_file(dir.file("bad.qack"), contents);
      try {
        (void)load_checkpoint(dir.file("bad.qack"));
      } catch (const qa::Error& e) {
        return e.kind();
      }
      return std::string("none");
    };
    CHECK(kind(bytes.substr(0, bytes.size() - 8)) == "format");
    CHECK(kind(bytes + "extra") == "format");
    CHECK(kind("garbage!" + bytes.substr(8)) == "version");
    CHECK(kind(bytes.substr(0, 4)) != "none");
  }

  TEST_CASE("row order must match") {
    Checkpoint ck;
    ck.config = fixtures::small_config(2);
    ck.discriminators = {qa::disc::kTfd, qa::disc::kAvd};
    ck.params = RankerParams::initialize(ck.config, 1);
    const std::vector<qa::disc::DiscriminatorId> same{qa::disc::kTfd, qa::disc::kAvd};
    const std::vector<qa::disc::DiscriminatorId> swapped{qa::disc::kAvd, qa::disc::kTfd};
    CHECK_NOTHROW(check_compatible(ck, same));
    CHECK_THROWS_AS(check_compatible(ck, swapped), qa::Error);
  }

  TEST_CASE("config json overlays a base") {
    RankerConfig base;
    base.epochs = 7;
    const auto c = config_from_json({{"d", 4}, {"learning_rate", 0.5}, {"unrelated", "x"}}, base);
    CHECK(c.d == 4);
    CHECK(c.learning_rate == 0.5);
    CHECK(c.epochs == 7);
    CHECK(config_from_json(config_to_json(c)) == c);
    CHECK_THROWS_AS(config_from_json({{"d", "wide"}}), qa::Error);
  }
}

TEST_SUITE("rankings") {
  TEST_CASE("order follows attention weights and matches the oracle") {
    const auto config = fixtures::small_config(3);
    const auto p = fixtures::random_params(config, 31);
    qa::Rng rng(31);
    const std::vector<QuestionInstance> insts{fixtures::random_instance(rng, "a", 3, {15, 1, 0, 6})};
    const auto ranked = export_rankings(p, insts, 10);
    REQUIRE(ranked.size() == 4);
    CHECK(ranked[0].ranking.size() == 10);
    CHECK(ranked[1].ranking.size() == 1);
    CHECK(ranked[1].ranking[0].weight == 1.0);
    CHECK(ranked[2].ranking.empty());

    const auto naive = fixtures::to_naive(p);
    const auto mats = fixtures::candidate_mats(insts[0]);
    const auto att = oracle::attend(naive, mats[0]);
    std::vector<std::size_t> order(att.p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return att.p[a] > att.p[b]; });
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(ranked[0].ranking[i].doc_id == insts[0].candidates[0].doc_ids[order[i]]);
      CHECK(std::abs(ranked[0].ranking[i].weight - att.p[order[i]]) <= 1e-12);
      if (i > 0) CHECK(ranked[0].ranking[i - 1].weight >= ranked[0].ranking[i].weight);
    }
  }

  TEST_CASE("jsonl round trip") {
    const auto p = fixtures::random_params(fixtures::small_config(2), 3);
    const auto insts = random_set(3, 3, 2);
    const auto ranked = export_rankings(p, insts, 2);
    const auto text = rankings_to_jsonl(ranked);
    const auto back = rankings_from_jsonl(text);
    CHECK(rankings_to_jsonl(back) == text);
    REQUIRE(back.size() == ranked.size());
    CHECK(back[5].ranking[0].weight == ranked[5].ranking[0].weight);
    CHECK_THROWS_AS(rankings_from_jsonl("{\"question_id\": 3}\n"), qa::Error);
  }
}
