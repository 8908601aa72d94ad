// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit on
// any FAIL. Thresholds are fixed here and nowhere else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles/brute_lexical.hpp"
#include "../oracles/naive_ranker.hpp"
#include "../support/fixtures.hpp"
#include "qa/binary_io.hpp"
#include "qa/dataset.hpp"
#include "qa/eval.hpp"
#include "qa/matrix.hpp"
#include "qa/optim.hpp"
#include "qa/pipeline.hpp"
#include "qa/ranker.hpp"
#include "qa/synthetic.hpp"
#include "qa/text_index.hpp"
#include "qa/tokenizer.hpp"
#include "qa/trainer.hpp"

namespace fs = std::filesystem;
using qa::ranker::QuestionInstance;
using qa::ranker::RankerConfig;

namespace {

struct Outcome {
  enum class Status { kPass, kFail, kSkip } status = Status::kPass;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Status::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Status::kFail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Status::kSkip, std::move(d)}; }

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_close(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// ---- 1: gradients against central differences ------------------------------

Outcome gradient_oracle() {
  constexpr double kEps = 1e-5;
  constexpr double kTol = 1e-4;
  // Denominator floor: central differences carry about ulp(loss)/eps ~ 1e-11
  // of round-off per entry, so near-zero gradients are compared absolutely.
  constexpr double kFloor = 1e-6;
  // A stencil that straddles a relu kink measures a one-sided slope, so draws
  // with a pre-activation closer to zero than this are replaced.
  constexpr double kKinkMargin = 1e-3;
  qa::Rng rng(101);
  double worst = 0.0;
  std::string worst_name;
  std::size_t redrawn = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t k = 1 + rng.below(3);
    std::vector<std::size_t> ns;
    for (int c = 0; c < 4; ++c) ns.push_back(1 + rng.below(8));
    const auto inst = fixtures::random_instance(rng, "g" + std::to_string(i), k, ns);
    auto config = fixtures::small_config(k);
    auto params = fixtures::random_params(config, 500 + i + 1000 * redrawn);
    if (oracle::relu_margin(fixtures::to_naive(params), fixtures::candidate_mats(inst)) < kKinkMargin) {
      ++redrawn;
      --i;
      continue;
    }

    params.zero_grad();
    qa::Tape tape;
    const auto nodes = qa::ranker::ParamNodes::trainable(tape, params);
    tape.backward(qa::ranker::record_loss(tape, nodes, inst));

    const auto all = params.all();
    const auto numeric = qa::finite_diff_grad(
        [&] { return qa::ranker::question_loss(inst, params); }, all, kEps);
    for (std::size_t t = 0; t < all.size(); ++t) {
      double diff = 0.0, na = 0.0, nn = 0.0;
      const auto a = all[t]->grad.values();
      const auto n = numeric[t].values();
      for (std::size_t e = 0; e < a.size(); ++e) {
        diff += (a[e] - n[e]) * (a[e] - n[e]);
        na += a[e] * a[e];
        nn += n[e] * n[e];
      }
      const double rel = std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), kFloor});
      if (rel > worst) {
        worst = rel;
        worst_name = all[t]->name + " (instance " + std::to_string(i) + ")";
      }
    }
  }
  const std::string detail = "worst relative error " + fmt(worst) + " at " + worst_name + "; " +
                             std::to_string(redrawn) + " draw(s) replaced for kink proximity";
  return worst < kTol ? pass(detail) : fail(detail);
}

// ---- 2: forward pass against the naive restatement -------------------------

Outcome forward_oracle() {
  constexpr double kTol = 1e-10;
  qa::Rng rng(202);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = 1 + rng.below(3);
    const std::size_t cands = 2 + rng.below(4);
    std::vector<std::size_t> ns;
    for (std::size_t c = 0; c < cands; ++c) ns.push_back(rng.below(9));  // 0 = no evidence
    const auto inst = fixtures::random_instance(rng, "f" + std::to_string(i), k, ns);
    const auto config = fixtures::small_config(k);
    const auto params = fixtures::random_params(config, 900 + i);
    const auto naive = fixtures::to_naive(params);

    const auto pred = qa::ranker::predict(inst, params);
    const auto mats = fixtures::candidate_mats(inst);
    const auto logits = oracle::candidate_logits(naive, mats);
    const auto probs = oracle::softmax(logits);
    for (std::size_t c = 0; c < cands; ++c) {
      worst = std::max(worst, rel_close(pred.logits[c], logits[c]));
      worst = std::max(worst, std::abs(pred.probabilities[c] - probs[c]));
      if (ns[c] == 0) continue;
      const auto att = oracle::attend(naive, mats[c]);
      for (std::size_t j = 0; j < ns[c]; ++j) {
        worst = std::max(worst, std::abs(pred.attention[c].weights[j] - att.p[j]));
      }
      for (std::size_t q = 0; q < att.y.size(); ++q) {
        worst = std::max(worst, rel_close(pred.attention[c].pooled[q], att.y[q]));
      }
    }
  }
  const std::string detail = "worst deviation " + fmt(worst) + " over 100 instances";
  return worst <= kTol ? pass(detail) : fail(detail);
}

// ---- 3: invariants ----------------------------------------------------------

Outcome invariant_suite() {
  qa::Rng rng(303);
  std::vector<std::string> broken;
  double sum_dev = 0.0, shift_dev = 0.0, perm_y_dev = 0.0, perm_p_dev = 0.0, cand_dev = 0.0;
  bool bp_inert = true, bp_grad_zero = true;

  for (int i = 0; i < 50; ++i) {
    std::vector<double> x(1 + rng.below(12));
    for (double& v : x) v = rng.uniform(-30.0, 30.0);
    const double c = rng.uniform(-100.0, 100.0);
    auto shifted = x;
    for (double& v : shifted) v += c;
    const auto a = qa::softmax_row(x);
    const auto b = qa::softmax_row(shifted);
    for (std::size_t j = 0; j < a.size(); ++j) shift_dev = std::max(shift_dev, std::abs(a[j] - b[j]));
  }

  for (int i = 0; i < 50; ++i) {
    const std::size_t k = 1 + rng.below(3);
    const std::size_t cands = 2 + rng.below(4);
    std::vector<std::size_t> ns;
    for (std::size_t c = 0; c < cands; ++c) ns.push_back(1 + rng.below(10));
    auto inst = fixtures::random_instance(rng, "i" + std::to_string(i), k, ns);
    const auto config = fixtures::small_config(k);
    auto params = fixtures::random_params(config, 1300 + i);
    const auto pred = qa::ranker::predict(inst, params);

    for (const auto& att : pred.attention) {
      const double s = std::accumulate(att.weights.begin(), att.weights.end(), 0.0);
      sum_dev = std::max(sum_dev, std::abs(s - 1.0));
    }

    // b_p shift
    auto moved = params;
    moved.b_p.value(0, 0) += rng.uniform(-25.0, 25.0);
    const auto pred_moved = qa::ranker::predict(inst, moved);
    for (std::size_t c = 0; c < cands; ++c) {
      bp_inert = bp_inert && pred_moved.attention[c].weights == pred.attention[c].weights &&
                 pred_moved.attention[c].pooled == pred.attention[c].pooled;
    }
    bp_inert = bp_inert && pred_moved.probabilities == pred.probabilities &&
               pred_moved.predicted_index == pred.predicted_index;

    params.zero_grad();
    qa::Tape tape;
    const auto nodes = qa::ranker::ParamNodes::trainable(tape, params);
    tape.backward(qa::ranker::record_loss(tape, nodes, inst));
    bp_grad_zero = bp_grad_zero && params.b_p.grad(0, 0) == 0.0;

    // document permutation within candidate 0
    auto permuted = inst;
    auto& m = permuted.candidates[0];
    std::vector<std::size_t> order(m.doc_count());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    qa::Matrix values(m.values.rows(), m.values.cols());
    for (std::size_t r = 0; r < values.rows(); ++r) {
      for (std::size_t j = 0; j < values.cols(); ++j) values(r, j) = inst.candidates[0].values(r, order[j]);
    }
    m.values = values;
    const auto pred_perm = qa::ranker::predict(permuted, params);
    for (std::size_t q = 0; q < pred.attention[0].pooled.size(); ++q) {
      perm_y_dev = std::max(perm_y_dev,
                            std::abs(pred_perm.attention[0].pooled[q] - pred.attention[0].pooled[q]));
    }
    for (std::size_t j = 0; j < order.size(); ++j) {
      perm_p_dev = std::max(perm_p_dev, std::abs(pred_perm.attention[0].weights[j] -
                                                 pred.attention[0].weights[order[j]]));
    }

    // candidate permutation
    std::vector<std::size_t> corder(cands);
    std::iota(corder.begin(), corder.end(), 0);
    rng.shuffle(std::span<std::size_t>(corder));
    QuestionInstance swapped = inst;
    for (std::size_t c = 0; c < cands; ++c) swapped.candidates[c] = inst.candidates[corder[c]];
    const auto pred_swapped = qa::ranker::predict(swapped, params);
    for (std::size_t c = 0; c < cands; ++c) {
      cand_dev = std::max(cand_dev, std::abs(pred_swapped.probabilities[c] - pred.probabilities[corder[c]]));
    }
  }

  if (sum_dev > 1e-12) broken.push_back("attention sum off by " + fmt(sum_dev));
  if (shift_dev > 1e-12) broken.push_back("softmax shift deviation " + fmt(shift_dev));
  if (!bp_inert) broken.push_back("b_p shift changed the output");
  if (!bp_grad_zero) broken.push_back("d loss / d b_p is not exactly 0");
  if (perm_y_dev > 1e-10 || perm_p_dev > 1e-10) {
    broken.push_back("document permutation deviation Y " + fmt(perm_y_dev) + ", P " + fmt(perm_p_dev));
  }
  if (cand_dev > 1e-12) broken.push_back("candidate permutation deviation " + fmt(cand_dev));
  if (!broken.empty()) {
    std::string d;
    for (const auto& b : broken) d += (d.empty() ? "" : "; ") + b;
    return fail(d);
  }
  return pass("sum " + fmt(sum_dev) + ", shift " + fmt(shift_dev) + ", doc perm " +
              fmt(std::max(perm_y_dev, perm_p_dev)) + ", cand perm " + fmt(cand_dev) +
              ", b_p inert with zero gradient");
}

// ---- 4: separable task ------------------------------------------------------

Outcome synthetic_learnability() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto train = qa::synth::separable_task({300, 4, 10, 41});
  const auto dev = qa::synth::separable_task({100, 4, 10, 42});
  const auto test = qa::synth::separable_task({200, 4, 10, 43});

  const RankerConfig config;  // defaults throughout
  const auto trained = qa::ranker::train(train, dev, config);
  const double held_out = qa::eval::accuracy(trained.params, test, "separable", "test").accuracy;
  const double train_seconds = seconds_since(t0);

  const std::vector<qa::disc::DiscriminatorId> order{qa::disc::kTfd, qa::disc::kDrd, qa::disc::kAvd};
  const auto subsets = qa::eval::cumulative_subsets(order);
  const std::vector<qa::eval::ExperimentData> data{{"separable", train, dev, test}};
  RankerConfig per_seed = config;
  per_seed.restarts = 1;
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const auto table = qa::eval::ablation_run(subsets, data, per_seed, seeds);
  const double tfd_only = table.rows[0].cells.front().accuracy;
  const double full = table.rows[0].cells.back().accuracy;
  const double gap = full - tfd_only;

  const std::string detail = "held-out " + fmt(held_out) + " after " + fmt(train_seconds) +
                             " s; ablation tfd " + fmt(tfd_only) + " vs tfd+drd+avd " + fmt(full) +
                             " (gap " + fmt(gap) + ")";
  const bool ok = held_out >= 0.95 && train_seconds < 120.0 && gap >= 0.2;
  return ok ? pass(detail) : fail(detail);
}

// ---- 5: document count ------------------------------------------------------

Outcome document_count_effect() {
  const auto train = qa::synth::rank_displaced_task({300, 4, 10, 51});
  const auto dev = qa::synth::rank_displaced_task({200, 4, 10, 52});
  RankerConfig config;
  config.restarts = 1;
  const std::vector<std::size_t> ns{1, 5};
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const auto sweep = qa::eval::doc_count_sweep(ns, train, dev, config, seeds);
  const double gain = sweep.points[1].accuracy - sweep.points[0].accuracy;
  const std::string detail = "mean dev accuracy N=1 " + fmt(sweep.points[0].accuracy) + ", N=5 " +
                             fmt(sweep.points[1].accuracy) + " (gain " + fmt(gain) + ")";
  return gain >= 0.1 ? pass(detail) : fail(detail);
}

// ---- 6: retrieval against brute force ---------------------------------------

std::string random_text(qa::Rng& rng, std::size_t vocab, std::size_t max_len) {
  static const char* kGlue[] = {"the", "of", "and", "a", "is", "in"};
  std::string out;
  const std::size_t len = rng.below(max_len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    if (!out.empty()) out += rng.below(5) == 0 ? ", " : " ";
    if (rng.below(6) == 0) {
      out += kGlue[rng.below(6)];
    } else {
      // Squaring skews the draw toward low ids, giving a long-tailed vocabulary.
      const double u = rng.uniform();
      out += "w" + std::to_string(static_cast<std::size_t>(u * u * static_cast<double>(vocab)));
    }
  }
  return out;
}

Outcome retrieval_oracle(const fs::path& scratch) {
  qa::Rng rng(606);
  const auto stop = [](const std::string& t) { return qa::text::is_stopword(t); };
  double worst = 0.0;
  std::size_t queries = 0, mismatched_sets = 0;
  bool persisted = true;

  for (std::size_t size : {5u, 60u, 400u, 1000u}) {
    std::vector<qa::text::DocumentRecord> records;
    std::vector<oracle::RawDoc> raw;
    for (std::size_t d = 0; d < size; ++d) {
      char id[32];
      std::snprintf(id, sizeof id, "doc%05zu", d);
      const auto text = random_text(rng, 200, 30);
      records.push_back({id, "toy", text, 0});
      raw.push_back({id, text});
    }
    auto shuffled = records;
    rng.shuffle(std::span<qa::text::DocumentRecord>(shuffled));
    const auto index = qa::text::InvertedIndex::build(shuffled);
    const oracle::BruteCorpus brute(raw);
    if (index.doc_count() != brute.size()) return fail("document counts differ");

    for (int q = 0; q < 25; ++q, ++queries) {
      const auto question = random_text(rng, 200, 6);
      const auto answer = random_text(rng, 200, 3);
      const auto query = qa::text::LexicalQuery::make(question, answer);
      const auto terms = query.terms();
      for (std::size_t d = 0; d < brute.size(); ++d) {
        const auto& id = brute.doc(d).id;
        const double b = brute.bm25(terms, d);
        const double c = brute.classic(terms, d);
        const double lb = index.score(terms, id);
        const double lc = index.score(terms, id, {qa::text::ScorerKind::kClassicTfidf});
        worst = std::max({worst, std::abs(lb - b) / std::max(std::abs(b), 1e-300),
                          std::abs(lc - c) / std::max(std::abs(c), 1e-300)});
      }
      for (bool bm25 : {true, false}) {
        const qa::text::ScorerConfig sc{bm25 ? qa::text::ScorerKind::kBm25 : qa::text::ScorerKind::kClassicTfidf};
        const std::size_t top_k = 1 + rng.below(size + 5);
        const auto got = qa::text::retrieve(index, question, answer, top_k, sc);
        const auto want = oracle::brute_retrieve(brute, question, answer, top_k, bm25, stop);
        bool same = got.docs.size() == want.size();
        for (std::size_t i = 0; same && i < want.size(); ++i) {
          same = got.docs[i].doc_id == want[i].id &&
                 std::abs(got.docs[i].score - want[i].score) <= 1e-12 * std::abs(want[i].score);
        }
        if (!same) ++mismatched_sets;
      }
    }

    const auto path = (scratch / ("idx" + std::to_string(size))).string();
    qa::text::save_index(index, path);
    const auto loaded = qa::text::load_index(path);
    const auto path2 = path + ".again";
    qa::text::save_index(loaded, path2);
    persisted = persisted && qa::io::read_file(path) == qa::io::read_file(path2);
    for (int q = 0; q < 20; ++q) {
      const auto terms = qa::text::LexicalQuery::make(random_text(rng, 200, 6), "").terms();
      for (std::uint32_t d = 0; d < index.doc_count(); ++d) {
        persisted = persisted && index.score(terms, d) == loaded.score(terms, d);
      }
    }
  }
  const std::string detail = "worst relative score error " + fmt(worst) + " over " +
                             std::to_string(queries) + " queries; " + std::to_string(mismatched_sets) +
                             " ranked-list mismatches; persistence " +
                             (persisted ? "bit-identical" : "DIFFERS");
  return worst <= 1e-12 && mismatched_sets == 0 && persisted ? pass(detail) : fail(detail);
}

// ---- 7: end-to-end determinism ----------------------------------------------

int run(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

Outcome end_to_end_determinism(const fs::path& scratch) {
  const std::string qa_bin = QA_BINARY;
  const auto work = scratch / "e2e";
  fs::remove_all(work);
  const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  if (run(qa_bin + " synth --output-dir " + q(work / "ws")) != 0) return fail("synth failed");
  if (run(qa_bin + " pipeline --config " + q(work / "ws" / "pipeline.json") + " --output-dir " +
          q(work / "first")) != 0) {
    return fail("pipeline failed");
  }
  const auto manifest = work / "first" / "manifest.json";
  for (const char* dir : {"a", "b"}) {
    if (run(qa_bin + " rerun --manifest " + q(manifest) + " --output-dir " + q(work / dir)) != 0) {
      return fail("rerun from manifest failed");
    }
  }
  const std::vector<std::string> files{"checkpoint.qack", "report.json", "ir_baseline.json",
                                       "rankings.jsonl", "scores.tsv", "retrievals.jsonl"};
  for (const auto& f : files) {
    const auto first = qa::io::read_file((work / "first" / f).string());
    if (first.empty()) return fail(f + " is empty");
    for (const char* dir : {"a", "b"}) {
      if (qa::io::read_file((work / dir / f).string()) != first) return fail(f + " differs in rerun " + dir);
    }
  }
  return pass("3 runs, " + std::to_string(files.size()) + " artifacts byte-identical");
}

// ---- 8: ARC tf-idf column (optional) ----------------------------------------

Outcome arc_tfidf_column() {
  const char* root = std::getenv("QA_ARC_DIR");
  if (root == nullptr || *root == '\0') return skip("set QA_ARC_DIR to run (needs ARC data and corpora)");
  const fs::path base(root);
  std::vector<qa::text::InvertedIndex> indices;
  for (const char* corpus : {"arc_corpus.jsonl", "books.jsonl"}) {
    const auto path = base / "corpora" / corpus;
    if (!fs::exists(path)) return skip("missing " + path.string());
    indices.push_back(qa::text::InvertedIndex::build(qa::text::read_corpus(path.string())));
  }
  const std::vector<qa::text::QuotaIndex> quota{{&indices[0], 20}, {&indices[1], 20}};
  const std::vector<qa::disc::DiscriminatorId> rows{qa::disc::kTfd};
  std::vector<const qa::text::InvertedIndex*> ptrs{&indices[0], &indices[1]};

  struct Target {
    const char* dir;
    double ranker;
    std::optional<double> ir;
  };
  std::string detail;
  bool ok = true;
  for (const Target& t : {Target{"ARC-Easy", 0.6389, 0.6255}, Target{"ARC-Challenge", 0.2670, std::nullopt}}) {
    const auto ds = qa::data::load_dataset((base / t.dir).string());
    std::vector<qa::data::Question> all;
    for (auto s : qa::data::kAllSplits) all.insert(all.end(), ds.split(s).begin(), ds.split(s).end());
    const auto retrievals = qa::pipeline::retrieve_all(quota, all);
    qa::pipeline::ScoringInputs in;
    in.questions = all;
    in.retrievals = retrievals;
    in.indices = ptrs;
    const auto scored = qa::pipeline::score_retrievals(in, rows, {{"tfd", {}}});
    const auto build = [&](qa::data::Split s) {
      return qa::pipeline::build_instances(ds.split(s), retrievals, scored.store, rows);
    };
    RankerConfig config;
    config.k_disc = 1;
    const auto trained = qa::ranker::train(build(qa::data::Split::kTrain), build(qa::data::Split::kDev), config);
    const double acc = qa::eval::accuracy(trained.params, build(qa::data::Split::kTest), t.dir, "test").accuracy;
    ok = ok && std::abs(acc - t.ranker) <= 0.05;
    detail += std::string(t.dir) + " tfd " + fmt(acc * 100, 4) + "% (reference " + fmt(t.ranker * 100, 4) + "%)";
    if (t.ir) {
      const double ir = qa::eval::ir_baseline(ds.split(qa::data::Split::kTest), retrievals, t.dir, "test").accuracy;
      ok = ok && std::abs(ir - *t.ir) <= 0.05;
      detail += ", IR " + fmt(ir * 100, 4) + "% (reference " + fmt(*t.ir * 100, 4) + "%)";
    }
    detail += "; ";
  }
  return ok ? pass(detail) : fail(detail);
}

}  // namespace

int main(int argc, char** argv) {
  // Optional filter: run only the listed criterion numbers.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const auto scratch = fs::temp_directory_path() / "qa-acceptance";
  fs::create_directories(scratch);

  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0 = no limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient oracle", 30, gradient_oracle},
      {2, "forward oracle", 10, forward_oracle},
      {3, "invariant suite", 10, invariant_suite},
      {4, "synthetic learnability", 0, synthetic_learnability},
      {5, "document-count effect", 300, document_count_effect},
      {6, "retrieval oracle", 30, [&] { return retrieval_oracle(scratch); }},
      {7, "end-to-end determinism", 0, [&] { return end_to_end_determinism(scratch); }},
      {8, "ARC tf-idf column (optional)", 0, arc_tfidf_column},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("threw: ") + e.what());
    }
    const double secs = seconds_since(t0);
    if (o.status == Outcome::Status::kPass && c.budget_seconds > 0 && secs >= c.budget_seconds) {
      o = fail(o.detail + "; over the " + fmt(c.budget_seconds) + " s budget");
    }
    const char* label = o.status == Outcome::Status::kPass   ? "PASS"
                        : o.status == Outcome::Status::kFail ? "FAIL"
                                                             : "SKIP";
    if (o.status == Outcome::Status::kFail) ++failures;
    std::cout << "criterion " << c.id << " [" << c.name << "]: " << label << " - " << o.detail
              << " (" << fmt(secs) << " s)" << std::endl;
  }
  fs::remove_all(scratch);
  return failures == 0 ? 0 : 1;
}
