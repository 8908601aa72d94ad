#include "qa/ranker.hpp"

#include <algorithm>

#include "qa/error.hpp"
#include "qa/rng.hpp"

namespace qa::ranker {

void RankerConfig::validate() const {
  const std::pair<const char*, std::size_t> dims[] = {
      {"k_disc", k_disc}, {"d", d}, {"m", m}, {"q", q}, {"h", h}, {"n_max", n_max},
      {"batch_size", batch_size}, {"restarts", restarts}, {"threads", threads}};
  for (auto [name, v] : dims) {
    if (v == 0) throw Error("config", std::string(name) + " must be at least 1");
  }
  if (learning_rate < 0.0) throw Error("config", "learning_rate must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error("config", "adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw Error("config", "epsilon must be positive");
}

RankerParams RankerParams::zeros(const RankerConfig& c) {
  return RankerParams{
      ParamTensor("w_proj", Matrix(c.d, c.k_disc)), ParamTensor("b_proj", Matrix(c.d, 1)),
      ParamTensor("w_k", Matrix(c.m, c.d)),         ParamTensor("b_k", Matrix(c.m, 1)),
      ParamTensor("w_v", Matrix(c.q, c.d)),         ParamTensor("b_v", Matrix(c.q, 1)),
      ParamTensor("w_p", Matrix(1, c.m)),           ParamTensor("b_p", Matrix(1, 1)),
      ParamTensor("w_h1", Matrix(c.h, c.q)),        ParamTensor("b_h1", Matrix(c.h, 1)),
      ParamTensor("w_h2", Matrix(1, c.h)),          ParamTensor("b_h2", Matrix(1, 1)),
  };
}

RankerParams RankerParams::initialize(const RankerConfig& c, std::uint64_t seed) {
  RankerParams p = zeros(c);
  std::uint64_t stream = 0;
  for (ParamTensor* t : p.all()) {
    if (t->name.starts_with("w_")) {
      t->value = glorot_init(t->value.rows(), t->value.cols(), derive_seed(seed, stream));
    }
    ++stream;
  }
  return p;
}

std::vector<ParamTensor*> RankerParams::all() {
  return {&w_proj, &b_proj, &w_k, &b_k, &w_v, &b_v, &w_p, &b_p, &w_h1, &b_h1, &w_h2, &b_h2};
}

std::vector<const ParamTensor*> RankerParams::all() const {
  return {&w_proj, &b_proj, &w_k, &b_k, &w_v, &b_v, &w_p, &b_p, &w_h1, &b_h1, &w_h2, &b_h2};
}

void RankerParams::zero_grad() {
  for (ParamTensor* t : all()) t->zero_grad();
}

void RankerParams::check_shapes(const RankerConfig& config) const {
  const RankerParams expected = zeros(config);
  auto want = expected.all();
  auto have = all();
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i]->value.rows() != have[i]->value.rows() ||
        want[i]->value.cols() != have[i]->value.cols()) {
      throw Error("shape", "parameter " + want[i]->name + " is " + have[i]->value.shape_string() +
                               ", expected " + want[i]->value.shape_string());
    }
  }
}

ParamNodes ParamNodes::trainable(Tape& t, RankerParams& p) {
  return ParamNodes{t.parameter(p.w_proj), t.parameter(p.b_proj), t.parameter(p.w_k),
                    t.parameter(p.b_k),    t.parameter(p.w_v),    t.parameter(p.b_v),
                    t.parameter(p.w_p),    t.parameter(p.b_p),    t.parameter(p.w_h1),
                    t.parameter(p.b_h1),   t.parameter(p.w_h2),   t.parameter(p.b_h2)};
}

ParamNodes ParamNodes::frozen(Tape& t, const RankerParams& p) {
  return ParamNodes{t.constant(p.w_proj.value), t.constant(p.b_proj.value), t.constant(p.w_k.value),
                    t.constant(p.b_k.value),    t.constant(p.w_v.value),    t.constant(p.b_v.value),
                    t.constant(p.w_p.value),    t.constant(p.b_p.value),    t.constant(p.w_h1.value),
                    t.constant(p.b_h1.value),   t.constant(p.w_h2.value),   t.constant(p.b_h2.value)};
}

CandidateNodes record_candidate(Tape& tape, const ParamNodes& p, const Matrix& scores) {
  CandidateNodes c;
  if (scores.cols() == 0) {
    c.pooled = tape.constant(Matrix(tape.value(p.w_v).rows(), 1));
  } else {
    if (scores.rows() != tape.value(p.w_proj).cols()) {
      throw Error("shape", "score matrix has " + std::to_string(scores.rows()) +
                               " rows, model expects " +
                               std::to_string(tape.value(p.w_proj).cols()));
    }
    const NodeId s = tape.constant(scores);
    c.projected = tape.affine(p.w_proj, s, p.b_proj);
    c.keys = tape.tanh(tape.affine(p.w_k, *c.projected, p.b_k));
    c.values = tape.relu(tape.affine(p.w_v, *c.projected, p.b_v));
    c.attention = tape.shifted_softmax(tape.matmul(p.w_p, *c.keys), p.b_p);
    c.pooled = tape.matmul_transposed(*c.values, *c.attention);
  }
  const NodeId hidden = tape.relu(tape.affine(p.w_h1, c.pooled, p.b_h1));
  c.logit = tape.affine(p.w_h2, hidden, p.b_h2);
  return c;
}

Matrix project_scores(const Matrix& scores, const RankerParams& params) {
  if (scores.rows() != params.k_disc()) {
    throw Error("shape", "score matrix has " + std::to_string(scores.rows()) +
                             " rows, model expects " + std::to_string(params.k_disc()));
  }
  return affine_broadcast(params.w_proj.value, scores, params.b_proj.value.values());
}

AttentionResult attend(const Matrix& projected, const RankerParams& params) {
  AttentionResult r;
  if (projected.cols() == 0) {
    r.pooled.assign(params.w_v.value.rows(), 0.0);
    r.no_evidence = true;
    return r;
  }
  Tape tape;
  const ParamNodes p = ParamNodes::frozen(tape, params);
  const NodeId a = tape.constant(projected);
  const NodeId keys = tape.tanh(tape.affine(p.w_k, a, p.b_k));
  const NodeId values = tape.relu(tape.affine(p.w_v, a, p.b_v));
  const NodeId weights = tape.shifted_softmax(tape.matmul(p.w_p, keys), p.b_p);
  const NodeId pooled = tape.matmul_transposed(values, weights);
  auto w = tape.value(weights).values();
  auto y = tape.value(pooled).values();
  r.weights.assign(w.begin(), w.end());
  r.pooled.assign(y.begin(), y.end());
  r.keys = tape.value(keys);
  r.values = tape.value(values);
  return r;
}

double score_candidate(std::span<const double> pooled, const RankerParams& params) {
  Tape tape;
  const ParamNodes p = ParamNodes::frozen(tape, params);
  const NodeId y = tape.constant(Matrix::column(pooled));
  const NodeId hidden = tape.relu(tape.affine(p.w_h1, y, p.b_h1));
  return tape.value(tape.affine(p.w_h2, hidden, p.b_h2))(0, 0);
}

void check_instance(const QuestionInstance& instance, std::size_t k_disc) {
  if (instance.candidates.size() < 2) {
    throw Error("validation", "question '" + instance.question_id + "' needs at least 2 candidates");
  }
  for (const auto& c : instance.candidates) {
    if (c.values.rows() != k_disc) {
      throw Error("shape", "question '" + instance.question_id + "' candidate " +
                               std::to_string(c.candidate_index) + " has " +
                               std::to_string(c.values.rows()) + " score rows, model expects " +
                               std::to_string(k_disc));
    }
  }
  if (instance.answer_index && *instance.answer_index >= instance.candidates.size()) {
    throw Error("validation", "question '" + instance.question_id + "' answer out of range");
  }
}

AnswerPrediction predict(const QuestionInstance& instance, const RankerParams& params) {
  check_instance(instance, params.k_disc());
  Tape tape;
  const ParamNodes p = ParamNodes::frozen(tape, params);
  AnswerPrediction out;
  for (const auto& candidate : instance.candidates) {
    const CandidateNodes c = record_candidate(tape, p, candidate.values);
    AttentionResult r;
    if (c.attention) {
      auto w = tape.value(*c.attention).values();
      r.weights.assign(w.begin(), w.end());
      r.keys = tape.value(*c.keys);
      r.values = tape.value(*c.values);
    } else {
      r.no_evidence = true;
    }
    auto y = tape.value(c.pooled).values();
    r.pooled.assign(y.begin(), y.end());
    out.logits.push_back(tape.value(c.logit)(0, 0));
    out.attention.push_back(std::move(r));
  }
  out.probabilities = softmax_row(out.logits);
  out.predicted_index = static_cast<std::size_t>(
      std::max_element(out.logits.begin(), out.logits.end()) - out.logits.begin());
  return out;
}

NodeId record_loss(Tape& tape, const ParamNodes& p, const QuestionInstance& instance,
                   std::vector<double>* logits_out) {
  if (!instance.answer_index) {
    throw Error("validation", "question '" + instance.question_id + "' is unlabeled");
  }
  std::vector<NodeId> logits;
  for (const auto& candidate : instance.candidates) {
    logits.push_back(record_candidate(tape, p, candidate.values).logit);
  }
  const NodeId stacked = tape.stack(logits);
  if (logits_out != nullptr) {
    auto v = tape.value(stacked).values();
    logits_out->assign(v.begin(), v.end());
  }
  return tape.cross_entropy(stacked, *instance.answer_index);
}

double question_loss(const QuestionInstance& instance, const RankerParams& params) {
  check_instance(instance, params.k_disc());
  Tape tape;
  const ParamNodes p = ParamNodes::frozen(tape, params);
  return tape.value(record_loss(tape, p, instance))(0, 0);
}

}  // namespace qa::ranker
