#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qa/autodiff.hpp"
#include "qa/discriminator.hpp"
#include "qa/matrix.hpp"

namespace qa::ranker {

struct RankerConfig {
  std::size_t k_disc = 3;   ///< rows of the score matrix
  std::size_t d = 32;       ///< projection width
  std::size_t m = 16;       ///< key width
  std::size_t q = 16;       ///< value width
  std::size_t h = 32;       ///< decision head hidden width
  std::size_t n_max = 40;   ///< documents per candidate
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  std::size_t restarts = 5;
  std::uint64_t seed = 1;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Worker threads for per-example gradients inside a batch. Results do not
  /// depend on this value.
  std::size_t threads = 1;

  void validate() const;
  bool operator==(const RankerConfig&) const = default;
};

/// Every learned tensor. Field order here is the checkpoint payload order.
struct RankerParams {
  ParamTensor w_proj;  // D×K
  ParamTensor b_proj;  // D×1
  ParamTensor w_k;     // M×D
  ParamTensor b_k;     // M×1
  ParamTensor w_v;     // Q×D
  ParamTensor b_v;     // Q×1
  ParamTensor w_p;     // 1×M
  ParamTensor b_p;     // 1×1
  ParamTensor w_h1;    // H×Q
  ParamTensor b_h1;    // H×1
  ParamTensor w_h2;    // 1×H
  ParamTensor b_h2;    // 1×1

  /// All tensors zero.
  static RankerParams zeros(const RankerConfig& config);
  /// Glorot-uniform weights from per-tensor streams of seed; zero biases.
  static RankerParams initialize(const RankerConfig& config, std::uint64_t seed);

  std::vector<ParamTensor*> all();
  std::vector<const ParamTensor*> all() const;

  std::size_t k_disc() const noexcept { return w_proj.value.cols(); }
  void zero_grad();
  /// Throws if any tensor's shape disagrees with config.
  void check_shapes(const RankerConfig& config) const;
};

/// Parameters recorded on a tape, either as trainable leaves or as constants.
struct ParamNodes {
  NodeId w_proj, b_proj, w_k, b_k, w_v, b_v, w_p, b_p, w_h1, b_h1, w_h2, b_h2;

  static ParamNodes trainable(Tape& tape, RankerParams& params);
  static ParamNodes frozen(Tape& tape, const RankerParams& params);
};

struct CandidateNodes {
  std::optional<NodeId> projected;  // A, D×N
  std::optional<NodeId> keys;       // K, M×N
  std::optional<NodeId> values;     // V, Q×N
  std::optional<NodeId> attention;  // P, 1×N
  NodeId pooled;                    // Y, Q×1
  NodeId logit;                     // 1×1
};

/// Records project → attend → decision head for one candidate. With zero
/// documents the pooled vector is a zero constant ("no evidence").
CandidateNodes record_candidate(Tape& tape, const ParamNodes& p, const Matrix& scores);

struct AttentionResult {
  std::vector<double> weights;  ///< P, one entry per document, sums to 1
  std::vector<double> pooled;   ///< Y = V·Pᵀ, length Q
  Matrix keys;
  Matrix values;
  bool no_evidence = false;
};

/// A = W_proj·S ⊕ b_proj. S must have k_disc rows.
Matrix project_scores(const Matrix& scores, const RankerParams& params);
/// K = tanh(W_k·A ⊕ b_k), V = relu(W_v·A ⊕ b_v), P = softmax(W_p·K ⊕ b_p), Y = V·Pᵀ.
AttentionResult attend(const Matrix& projected, const RankerParams& params);
/// w_h2 · relu(W_h1·Y + b_h1) + b_h2.
double score_candidate(std::span<const double> pooled, const RankerParams& params);

/// A question with the score matrix of every candidate, in candidate order.
struct QuestionInstance {
  std::string question_id;
  std::optional<std::size_t> answer_index;
  std::vector<disc::ScoreMatrix> candidates;
};

struct AnswerPrediction {
  std::vector<double> logits;
  std::vector<double> probabilities;
  std::size_t predicted_index = 0;  ///< argmax, lowest index on ties
  std::vector<AttentionResult> attention;
};

AnswerPrediction predict(const QuestionInstance& instance, const RankerParams& params);

/// Records the full question graph and returns the cross-entropy loss node.
/// The instance must be labeled.
NodeId record_loss(Tape& tape, const ParamNodes& p, const QuestionInstance& instance,
                   std::vector<double>* logits_out = nullptr);

/// Cross-entropy of one labeled instance under fixed parameters.
double question_loss(const QuestionInstance& instance, const RankerParams& params);

/// Throws unless the instance has ≥ 2 candidates with k_disc-row matrices.
void check_instance(const QuestionInstance& instance, std::size_t k_disc);

}  // namespace qa::ranker
