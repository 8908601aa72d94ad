#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qa/matrix.hpp"

namespace qa {

/// A learned tensor together with its accumulated gradient.
struct ParamTensor {
  std::string name;
  Matrix value;
  Matrix grad;

  ParamTensor() = default;
  ParamTensor(std::string name, Matrix value);

  void zero_grad() { grad.fill(0.0); }
};

/// Handle to a node recorded on a Tape.
struct NodeId {
  std::size_t index = 0;
};

/// Records a forward computation over small dense matrices and replays it in
/// reverse to obtain gradients. Values are computed eagerly as nodes are
/// recorded, so a tape doubles as the inference path.
///
/// Parameter leaves remember their ParamTensor; after backward() their
/// gradients are added into ParamTensor::grad. Constants never receive
/// gradients. One tape per example: tapes are independent and can be run on
/// different threads as long as flush_gradients() calls are serialized.
class Tape {
 public:
  NodeId parameter(ParamTensor& p);
  NodeId constant(Matrix value);

  /// W·X ⊕ b, with b a column vector broadcast over the columns.
  NodeId affine(NodeId w, NodeId x, NodeId b);
  NodeId matmul(NodeId a, NodeId b);
  /// A·Bᵀ.
  NodeId matmul_transposed(NodeId a, NodeId b);
  NodeId tanh(NodeId x);
  NodeId relu(NodeId x);

  /// softmax(z ⊕ shift) over all entries of z, where shift is a 1×1 node added
  /// to every entry. The shift cancels inside the max-subtraction, so it
  /// contributes nothing to the value and its gradient is exactly zero.
  NodeId shifted_softmax(NodeId z, NodeId shift);

  /// Stacks 1×1 nodes into an n×1 column.
  NodeId stack(std::span<const NodeId> scalars);

  /// -log softmax(logits)[target] for an n×1 logits column; yields 1×1.
  NodeId cross_entropy(NodeId logits, std::size_t target);

  const Matrix& value(NodeId id) const;
  /// Gradient of the last backward pass with respect to a node.
  const Matrix& gradient(NodeId id) const;

  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse accumulation from a 1×1 loss node, scaled by seed, followed by
  /// flush_gradients(). Throws if nothing was recorded or if backward already
  /// ran since the last reset.
  void backward(NodeId loss, double seed = 1.0);

  /// The reverse sweep alone; parameter gradients stay on the tape.
  void compute_gradients(NodeId loss, double seed = 1.0);
  /// Adds parameter-leaf gradients into their ParamTensor::grad.
  void flush_gradients();

  void reset();

 private:
  enum class Op {
    kParameter,
    kConstant,
    kAffine,
    kMatmul,
    kMatmulTransposed,
    kTanh,
    kRelu,
    kShiftedSoftmax,
    kStack,
    kCrossEntropy,
  };

  struct Node {
    Op op;
    Matrix value;
    Matrix grad;
    std::vector<std::size_t> inputs;
    ParamTensor* param = nullptr;
    std::size_t target = 0;
  };

  NodeId push(Op op, Matrix value, std::vector<std::size_t> inputs);
  const Node& node(NodeId id) const;
  void propagate(Node& n);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace qa
