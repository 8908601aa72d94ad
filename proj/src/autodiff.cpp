#include "qa/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "qa/error.hpp"

namespace qa {

ParamTensor::ParamTensor(std::string name, Matrix value)
    : name(std::move(name)), value(std::move(value)) {
  grad = Matrix(this->value.rows(), this->value.cols());
}

namespace {

// dst += op(a) · op(b), where op transposes when the flag is set.
void add_product(Matrix& dst, const Matrix& a, bool ta, const Matrix& b, bool tb) {
  const std::size_t n = ta ? a.cols() : a.rows();
  const std::size_t inner = ta ? a.rows() : a.cols();
  const std::size_t m = tb ? b.rows() : b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < inner; ++t) {
      const double av = ta ? a(t, i) : a(i, t);
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) dst(i, j) += av * (tb ? b(j, t) : b(t, j));
    }
  }
}

void require_shape(bool ok, const char* op, const Matrix& a, const Matrix& b) {
  if (!ok) {
    throw Error("shape", std::string(op) + ": " + a.shape_string() + " vs " + b.shape_string());
  }
}

}  // namespace

NodeId Tape::push(Op op, Matrix value, std::vector<std::size_t> inputs) {
  if (backward_done_) throw Error("autodiff", "tape already differentiated; reset before recording");
  nodes_.push_back(Node{op, std::move(value), Matrix(), std::move(inputs)});
  return NodeId{nodes_.size() - 1};
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id.index >= nodes_.size()) throw Error("autodiff", "unknown tape node");
  return nodes_[id.index];
}

NodeId Tape::parameter(ParamTensor& p) {
  NodeId id = push(Op::kParameter, p.value, {});
  nodes_[id.index].param = &p;
  return id;
}

NodeId Tape::constant(Matrix value) { return push(Op::kConstant, std::move(value), {}); }

NodeId Tape::affine(NodeId w, NodeId x, NodeId b) {
  const Matrix& bv = node(b).value;
  if (bv.cols() != 1) throw Error("shape", "affine bias must be a column, got " + bv.shape_string());
  Matrix out = affine_broadcast(node(w).value, node(x).value, bv.values());
  return push(Op::kAffine, std::move(out), {w.index, x.index, b.index});
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  Matrix out = qa::matmul(node(a).value, node(b).value);
  return push(Op::kMatmul, std::move(out), {a.index, b.index});
}

NodeId Tape::matmul_transposed(NodeId a, NodeId b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  require_shape(av.cols() == bv.cols(), "matmul_transposed", av, bv);
  Matrix out(av.rows(), bv.rows());
  add_product(out, av, false, bv, true);
  return push(Op::kMatmulTransposed, std::move(out), {a.index, b.index});
}

NodeId Tape::tanh(NodeId x) { return push(Op::kTanh, tanh_map(node(x).value), {x.index}); }

NodeId Tape::relu(NodeId x) { return push(Op::kRelu, relu_map(node(x).value), {x.index}); }

NodeId Tape::shifted_softmax(NodeId z, NodeId shift) {
  const Matrix& zv = node(z).value;
  if (node(shift).value.size() != 1) throw Error("shape", "softmax shift must be 1x1");
  auto probs = softmax_row(zv.values());
  return push(Op::kShiftedSoftmax, Matrix(zv.rows(), zv.cols(), std::move(probs)),
              {z.index, shift.index});
}

NodeId Tape::stack(std::span<const NodeId> scalars) {
  std::vector<double> values;
  std::vector<std::size_t> inputs;
  for (NodeId s : scalars) {
    const Matrix& v = node(s).value;
    if (v.size() != 1) throw Error("shape", "stack expects 1x1 nodes, got " + v.shape_string());
    values.push_back(v.values()[0]);
    inputs.push_back(s.index);
  }
  return push(Op::kStack, Matrix::column(values), std::move(inputs));
}

NodeId Tape::cross_entropy(NodeId logits, std::size_t target) {
  const double loss = qa::cross_entropy(node(logits).value.values(), target);
  NodeId id = push(Op::kCrossEntropy, Matrix(1, 1, loss), {logits.index});
  nodes_[id.index].target = target;
  return id;
}

const Matrix& Tape::value(NodeId id) const { return node(id).value; }

const Matrix& Tape::gradient(NodeId id) const {
  const Node& n = node(id);
  if (!backward_done_) throw Error("autodiff", "no gradients: backward has not run");
  return n.grad;
}

void Tape::backward(NodeId loss, double seed) {
  compute_gradients(loss, seed);
  flush_gradients();
}

void Tape::compute_gradients(NodeId loss, double seed) {
  if (nodes_.empty()) throw Error("autodiff", "backward without a recorded forward pass");
  if (backward_done_) throw Error("autodiff", "backward already ran on this tape");
  if (node(loss).value.size() != 1) throw Error("shape", "loss node must be 1x1");
  for (Node& n : nodes_) n.grad = Matrix(n.value.rows(), n.value.cols());
  nodes_[loss.index].grad(0, 0) = seed;
  for (std::size_t i = loss.index + 1; i-- > 0;) propagate(nodes_[i]);
  backward_done_ = true;
}

void Tape::flush_gradients() {
  if (!backward_done_) throw Error("autodiff", "flush_gradients before backward");
  for (Node& n : nodes_) {
    if (n.op != Op::kParameter) continue;
    auto dst = n.param->grad.values();
    auto src = n.grad.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
}

void Tape::propagate(Node& n) {
  const Matrix& g = n.grad;
  switch (n.op) {
    case Op::kParameter:
    case Op::kConstant:
      return;
    case Op::kAffine: {
      Node& w = nodes_[n.inputs[0]];
      Node& x = nodes_[n.inputs[1]];
      Node& b = nodes_[n.inputs[2]];
      add_product(w.grad, g, false, x.value, true);
      add_product(x.grad, w.value, true, g, false);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) b.grad(i, 0) += g(i, j);
      return;
    }
    case Op::kMatmul: {
      Node& a = nodes_[n.inputs[0]];
      Node& b = nodes_[n.inputs[1]];
      add_product(a.grad, g, false, b.value, true);
      add_product(b.grad, a.value, true, g, false);
      return;
    }
    case Op::kMatmulTransposed: {
      Node& a = nodes_[n.inputs[0]];
      Node& b = nodes_[n.inputs[1]];
      add_product(a.grad, g, false, b.value, false);
      add_product(b.grad, g, true, a.value, false);
      return;
    }
    case Op::kTanh: {
      auto dx = nodes_[n.inputs[0]].grad.values();
      auto y = n.value.values();
      auto dy = g.values();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
      return;
    }
    case Op::kRelu: {
      Node& x = nodes_[n.inputs[0]];
      auto dx = x.grad.values();
      auto xv = x.value.values();
      auto dy = g.values();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += xv[i] > 0.0 ? dy[i] : 0.0;
      return;
    }
    case Op::kShiftedSoftmax: {
      auto dz = nodes_[n.inputs[0]].grad.values();
      auto p = n.value.values();
      auto dp = g.values();
      double dot = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * dp[i];
      for (std::size_t i = 0; i < p.size(); ++i) dz[i] += p[i] * (dp[i] - dot);
      // The shift input receives no gradient: its Jacobian column sums to zero.
      return;
    }
    case Op::kStack: {
      for (std::size_t i = 0; i < n.inputs.size(); ++i) {
        nodes_[n.inputs[i]].grad(0, 0) += g(i, 0);
      }
      return;
    }
    case Op::kCrossEntropy: {
      Node& z = nodes_[n.inputs[0]];
      auto probs = softmax_row(z.value.values());
      auto dz = z.grad.values();
      const double up = g(0, 0);
      for (std::size_t i = 0; i < dz.size(); ++i) {
        dz[i] += up * (probs[i] - (i == n.target ? 1.0 : 0.0));
      }
      return;
    }
  }
}

}  // namespace qa
