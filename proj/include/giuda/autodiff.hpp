#pragma once

#include <functional>
#include <span>
#include <vector>

#include "giuda/rng.hpp"
#include "giuda/tensor.hpp"

namespace giuda {

// Reverse-mode tape over tensor operations. Each op records its parents and
// a backward closure; backward() walks the tape in reverse creation order.
class Tape {
 public:
  using Var = int;

  Var leaf(Tensor t);
  // Leaf backed by a Parameter's current value. After backward(), call
  // accumulate_param_grads() to add the tape gradients into Parameter::grad.
  Var param(Parameter& p);

  // out[b,j] = sum_i in[b,i] * w[i,j] + bias[j]
  Var linear(Var input, Var weight, Var bias);
  Var relu(Var x);
  // [N,F] -> [1,F], columnwise max; gradient routed to the lowest-index
  // argmax row per feature.
  Var max_pool_rows(Var x);
  // rows: [K,A], vec: [1,B] -> [K,A+B] with vec broadcast to every row.
  Var concat_rows_broadcast(Var rows, Var vec);
  // Mean over batch rows of -log softmax(logits)[target class].
  Var softmax_cross_entropy(Var logits, const Tensor& one_hot_targets);
  // Mean of |pred - target| over all elements.
  Var mean_abs_error(Var pred, const Tensor& target);
  // Euclidean distance ||a - b|| between same-shape tensors.
  Var l2_distance(Var a, Var b);
  // Scalar result: sum_i weights[i] * scalars[i] + constant.
  Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights,
                   double constant = 0.0);

  void backward(Var loss, double seed = 1.0);
  void accumulate_param_grads(double scale = 1.0);

  const Tensor& value(Var v) const { return nodes_[v].value; }
  const Tensor& grad(Var v) const { return nodes_[v].grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&, int)> backward_fn;  // null for leaves
    Tensor aux;  // op-specific forward byproduct (e.g. softmax)
  };

  Var push(Tensor value, std::function<void(Tape&, int)> fn);
  Node& node(Var v) { return nodes_[v]; }

  std::vector<Node> nodes_;
  std::vector<std::pair<Parameter*, Var>> param_vars_;
};

// Compares analytic gradients (filled by loss_fn) against central finite
// differences over up to samples_per_param coordinates of each parameter.
// loss_fn must be deterministic and must leave grads populated.
// Returns the max relative error with denominator max(|a|, |n|, 1e-8).
double grad_check(const std::function<double()>& loss_fn,
                  std::vector<Parameter*> params, double h,
                  std::size_t samples_per_param, Rng& rng);

}  // namespace giuda
