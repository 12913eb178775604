#include "giuda/autodiff.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace giuda {

namespace {

using MatMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                   Eigen::Dynamic,
                                                   Eigen::RowMajor>>;

ConstMatMap as_matrix(const Tensor& t) {
  return ConstMatMap(t.data.data(), static_cast<Eigen::Index>(t.rows()),
                     static_cast<Eigen::Index>(t.cols()));
}

MatMap as_matrix(Tensor& t) {
  return MatMap(t.data.data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

}  // namespace

Tape::Var Tape::push(Tensor value, std::function<void(Tape&, int)> fn) {
  Node n;
  n.value = std::move(value);
  n.grad = Tensor::zeros(n.value.shape);
  n.backward_fn = std::move(fn);
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size() - 1);
}

Tape::Var Tape::leaf(Tensor t) { return push(std::move(t), nullptr); }

Tape::Var Tape::param(Parameter& p) {
  Var v = push(p.value, nullptr);
  param_vars_.emplace_back(&p, v);
  return v;
}

Tape::Var Tape::linear(Var input, Var weight, Var bias) {
  const Tensor& in = nodes_[input].value;
  const Tensor& w = nodes_[weight].value;
  const Tensor& b = nodes_[bias].value;
  if (in.cols() != w.rows() || w.cols() != b.size())
    throw std::invalid_argument("linear: shape mismatch");
  Tensor out = Tensor::zeros({in.rows(), w.cols()});
  as_matrix(out).noalias() = as_matrix(in) * as_matrix(w);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out.at(i, j) += b.data[j];
  return push(std::move(out), [input, weight, bias](Tape& t, int self) {
    const Tensor& up = t.nodes_[self].grad;
    const Tensor& in = t.nodes_[input].value;
    const Tensor& w = t.nodes_[weight].value;
    as_matrix(t.nodes_[input].grad).noalias() +=
        as_matrix(up) * as_matrix(w).transpose();
    as_matrix(t.nodes_[weight].grad).noalias() +=
        as_matrix(in).transpose() * as_matrix(up);
    Tensor& gb = t.nodes_[bias].grad;
    for (std::size_t i = 0; i < up.rows(); ++i)
      for (std::size_t j = 0; j < up.cols(); ++j)
        gb.data[j] += up.at(i, j);
  });
}

Tape::Var Tape::relu(Var x) {
  Tensor out = nodes_[x].value;
  for (double& v : out.data) v = std::max(0.0, v);
  return push(std::move(out), [x](Tape& t, int self) {
    const Tensor& up = t.nodes_[self].grad;
    const Tensor& in = t.nodes_[x].value;
    Tensor& g = t.nodes_[x].grad;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in.data[i] > 0.0) g.data[i] += up.data[i];
  });
}

Tape::Var Tape::max_pool_rows(Var x) {
  const Tensor& in = nodes_[x].value;
  const std::size_t n = in.rows(), f = in.cols();
  if (n == 0) throw std::invalid_argument("max_pool_rows: empty input");
  Tensor out = Tensor::zeros({1, f});
  Tensor argmax = Tensor::zeros({1, f});
  for (std::size_t j = 0; j < f; ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (in.at(i, j) > in.at(best, j)) best = i;
    out.at(0, j) = in.at(best, j);
    argmax.at(0, j) = static_cast<double>(best);
  }
  Var v = push(std::move(out), [x](Tape& t, int self) {
    const Tensor& up = t.nodes_[self].grad;
    const Tensor& arg = t.nodes_[self].aux;
    Tensor& g = t.nodes_[x].grad;
    for (std::size_t j = 0; j < up.size(); ++j) {
      const auto i = static_cast<std::size_t>(arg.data[j]);
      g.at(i, j) += up.data[j];
    }
  });
  nodes_[v].aux = std::move(argmax);
  return v;
}

Tape::Var Tape::concat_rows_broadcast(Var rows, Var vec) {
  const Tensor& r = nodes_[rows].value;
  const Tensor& v = nodes_[vec].value;
  const std::size_t k = r.rows(), a = r.cols(), b = v.size();
  Tensor out = Tensor::zeros({k, a + b});
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < a; ++j) out.at(i, j) = r.at(i, j);
    for (std::size_t j = 0; j < b; ++j) out.at(i, a + j) = v.data[j];
  }
  return push(std::move(out), [rows, vec, a, b](Tape& t, int self) {
    const Tensor& up = t.nodes_[self].grad;
    Tensor& gr = t.nodes_[rows].grad;
    Tensor& gv = t.nodes_[vec].grad;
    for (std::size_t i = 0; i < up.rows(); ++i) {
      for (std::size_t j = 0; j < a; ++j) gr.at(i, j) += up.at(i, j);
      for (std::size_t j = 0; j < b; ++j) gv.data[j] += up.at(i, a + j);
    }
  });
}

Tape::Var Tape::softmax_cross_entropy(Var logits, const Tensor& one_hot) {
  const Tensor& z = nodes_[logits].value;
  if (!z.same_shape(one_hot))
    throw std::invalid_argument("softmax_cross_entropy: shape mismatch");
  const std::size_t batch = z.rows(), classes = z.cols();
  Tensor softmax = Tensor::zeros(z.shape);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    // one-hot check: exactly one 1, rest 0
    std::size_t ones = 0;
    for (std::size_t j = 0; j < classes; ++j) {
      const double y = one_hot.at(i, j);
      if (y == 1.0)
        ++ones;
      else if (y != 0.0)
        throw std::invalid_argument("softmax_cross_entropy: target not one-hot");
    }
    if (ones != 1)
      throw std::invalid_argument("softmax_cross_entropy: target not one-hot");
    double zmax = z.at(i, 0);
    for (std::size_t j = 1; j < classes; ++j) zmax = std::max(zmax, z.at(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < classes; ++j)
      denom += std::exp(z.at(i, j) - zmax);
    const double log_denom = std::log(denom);
    for (std::size_t j = 0; j < classes; ++j) {
      const double logp = z.at(i, j) - zmax - log_denom;
      softmax.at(i, j) = std::exp(logp);
      if (one_hot.at(i, j) == 1.0) loss -= logp;
    }
  }
  loss /= static_cast<double>(batch);
  Var v = push(Tensor::scalar(loss),
               [logits, one_hot, batch](Tape& t, int self) {
                 const double up = t.nodes_[self].grad.data[0];
                 const Tensor& sm = t.nodes_[self].aux;
                 Tensor& g = t.nodes_[logits].grad;
                 const double scale = up / static_cast<double>(batch);
                 for (std::size_t i = 0; i < g.size(); ++i)
                   g.data[i] += scale * (sm.data[i] - one_hot.data[i]);
               });
  nodes_[v].aux = std::move(softmax);
  return v;
}

Tape::Var Tape::mean_abs_error(Var pred, const Tensor& target) {
  const Tensor& p = nodes_[pred].value;
  if (p.size() != target.size())
    throw std::invalid_argument("mean_abs_error: length mismatch");
  const std::size_t n = p.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) loss += std::abs(p.data[i] - target.data[i]);
  loss /= static_cast<double>(n);
  return push(Tensor::scalar(loss), [pred, target, n](Tape& t, int self) {
    const double up = t.nodes_[self].grad.data[0];
    const Tensor& p = t.nodes_[pred].value;
    Tensor& g = t.nodes_[pred].grad;
    const double scale = up / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = p.data[i] - target.data[i];
      if (d > 0.0)
        g.data[i] += scale;
      else if (d < 0.0)
        g.data[i] -= scale;
    }
  });
}

Tape::Var Tape::l2_distance(Var a, Var b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (ta.size() != tb.size())
    throw std::invalid_argument("l2_distance: shape mismatch");
  double ss = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    const double d = ta.data[i] - tb.data[i];
    ss += d * d;
  }
  const double dist = std::sqrt(ss);
  return push(Tensor::scalar(dist), [a, b, dist](Tape& t, int self) {
    if (dist <= 0.0) return;
    const double up = t.nodes_[self].grad.data[0];
    const Tensor& ta = t.nodes_[a].value;
    const Tensor& tb = t.nodes_[b].value;
    Tensor& ga = t.nodes_[a].grad;
    Tensor& gb = t.nodes_[b].grad;
    const double scale = up / dist;
    for (std::size_t i = 0; i < ta.size(); ++i) {
      const double d = (ta.data[i] - tb.data[i]) * scale;
      ga.data[i] += d;
      gb.data[i] -= d;
    }
  });
}

Tape::Var Tape::weighted_sum(std::span<const Var> scalars,
                             std::span<const double> weights, double constant) {
  if (scalars.size() != weights.size())
    throw std::invalid_argument("weighted_sum: size mismatch");
  double total = constant;
  for (std::size_t i = 0; i < scalars.size(); ++i)
    total += weights[i] * nodes_[scalars[i]].value.data[0];
  std::vector<Var> vs(scalars.begin(), scalars.end());
  std::vector<double> ws(weights.begin(), weights.end());
  return push(Tensor::scalar(total),
              [vs = std::move(vs), ws = std::move(ws)](Tape& t, int self) {
                const double up = t.nodes_[self].grad.data[0];
                for (std::size_t i = 0; i < vs.size(); ++i)
                  t.nodes_[vs[i]].grad.data[0] += up * ws[i];
              });
}

void Tape::backward(Var loss, double seed) {
  if (nodes_[loss].value.size() != 1)
    throw std::invalid_argument("backward: loss must be scalar");
  nodes_[loss].grad.data[0] = seed;
  for (int i = loss; i >= 0; --i)
    if (nodes_[i].backward_fn) nodes_[i].backward_fn(*this, i);
}

void Tape::accumulate_param_grads(double scale) {
  for (auto& [p, v] : param_vars_) {
    const Tensor& g = nodes_[v].grad;
    for (std::size_t i = 0; i < g.size(); ++i)
      p->grad.data[i] += scale * g.data[i];
  }
}

double grad_check(const std::function<double()>& loss_fn,
                  std::vector<Parameter*> params, double h,
                  std::size_t samples_per_param, Rng& rng) {
  for (Parameter* p : params) p->zero_grad();
  loss_fn();
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  double max_rel_err = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter* p = params[pi];
    const std::size_t n = p->value.size();
    std::vector<std::size_t> coords;
    if (n <= samples_per_param) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      for (std::size_t s = 0; s < samples_per_param; ++s)
        coords.push_back(rng.index(n));
    }
    for (std::size_t c : coords) {
      const double saved = p->value.data[c];
      p->value.data[c] = saved + h;
      for (Parameter* q : params) q->zero_grad();
      const double plus = loss_fn();
      p->value.data[c] = saved - h;
      for (Parameter* q : params) q->zero_grad();
      const double minus = loss_fn();
      p->value.data[c] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[pi].data[c];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_rel_err = std::max(max_rel_err, std::abs(a - numeric) / denom);
    }
  }
  for (Parameter* p : params) p->zero_grad();
  return max_rel_err;
}

}  // namespace giuda
