#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace giuda {

// Dense row-major 64-bit real tensor.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (element_count(shape) != data.size())
      throw std::invalid_argument("Tensor: shape/data size mismatch");
  }

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t e : s) n *= e;
    return n;
  }

  static Tensor zeros(std::vector<std::size_t> s) {
    const std::size_t n = element_count(s);
    return Tensor(std::move(s), std::vector<double>(n, 0.0));
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  std::size_t size() const { return data.size(); }

  std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const;
};

// Trainable tensor with gradient and Adam moment buffers.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
  std::int64_t step_count = 0;

  Parameter() = default;
  Parameter(std::string n, Tensor val)
      : name(std::move(n)),
        value(std::move(val)),
        grad(Tensor::zeros(value.shape)),
        m(Tensor::zeros(value.shape)),
        v(Tensor::zeros(value.shape)) {}

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

struct TrainConfig {
  double learning_rate = 0.001;
  double weight_decay = 0.00005;
  std::size_t total_epochs = 1;
  std::size_t batch_size = 32;
  double min_learning_rate = 0.0;

  void validate() const {
    if (learning_rate <= 0.0)
      throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (min_learning_rate < 0.0 || min_learning_rate > learning_rate)
      throw std::invalid_argument(
          "TrainConfig: need 0 <= min_learning_rate <= learning_rate");
    if (batch_size < 1)
      throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (total_epochs < 1)
      throw std::invalid_argument("TrainConfig: total_epochs must be >= 1");
  }
};

// Epoch-wise cosine annealing between learning_rate and min_learning_rate.
double cosine_lr(std::size_t epoch, const TrainConfig& config);

// One Adam update (beta1=0.9, beta2=0.999, eps=1e-8, bias corrected) with
// decoupled weight decay applied before the moment update. Zeroes gradients.
void adam_step(std::vector<Parameter*>& params, const TrainConfig& config,
               double lr_now);

}  // namespace giuda
