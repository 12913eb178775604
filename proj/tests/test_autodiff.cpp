#include <stdexcept>
#include <doctest.h>

#include <cmath>

#include "giuda/autodiff.hpp"

using namespace giuda;

TEST_CASE("linear forward matches hand-computed products") {
  Tape tape;
  auto in = tape.leaf(Tensor({1, 2}, {1.0, 2.0}));
  auto w = tape.leaf(Tensor({2, 2}, {1.0, 0.0, 0.0, 1.0}));
  auto b = tape.leaf(Tensor({2}, {0.0, 0.0}));
  auto out = tape.linear(in, w, b);
  CHECK(tape.value(out).data == std::vector<double>{1.0, 2.0});

  auto in2 = tape.leaf(Tensor({1, 2}, {1.0, 1.0}));
  auto w2 = tape.leaf(Tensor({2, 2}, {2.0, 3.0, 4.0, 5.0}));
  auto b2 = tape.leaf(Tensor({2}, {1.0, 1.0}));
  auto out2 = tape.linear(in2, w2, b2);
  CHECK(tape.value(out2).data == std::vector<double>{7.0, 9.0});
}

TEST_CASE("linear with zero weight yields the bias in every row") {
  Tape tape;
  auto in = tape.leaf(Tensor({3, 2}, {1, 2, 3, 4, 5, 6}));
  auto w = tape.leaf(Tensor::zeros({2, 2}));
  auto b = tape.leaf(Tensor({2}, {0.5, -0.5}));
  auto out = tape.linear(in, w, b);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(tape.value(out).at(i, 0) == 0.5);
    CHECK(tape.value(out).at(i, 1) == -0.5);
  }
}

TEST_CASE("linear rejects mismatched shapes") {
  Tape tape;
  auto in = tape.leaf(Tensor({1, 3}, {1, 2, 3}));
  auto w = tape.leaf(Tensor({2, 2}, {1, 2, 3, 4}));
  auto b = tape.leaf(Tensor({2}, {0, 0}));
  CHECK_THROWS_AS(tape.linear(in, w, b), std::invalid_argument);
}

TEST_CASE("relu forward and subgradient") {
  Tape tape;
  auto x = tape.leaf(Tensor({1, 3}, {-1.0, 0.0, 2.0}));
  auto y = tape.relu(x);
  CHECK(tape.value(y).data == std::vector<double>{0.0, 0.0, 2.0});

  // gradient: sum(relu(x)) w.r.t. x is 1 where x > 0, else 0
  Tape t2;
  auto x2 = t2.leaf(Tensor({1, 3}, {-1.0, 0.0, 3.0}));
  auto y2 = t2.relu(x2);
  auto s = t2.mean_abs_error(y2, Tensor::zeros({3}));
  t2.backward(s);
  CHECK(t2.grad(x2).data[0] == 0.0);
  CHECK(t2.grad(x2).data[1] == 0.0);
  CHECK(t2.grad(x2).data[2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("max_pool_rows: columnwise max, permutation invariant") {
  Tape tape;
  auto x = tape.leaf(Tensor({2, 2}, {1.0, 5.0, 3.0, 2.0}));
  auto y = tape.max_pool_rows(x);
  CHECK(tape.value(y).data == std::vector<double>{3.0, 5.0});

  auto xp = tape.leaf(Tensor({2, 2}, {3.0, 2.0, 1.0, 5.0}));
  auto yp = tape.max_pool_rows(xp);
  CHECK(tape.value(yp).data == tape.value(y).data);

  auto single = tape.leaf(Tensor({1, 3}, {4.0, -1.0, 0.0}));
  auto ys = tape.max_pool_rows(single);
  CHECK(tape.value(ys).data == std::vector<double>{4.0, -1.0, 0.0});
}

TEST_CASE("max_pool_rows ties route gradient to the lowest row") {
  Tape tape;
  auto x = tape.leaf(Tensor({3, 1}, {7.0, 7.0, 2.0}));
  auto y = tape.max_pool_rows(x);
  auto s = tape.mean_abs_error(y, Tensor::zeros({1}));
  tape.backward(s);
  CHECK(tape.grad(x).data[0] == doctest::Approx(1.0));
  CHECK(tape.grad(x).data[1] == 0.0);
  CHECK(tape.grad(x).data[2] == 0.0);
}

TEST_CASE("softmax cross entropy values") {
  Tape tape;
  Tensor uniform_logits = Tensor::zeros({1, 10});
  Tensor target = Tensor::zeros({1, 10});
  target.data[3] = 1.0;
  auto ce = tape.softmax_cross_entropy(tape.leaf(uniform_logits), target);
  CHECK(tape.value(ce).data[0] == doctest::Approx(std::log(10.0)).epsilon(1e-12));

  Tensor confident = Tensor({1, 2}, {10.0, -10.0});
  Tensor t0 = Tensor({1, 2}, {1.0, 0.0});
  auto ce2 = tape.softmax_cross_entropy(tape.leaf(confident), t0);
  CHECK(tape.value(ce2).data[0] ==
        doctest::Approx(std::log(1.0 + std::exp(-20.0))).epsilon(1e-6));
  CHECK(tape.value(ce2).data[0] == doctest::Approx(2.06e-9).epsilon(0.01));
  CHECK(tape.value(ce2).data[0] >= 0.0);
}

TEST_CASE("softmax cross entropy rejects non-one-hot targets") {
  Tape tape;
  Tensor logits = Tensor::zeros({1, 3});
  CHECK_THROWS_AS(tape.softmax_cross_entropy(tape.leaf(logits),
                                             Tensor({1, 3}, {0.5, 0.5, 0.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(tape.softmax_cross_entropy(tape.leaf(logits),
                                             Tensor({1, 3}, {1.0, 1.0, 0.0})),
                  std::invalid_argument);
}

TEST_CASE("l2_distance and weighted_sum") {
  Tape tape;
  auto a = tape.leaf(Tensor({1, 3}, {1.0, 2.0, 3.0}));
  auto b = tape.leaf(Tensor({1, 3}, {1.0, 5.0, 3.0}));
  auto d = tape.l2_distance(a, b);
  CHECK(tape.value(d).data[0] == doctest::Approx(3.0));

  std::vector<Tape::Var> terms{d};
  std::vector<double> ws{2.0};
  auto s = tape.weighted_sum(terms, ws, 1.5);
  CHECK(tape.value(s).data[0] == doctest::Approx(7.5));
  tape.backward(s);
  CHECK(tape.grad(b).data[1] == doctest::Approx(2.0));
}

namespace {

// Finite-difference oracle over a small composite network built from every
// tape op.
double layer_stack_loss(Parameter& w1, Parameter& b1, Parameter& w2,
                        Parameter& b2, bool with_grad) {
  Tape tape;
  Tensor input({4, 3}, {0.1, -0.2, 0.3, 0.4, 0.5, -0.6, 0.7, 0.8, 0.9, -1.0,
                        1.1, 1.2});
  auto x = tape.leaf(input);
  auto h = tape.relu(tape.linear(x, tape.param(w1), tape.param(b1)));
  auto pooled = tape.max_pool_rows(h);
  auto cat = tape.concat_rows_broadcast(
      tape.leaf(Tensor({2, 2}, {0.3, -0.1, 0.2, 0.4})), pooled);
  auto logits = tape.linear(cat, tape.param(w2), tape.param(b2));
  Tensor one_hot = Tensor::zeros({2, 2});
  one_hot.at(0, 1) = 1.0;
  one_hot.at(1, 0) = 1.0;
  auto ce = tape.softmax_cross_entropy(logits, one_hot);
  auto mae = tape.mean_abs_error(logits, Tensor::zeros({4}));
  auto l2 = tape.l2_distance(pooled, tape.leaf(Tensor({1, 5}, {1, 2, 3, 4, 5})));
  std::vector<Tape::Var> terms{ce, mae, l2};
  std::vector<double> ws{1.0, 0.7, 0.3};
  auto loss = tape.weighted_sum(terms, ws);
  if (with_grad) {
    tape.backward(loss);
    tape.accumulate_param_grads();
  }
  return tape.value(loss).data[0];
}

}  // namespace

TEST_CASE("gradients of composite layers match finite differences") {
  Rng init(123);
  auto mk = [&](std::vector<std::size_t> shape, const char* name) {
    Tensor t = Tensor::zeros(shape);
    for (double& v : t.data) v = init.uniform(-0.5, 0.5);
    return Parameter(name, t);
  };
  Parameter w1 = mk({3, 5}, "w1"), b1 = mk({5}, "b1");
  Parameter w2 = mk({7, 2}, "w2"), b2 = mk({2}, "b2");
  Rng rng(7);
  const double err = grad_check(
      [&] { return layer_stack_loss(w1, b1, w2, b2, true); },
      {&w1, &b1, &w2, &b2}, 1e-5, 64, rng);
  CHECK(err < 1e-6);
}

TEST_CASE("grad_check on a quadratic is near-exact, on a constant zero") {
  Parameter x("x", Tensor({4}, {0.3, -1.2, 2.0, 0.5}));
  auto quad = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      s += x.value.data[i] * x.value.data[i];
      x.grad.data[i] += 2.0 * x.value.data[i];
    }
    return s;
  };
  Rng rng(1);
  CHECK(grad_check(quad, {&x}, 1e-5, 16, rng) < 1e-7);

  Parameter y("y", Tensor({3}, {1.0, 2.0, 3.0}));
  auto constant = [&] { return 5.0; };
  CHECK(grad_check(constant, {&y}, 1e-5, 16, rng) == 0.0);
}

TEST_CASE("backward keeps all gradients finite") {
  Rng init(5);
  Tensor t = Tensor::zeros({3, 3});
  for (double& v : t.data) v = init.uniform(-1.0, 1.0);
  Parameter w("w", t);
  Parameter b("b", Tensor::zeros({3}));
  Tape tape;
  auto x = tape.leaf(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
  auto out = tape.relu(tape.linear(x, tape.param(w), tape.param(b)));
  auto loss = tape.mean_abs_error(out, Tensor::zeros({6}));
  tape.backward(loss);
  tape.accumulate_param_grads();
  CHECK(w.grad.all_finite());
  CHECK(b.grad.all_finite());
  CHECK(tape.value(out).all_finite());
}
