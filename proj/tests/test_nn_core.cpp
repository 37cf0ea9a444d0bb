#include "doctest.h"

#include "support/grad_suite.hpp"

#include "hatelab/adam.hpp"
#include "hatelab/grad_check.hpp"
#include "hatelab/layers.hpp"

#include <cmath>

using namespace hatelab;
using namespace hatelab::nn;
using M = Matrix<double>;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_SUITE("nn_core") {
  TEST_CASE("dense forward by hand") {
    Rng rng(1);
    auto d = make_dense<double>("d", 2, 2, rng);
    d.weight.value = M::Identity(2, 2);
    d.bias.value.setZero();
    M x(1, 2);
    x << 1, 2;
    CHECK(dense_forward(d, x) == x);

    auto s = make_dense<double>("s", 2, 1, rng);
    s.weight.value << 1, 1;
    s.bias.value << 0;
    x << 2, 3;
    CHECK(dense_forward(s, x)(0, 0) == 5.0);
  }

  TEST_CASE("conv1d by hand") {
    Rng rng(1);
    auto bank = make_filter_bank<double>("c", 3, 1, 1, rng);
    bank.weight.value.setOnes();
    bank.bias.value.setZero();
    const M out = conv1d_forward(bank, M(M::Ones(5, 1)), 1);
    REQUIRE(out.rows() == 3);
    CHECK((out.array() == 3.0).all());
    CHECK(conv_output_length(256, 4, 4) == 64);
  }

  TEST_CASE("maxpool by hand") {
    M x(6, 1);
    x << 1, 3, 2, 5, 4, 0;
    const auto r = maxpool1d_forward(x, 3, 3);
    REQUIRE(r.output.rows() == 2);
    CHECK(r.output(0, 0) == 3);
    CHECK(r.output(1, 0) == 5);
    CHECK(pool_output_length(64, 3, 3) == 21);

    M y(4, 2);
    y << 1, 9, 7, 2, 3, 3, 0, 8;
    const auto g = global_maxpool_forward(y);
    REQUIRE(g.output.rows() == 1);
    CHECK(g.output(0, 0) == 7);
    CHECK(g.output(0, 1) == 9);
  }

  TEST_CASE("maxpool ties route to the earliest index") {
    M x(3, 1);
    x << 2, 2, 1;
    const auto r = maxpool1d_forward(x, 3, 3);
    const M g = maxpool1d_backward(r, M(M::Ones(1, 1)));
    CHECK(g(0, 0) == 1.0);
    CHECK(g(1, 0) == 0.0);
  }

  TEST_CASE("output length formulas") {
    for (std::size_t n = 1; n < 40; ++n)
      for (std::size_t w = 1; w <= n; ++w)
        for (std::size_t s = 1; s < 6; ++s) {
          const std::size_t len = conv_output_length(n, w, s);
          CHECK(len >= 1);
          CHECK((len - 1) * s + w <= n);
          CHECK(len * s + w > n);
          CHECK(pool_output_length(n, w, s) == len);
        }
  }

  TEST_CASE("lstm zero fixed point") {
    Rng rng(2);
    auto l = make_lstm<double>("l", 3, 4, rng);
    l.weight.value.setZero();
    l.bias.value.setZero();
    const auto c = lstm_forward(l, std::vector<M>(5, M::Zero(2, 3)));
    for (const auto& h : c.hidden) CHECK(h.isZero());
  }

  TEST_CASE("lstm single step by hand") {
    Rng rng(2);
    auto l = make_lstm<double>("l", 1, 1, rng);
    // rows i, f, o, g; columns [x, h]
    l.weight.value << 0.5, -0.3, 0.2, 0.7, -0.4, 0.1, 0.9, 0.6;
    l.bias.value << 0.1, 1.0, -0.2, 0.05;
    M x(1, 1);
    x << 0.8;
    const auto c = lstm_forward(l, {x});
    const double i = sigmoid(0.5 * 0.8 + 0.1);
    const double o = sigmoid(-0.4 * 0.8 - 0.2);
    const double g = std::tanh(0.9 * 0.8 + 0.05);
    const double cell = i * g;
    CHECK(c.cell[0](0, 0) == doctest::Approx(cell).epsilon(1e-12));
    CHECK(c.hidden[0](0, 0) == doctest::Approx(o * std::tanh(cell)).epsilon(1e-12));
  }

  TEST_CASE("bilstm zero weights and palindrome symmetry") {
    Rng rng(4);
    auto f = make_lstm<double>("f", 2, 3, rng);
    auto b = make_lstm<double>("b", 2, 3, rng);
    f.weight.value.setZero();
    f.bias.value.setZero();
    b.weight.value.setZero();
    b.bias.value.setZero();
    const auto z = bilstm_forward(f, b, std::vector<M>(4, M::Random(1, 2)));
    for (const auto& o : z.outputs) {
      CHECK(o.cols() == 6);
      CHECK(o.isZero());
    }

    auto shared = make_lstm<double>("s", 2, 3, rng);
    std::vector<M> xs{M::Random(1, 2), M::Random(1, 2), M::Random(1, 2)};
    xs.push_back(xs[1]);
    xs.push_back(xs[0]);
    const auto p = bilstm_forward(shared, shared, xs);
    const std::size_t T = xs.size();
    for (std::size_t t = 0; t < T; ++t) {
      const M fwd = p.outputs[t].leftCols(3);
      const M bwd = p.outputs[T - 1 - t].rightCols(3);
      CHECK((fwd - bwd).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("gradient suite over random shapes") {
    const auto cases = testing::run_gradient_suite(20, 2024);
    for (const auto& c : cases) {
      CHECK_MESSAGE(c.max_rel_error < 1e-4, c.layer << " " << c.shape);
      if (c.layer == "softmax_xent") CHECK(c.max_rel_error < 1e-6);
    }
    CHECK(cases.size() >= 100);
  }

  TEST_CASE("library grad_check on a dense layer and a 5-step lstm") {
    Rng rng(9);
    auto d = make_dense<double>("d", 3, 4, rng);
    M x = M::Random(2, 3);
    const M R = M::Random(2, 4);
    auto loss = [&] { return (dense_forward(d, x).array() * R.array()).sum(); };
    d.weight.zero_grad();
    d.bias.zero_grad();
    const M gx = dense_backward(d, x, R);
    CHECK(grad_check(loss, x, gx) < 1e-4);
    CHECK(grad_check(loss, d.weight.value, d.weight.grad) < 1e-4);

    auto l = make_lstm<double>("l", 2, 4, rng);
    std::vector<M> xs(5, M::Random(1, 2));
    std::vector<M> gh(5, M::Zero(1, 4));
    gh.back() = M::Random(1, 4);
    auto lloss = [&] { return (lstm_forward(l, xs).hidden.back().array() * gh.back().array()).sum(); };
    l.weight.zero_grad();
    l.bias.zero_grad();
    lstm_backward(l, lstm_forward(l, xs), gh);
    CHECK(grad_check(lloss, l.weight.value, l.weight.grad) < 1e-4);
  }

  TEST_CASE("relative_error floor") {
    CHECK(relative_error(1.0, 1.0) == 0.0);
    CHECK(relative_error(0.0, 1e-9) == doctest::Approx(1e-3));
    CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  }

  TEST_CASE("dropout") {
    Rng rng(5);
    const M x = M::Random(100, 1000);
    CHECK(dropout_apply(x, 0.0, Mode::kTraining, rng) == x);
    CHECK(dropout_apply(x, 0.3, Mode::kInference, rng) == x);
    const M y = dropout_apply(x, 0.2, Mode::kTraining, rng);
    const double zeroed = static_cast<double>((y.array() == 0.0).count()) / static_cast<double>(x.size());
    CHECK(std::abs(zeroed - 0.2) < 0.01);
    // survivors are scaled by 1 / (1 - rate)
    for (Eigen::Index i = 0; i < 50; ++i)
      if (y(0, i) != 0.0) CHECK(y(0, i) == doctest::Approx(x(0, i) / 0.8));
    CHECK(dropout_apply<double>(x, 0.2, Mode::kTraining, 7) ==
          dropout_apply<double>(x, 0.2, Mode::kTraining, 7));
  }

  TEST_CASE("softmax cross-entropy") {
    RowVector<double> z = RowVector<double>::Zero(3);
    CHECK(softmax_xent(z, 1).loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    RowVector<double> big(2);
    big << 1000, 0;
    const auto r = softmax_xent(big, 0);
    CHECK(std::isfinite(r.loss));
    CHECK(r.loss == doctest::Approx(0.0));
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      RowVector<double> l = RowVector<double>::Random(5) * (i % 2 ? 1000.0 : 3.0);
      CHECK(std::abs(softmax(l).sum() - 1.0) < 1e-9);
    }
  }

  TEST_CASE("adam") {
    Param<double> p("p", 1, 1);
    p.value(0, 0) = 1.0;
    std::vector<Param<double>*> ps{&p};
    AdamState<double> st;
    adam_step<double>(ps, st);
    CHECK(p.value(0, 0) == 1.0);

    p.grad(0, 0) = 1.0;
    AdamState<double> st2;
    adam_step<double>(ps, st2);
    CHECK(p.value(0, 0) == doctest::Approx(0.999).epsilon(1e-9));

    Param<double> a("a", 2, 2), b("b", 2, 2);
    a.value << 1, 2, 3, 4;
    b.value = a.value;
    a.grad << 0.1, -0.2, 0.3, 0.0;
    b.grad = a.grad;
    AdamState<double> sa, sb;
    std::vector<Param<double>*> pa{&a}, pb{&b};
    for (int i = 0; i < 3; ++i) {
      adam_step<double>(pa, sa);
      adam_step<double>(pb, sb);
    }
    CHECK(a.value == b.value);
  }

  TEST_CASE("full-batch adam on a separable toy set never increases the loss") {
    Rng rng(8);
    auto d = make_dense<double>("d", 2, 2, rng);
    M x(10, 2);
    std::vector<std::int32_t> y;
    for (int i = 0; i < 10; ++i) {
      const double s = i < 5 ? 1.0 : -1.0;
      x(i, 0) = s * (1.0 + 0.1 * i);
      x(i, 1) = -s * 0.5 + 0.05 * i;
      y.push_back(i < 5 ? 0 : 1);
    }
    std::vector<Param<double>*> ps{&d.weight, &d.bias};
    AdamState<double> st;
    st.hyper.lr = 0.01;
    double prev = INFINITY;
    for (int step = 0; step < 20; ++step) {
      const auto out = softmax_xent_batch<double>(dense_forward(d, x), y);
      CHECK(out.mean_loss <= prev + 1e-12);
      prev = out.mean_loss;
      d.weight.zero_grad();
      d.bias.zero_grad();
      dense_backward(d, x, out.grad);
      adam_step<double>(ps, st);
    }
  }
}
