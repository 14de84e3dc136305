#include <cmath>

#include "doctest.h"

#include "fairsched/qnetwork.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace fairsched;

namespace {

// 2 -> 2 (ReLU) -> 1 with hand-picked weights
QNetwork tiny() {
  NetworkParams p;
  Eigen::MatrixXd w1(2, 2);
  w1 << 1.0, -1.0,
        0.5,  2.0;
  Eigen::VectorXd b1(2);
  b1 << 0.0, -1.0;
  Eigen::MatrixXd w2(1, 2);
  w2 << 2.0, -3.0;
  Eigen::VectorXd b2(1);
  b2 << 0.5;
  p.weights = {w1, w2};
  p.biases = {b1, b2};
  return QNetwork({2, 2, 1}, p);
}

}  // namespace

TEST_SUITE("qnetwork") {

TEST_CASE("glorot initialisation") {
  Rng rng(51);
  QNetwork net({7, 60, 11}, rng);
  REQUIRE(net.params().weights.size() == 2);
  CHECK(net.params().weights[0].rows() == 60);
  CHECK(net.params().weights[0].cols() == 7);
  CHECK(net.params().parameter_count() == 7 * 60 + 60 + 60 * 11 + 11);
  const double limit0 = std::sqrt(6.0 / 67.0);
  CHECK(net.params().weights[0].cwiseAbs().maxCoeff() <= limit0);
  CHECK(std::abs(net.params().weights[0].mean()) < 0.05);
  for (const auto& b : net.params().biases) CHECK(b.isZero());

  Rng again(51);
  QNetwork same({7, 60, 11}, again);
  CHECK(same.params() == net.params());
}

TEST_CASE("bad shapes are rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(QNetwork({7}, rng), std::invalid_argument);
  CHECK_THROWS_AS(QNetwork({7, 0, 3}, rng), std::invalid_argument);
  NetworkParams p;
  p.weights = {Eigen::MatrixXd::Zero(3, 2)};
  p.biases = {Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(QNetwork({2, 3}, p), std::invalid_argument);
}

TEST_CASE("forward pass by hand") {
  const auto net = tiny();
  Eigen::VectorXd x(2);
  x << 1.0, 1.0;
  // hidden: relu(0) = 0, relu(0.5 + 2 - 1) = 1.5; out 0.5 - 4.5
  CHECK(net.forward(x)(0) == doctest::Approx(-4.0));
  x << 2.0, 0.0;
  // hidden: 2, relu(1 - 1) = 0; out 4.5
  CHECK(net.forward(x)(0) == doctest::Approx(4.5));
}

TEST_CASE("batch forward matches single forward") {
  Rng rng(52);
  QNetwork net({7, 8, 9}, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(7, 5);
  const auto batch = net.forward_batch(x);
  for (int i = 0; i < 5; ++i) CHECK((batch.col(i) - net.forward(x.col(i))).norm() < 1e-12);
}

TEST_CASE("loss is the mean squared TD error of the chosen outputs") {
  const auto net = tiny();
  Eigen::MatrixXd x(2, 2);
  x << 1.0, 2.0,
       1.0, 0.0;
  const std::vector<int> a = {0, 0};
  const std::vector<double> y = {-3.0, 4.0};
  // errors -1 and 0.5
  CHECK(net.loss(x, a, y) == doctest::Approx((1.0 + 0.25) / 2.0));
  NetworkParams g;
  CHECK(net.loss_and_gradient(x, a, y, g) == doctest::Approx(0.625));
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(53);
  for (int i = 0; i < 10; ++i) {
    const auto r = testsupport::gradient_check({7, 8, 9}, 6, rng);
    CHECK(r.checked == 7 * 8 + 8 + 8 * 9 + 9);
    CHECK(r.max_rel_error < 1e-4);
  }
  const auto deep = testsupport::gradient_check({4, 6, 5, 3}, 4, rng);
  CHECK(deep.max_rel_error < 1e-4);
}

TEST_CASE("momentum SGD update by hand") {
  auto net = tiny();
  const auto w0 = net.params();
  MomentumSgd opt(net, 0.1, 0.9);
  NetworkParams g = w0;
  g.set_zero();
  g.weights[1](0, 0) = 1.0;
  opt.step(net, g);
  // v = -0.1, w = 2 - 0.1
  CHECK(net.params().weights[1](0, 0) == doctest::Approx(1.9));
  opt.step(net, g);
  // v = 0.9 * -0.1 - 0.1 = -0.19
  CHECK(net.params().weights[1](0, 0) == doctest::Approx(1.71));
  CHECK(net.params().weights[0] == w0.weights[0]);
}

TEST_CASE("zero learning rate leaves weights bit-identical") {
  Rng rng(54);
  QNetwork net({7, 8, 9}, rng);
  const auto before = net.params();
  MomentumSgd opt(net, 0.0, 0.9);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(7, 4);
  const std::vector<int> a = {0, 3, 8, 1};
  const std::vector<double> y = {1.0, -2.0, 0.5, 3.0};
  for (int i = 0; i < 20; ++i) {
    NetworkParams g;
    net.loss_and_gradient(x, a, y, g);
    opt.step(net, g);
  }
  CHECK(net.params() == before);
}

TEST_CASE("gradient descent fits a fixed regression target") {
  Rng rng(55);
  QNetwork net({3, 16, 2}, rng);
  MomentumSgd opt(net, 0.01, 0.9);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 8);
  std::vector<int> a(8);
  std::vector<double> y(8);
  for (int i = 0; i < 8; ++i) {
    a[i] = i % 2;
    y[i] = x(0, i) - 0.5 * x(2, i);
  }
  const double start = net.loss(x, a, y);
  for (int i = 0; i < 3000; ++i) {
    NetworkParams g;
    net.loss_and_gradient(x, a, y, g);
    opt.step(net, g);
  }
  CHECK(net.loss(x, a, y) < 0.01 * start);
}

}  // TEST_SUITE
