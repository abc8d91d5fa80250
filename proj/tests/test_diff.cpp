#include <cmath>
#include <random>

#include "doctest.h"
#include "herding/diff.hpp"
#include "test_support.hpp"

using namespace herding;
using herding::testing::stacked;

namespace {

Matrix<double> analytic_ju_1v1(const Vec2<double>& p, const Vec2<double>& h, double gamma) {
  const Vec2<double> d = p - h;
  const double r = d.norm();
  return -gamma * (Eigen::Matrix2d::Identity() / std::pow(r, 3) - 3.0 * d * d.transpose() / std::pow(r, 5));
}

}  // namespace

TEST_CASE("linear residual is differentiated exactly") {
  std::mt19937_64 rng(5);
  Matrix<double> a = Matrix<double>::Random(4, 6);
  const Stacked<double> at = testing::uniform(rng, 6, -2, 2);
  const auto jac = central_difference_jacobian<double>([&](const Stacked<double>& u) -> Stacked<double> { return a * u; }, at);
  CHECK((jac - a).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("quadratic residual error shrinks as step squared") {
  auto sq = [](const Stacked<double>& u) -> Stacked<double> { return u.array().cube().matrix(); };
  const Stacked<double> at = stacked({1.0});
  double previous = 0;
  for (double step : {1e-1, 1e-2}) {
    const auto jac = central_difference_jacobian<double>(sq, at, {0.0, step});
    const double err = std::abs(jac(0, 0) - 3.0);
    CHECK(err == doctest::Approx(step * step).epsilon(1e-6));
    if (previous > 0) CHECK(previous / err == doctest::Approx(100.0).epsilon(1e-6));
    previous = err;
  }
  auto square = [](const Stacked<double>& u) -> Stacked<double> { return u.array().square().matrix(); };
  CHECK(central_difference_jacobian<double>(square, at)(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("step rule") {
  FiniteDiffSettings<double> fd;
  CHECK(fd.step_for(0.0) == 1e-6);
  CHECK(fd.step_for(0.5) == 1e-6);
  CHECK(fd.step_for(-20.0) == doctest::Approx(2e-5));
}

TEST_CASE("1v1 inverse J_u matches the analytic derivative") {
  std::mt19937_64 rng(99);
  const auto cfg = testing::inverse_herd(1, 1, 1.3);
  for (int trial = 0; trial < 50; ++trial) {
    const Stacked<double> x = testing::uniform(rng, 2, -2, 2);
    const Stacked<double> u = testing::separated_herders(rng, x, 1, 2, 0.3);
    DesiredDynamics<double> dd{scaled_identity<double>(2, 0.25), StaticReference<double>{Stacked<double>::Zero(2)},
                               false};
    const auto ju = jacobian_u<double>(cfg, dd, x, u, 0.0);
    CHECK((ju - analytic_ju_1v1(point(x, 0), point(u, 0), 1.3)).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("J_x includes the desired dynamics gain") {
  // dh/dx = df/dx + K_f, so two gains differ by exactly their difference
  const auto cfg = testing::inverse_herd(2, 2);
  const Stacked<double> x = stacked({0.1, 0.2, 1.0, -0.5});
  const Stacked<double> u = stacked({-2, 0, 2, 1});
  const Stacked<double> target = Stacked<double>::Zero(4);
  DesiredDynamics<double> a{scaled_identity<double>(4, 0.25), StaticReference<double>{target}, false};
  DesiredDynamics<double> b{scaled_identity<double>(4, 1.25), StaticReference<double>{target}, false};
  const Matrix<double> diff = jacobian_x<double>(cfg, b, x, u, 0.0) - jacobian_x<double>(cfg, a, x, u, 0.0);
  CHECK((diff - Matrix<double>::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("damped right pseudoinverse") {
  CHECK((damped_right_pinv<double>(Matrix<double>::Identity(3, 3), 0.0) - Matrix<double>::Identity(3, 3)).norm() < 1e-15);

  Matrix<double> row(1, 2);
  row << 1, 0;
  const auto p = damped_right_pinv<double>(row, 0.0);
  CHECK(p.rows() == 2);
  CHECK(p.cols() == 1);
  CHECK(p(0, 0) == doctest::Approx(1.0));
  CHECK(p(1, 0) == 0.0);
  CHECK((row * p)(0, 0) == doctest::Approx(1.0));

  std::srand(3);
  const Matrix<double> j = Matrix<double>::Random(4, 6);
  const auto jp = damped_right_pinv<double>(j, 1e-12);
  CHECK((j * jp - Matrix<double>::Identity(4, 4)).norm() <= 1e-6);

  Matrix<double> deficient = Matrix<double>::Zero(2, 3);
  deficient(0, 0) = 1;
  CHECK_THROWS_AS(damped_right_pinv<double>(deficient, 0.0), SingularSystem);
  CHECK_NOTHROW(damped_right_pinv<double>(deficient, 1e-3));
}

TEST_CASE("rank condition") {
  auto id = rank_condition<double>(Matrix<double>::Identity(2, 2));
  CHECK(id.satisfied);
  CHECK(id.smallest_singular_value == doctest::Approx(1.0));

  Matrix<double> zero_row(2, 3);
  zero_row << 1, 2, 3, 0, 0, 0;
  CHECK_FALSE(rank_condition<double>(zero_row).satisfied);

  const Stacked<double> x = stacked({2.1, 0.7, -0.8, -1.4, -1.3, 1.8, 2.1, -1.3, 1.3, 1.5});
  const Stacked<double> u = stacked({-3.0, 0.0, -1.5, 3.0, 3.0, 0.0, 0.0, -3.0, 1.5, 3.0});
  const Stacked<double> target = stacked({1.3, 0.5, -1.5, -0.9, -0.8, 1.1, 1.8, -0.7, 0.4, 0.9});
  DesiredDynamics<double> dd{scaled_identity<double>(10, 0.25), StaticReference<double>{target}, false};
  CHECK(rank_condition<double>(jacobian_u<double>(testing::inverse_herd(5, 5), dd, x, u, 0.0)).satisfied);
}
