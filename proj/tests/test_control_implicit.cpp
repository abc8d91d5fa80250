#include <cmath>
#include <vector>

#include "doctest.h"
#include "herding/control_implicit.hpp"
#include "herding/diff.hpp"
#include "test_support.hpp"

using namespace herding;
using herding::testing::stacked;

namespace {

struct Affine {
  Stacked<double> c;
  std::vector<double>* norms{nullptr};

  Stacked<double> operator()(const Stacked<double>& u) const {
    Stacked<double> r = u - c;
    if (norms) norms->push_back(r.norm());
    return r;
  }
};

Matrix<double> identity_jacobian(const Stacked<double>& u) { return Matrix<double>::Identity(u.size(), u.size()); }

// Iterations until the step of the recursion e_k = rho e_{k-1} drops below eps.
int affine_iterations(double lambda, double e0, double eps) {
  const double rho = lambda / (1 + lambda);
  if (rho == 0) return e0 < eps ? 1 : 2;
  const double ratio = std::log(eps / ((1 - rho) * e0)) / std::log(rho);
  return static_cast<int>(std::floor(ratio)) + 2;
}

}  // namespace

TEST_CASE("affine residual, undamped: one update reaches the root") {
  const Stacked<double> c = stacked({1.0, -2.0, 0.5});
  const Stacked<double> start = stacked({4.0, 4.0, -4.0});
  LMConfig<double> lm{0.0, 1e-3, 1};
  auto one = levenberg_marquardt<double>(Affine{c}, identity_jacobian, start, lm);
  CHECK((one.u - c).norm() < 1e-15);
  CHECK(one.eta < 1e-15);

  lm.max_iterations.reset();
  auto full = levenberg_marquardt<double>(Affine{c}, identity_jacobian, start, lm);
  CHECK(full.converged);
  CHECK((full.u - c).norm() < 1e-15);
  CHECK(full.iterations == affine_iterations(0.0, (start - c).norm(), 1e-3));
}

TEST_CASE("affine residual, damped: iteration count follows the geometric recursion") {
  const Stacked<double> c = stacked({1.0, -2.0});
  for (double e0 : {0.5, 3.0, 40.0}) {
    const Stacked<double> start = c + stacked({e0 * 0.6, e0 * 0.8});
    std::vector<double> norms;
    LMConfig<double> lm{0.1, 1e-3, std::nullopt};
    auto out = levenberg_marquardt<double>(Affine{c, &norms}, identity_jacobian, start, lm);
    CHECK(out.converged);
    CHECK(out.iterations == affine_iterations(0.1, e0, 1e-3));
    CHECK(out.last_step_norm < 1e-3);
    for (std::size_t k = 1; k < norms.size(); ++k) CHECK(norms[k] < norms[k - 1]);
  }
}

TEST_CASE("iteration limit returns the best iterate unconverged") {
  const Stacked<double> c = stacked({0.0, 0.0});
  LMConfig<double> lm{0.1, 1e-3, 2};
  auto out = levenberg_marquardt<double>(Affine{c}, identity_jacobian, stacked({10.0, 0.0}), lm);
  CHECK_FALSE(out.converged);
  CHECK(out.iterations == 2);
  CHECK(out.eta == doctest::Approx(10.0 * std::pow(0.1 / 1.1, 2)));
}

TEST_CASE("singular undamped system is reported") {
  auto flat = [](const Stacked<double>& u) -> Matrix<double> { return Matrix<double>::Zero(u.size(), u.size()); };
  LMConfig<double> lm{0.0, 1e-3, 5};
  CHECK_THROWS_AS(levenberg_marquardt<double>(Affine{stacked({1, 1})}, flat, stacked({0, 0}), lm), SingularSystem);
}

TEST_CASE("1v1 inverse root") {
  const auto cfg = testing::inverse_herd(1, 1);
  DesiredDynamics<double> dd{scaled_identity<double>(2, 1.0), StaticReference<double>{stacked({4, 0})}, false};
  LMConfig<double> lm{};
  const auto out = lm_solve<double>(cfg, dd, stacked({0, 0}), stacked({-1, 0}), 0.0, lm);
  CHECK(out.u(0) == doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(std::abs(out.u(1)) < 1e-6);
  CHECK(out.eta <= 1e-3);
  CHECK(out.iterations <= 20);
}

TEST_CASE("lm_solve is deterministic") {
  const auto cfg = testing::inverse_herd(5, 5);
  const Stacked<double> x = stacked({2.1, 0.7, -0.8, -1.4, -1.3, 1.8, 2.1, -1.3, 1.3, 1.5});
  const Stacked<double> u = stacked({-3.0, 0.0, -1.5, 3.0, 3.0, 0.0, 0.0, -3.0, 1.5, 3.0});
  const Stacked<double> target = stacked({1.3, 0.5, -1.5, -0.9, -0.8, 1.1, 1.8, -0.7, 0.4, 0.9});
  DesiredDynamics<double> dd{scaled_identity<double>(10, 0.25), StaticReference<double>{target}, false};
  const auto a = lm_solve<double>(cfg, dd, x, u, 0.0, LMConfig<double>{});
  const auto b = lm_solve<double>(cfg, dd, x, u, 0.0, LMConfig<double>{});
  CHECK(a.iterations == b.iterations);
  CHECK(a.eta == b.eta);
  CHECK((a.u.array() == b.u.array()).all());
}

TEST_CASE("implicit step clipping") {
  const Stacked<double> prev = stacked({0, 0, 5, 5});
  bool clipped = true;
  auto applied = implicit_step<double>(prev, stacked({0.001, 0, 5, 5.001}), 0.4, 0.01, &clipped);
  CHECK_FALSE(clipped);
  CHECK((applied - stacked({0.001, 0, 5, 5.001})).norm() == 0.0);

  applied = implicit_step<double>(stacked({0, 0}), stacked({0.6, 0.8}), 0.2, 0.01, &clipped);
  CHECK(clipped);
  CHECK(applied.norm() == doctest::Approx(0.002).epsilon(1e-12));
  CHECK(applied(0) / applied(1) == doctest::Approx(0.75));

  applied = implicit_step<double>(prev, stacked({0.001, 0, 6, 5}), 0.4, 0.01, &clipped);
  CHECK(clipped);
  CHECK(applied(0) == 0.001);
  CHECK(applied(2) == doctest::Approx(5.004));

  CHECK_THROWS_AS(implicit_step<double>(prev, stacked({0, 0}), 0.4, 0.01), DimensionMismatch);
}

TEST_CASE("LM config validation") {
  CHECK_NOTHROW(validate(LMConfig<double>{}));
  CHECK_THROWS_AS(validate(LMConfig<double>{-0.1, 1e-3, 20}), InvariantViolation);
  CHECK_THROWS_AS(validate(LMConfig<double>{0.1, 0.0, 20}), InvariantViolation);
  CHECK_THROWS_AS(validate(LMConfig<double>{0.1, 1e-3, 0}), InvariantViolation);
}
