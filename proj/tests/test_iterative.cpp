#include <doctest.h>

#include <cmath>

#include "lact/data.hpp"
#include "lact/iterative.hpp"
#include "lact/projector.hpp"
#include "support.hpp"

using namespace lact;
using lact::test::inner;
using lact::test::random_array;
using lact::test::rel_gap;

namespace {

// Dense least squares by Gaussian elimination on the normal equations.
std::vector<double> dense_least_squares(const std::vector<std::vector<double>>& cols,
                                        const std::vector<double>& rhs) {
  const std::size_t n = cols.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = inner(cols[i], cols[j]);
    m[i][n] = inner(cols[i], rhs);
  }
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t best = p;
    for (std::size_t r = p + 1; r < n; ++r)
      if (std::abs(m[r][p]) > std::abs(m[best][p])) best = r;
    std::swap(m[p], m[best]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == p) continue;
      const double f = m[r][p] / m[p][p];
      for (std::size_t c = p; c <= n; ++c) m[r][c] -= f * m[p][c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
  return x;
}

}  // namespace

TEST_CASE("div is the negative adjoint of grad") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t h = 1 + rng.below(15);
    const std::size_t w = 1 + rng.below(15);
    const ImageGrid grid{w, h, 1.0};
    const Image u(grid, random_array(h, w, rng));
    GradField p(h, w);
    p.dx = random_array(h, w, rng);
    p.dy = random_array(h, w, rng);
    const GradField gu = grad(u);
    const double lhs = inner(gu.dx.flat(), p.dx.flat()) + inner(gu.dy.flat(), p.dy.flat());
    const double rhs = -inner(u.values.flat(), div(p, grid).values.flat());
    CHECK(rel_gap(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("grad, shrink and total variation on hand-sized inputs") {
  const ImageGrid grid{2, 2, 1.0};
  const Image u(grid, Array2(2, 2, {0.0, 1.0, 2.0, 4.0}));
  const GradField g = grad(u);
  CHECK(g.dx(0, 0) == 1.0);
  CHECK(g.dx(1, 0) == 2.0);
  CHECK(g.dx(0, 1) == 0.0);
  CHECK(g.dy(0, 0) == 2.0);
  CHECK(g.dy(0, 1) == 3.0);
  CHECK(g.dy(1, 0) == 0.0);
  CHECK(total_variation(u) == 8.0);

  GradField x(1, 3);
  x.dx = Array2(1, 3, {3.0, -0.5, -2.0});
  x.dy = Array2(1, 3, {1.0, 0.0, -1.25});
  const GradField s = shrink(x, 1.0);
  CHECK(s.dx(0, 0) == 2.0);
  CHECK(s.dx(0, 1) == 0.0);
  CHECK(s.dx(0, 2) == -1.0);
  CHECK(s.dy(0, 0) == 0.0);
  CHECK(s.dy(0, 2) == -0.25);
  CHECK_THROWS_AS(shrink(x, -1.0), std::invalid_argument);
}

TEST_CASE("CGLS reaches the dense least-squares solution") {
  Rng rng(9);
  const ImageGrid grid{6, 6, 1.0};
  const auto geom = make_parallel(grid, 12, 11);
  const auto sel = make_limited(12, 10);
  const Image truth(grid, random_array(6, 6, rng));
  LimitedSinogram g = restrict_views(project(truth, geom), sel);
  for (auto& v : g.values.flat()) v += 0.05 * rng.uniform(-1.0, 1.0);

  std::vector<std::vector<double>> cols;
  for (std::size_t i = 0; i < 36; ++i) {
    Image e(grid);
    e.values.flat()[i] = 1.0;
    const auto col = restrict_views(project(e, geom), sel).values;
    cols.emplace_back(col.flat().begin(), col.flat().end());
  }
  const auto want = dense_least_squares(cols, {g.values.flat().begin(), g.values.flat().end()});

  const auto res = cgls(g, geom, 200, 1e-12);
  for (std::size_t i = 0; i < 36; ++i)
    CHECK(res.image.values.flat()[i] == doctest::Approx(want[i]).epsilon(1e-6));

  SUBCASE("the data residual never increases") {
    for (std::size_t k = 1; k < res.residual_norms.size(); ++k)
      CHECK(res.residual_norms[k] <= res.residual_norms[k - 1] * (1.0 + 1e-12));
  }
  SUBCASE("it stops on the relative normal residual") {
    CHECK(res.normal_norms.back() <= 1e-12 * res.normal_norms.front());
    CHECK(res.residual_norms.size() == res.iterations + 1);
  }
}

TEST_CASE("CGLS argument checks") {
  const ImageGrid grid{6, 6, 1.0};
  const auto geom = make_parallel(grid, 12, 11);
  const LimitedSinogram g{make_limited(12, 4), Array2(4, 11)};
  CHECK_THROWS_AS(cgls(g, geom, 0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(cgls(LimitedSinogram{make_limited(10, 4), Array2(4, 11)}, geom, 5, 1e-6),
                  std::invalid_argument);
  const auto zero = cgls(g, geom, 5, 1e-6);
  CHECK(zero.iterations == 0);
  for (double v : zero.image.values.flat()) CHECK(v == 0.0);
}

TEST_CASE("TV-ADMM improves on limited-view FBP") {
  const Image truth = random_phantom({PhantomSpec::Kind::random_ellipses, 64, 2, 8});
  const auto geom = make_parallel(truth.grid, 180, 95);
  const auto sel = make_limited(180, 150);
  const auto g = restrict_views(project(truth, geom), sel);
  const Image base = fbp_limited(g, geom);
  const TvResult res = tv_admm(g, geom, TvParams{});
  CHECK(res.converged);
  CHECK(res.iterations < 300);
  CHECK(psnr(res.image, truth) > psnr(base, truth));
  CHECK(total_variation(res.image) < total_variation(base));
  for (double v : res.image.values.flat()) CHECK(v >= 0.0);
}

TEST_CASE("TV-ADMM parameter validation and divergence") {
  const Image truth = shepp_logan(16);
  const auto geom = make_parallel(truth.grid, 30, 25);
  const auto g = restrict_views(project(truth, geom), make_limited(30, 20));
  TvParams bad;
  bad.rho = 0.0;
  CHECK_THROWS_AS(tv_admm(g, geom, bad), std::invalid_argument);
  bad = TvParams{};
  bad.epsilon = 1.0;
  CHECK_THROWS_AS(tv_admm(g, geom, bad), std::invalid_argument);

  TvParams wild;
  wild.t5 = 1e6;
  wild.clamp_nonnegative = false;
  try {
    tv_admm(g, geom, wild);
    FAIL("expected divergence");
  } catch (const DivergedError& e) {
    CHECK(e.iteration() >= 1);
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}
