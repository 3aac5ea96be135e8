#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "supcar/quadrature.hpp"
#include "supcar/simulate.hpp"

using namespace supcar;

namespace {

LevyTriplet gauss(double gamma, double sigma2) {
  return LevyTriplet::make(gamma, sigma2, NoJumps{});
}

double path_mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / double(x.size());
}

// analytic correlation of the n-atom quantile discretization of gamma(4,1)
double r_atomized_gamma41(int n, double tau, const LevyTriplet& levy) {
  auto grid = discretize_mixing(MixingSpec::type1(GammaM{4.0, 1.0}), n);
  DiscreteM d;
  for (const auto& [v, mass] : grid) d.atoms.emplace_back(v.v1, mass);
  auto spec = ProcessSpec::make(levy, MixingSpec::type1(d));
  return acf_value(spec, tau);
}

}  // namespace

TEST_CASE("run configuration validation") {
  SimConfig c;
  c.dt = 0.1;
  c.horizon = 10.0;
  CHECK_NOTHROW(validate_config(c));

  auto bad = [](auto&& mutate) {
    SimConfig c2;
    c2.dt = 0.1;
    c2.horizon = 10.0;
    mutate(c2);
    CHECK_THROWS_AS(validate_config(c2), std::invalid_argument);
  };
  bad([](SimConfig& x) { x.dt = 0.0; });
  bad([](SimConfig& x) { x.dt = -1.0; });
  bad([](SimConfig& x) { x.horizon = 0.0; });
  bad([](SimConfig& x) { x.burn_in = -0.5; });
  bad([](SimConfig& x) { x.n_atoms = 0; });
  bad([](SimConfig& x) { x.n_paths = 0; });
  bad([](SimConfig& x) {  // step-count cap
    x.dt = 1e-6;
    x.horizon = 1e3;
  });

  // density-form noise cannot be sampled
  auto dens = ProcessSpec::make(
      LevyTriplet::make(0.0, 1.0,
                        DensityJumps{[](double x) { return std::exp(-x); },
                                     1.0, 30.0, 0.0}),
      MixingSpec::type1(DiracM{2.0}));
  SimConfig sc;
  sc.horizon = 10.0;
  sc.dt = 0.1;
  CHECK_THROWS_AS(simulate_paths(dens, sc), std::invalid_argument);

  // an unchecked spec is re-gated before any sampling happens
  auto unchecked = ProcessSpec::make(gauss(0.0, 1.0),
                                     MixingSpec::type1(GammaM{2.0, 1.0}), true);
  CHECK_THROWS_AS(simulate_paths(unchecked, sc), MathError);
}

TEST_CASE("mixing discretization: passthrough and quantile midpoints") {
  // point mass passes through whatever n says
  auto one = discretize_mixing(MixingSpec::type1(DiracM{2.0}), 16);
  REQUIRE(one.size() == 1);
  CHECK(one[0].first.v1 == 2.0);
  CHECK(one[0].second == 1.0);

  // gamma(4,1), n = 4: equal masses, increasing atoms sitting at the
  // conditional medians; oracle = direct quadrature of the density up to
  // each atom, which must give (i + 0.5)/4
  auto g4 = discretize_mixing(MixingSpec::type1(GammaM{4.0, 1.0}), 4);
  REQUIRE(g4.size() == 4);
  auto pdf = [](double x) { return x * x * x * std::exp(-x) / 6.0; };
  for (int i = 0; i < 4; ++i) {
    CHECK(g4[i].second == doctest::Approx(0.25).epsilon(1e-15));
    if (i) CHECK(g4[i].first.v1 > g4[i - 1].first.v1);
    auto F = quad::integrate(pdf, 0.0, g4[i].first.v1, {});
    CHECK(F.converged);
    CHECK(F.value == doctest::Approx((i + 0.5) / 4.0).epsilon(1e-8));
  }

  // uniform theta law, n = 2 -> {0.25, 0.75} exactly
  auto u2 = discretize_mixing(
      MixingSpec::type2(DiracM{1.0}, UniformM{0.0, 1.0}), 2);
  REQUIRE(u2.size() == 2);
  CHECK(u2[0].first.v2 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(u2[1].first.v2 == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(u2[0].second == doctest::Approx(0.5).epsilon(1e-15));

  // tensor grid: law1 outer, law2 inner, masses multiply, total mass 1
  auto t9 = discretize_mixing(
      MixingSpec::type2(GammaM{4.0, 1.0}, BetaM{2.0, 1.0}), 3);
  REQUIRE(t9.size() == 9);
  double total = 0.0;
  for (int i = 0; i < 9; ++i) {
    total += t9[i].second;
    CHECK(t9[i].second == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
    CHECK(t9[i].first.v1 == t9[(i / 3) * 3].first.v1);  // row-major order
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

  // discrete factors and joint atoms are exact and untouched
  auto disc = discretize_mixing(
      MixingSpec::type2(DiscreteM{{{1.0, 0.3}, {2.0, 0.7}}}, DiracM{0.5}), 8);
  REQUIRE(disc.size() == 2);
  CHECK(disc[0].first.v1 == 1.0);
  CHECK(disc[0].second == 0.3);
  CHECK(disc[1].second == 0.7);

  auto joint = discretize_mixing(
      MixingSpec::type3_joint({{{1.0, 2.2}, 0.6}, {{1.5, 2.9}, 0.4}}), 64);
  REQUIRE(joint.size() == 2);
  CHECK(joint[1].first.v2 == 2.9);
  CHECK(joint[1].second == 0.4);
}

TEST_CASE("propagator reproduces the closed kernels after a single jump") {
  // inject one unit of noise into the zero state and iterate e^{A dt}: the
  // first state component must track g(v, n dt) * jump exactly
  const double dt = 0.01;
  const double jump = 1.7;
  struct Case {
    Car2Params p;
    std::function<double(double)> g;
  };
  std::vector<Case> cases;
  cases.push_back({Car2Params::make(2.0, 1.0),  // double root a = 2
                   [](double u) { return g1(2.0, u); }});
  cases.push_back({from_type2(1.3, 0.4),
                   [](double u) { return g2(1.3, 0.4, u); }});
  cases.push_back({from_type3(1.1, 2.6),
                   [](double u) { return g3(1.1, 2.6, u); }});
  for (const auto& c : cases) {
    Eigen::Matrix2d P = propagator(c.p, dt);
    Eigen::Vector2d x(0.0, jump);  // state right after the jump at t0 = 0
    double worst = 0.0;
    for (int n = 1; n <= 3000; ++n) {
      x = P * x;
      worst = std::max(worst, std::fabs(x(0) - c.g(n * dt) * jump));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("zero-noise and pure-drift paths") {
  SimConfig c;
  c.dt = 0.05;
  c.horizon = 20.0;
  c.burn_in = 10.0;
  c.n_paths = 2;
  c.seed = 7;

  auto zero = ProcessSpec::make(gauss(0.0, 0.0), MixingSpec::type1(DiracM{2.0}));
  auto ps = simulate_paths(zero, c);
  REQUIRE(ps.values.size() == 2);
  for (const auto& row : ps.values)
    for (double v : row) CHECK(v == 0.0);

  // drift 1, a = 2: stationary level 4 m_{-2} = 1; the discrete fixed point
  // differs by O(dt^2) (-2e-4 at dt = 0.05), well inside the 1% band
  SimConfig cd;
  cd.dt = 0.05;
  cd.horizon = 1000.0;
  cd.burn_in = 50.0;
  cd.n_paths = 1;
  auto drift = ProcessSpec::make(gauss(1.0, 0.0), MixingSpec::type1(DiracM{2.0}));
  auto pd = simulate_paths(drift, cd);
  CHECK(path_mean(pd.values[0]) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("bit reproducibility across runs and thread counts") {
  auto spec = ProcessSpec::make(
      LevyTriplet::make(0.1, 0.7, CompoundPoisson{1.5, TwoPointLaw{1.0, 0.4, -0.6}}),
      MixingSpec::type2(GammaM{3.5, 1.0}, BetaM{2.0, 1.0}));
  SimConfig c;
  c.dt = 0.05;
  c.horizon = 20.0;
  c.burn_in = 5.0;
  c.n_atoms = 4;
  c.n_paths = 6;
  c.seed = 99;

  auto a = simulate_paths(spec, c);
  auto b = simulate_paths(spec, c);
  SimConfig c3 = c;
  c3.n_threads = 3;
  auto d = simulate_paths(spec, c3);

  REQUIRE(a.values.size() == b.values.size());
  REQUIRE(a.values.size() == d.values.size());
  for (std::size_t p = 0; p < a.values.size(); ++p)
    for (std::size_t i = 0; i < a.values[p].size(); ++i) {
      CHECK(a.values[p][i] == b.values[p][i]);
      CHECK(a.values[p][i] == d.values[p][i]);
    }
  CHECK(a.spec_fingerprint == d.spec_fingerprint);
  CHECK(a.seed == c.seed);

  SimConfig c5 = c;
  c5.seed = 100;
  auto e = simulate_paths(spec, c5);
  bool same = true;
  for (std::size_t i = 0; i < a.values[0].size(); ++i)
    same = same && a.values[0][i] == e.values[0][i];
  CHECK_FALSE(same);
  CHECK(a.spec_fingerprint != e.spec_fingerprint);
}

TEST_CASE("fingerprint tracks the model and run, not the scheduling") {
  auto s1 = ProcessSpec::make(gauss(0.0, 1.0), MixingSpec::type1(GammaM{4.0, 1.0}));
  auto s2 = ProcessSpec::make(gauss(0.0, 1.0), MixingSpec::type1(GammaM{4.0, 2.0}));
  SimConfig c;
  c.dt = 0.05;
  c.horizon = 10.0;
  CHECK(spec_fingerprint(s1, c) == spec_fingerprint(s1, c));
  CHECK(spec_fingerprint(s1, c) != spec_fingerprint(s2, c));
  SimConfig cdt = c;
  cdt.dt = 0.1;
  CHECK(spec_fingerprint(s1, c) != spec_fingerprint(s1, cdt));
  SimConfig cat = c;
  cat.n_atoms = 32;
  CHECK(spec_fingerprint(s1, c) != spec_fingerprint(s1, cat));
  SimConfig cth = c;
  cth.n_threads = 8;
  CHECK(spec_fingerprint(s1, c) == spec_fingerprint(s1, cth));
}

TEST_CASE("empirical correlation estimator and its guards") {
  PathSet flat;
  flat.dt = 0.5;
  flat.times = {0.0, 0.5, 1.0, 1.5};
  flat.values = {{1.0, 1.0, 1.0, 1.0}};
  CHECK_THROWS_AS(empirical_acf(flat, {0.0}), MathError);

  PathSet ps;
  ps.dt = 0.5;
  ps.times.resize(200);
  for (int i = 0; i < 200; ++i) ps.times[i] = 0.5 * i;
  RngStream rng(5);
  ps.values.assign(3, std::vector<double>(200));
  for (auto& row : ps.values)
    for (double& v : row) v = rng.normal();

  CHECK_THROWS_AS(empirical_acf(ps, {0.3}), std::invalid_argument);  // off-grid
  CHECK_THROWS_AS(empirical_acf(ps, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(empirical_acf(ps, {50.0}), std::invalid_argument);  // horizon
  CHECK_THROWS_AS(empirical_acf(ps, {-0.5}), std::invalid_argument);

  auto table = empirical_acf(ps, {0.0, 0.5});
  REQUIRE(table.rows.size() == 2);
  CHECK(*table.rows[0].r_empirical == 1.0);  // lag 0 is exact
  CHECK(*table.rows[0].ci_half_width == 0.0);
  CHECK(table.rows[1].ci_half_width.has_value());

  // white-noise surrogate: lag-dt correlation within 3 / sqrt(n_paths * n)
  PathSet wn;
  wn.dt = 1.0;
  const int n = 2000, P = 20;
  wn.times.resize(n);
  for (int i = 0; i < n; ++i) wn.times[i] = double(i);
  RngStream rng2(42);
  wn.values.assign(P, std::vector<double>(n));
  for (auto& row : wn.values)
    for (double& v : row) v = rng2.normal();
  auto wt = empirical_acf(wn, {1.0});
  CHECK(std::fabs(*wt.rows[0].r_empirical) <= 3.0 / std::sqrt(double(n) * P));
}

TEST_CASE("stationarity after burn-in and the burn-in warning") {
  auto spec = ProcessSpec::make(gauss(0.0, 1.0), MixingSpec::type1(DiracM{2.0}));
  SimConfig c;
  c.dt = 0.05;
  c.horizon = 60.0;
  c.burn_in = 10.0;  // exactly the recommended 10/decay, decay = a/2 = 1
  c.n_paths = 64;
  c.seed = 11;
  auto ps = simulate_paths(spec, c);
  CHECK(ps.warning.empty());

  SimConfig cshort = c;
  cshort.burn_in = 1.0;
  cshort.n_paths = 1;
  CHECK_FALSE(simulate_paths(spec, cshort).warning.empty());

  // first-half vs second-half mean and variance agree within 4 combined SE,
  // with paths as the independent replicates
  const std::size_t half = ps.values[0].size() / 2;
  std::vector<double> dmean, dvar;
  for (const auto& row : ps.values) {
    double m1 = 0.0, m2 = 0.0, v1 = 0.0, v2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) m1 += row[i];
    for (std::size_t i = half; i < row.size(); ++i) m2 += row[i];
    m1 /= double(half);
    m2 /= double(row.size() - half);
    for (std::size_t i = 0; i < half; ++i) v1 += (row[i] - m1) * (row[i] - m1);
    for (std::size_t i = half; i < row.size(); ++i)
      v2 += (row[i] - m2) * (row[i] - m2);
    dmean.push_back(m1 - m2);
    dvar.push_back(v1 / double(half) - v2 / double(row.size() - half));
  }
  auto check_centered = [](const std::vector<double>& d) {
    double m = 0.0;
    for (double v : d) m += v;
    m /= double(d.size());
    double ss = 0.0;
    for (double v : d) ss += (v - m) * (v - m);
    const double se = std::sqrt(ss / double(d.size() - 1) / double(d.size()));
    CHECK(std::fabs(m) <= 4.0 * se);
  };
  check_centered(dmean);
  check_centered(dvar);
}

TEST_CASE("simulated correlation matches the analytic curve") {
  // a = 2, Gaussian noise: r(tau) = (tau + 1) e^{-tau}, so r(1) = 2/e
  auto spec = ProcessSpec::make(gauss(0.0, 1.0), MixingSpec::type1(DiracM{2.0}));
  SimConfig c;
  c.dt = 0.05;
  c.horizon = 500.0;
  c.burn_in = 50.0;
  c.n_paths = 200;
  c.seed = 2024;
  auto rep = compare(spec, c, {0.5, 1.0, 2.0, 5.0});
  CHECK(rep.pass);
  CHECK(rep.frac_within >= 0.9);
  CHECK(rep.warning.empty());
  REQUIRE(rep.table.rows.size() == 4);
  REQUIRE(rep.r_atomized.size() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    // a point mass has no discretization bias
    CHECK(std::fabs(rep.r_atomized[j] - rep.table.rows[j].r_analytic) <=
          1e-12);
    CHECK(rep.table.rows[j].r_empirical.has_value());
  }
  const auto& lag1 = rep.table.rows[1];
  CHECK(lag1.r_analytic == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-12));
  CHECK(std::fabs(*lag1.r_empirical - lag1.r_analytic) <= *lag1.ci_half_width);
}

TEST_CASE("comparison flags designed failures without throwing") {
  auto spec = ProcessSpec::make(gauss(0.0, 1.0), MixingSpec::type1(DiracM{2.0}));
  SimConfig c;
  c.dt = 0.1;
  c.horizon = 30.0;
  c.burn_in = 5.0;
  c.n_paths = 1;  // single path: zero-width intervals, designed miss
  c.seed = 3;
  auto rep = compare(spec, c, {1.0, 2.0});
  CHECK_FALSE(rep.pass);
  CHECK(rep.frac_within < 0.9);
  CHECK_FALSE(rep.warning.empty());  // burn-in 5 < recommended 10
  CHECK(rep.fingerprint == spec_fingerprint(spec, c));
}

TEST_CASE("atomization bias shrinks with the atom count") {
  // gamma(4,1) mixing: E[a^{-3}] draws most of its mass from the a -> 0
  // cells, so the quantile-midpoint rule converges like n^{-1/4}; doubling
  // the atom count shaves ~12% off the sup bias, it does not halve it
  const auto levy = gauss(0.0, 1.0);
  auto cont = ProcessSpec::make(levy, MixingSpec::type1(GammaM{4.0, 1.0}));

  double prev = 1e300;
  for (int n : {1, 4, 16, 64}) {
    const double bias =
        std::fabs(r_atomized_gamma41(n, 5.0, levy) - acf_value(cont, 5.0));
    CHECK(bias < prev);
    prev = bias;
  }

  auto sup_bias = [&](int n) {
    double worst = 0.0;
    for (double tau = 0.5; tau <= 10.0 + 1e-9; tau += 0.5)
      worst = std::max(worst, std::fabs(r_atomized_gamma41(n, tau, levy) -
                                        acf_value(cont, tau)));
    return worst;
  };
  const double ratio = sup_bias(32) / sup_bias(16);
  CHECK(ratio > 0.84);
  CHECK(ratio < 0.92);
}
