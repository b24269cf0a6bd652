#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "support/pf_oracle.hpp"
#include "support/random_feeder.hpp"
#include "tdcosim/core/errors.hpp"
#include "tdcosim/distribution/feeder_io.hpp"
#include "tdcosim/distribution/sweep.hpp"
#include "tdcosim/distribution/synth.hpp"

using namespace tdcosim;
using namespace tdcosim::dist;
using cd = std::complex<double>;

namespace {

Feeder two_node(ZipLoad load, double r = 0.01, double x = 0.02) {
  return Feeder({{"h"}, {"a"}}, {{"h", "a", r, x}}, {{"a", load}}, {}, 10.0);
}

}  // namespace

TEST_CASE("unloaded feeder") {
  const auto f = synthesize_feeder(20, 0.0, 0.0, 3, 0.0);
  const cd head(1.01, 0.0);
  const auto sol = backward_forward_sweep(f, head, {}, 1e-8, 100);
  CHECK(sol.converged);
  CHECK(sol.iterations == 1);
  CHECK(sol.head_p_pu == 0.0);
  CHECK(sol.head_q_pu == 0.0);
  for (const auto& v : sol.node_v) CHECK(v == head);
}

TEST_CASE("two-node feeder matches the frozen oracle") {
  const auto f = two_node(ZipLoad::constant_power(0.1, 0.05));
  const auto sol = backward_forward_sweep(f, {1.0, 0.0}, {}, 1e-12, 200);
  REQUIRE(sol.converged);
  // Frozen from a 40-digit fixed-point evaluation of V = 1 - Z conj(S/V).
  CHECK(std::abs(sol.node_v[1]) == doctest::Approx(0.99799485212102315).epsilon(1e-11));
  CHECK(sol.head_p_pu == doctest::Approx(0.1001255027987426).epsilon(1e-11));
  CHECK(sol.head_q_pu == doctest::Approx(0.050251005597485193).epsilon(1e-11));
  const auto [p_mw, q_mvar] = head_power(sol, 10.0);
  CHECK(p_mw == doctest::Approx(1.001255027987426).epsilon(1e-11));
  CHECK(q_mvar == doctest::Approx(0.50251005597485193).epsilon(1e-11));
}

TEST_CASE("overloaded feeder reports non-convergence") {
  const auto f = two_node(ZipLoad::constant_power(50.0, 0.0));
  const auto sol = backward_forward_sweep(f, {1.0, 0.0}, {}, 1e-8, 100);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations <= 100);
  // The dense oracle agrees there is no operating point.
  CHECK_FALSE(testing::dense_fixed_point(f, {1.0, 0.0}, {}, 1e-10, 2000).converged);
}

TEST_CASE("head power conversion") {
  PfSolution s;
  s.head_p_pu = 0.5;
  CHECK(head_power(s, 10.0).first == 5.0);
  PfSolution zero;
  CHECK(head_power(zero, 10.0) == std::pair<double, double>(0.0, 0.0));
}

TEST_CASE("sweep input validation") {
  const auto f = two_node(ZipLoad::constant_power(0.1, 0.0));
  CHECK_THROWS_AS(backward_forward_sweep(f, {0.4, 0.0}, {}, 1e-8, 10), ConfigError);
  CHECK_THROWS_AS(backward_forward_sweep(f, {1.6, 0.0}, {}, 1e-8, 10), ConfigError);
  std::vector<cd> wrong(5);
  CHECK_THROWS_AS(backward_forward_sweep(f, {1.0, 0.0}, wrong, 1e-8, 10), ConfigError);
}

TEST_CASE("malformed trees are rejected") {
  CHECK_THROWS_AS(Feeder({{"a"}, {"b"}, {"c"}}, {{"a", "b", 0.01, 0.01}}, {}, {}, 10.0), ConfigError);
  CHECK_THROWS_AS(Feeder({{"a"}, {"b"}, {"c"}}, {{"a", "b", 0.01, 0.01}, {"b", "a", 0.01, 0.01}}, {}, {}, 10.0),
                  ConfigError);
  CHECK_THROWS_AS(Feeder({{"a"}, {"b"}}, {{"a", "b", 0.0, 0.0}}, {}, {}, 10.0), ConfigError);
  CHECK_THROWS_AS(Feeder({{"a"}, {"b"}}, {{"a", "b", 0.01, 0.01}}, {{"b", {1, 0, 0.5, 0.6, 0.0}}}, {}, 10.0),
                  ConfigError);
  CHECK_THROWS_AS(Feeder({{"a"}, {"a"}}, {{"a", "a", 0.01, 0.01}}, {}, {}, 10.0), ConfigError);
  CHECK_THROWS_AS(Feeder({{"a"}, {"b"}}, {{"a", "b", 0.01, 0.01}}, {}, {"zz"}, 10.0), ConfigError);
}

TEST_CASE("sweep agrees with a dense nodal solve on small random feeders") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = testing::random_case(rng);
    const auto sol = backward_forward_sweep(c.feeder, {1.0, 0.0}, c.injections, 1e-12, 500);
    const auto ref = testing::dense_fixed_point(c.feeder, {1.0, 0.0}, c.injections);
    REQUIRE(sol.converged);
    REQUIRE(ref.converged);
    for (std::size_t i = 0; i < c.feeder.size(); ++i) CHECK(std::abs(sol.node_v[i] - ref.v[i]) <= 1e-8);
  }
}

TEST_CASE("energy bookkeeping") {
  const auto f = synthesize_feeder(300, 8.0, 2.5, 9, 0.0);
  std::vector<cd> inj(f.size(), cd(0, 0));
  inj[17] = {0.05, 0.01};
  inj[123] = {0.02, -0.02};
  const double tol = 1e-8;
  const auto sol = backward_forward_sweep(f, {1.0, 0.0}, inj, tol, 100);
  REQUIRE(sol.converged);
  CHECK(sol.max_mismatch_pu <= tol);
  const cd expected = total_load(f, sol) - (inj[17] + inj[123]) + series_losses(f, sol);
  CHECK(std::abs(sol.head_p_pu - expected.real()) <= 10 * tol);
  CHECK(std::abs(sol.head_q_pu - expected.imag()) <= 10 * tol);
}

TEST_CASE("voltage is non-increasing with depth on a uniform constant-power feeder") {
  const auto topo = synthesize_feeder(200, 0.0, 0.0, 5, 0.0);
  std::vector<FeederBranch> uniform;
  for (const auto& b : topo.branches()) uniform.push_back({b.from, b.to, 0.001, 0.002});
  std::map<std::string, ZipLoad> loads;
  for (std::size_t i = 1; i < topo.size(); ++i) loads[topo.nodes()[i].id] = ZipLoad::constant_power(0.004, 0.002);
  const Feeder f(topo.nodes(), uniform, loads, {}, 10.0, topo.head_id());
  const auto sol = backward_forward_sweep(f, {1.0, 0.0}, {}, 1e-10, 100);
  REQUIRE(sol.converged);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i == f.head()) continue;
    CHECK(std::abs(sol.node_v[i]) <= std::abs(sol.node_v[f.parent(i)]) + 1e-12);
  }
}

TEST_CASE("constant-impedance load scales with voltage squared") {
  const auto f = two_node({0.3, 0.1, 1.0, 0.0, 0.0});
  const auto lo = backward_forward_sweep(f, {0.6, 0.0}, {}, 1e-13, 500);
  const auto hi = backward_forward_sweep(f, {1.2, 0.0}, {}, 1e-13, 500);
  REQUIRE(lo.converged);
  REQUIRE(hi.converged);
  const cd s_lo = total_load(f, lo);
  const cd s_hi = total_load(f, hi);
  CHECK(s_hi.real() == doctest::Approx(4.0 * s_lo.real()).epsilon(1e-10));
  CHECK(s_hi.imag() == doctest::Approx(4.0 * s_lo.imag()).epsilon(1e-10));
}

TEST_CASE("injection is identical to reducing constant-power load") {
  const auto with_load = [](double p, double q) {
    return Feeder({{"h"}, {"a"}, {"b"}}, {{"h", "a", 0.01, 0.02}, {"a", "b", 0.02, 0.03}},
                  {{"a", ZipLoad::constant_power(0.2, 0.1)}, {"b", ZipLoad::constant_power(p, q)}}, {}, 10.0);
  };
  const auto base = with_load(0.3, 0.12);
  std::vector<cd> inj(3, cd(0, 0));
  inj[2] = {0.07, 0.03};
  const auto a = backward_forward_sweep(base, {1.0, 0.0}, inj, 1e-10, 100);
  const auto b = backward_forward_sweep(with_load(0.3 - 0.07, 0.12 - 0.03), {1.0, 0.0}, {}, 1e-10, 100);
  CHECK(a.node_v == b.node_v);
  CHECK(a.head_p_pu == b.head_p_pu);
  CHECK(a.head_q_pu == b.head_q_pu);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("synthetic 1000-node feeder converges quickly") {
  const auto f = synthesize_feeder(1000, 10.0, 3.0, 42, 0.1);
  const auto sol = backward_forward_sweep(f, {1.0, 0.0}, {}, 1e-8, 100);
  REQUIRE(sol.converged);
  MESSAGE("iterations=" << sol.iterations << " min |V|=" << [&] {
    double m = 2;
    for (auto v : sol.node_v) m = std::min(m, std::abs(v));
    return m;
  }());
  CHECK(sol.iterations <= 20);
}

TEST_CASE("feeder synthesis") {
  SUBCASE("two nodes") {
    const auto f = synthesize_feeder(2, 1.0, 0.3, 7, 0.0);
    CHECK(f.branches().size() == 1);
    CHECK(f.der_nodes().empty());
    double p = 0, q = 0;
    for (const auto& [n, l] : f.loads()) {
      p += l.p0_pu;
      q += l.q0_pu;
    }
    CHECK(p * f.base_mva() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(q * f.base_mva() == doctest::Approx(0.3).epsilon(1e-15));
  }
  SUBCASE("thousand nodes") {
    const auto f = synthesize_feeder(1000, 10.0, 3.0, 42, 0.1);
    CHECK(f.branches().size() == 999);
    CHECK(f.der_nodes().size() == 100);
    double p = 0, q = 0;
    for (const auto& [n, l] : f.loads()) {
      p += l.p0_pu;
      q += l.q0_pu;
    }
    CHECK(std::abs(p * f.base_mva() - 10.0) < 1e-9);
    CHECK(std::abs(q * f.base_mva() - 3.0) < 1e-9);
    CHECK(f.max_depth() == 32);
  }
  SUBCASE("deterministic by seed") {
    const auto a = synthesize_feeder(500, 5.0, 1.0, 99, 0.2);
    const auto b = synthesize_feeder(500, 5.0, 1.0, 99, 0.2);
    const auto c = synthesize_feeder(500, 5.0, 1.0, 100, 0.2);
    CHECK(feeder_to_json(a).dump() == feeder_to_json(b).dump());
    CHECK(a == b);
    CHECK_FALSE(a == c);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(synthesize_feeder(1, 1.0, 0.0, 1, 0.0), ConfigError);
    CHECK_THROWS_AS(synthesize_feeder(10, 1.0, 0.0, 1, 1.5), ConfigError);
  }
}

TEST_CASE("feeder JSON and CSV") {
  const auto f = synthesize_feeder(30, 2.0, 0.5, 1, 0.2);
  const auto j = feeder_to_json(f);
  const auto back = feeder_from_json(j);
  CHECK(back == f);
  auto broken = j;
  broken["branches"].erase(0);
  CHECK_THROWS_AS(feeder_from_json(broken), ConfigError);
  broken = j;
  broken.erase("base_mva");
  CHECK_THROWS_AS(feeder_from_json(broken), ConfigError);

  const auto sol = backward_forward_sweep(f, {1.0, 0.0}, {}, 1e-8, 100);
  std::ostringstream csv;
  write_voltage_csv(csv, f, sol);
  const auto text = csv.str();
  CHECK(text.rfind("node,v_mag_pu,v_angle_rad,depth\nn0,1,0,0\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 31);
}
