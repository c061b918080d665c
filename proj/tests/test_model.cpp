#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rdc/model.hpp"
#include "support.hpp"

#include <cmath>

using namespace rdc;
using rdc::testing::Rng;

namespace {

// Kinetics written out independently of the library, in long double.
struct RatesOracle {
  long double du, dv;
};

RatesOracle oracle_rates(long double u, long double v, long double phi, const OregonatorParams& p) {
  const long double eps = p.epsilon, f = p.f, q = p.q;
  return {(u - u * u - (f * v + phi) * (u - q) / (u + q)) / eps, u - v};
}

// Root of u - u^2 - (f u + phi)(u - q)/(u + q) on (q, 1) by plain bisection.
long double oracle_rest(const OregonatorParams& p, long double phi) {
  long double lo = p.q, hi = 1.0L;
  const auto g = [&](long double u) {
    return u - u * u - (p.f * u + phi) * (u - p.q) / (u + p.q);
  };
  for (int i = 0; i < 200; ++i) {
    const long double mid = (lo + hi) / 2;
    (g(mid) > 0 ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

template <typename T>
bool uniform(const BasicField<T>& f) {
  for (T x : f.values()) {
    if (x != f.values()[0]) return false;
  }
  return true;
}

// States the dynamics actually reach: rest plus a few stimuli, then a random
// stretch of integration. Arbitrary (u, v) pairs are not valid inputs: small u
// with large v makes the kinetics too stiff for the explicit step.
SimState64 random_state(Rng& rng, int w, int h) {
  const OregonatorParams p;
  SimState64 s = quiescent_state(Field64(w, h, p.phi_active), p);
  for (int i = testing::uniform_int(rng, 1, 3); i > 0; --i) {
    apply_stimulus(s, {testing::uniform_int(rng, 0, w - 1), testing::uniform_int(rng, 0, h - 1)},
                   testing::uniform_int(rng, 0, 5));
  }
  s = run(s, p, testing::uniform_int(rng, 0, 600));
  s.step = 0;
  return s;
}

}  // namespace

TEST_CASE("laplacian of a constant field is zero") {
  for (double c : {0.0, 0.3, -7.25, 1e6}) {
    const Field64 lap = laplacian(Field64(9, 7, c), 0.25);
    for (double x : lap.values()) CHECK(x == 0.0);
  }
}

TEST_CASE("laplacian of an interior impulse") {
  Field64 f(7, 7, 0.0);
  f(3, 3) = 1.0;
  const Field64 lap = laplacian(f, 0.25);
  CHECK(lap(3, 3) == -64.0);
  CHECK(lap(2, 3) == 16.0);
  CHECK(lap(4, 3) == 16.0);
  CHECK(lap(3, 2) == 16.0);
  CHECK(lap(3, 4) == 16.0);
  int nonzero = 0;
  for (double x : lap.values()) nonzero += x != 0.0;
  CHECK(nonzero == 5);
}

TEST_CASE("laplacian of x^2 is 2 on interior columns") {
  const double dx = 0.25;
  Field64 f(12, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 12; ++x) f(x, y) = (x * dx) * (x * dx);
  }
  const Field64 lap = laplacian(f, dx);
  for (int y = 0; y < 5; ++y) {
    for (int x = 1; x < 11; ++x) CHECK(lap(x, y) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("laplacian rejects non-finite input") {
  Field64 f(4, 4, 0.0);
  f(2, 1) = std::nan("");
  CHECK_THROWS_AS(laplacian(f, 0.25), NumericalError);
}

TEST_CASE("property: flux-free boundary, dx^2 * sum(laplacian) = 0") {
  Rng rng(0x1a91ace);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = testing::uniform_int(rng, 3, 40);
    const int h = testing::uniform_int(rng, 3, 40);
    Field64 f(w, h);
    for (double& x : f.values()) x = testing::uniform_real(rng, -1.0, 1.0);
    const double dx = 0.25;
    const Field64 lap = laplacian(f, dx);
    long double sum = 0;
    for (double x : lap.values()) sum += x * dx * dx;
    CHECK(std::fabs(static_cast<double>(sum)) < 1e-9);
  }
}

TEST_CASE("reaction terms") {
  const OregonatorParams p;
  SUBCASE("u=1 v=0 phi=0") {
    const auto r = reaction_terms(1.0, 0.0, 0.0, p);
    CHECK(r.du_dt == 0.0);
    CHECK(r.dv_dt == 1.0);
  }
  SUBCASE("u=0 v=0 phi=phi_active") {
    const auto r = reaction_terms(0.0, 0.0, 0.054, p);
    CHECK(r.du_dt == doctest::Approx(2.22222).epsilon(1e-5));
    CHECK(r.du_dt == doctest::Approx(0.054 / 0.0243).epsilon(1e-14));
    CHECK(r.dv_dt == 0.0);
  }
  SUBCASE("u=q annihilates the middle term") {
    const auto r = reaction_terms(0.002, 0.5, 0.054, p);
    CHECK(r.du_dt == doctest::Approx((0.002 - 0.002 * 0.002) / 0.0243).epsilon(1e-14));
    CHECK(r.dv_dt == doctest::Approx(0.002 - 0.5).epsilon(1e-14));
  }
  SUBCASE("property: agrees with the long double oracle") {
    Rng rng(77);
    for (int i = 0; i < 1000; ++i) {
      const double u = testing::uniform_real(rng, 0.0, 1.0);
      const double v = testing::uniform_real(rng, 0.0, 1.0);
      const double phi = testing::uniform_real(rng, 0.0, 0.1);
      const auto r = reaction_terms(u, v, phi, p);
      const auto o = oracle_rates(u, v, phi, p);
      CHECK(r.du_dt == doctest::Approx(static_cast<double>(o.du)).epsilon(1e-10));
      CHECK(r.dv_dt == doctest::Approx(static_cast<double>(o.dv)).epsilon(1e-12));
    }
  }
}

TEST_CASE("one step from all-zero u and v") {
  const OregonatorParams p;
  for (KernelKind k : {KernelKind::reference, KernelKind::parallel}) {
    SimState64 s{Field64(8, 6), Field64(8, 6), Field64(8, 6, 0.054), 0};
    const SimState64 next = step(s, p, k);
    for (double u : next.u.values()) CHECK(u == doctest::Approx(0.001 * 0.054 / 0.0243).epsilon(1e-12));
    for (double u : next.u.values()) CHECK(u == doctest::Approx(2.22222e-3).epsilon(1e-5));
    for (double v : next.v.values()) CHECK(v == 0.0);
    CHECK(next.step == 1);
  }
}

TEST_CASE("run composition") {
  Rng rng(5);
  const OregonatorParams p;
  const SimState64 s = random_state(rng, 17, 11);
  CHECK(run(s, p, 0) == s);
  CHECK(run(s, p, 1) == step(s, p));
  CHECK(run(s, p, 2) == step(step(s, p), p));
}

TEST_CASE("property: v evolves pointwise") {
  Rng rng(11);
  const OregonatorParams p;
  for (int trial = 0; trial < 10; ++trial) {
    const SimState64 s = random_state(rng, testing::uniform_int(rng, 3, 20), testing::uniform_int(rng, 3, 20));
    const SimState64 next = step(s, p, KernelKind::parallel, 2);
    for (int y = 0; y < s.height(); ++y) {
      for (int x = 0; x < s.width(); ++x) {
        CHECK(next.v(x, y) == s.v(x, y) + p.dt * (s.u(x, y) - s.v(x, y)));
      }
    }
  }
}

TEST_CASE("property: kernels and thread counts agree bit for bit") {
  Rng rng(0xdead);
  const OregonatorParams p;
  for (int trial = 0; trial < 6; ++trial) {
    const int w = testing::uniform_int(rng, 3, 70);
    const int h = testing::uniform_int(rng, 3, 70);
    const SimState64 s64 = random_state(rng, w, h);
    SimState32 s32{Field32(w, h), Field32(w, h), Field32(w, h, static_cast<float>(p.phi_active)), 0};
    for (std::size_t i = 0; i < s64.u.values().size(); ++i) {
      s32.u.values()[i] = static_cast<float>(s64.u.values()[i]);
      s32.v.values()[i] = static_cast<float>(s64.v.values()[i]);
    }
    RunOptions<double> ref64{KernelKind::reference, 1, {}, 0};
    RunOptions<float> ref32{KernelKind::reference, 1, {}, 0};
    const SimState64 want64 = run(s64, p, 40, ref64);
    const SimState32 want32 = run(s32, p, 40, ref32);
    for (int threads : {1, 2, 3, 4, 7}) {
      CHECK(run(s64, p, 40, RunOptions<double>{KernelKind::parallel, threads, {}, 0}) == want64);
      CHECK(run(s32, p, 40, RunOptions<float>{KernelKind::parallel, threads, {}, 0}) == want32);
    }
  }
}

TEST_CASE("run twice from the same state is bit-identical") {
  const OregonatorParams p;
  SimState32 s = quiescent_state(Field32(60, 40, static_cast<float>(p.phi_active)), p);
  apply_stimulus(s, {30, 20}, 4);
  CHECK(run(s, p, 1000) == run(s, p, 1000));
}

TEST_CASE("homogeneous state stays uniform") {
  const OregonatorParams p;
  SimState32 s{Field32(16, 12, 0.3f), Field32(16, 12, 0.1f), Field32(16, 12, static_cast<float>(p.phi_active)), 0};
  const SimState32 out = run(s, p, 3000);
  CHECK(uniform(out.u));
  CHECK(uniform(out.v));
  CHECK(out.u(0, 0) != 0.3f);
}

TEST_CASE("apply_stimulus") {
  const OregonatorParams p;
  SUBCASE("radius 0 sets exactly one pixel") {
    SimState64 s{Field64(9, 9), Field64(9, 9), Field64(9, 9), 0};
    apply_stimulus(s, {4, 5}, 0);
    int ones = 0;
    for (double u : s.u.values()) ones += u == 1.0;
    CHECK(ones == 1);
    CHECK(s.u(4, 5) == 1.0);
  }
  SUBCASE("radius 2 on 400x300 covers 13 pixels") {
    SimState32 s{Field32(400, 300), Field32(400, 300), Field32(400, 300), 0};
    apply_stimulus(s, {10, 10}, 2);
    int brute = 0;
    for (int y = 0; y < 300; ++y) {
      for (int x = 0; x < 400; ++x) brute += (x - 10) * (x - 10) + (y - 10) * (y - 10) <= 4;
    }
    int ones = 0;
    for (float u : s.u.values()) ones += u == 1.0f;
    CHECK(brute == 13);
    CHECK(ones == 13);
  }
  SUBCASE("off-grid disc leaves the state alone") {
    SimState64 s = quiescent_state(Field64(20, 20, p.phi_active), p);
    const SimState64 before = s;
    apply_stimulus(s, {-10, 5}, 3);
    apply_stimulus(s, {40, 40}, 5);
    CHECK(s == before);
  }
  SUBCASE("v is untouched") {
    SimState64 s = quiescent_state(Field64(20, 20, p.phi_active), p);
    const Field64 v = s.v;
    apply_stimulus(s, {10, 10}, 4);
    CHECK(s.v == v);
  }
}

TEST_CASE("steady state") {
  const OregonatorParams p;
  const SteadyState ss = steady_state(p, p.phi_active);
  SUBCASE("defining property") {
    const auto r = reaction_terms(ss.u, ss.v, p.phi_active, p);
    CHECK(std::fabs(r.du_dt) < 1e-10);
    CHECK(std::fabs(r.dv_dt) < 1e-10);
    CHECK(ss.u == ss.v);
  }
  SUBCASE("matches the bisection oracle and sits well below threshold") {
    const double want = static_cast<double>(oracle_rest(p, p.phi_active));
    CHECK(ss.u == doctest::Approx(want).epsilon(1e-9));
    CHECK(ss.u > p.q);
    CHECK(ss.u < 0.01);
  }
  SUBCASE("root does not depend on epsilon") {
    OregonatorParams p2 = p;
    p2.epsilon *= 2;
    const SteadyState ss2 = steady_state(p2, p.phi_active);
    CHECK(ss2.u == ss.u);
    CHECK(ss2.v == ss.v);
  }
  SUBCASE("property: residual vanishes across parameter draws") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      OregonatorParams r = p;
      r.f = testing::uniform_real(rng, 0.5, 3.0);
      r.q = testing::uniform_real(rng, 0.0005, 0.01);
      const double phi = testing::uniform_real(rng, 0.01, 0.12);
      const SteadyState s = steady_state(r, phi);
      const auto rates = reaction_terms(s.u, s.v, phi, r);
      CHECK(std::fabs(rates.du_dt) < 1e-10);
    }
  }
}

TEST_CASE("quiescent medium is stationary") {
  const OregonatorParams p;
  const SimState32 s = quiescent_state(Field32(20, 10, static_cast<float>(p.phi_active)), p);
  const SimState32 out = run(s, p, 500);
  CHECK(uniform(out.u));
  CHECK(std::fabs(out.u(0, 0) - s.u(0, 0)) < 1e-6f);
}

TEST_CASE("property: boundedness from rest plus one stimulus over 100000 steps") {
  const OregonatorParams p;
  Rng rng(2024);
  const int w = 48, h = 40;
  SimState32 s = quiescent_state(Field32(w, h, static_cast<float>(p.phi_active)), p);
  apply_stimulus(s, {testing::uniform_int(rng, 0, w - 1), testing::uniform_int(rng, 0, h - 1)},
                 testing::uniform_int(rng, 1, 6));
  Integrator<float> integ(s, p);
  float u_lo = 1, u_hi = 0, v_lo = 1, v_hi = 0;
  const auto sample = [&](const SimState32& st) {
    for (float u : st.u.values()) u_lo = std::min(u_lo, u), u_hi = std::max(u_hi, u);
    for (float v : st.v.values()) v_lo = std::min(v_lo, v), v_hi = std::max(v_hi, v);
  };
  integ.advance(100000, sample, 100);
  CHECK(u_lo > -0.1f);
  CHECK(u_hi < 1.1f);
  CHECK(v_lo > -0.01f);
  CHECK(v_hi < 1.1f);
  CHECK(u_hi > 0.5f);  // the stimulus did fire a wave
}

TEST_CASE("non-finite state raises NumericalError with the cell") {
  const OregonatorParams p;
  SimState64 s = quiescent_state(Field64(10, 10, p.phi_active), p);
  s.u(3, 7) = INFINITY;
  Integrator<double> integ(s, p);
  try {
    integ.advance(1);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    // Infinity reaches the neighbours in the same step; the first bad cell in
    // row-major order is the one above.
    CHECK(e.x() == 3);
    CHECK(e.y() == 6);
  }
  try {
    require_finite(s);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.x() == 3);
    CHECK(e.y() == 7);
  }
}

TEST_CASE("parameter validation") {
  OregonatorParams p;
  p.d_u = 100.0;  // diffusion number 25.6: explicit scheme unstable
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK_THROWS_AS(with_param(OregonatorParams{}, "phi_passive", 0.01), ValidationError);
  CHECK_THROWS_AS(with_param(OregonatorParams{}, "nope", 1.0), ValidationError);
  CHECK(with_param(OregonatorParams{}, "f", 2.0).f == 2.0);
}
