#include <doctest.h>

#include "morphoguard/datagen.hpp"
#include "morphoguard/dataset.hpp"
#include "support.hpp"

using namespace morphoguard;
using kin::JointConfig;
using kin::Vec3;

TEST_CASE("resample_polyline spacing") {
  const std::vector<Vec3> two{{0.5, 0, 0}, {0.51, 0, 0}};
  const auto pts = data::resample_polyline(two, 0.002);
  REQUIRE(pts.size() == 6);
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK((pts[i] - pts[i - 1]).norm() == doctest::Approx(0.002).epsilon(1e-9));
  CHECK((pts.back() - two.back()).norm() < 1e-15);

  const std::vector<Vec3> bent{{0.5, 0, 0}, {0.5, 0.0133, 0}, {0.47, 0.0133, 0.01}};
  const auto b = data::resample_polyline(bent, 0.002);
  for (std::size_t i = 1; i < b.size(); ++i) CHECK((b[i] - b[i - 1]).norm() <= 0.002 + 1e-12);
  CHECK((b.back() - bent.back()).norm() < 1e-15);
}

TEST_CASE("generate_waypoints is deterministic and stays in the reach ball") {
  const auto& c = mgtest::arm7();
  Rng a(5), b(5);
  const auto wa = data::generate_waypoints(c, 6, 0.002, a);
  const auto wb = data::generate_waypoints(c, 6, 0.002, b);
  CHECK(wa == wb);
  const double outer = 0.95 * c.total_link_length();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    CHECK(wa[i].norm() <= outer + 1e-12);
    if (i > 0) CHECK((wa[i] - wa[i - 1]).norm() <= 0.002 + 1e-12);
  }
  Rng r(1);
  CHECK_THROWS_AS(data::generate_waypoints(c, 1, 0.002, r), ConfigError);
  CHECK_THROWS_AS(data::generate_waypoints(c, 4, 0.0, r), ConfigError);
}

TEST_CASE("traverse a single waypoint at the current end effector") {
  const auto& c = mgtest::arm7();
  const JointConfig q = JointConfig::Constant(7, 0.2);
  const std::vector<Vec3> one{kin::end_effector_position(c, q)};
  const auto t = data::traverse(c, mgtest::arm7_skin(), q, one, 0.002);
  REQUIRE(t.size() == 1);
  CHECK(t.q[0] == q);
}

TEST_CASE("planar2 arc traversal is FK consistent") {
  const auto& c = mgtest::planar2();
  const auto& layout = mgtest::planar2_skin();
  std::vector<Vec3> arc;
  const double r = 1.5;
  for (int i = 0; i < 100; ++i) {
    const double th = 0.2 + 0.002 / r * i;
    arc.emplace_back(r * std::cos(th), r * std::sin(th), 0.0);
  }
  const auto start = kin::solve_ik_dls(c, JointConfig{{0.1, 0.5}}, arc.front());
  REQUIRE(start.converged);
  data::TraverseStats stats;
  const auto t = data::traverse(c, layout, start.q, arc, 0.002, {}, &stats);
  CHECK(t.size() == 100);
  CHECK(stats.failures == 0);
  CHECK(t.segment_starts.size() == 1);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK((kin::end_effector_position(c, t.q[i]) - arc[i]).norm() < 1e-4);
    const auto m = morph::flatten(morph::compute_morphology(c, layout, t.q[i]));
    CHECK((m - t.morphology[i]).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("arm7 traversal of 10^4 waypoints stays within the failure budget") {
  const auto& c = mgtest::arm7();
  Rng rng(2025);
  auto wps = data::generate_waypoints(c, 80, 0.002, rng);
  REQUIRE(wps.size() >= 10000);
  wps.resize(10000);
  const auto start = kin::solve_ik_dls(c, JointConfig::Zero(7), wps.front());
  REQUIRE(start.converged);
  data::TraverseStats stats;
  const auto t = data::traverse(c, mgtest::arm7_skin(), start.q, wps, 0.002, {}, &stats);
  MESSAGE("failures " << stats.failures << ", restarts " << stats.restarts);
  CHECK(stats.waypoints == 10000);
  CHECK(stats.failures < 100);
  CHECK(t.size() == static_cast<std::size_t>(stats.waypoints - stats.failures));
  for (std::size_t s = 0; s < t.segment_starts.size(); ++s) {
    const std::size_t begin = t.segment_starts[s];
    for (std::size_t i = begin + 1; i < t.segment_end(begin); ++i) {
      const double step =
          (kin::end_effector_position(c, t.q[i]) - kin::end_effector_position(c, t.q[i - 1])).norm();
      CHECK(step <= 2 * 0.002 + 1e-9);
    }
  }
}

TEST_CASE("interval sampling") {
  Rng rng(3);
  data::IntervalMixture fixed{{{1.0, 80.0, 0.0}}};
  for (int i = 0; i < 100; ++i) CHECK(data::sample_interval(fixed, rng) == 80);
  data::IntervalMixture low{{{1.0, 5.0, 0.0}}};
  CHECK(data::sample_interval(low, rng) == 10);

  const auto mix = data::IntervalMixture::defaults();
  std::vector<int> hist(16, 0);
  for (int i = 0; i < 100000; ++i) {
    const int k = data::sample_interval(mix, rng);
    REQUIRE(k >= 10);
    REQUIRE(k <= 150);
    ++hist[k / 10];
  }
  // Modes near 35 and 100 with a valley between them.
  CHECK(hist[3] > hist[6]);
  CHECK(hist[10] > hist[6]);
  CHECK(hist[3] > hist[1]);
  CHECK(hist[10] > hist[14]);

  CHECK(data::IntervalMixture::parse(mix.to_string()).to_string() == mix.to_string());
  CHECK_THROWS_AS(data::IntervalMixture::parse("0.5:35:12"), ConfigError);
  CHECK_THROWS_AS(data::IntervalMixture::parse("1:35"), ConfigError);
  CHECK_THROWS_AS(data::IntervalMixture::parse("-1:35:1,2:40:1"), ConfigError);
}

TEST_CASE("stationary trajectory gives zero labels") {
  const auto& c = mgtest::planar2();
  const auto& layout = mgtest::planar2_skin();
  data::Trajectory t;
  t.chain = c.name;
  const JointConfig q{{0.4, -0.3}};
  for (int i = 0; i < 200; ++i) {
    t.q.push_back(q);
    t.morphology.push_back(morph::flatten(morph::compute_morphology(c, layout, q)));
  }
  t.segment_starts = {0};
  Rng rng(1);
  const auto pairs = data::build_pairs(t, 1000, data::IntervalMixture::defaults(), rng);
  CHECK(pairs.size() == 1000);
  for (const auto& p : pairs) {
    CHECK(p.dq.isZero(0.0));
    CHECK(p.dm.isZero(0.0));
  }
}

TEST_CASE("build_pairs keeps intervals inside one segment") {
  const auto& c = mgtest::planar2();
  const auto& layout = mgtest::planar2_skin();
  data::Trajectory t;
  for (int i = 0; i < 400; ++i) {
    const JointConfig q{{0.001 * i, -0.002 * i}};
    t.q.push_back(q);
    t.morphology.push_back(morph::flatten(morph::compute_morphology(c, layout, q)));
  }
  t.segment_starts = {0, 180};
  Rng rng(2);
  const auto pairs = data::build_pairs(t, 2000, data::IntervalMixture::defaults(), rng);
  for (const auto& p : pairs) {
    const long i = std::lround(p.q0[0] / 0.001);
    const long g = i + p.interval;
    CHECK(((i < 180 && g < 180) || (i >= 180 && g < 400)));
    CHECK(data::label_error(c, layout, p) < 1e-9);
  }
}

TEST_CASE("generated corpus labels are sound") {
  data::CorpusParams p;
  p.pairs = 10000;
  p.seed = 21;
  const auto corpus = data::generate_corpus(mgtest::arm7(), mgtest::arm7_skin(), p);
  CHECK(corpus.pairs.size() == 10000);
  double worst = 0.0;
  for (const auto& pair : corpus.pairs) {
    worst = std::max(worst, data::label_error(mgtest::arm7(), mgtest::arm7_skin(), pair));
    CHECK(pair.interval >= 10);
    CHECK(pair.interval <= 150);
  }
  MESSAGE("worst label error " << worst);
  CHECK(worst < 1e-6);
}

TEST_CASE("corpus output does not depend on the worker count") {
  data::CorpusParams p;
  p.pairs = 3000;
  p.seed = 4;
  p.jobs = 1;
  const auto one = data::generate_corpus(mgtest::planar2(), mgtest::planar2_skin(), p);
  p.jobs = 3;
  const auto three = data::generate_corpus(mgtest::planar2(), mgtest::planar2_skin(), p);
  REQUIRE(one.pairs.size() == three.pairs.size());
  for (std::size_t i = 0; i < one.pairs.size(); ++i) {
    CHECK(one.pairs[i].dq == three.pairs[i].dq);
    CHECK(one.pairs[i].m0 == three.pairs[i].m0);
  }
}

TEST_CASE("split exactness") {
  for (std::size_t n : {100u, 101u, 999u, 1000u, 4321u}) {
    data::Dataset ds;
    ds.header.dof = 1;
    ds.header.points = 1;
    ds.m0.assign(3 * n, 0.0f);
    ds.dm.assign(3 * n, 0.0f);
    ds.dq.assign(n, 0.0f);
    ds.interval.assign(n, 10);
    ds.split.assign(n, 0);
    Rng rng(1);
    data::split_dataset(ds, rng);
    CHECK(ds.count(data::Split::train) == n * 98 / 100);
    CHECK(ds.count(data::Split::val) == n / 100);
    CHECK(ds.count(data::Split::test) == n - n * 98 / 100 - n / 100);
    data::Dataset again = ds;
    std::fill(again.split.begin(), again.split.end(), 0);
    Rng rng2(1);
    data::split_dataset(again, rng2);
    CHECK(again.split == ds.split);
  }
  data::Dataset tiny;
  tiny.header.dof = 1;
  tiny.header.points = 1;
  tiny.m0.assign(30, 0.0f);
  tiny.dm.assign(30, 0.0f);
  tiny.dq.assign(10, 0.0f);
  tiny.interval.assign(10, 10);
  tiny.split.assign(10, 0);
  Rng rng(1);
  CHECK_THROWS_AS(data::split_dataset(tiny, rng), ConfigError);
}
