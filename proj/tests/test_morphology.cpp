#include <doctest.h>

#include <cmath>

#include "morphoguard/morphology.hpp"
#include "support.hpp"

using namespace morphoguard;
using kin::JointConfig;
using kin::Vec3;

TEST_CASE("unit offsets map through the parent joint frame") {
  const auto& c = mgtest::planar2();
  const morph::SkinLayout origin_units({{c.name, 0, Vec3::Zero()}, {c.name, 1, Vec3::Zero()}});
  Rng rng(1);
  const auto q = mgtest::random_config(c, rng);
  const auto frames = kin::forward_kinematics(c, q);
  const auto m = morph::compute_morphology(c, origin_units, q);
  for (int i = 0; i < 2; ++i) CHECK((m.positions.row(i).transpose() - frames[i].translation).norm() == 0.0);

  const auto tip = morph::compute_morphology(c, mgtest::planar2_skin(), JointConfig::Zero(2));
  CHECK((tip.positions.row(3).transpose() - Vec3(2, 0, 0)).norm() < 1e-12);
}

TEST_CASE("arm7 morphology agrees with per-unit forward kinematics") {
  const auto& c = mgtest::arm7();
  const auto& layout = mgtest::arm7_skin();
  CHECK(layout.count() == 21);
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = mgtest::random_config(c, rng);
    const auto m = morph::compute_morphology(c, layout, q);
    CHECK(m.layout_id == layout.fingerprint());
    for (int i = 0; i < layout.count(); ++i) {
      const auto& u = layout.units()[i];
      const Vec3 expect = kin::forward_kinematics(c, q)[u.parent_joint].apply(u.local_offset);
      CHECK((m.positions.row(i).transpose() - expect).norm() < 1e-12);
    }
  }
}

TEST_CASE("every arm7 joint carries a unit") {
  const auto& layout = mgtest::arm7_skin();
  std::vector<int> per_joint(mgtest::arm7().dof(), 0);
  for (const auto& u : layout.units()) ++per_joint[u.parent_joint];
  for (int n : per_joint) CHECK(n >= 1);
}

TEST_CASE("rigid-link distances are configuration independent") {
  const auto& c = mgtest::arm7();
  const auto& layout = mgtest::arm7_skin();
  Rng rng(8);
  const auto base = morph::compute_morphology(c, layout, mgtest::random_config(c, rng));
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = morph::compute_morphology(c, layout, mgtest::random_config(c, rng));
    for (int a = 0; a < layout.count(); ++a)
      for (int b = a + 1; b < layout.count(); ++b) {
        if (layout.units()[a].parent_joint != layout.units()[b].parent_joint) continue;
        const double d0 = (base.positions.row(a) - base.positions.row(b)).norm();
        const double d1 = (m.positions.row(a) - m.positions.row(b)).norm();
        CHECK(std::abs(d0 - d1) < 1e-9);
      }
  }
}

TEST_CASE("topology is preserved across configurations") {
  const auto& c = mgtest::arm7();
  const auto& layout = mgtest::arm7_skin();
  Rng rng(4);
  const auto q = mgtest::random_config(c, rng);
  const auto m = morph::compute_morphology(c, layout, q);
  // Row i moves only under joints that move unit i's parent frame.
  for (int j = 0; j < c.dof(); ++j) {
    JointConfig q2 = q;
    q2[j] = std::clamp(q2[j] + 0.1, c.joints[j].lower, c.joints[j].upper);
    if (q2[j] == q[j]) q2[j] -= 0.1;
    const auto m2 = morph::compute_morphology(c, layout, q2);
    for (int i = 0; i < layout.count(); ++i) {
      const auto& u = layout.units()[i];
      if (!c.moves(j, u.parent_joint)) CHECK((m2.positions.row(i) - m.positions.row(i)).norm() == 0.0);
    }
  }
}

TEST_CASE("morphology delta examples") {
  const auto& c = mgtest::planar2();
  const auto& layout = mgtest::planar2_skin();
  const auto m0 = morph::compute_morphology(c, layout, JointConfig{{0.0, 0.0}});
  const auto mg = morph::compute_morphology(c, layout, JointConfig{{kPi / 2, 0.0}});
  const auto d = morph::morphology_delta(mg, m0);
  CHECK((d.row(3).transpose() - Vec3(-2, 2, 0)).norm() < 1e-12);
  CHECK(morph::morphology_delta(m0, m0).isZero(0.0));
  CHECK((morph::morphology_delta(m0, mg) + d).isZero(0.0));
  const morph::Morphology other{m0.positions, m0.layout_id + 1};
  CHECK_THROWS_AS(morph::morphology_delta(m0, other), ConfigError);
}

TEST_CASE("flatten and unflatten") {
  morph::Positions one(1, 3);
  one << 1, 2, 3;
  const auto v = morph::flatten(one);
  CHECK(v.size() == 3);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 2.0);
  CHECK(v[2] == 3.0);

  Rng rng(6);
  const auto m = morph::compute_morphology(mgtest::arm7(), mgtest::arm7_skin(), mgtest::random_config(mgtest::arm7(), rng));
  const auto flat = morph::flatten(m);
  CHECK(flat.size() == 63);
  const auto back = morph::unflatten(flat, m.layout_id);
  CHECK(back.positions == m.positions);
  CHECK(back.layout_id == m.layout_id);
  CHECK_THROWS_AS(morph::unflatten(Eigen::VectorXd::Zero(4), 0), ConfigError);
}

TEST_CASE("observation noise bookkeeping") {
  std::vector<float> clean(63);
  for (std::size_t i = 0; i < clean.size(); ++i) clean[i] = 0.01f * static_cast<float>(i) - 0.3f;

  Rng rng(1);
  const auto zero = morph::add_observation_noise(clean, 0.0, rng);
  CHECK(zero.vector == clean);
  for (double e : zero.noise) CHECK(e == 0.0);

  Rng r1(77), r2(77);
  const auto a = morph::add_observation_noise(clean, 0.01, r1);
  const auto b = morph::add_observation_noise(clean, 0.01, r2);
  CHECK(a.vector == b.vector);
  CHECK(a.noise == b.noise);
  for (std::size_t i = 0; i < clean.size(); ++i)
    CHECK(static_cast<double>(a.vector[i]) - a.noise[i] == static_cast<double>(clean[i]));

  std::vector<float> zeros(100000, 0.0f);
  Rng big(5);
  const auto n = morph::add_observation_noise(zeros, 0.01, big);
  double sum = 0.0, sq = 0.0;
  for (double e : n.noise) {
    sum += e;
    sq += e * e;
  }
  const double count = static_cast<double>(n.noise.size());
  const double mean = sum / count;
  const double sd = std::sqrt(sq / count - mean * mean);
  CHECK(std::abs(mean) < 3 * 0.01 / std::sqrt(count));
  CHECK(std::abs(sd - 0.01) < 0.02 * 0.01);
  CHECK_THROWS_AS(morph::add_observation_noise(clean, -1.0, rng), ConfigError);
}

TEST_CASE("skin parsing validation") {
  const auto text = morph::to_text(mgtest::arm7_skin());
  const auto again = morph::parse_skin(text);
  CHECK(again.fingerprint() == mgtest::arm7_skin().fingerprint());
  const morph::SkinLayout bad({{"planar2", 5, Vec3::Zero()}});
  CHECK_THROWS_AS(bad.validate(mgtest::planar2()), ConfigError);
  const morph::SkinLayout wrong_chain({{"other", 0, Vec3::Zero()}});
  CHECK_THROWS_AS(wrong_chain.validate(mgtest::planar2()), ConfigError);
  CHECK_THROWS_AS(morph::parse_skin("# nothing\n"), ConfigError);
}
