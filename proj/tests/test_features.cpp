#include <algorithm>

#include <gtest/gtest.h>

#include "nsm/nsm.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace nsm;

namespace {

std::vector<Point> elongated_blob(Rng& rng, std::size_t n, double sx, double sy, double sz) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {sx * g(rng), sy * g(rng), sz * g(rng)};
  return pts;
}

void expect_valid_frame(const KeyPose& k) {
  EXPECT_EQ(k.orientation.col(2), Eigen::Vector3d::UnitZ());
  EXPECT_EQ(k.orientation(2, 0), 0.0);
  EXPECT_NEAR(k.orientation.col(0).norm(), 1.0, 1e-12);
  EXPECT_NEAR(k.orientation.determinant(), 1.0, 1e-12);
}

}  // namespace

TEST(KeyPose, SymmetricElongatedAlongY) {
  std::vector<Point> pts;
  for (int i = -10; i <= 10; ++i) {
    pts.emplace_back(0.1, 0.5 * i, 0.0);
    pts.emplace_back(-0.1, 0.5 * i, 0.0);
  }
  const KeyPose k = extract_keypose(pts);
  EXPECT_EQ(k.position, Eigen::Vector3d::Zero());
  EXPECT_FALSE(k.isotropic);
  // Zero skew and x.x == 0, so the last fallback picks +y.
  EXPECT_NEAR(k.orientation(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(k.orientation(1, 0), 1.0, 1e-12);
  expect_valid_frame(k);
}

TEST(KeyPose, SkewPicksSign) {
  // Long tail toward -x: third moment along +x is negative, so x flips to -x.
  std::vector<Point> pts{{0, 0, 0}, {0.1, 0, 0}, {0.2, 0, 0}, {0.3, 0.01, 0}, {-3.0, 0, 0}};
  const KeyPose k = extract_keypose(pts);
  EXPECT_LT(k.orientation(0, 0), 0.0);
  expect_valid_frame(k);
}

TEST(KeyPose, TranslationEquivariantAndYawEquivariantPosition) {
  Rng rng = make_rng(201, {});
  for (int i = 0; i < 30; ++i) {
    const auto pts = elongated_blob(rng, 301, 1.0, 0.4, 0.7);
    const KeyPose k = extract_keypose(pts);
    const Eigen::Vector3d t(uniform_real(rng, -50, 50), uniform_real(rng, -50, 50), uniform_real(rng, -5, 5));
    std::vector<Point> moved;
    for (const auto& p : pts) moved.push_back(p + t);
    const KeyPose km = extract_keypose(moved);
    EXPECT_LT((km.position - (k.position + t)).norm(), 1e-9);
    EXPECT_LT((km.orientation - k.orientation).norm(), 1e-9);

    const RigidTransform yaw = RigidTransform::from_yaw(uniform_real(rng, -3, 3));
    std::vector<Point> turned;
    for (const auto& p : pts) turned.push_back(yaw.apply(p));
    // Odd count: the median is a data point only if the rotation keeps orderings, so check position
    // equivariance against the oracle median of the rotated cloud instead.
    const KeyPose kt = extract_keypose(turned);
    for (int a = 0; a < 3; ++a) {
      std::vector<double> v;
      for (const auto& p : turned) v.push_back(p[a]);
      EXPECT_EQ(kt.position[a], oracle::median(v));
    }
    EXPECT_LT((kt.orientation.col(0) - yaw.rotation() * k.orientation.col(0)).norm(), 1e-6);
  }
}

TEST(KeyPose, MedianMatchesOracleOnEvenAndOddCounts) {
  Rng rng = make_rng(202, {});
  for (std::size_t n : {3u, 4u, 10u, 11u, 500u, 501u}) {
    const auto pts = fixtures::random_points(rng, n, -3, 3);
    const KeyPose k = extract_keypose(pts);
    for (int a = 0; a < 3; ++a) {
      std::vector<double> v;
      for (const auto& p : pts) v.push_back(p[a]);
      EXPECT_EQ(k.position[a], oracle::median(v)) << "n=" << n;
    }
  }
}

TEST(KeyPose, RobustToFarOutliers) {
  Rng rng = make_rng(203, {});
  auto pts = elongated_blob(rng, 950, 0.3, 0.2, 0.2);
  const KeyPose clean = extract_keypose(pts);
  for (int i = 0; i < 50; ++i) pts.emplace_back(uniform_real(rng, 20, 30), uniform_real(rng, 20, 30), uniform_real(rng, 5, 10));
  const KeyPose dirty = extract_keypose(pts);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  EXPECT_LT((dirty.position - clean.position).norm(), 0.05);
  EXPECT_GT((mean - clean.position).norm(), 0.5);
}

TEST(KeyPose, IsotropicFlag) {
  std::vector<Point> ring;
  for (int i = 0; i < 360; ++i) ring.emplace_back(std::cos(i * std::numbers::pi / 180), std::sin(i * std::numbers::pi / 180), 0.1 * (i % 3));
  const KeyPose k = extract_keypose(ring);
  EXPECT_TRUE(k.isotropic);
  EXPECT_EQ(k.orientation, Eigen::Matrix3d::Identity());
  EXPECT_THROW(extract_keypose(std::vector<Point>{{0, 0, 0}, {1, 1, 1}}), ValidationError);
}

TEST(EigenFeatures, Archetypes) {
  Rng rng = make_rng(204, {});
  std::vector<Point> line, disk, ball;
  std::normal_distribution<double> g(0.0, 1.0);
  while (line.size() < 5000) line.emplace_back(0, 0, uniform_real(rng, -1, 1));
  while (disk.size() < 5000) {
    const Point p(uniform_real(rng, -1, 1), uniform_real(rng, -1, 1), 0.0);
    if (p.squaredNorm() <= 1.0) disk.push_back(p);
  }
  while (ball.size() < 5000) {
    const Point p(uniform_real(rng, -1, 1), uniform_real(rng, -1, 1), uniform_real(rng, -1, 1));
    if (p.squaredNorm() <= 1.0) ball.push_back(p);
  }
  const auto l = eigen_features(line), d = eigen_features(disk), b = eigen_features(ball);
  EXPECT_NEAR(l.planarity, 0.0, 0.05);
  EXPECT_NEAR(l.cylindricality, 1.0, 0.05);
  EXPECT_NEAR(d.planarity, 0.5, 0.05);
  EXPECT_NEAR(d.cylindricality, 0.0, 0.05);
  EXPECT_NEAR(b.planarity, 0.0, 0.05);
  EXPECT_NEAR(b.cylindricality, 0.0, 0.05);
}

TEST(EigenFeatures, DegenerateCovarianceIsZero) {
  std::vector<std::string> warnings;
  Log::set_sink([&](LogLevel, std::string_view m) { warnings.emplace_back(m); });
  const auto f = eigen_features(std::vector<Point>(5, Point(1, 2, 3)));
  Log::set_sink(nullptr);
  EXPECT_EQ(f.planarity, 0.0);
  EXPECT_EQ(f.cylindricality, 0.0);
  EXPECT_FALSE(warnings.empty());
}

TEST(Gestalt, SinglePointBinning) {
  KeyPose k;
  std::vector<Point> pts{{1.0, 0.0, 0.7}};
  const Descriptor d = gestalt_descriptor(pts, k, GestaltParams{});
  for (std::size_t b = 0; b < kGestaltBins; ++b) {
    if (b == 2 * 8 + 0) {
      EXPECT_EQ(d.bin_mean(b), 0.7);
      EXPECT_EQ(d.bin_variance(b), 0.0);
    } else {
      EXPECT_EQ(d.bin_mean(b), 0.0);
      EXPECT_EQ(d.bin_variance(b), 0.0);
    }
  }
}

TEST(Gestalt, SectorsRunClockwise) {
  KeyPose k;
  // Just clockwise of +x (negative y) is sector 0; just counter-clockwise is sector 7.
  const Descriptor cw = gestalt_descriptor(std::vector<Point>{{0.3, -0.01, 1.0}}, k, GestaltParams{});
  const Descriptor ccw = gestalt_descriptor(std::vector<Point>{{0.3, 0.01, 1.0}}, k, GestaltParams{});
  EXPECT_EQ(cw.bin_mean(0), 1.0);
  EXPECT_EQ(ccw.bin_mean(7), 1.0);
  // Outside the radius is ignored.
  const Descriptor out = gestalt_descriptor(std::vector<Point>{{2.0, 0.0, 1.0}, {2.5, 0, 0}, {0, 3, 0}}, k, GestaltParams{});
  for (std::size_t i = 0; i < 2 * kGestaltBins; ++i) EXPECT_EQ(out[i], 0.0);
}

TEST(Gestalt, MatchesBruteForceOracle) {
  Rng rng = make_rng(205, {});
  for (int i = 0; i < 60; ++i) {
    const auto pts = fixtures::random_points(rng, 500, -2.2, 2.2);
    KeyPose k = extract_keypose(pts);
    if (i % 2) k = k.transformed(fixtures::random_transform(rng, 0.0));  // arbitrary tilted frame
    const Descriptor d = gestalt_descriptor(pts, k, GestaltParams{});
    const auto want = oracle::gestalt_bins(pts, k, 2.0, 4, 8);
    for (std::size_t j = 0; j < want.size(); ++j) ASSERT_NEAR(d[j], want[j], 1e-9) << "instance " << i << " entry " << j;
  }
}

TEST(Gestalt, RejectsDivisionsThatChangeWidth) {
  GestaltParams p;
  p.radial_divisions = 5;
  EXPECT_THROW(p.validate(), ValidationError);
  p.radial_divisions = 8;
  p.azimuthal_divisions = 4;
  EXPECT_NO_THROW(p.validate());
}

TEST(Descriptor, InvariantUnderJointRigidMotionAndPermutation) {
  Rng rng = make_rng(206, {});
  for (int i = 0; i < 40; ++i) {
    auto pts = elongated_blob(rng, 400, 0.9, 0.5, 0.6);
    Segment s;
    s.points.points = pts;
    const DescribedSegment d = describe_segment(s, GestaltParams{});
    const RigidTransform t = fixtures::random_transform(rng, 30.0);
    std::vector<Point> moved;
    for (const auto& p : pts) moved.push_back(t.apply(p));
    const Descriptor dm = gestalt_descriptor(moved, d.key_pose.transformed(t), GestaltParams{});
    for (std::size_t j = 0; j < kDescriptorSize; ++j) ASSERT_NEAR(dm[j], d.descriptor[j], 1e-9);

    std::shuffle(pts.begin(), pts.end(), rng);
    Segment shuffled;
    shuffled.points.points = pts;
    const DescribedSegment ds = describe_segment(shuffled, GestaltParams{});
    // Median is order-free; covariance sums only agree to rounding.
    EXPECT_EQ(ds.key_pose.position, d.key_pose.position);
    EXPECT_LT((ds.key_pose.orientation - d.key_pose.orientation).norm(), 1e-12);
    for (std::size_t j = 0; j < kDescriptorSize; ++j) ASSERT_NEAR(ds.descriptor[j], d.descriptor[j], 1e-9);

    EXPECT_LE(d.descriptor.planarity() + d.descriptor.cylindricality(), 1.0 + 1e-12);
    for (std::size_t b = 0; b < kGestaltBins; ++b) EXPECT_GE(d.descriptor.bin_variance(b), 0.0);
  }
}

TEST(Descriptor, ParallelMatchesSerial) {
  const LabeledScene scene = generate_scene(fixtures::forest_spec(207));
  const auto seg = euclidean_cluster(filter_ground(scene.cloud, PmfParams{}).non_ground, SegmentationParams{});
  const auto a = describe_segments(seg, GestaltParams{}, 1);
  const auto b = describe_segments(seg, GestaltParams{}, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].key_pose, b[i].key_pose);
    EXPECT_EQ(a[i].descriptor, b[i].descriptor);
  }
}
