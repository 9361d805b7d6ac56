#include <doctest.h>

#include <algorithm>
#include <limits>
#include <oog/errors.hpp>
#include <oog/oog.hpp>
#include <oog/rng.hpp>

#include "support/generators.hpp"

using namespace oog;

namespace {

PointCloud cluster_at(Rng& rng, const Vec3& center, int n = 40,
                      double spread = 0.01) {
  PointCloud cloud;
  for (int i = 0; i < n; ++i) {
    cloud.points.push_back(center + testing::random_vec(rng, spread));
  }
  return cloud;
}

/// Brute-force minimum pairwise distance, the oracle for the grid-backed
/// contact decision.
double min_distance(const PointCloud& a, const PointCloud& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& p : a.points) {
    for (const Vec3& q : b.points) {
      best = std::min(best, (p - q).norm());
    }
  }
  return best;
}

HandObservation hand_at(const Vec3& pos, GripState grip) {
  return {pos + Vec3{0, 0.004, 0}, pos - Vec3{0, 0.004, 0}, grip};
}

OOG two_object_oog(bool contact01, bool hand2 = false) {
  OOG g;
  g.object_nodes = {{0, {}}, {1, {}}, {2, {}}};
  g.object_object_edges = {{0, 1, contact01}, {0, 2, false}, {1, 2, false}};
  g.object_hand_edges = {{0, false}, {1, false}, {2, hand2}};
  return g;
}

}  // namespace

TEST_CASE("compute_contacts: threshold decisions") {
  Rng rng(41);
  PointCloud a = cluster_at(rng, {-0.1, 0, 0});
  PointCloud b = cluster_at(rng, {0.1, 0, 0});
  // Plant the closest pair explicitly: gap exactly 0.001.
  a.points.push_back({-0.0005, 0, 0});
  b.points.push_back({0.0005, 0, 0});
  CHECK(min_distance(a, b) == doctest::Approx(0.001).epsilon(1e-9));

  const HandObservation far_hand = hand_at({1, 1, 1}, GripState::Open);
  CHECK(compute_contacts({a, b}, far_hand, 0.01) ==
        ContactSet{ContactPair::objects(0, 1)});

  for (Vec3& p : b.points) p.x += 0.5;
  CHECK(compute_contacts({a, b}, far_hand, 0.01).empty());
}

TEST_CASE("compute_contacts: hand contact requires closed grip") {
  Rng rng(42);
  const PointCloud a = cluster_at(rng, {0, 0, 0});
  const PointCloud b = cluster_at(rng, {0.5, 0, 0});
  const Vec3 near_a{0.0, 0.0, 0.012};

  CHECK(compute_contacts({a, b}, hand_at(near_a, GripState::Open), 0.02)
            .empty());
  const ContactSet closed =
      compute_contacts({a, b}, hand_at(near_a, GripState::Closed), 0.02);
  CHECK(closed == ContactSet{ContactPair::hand(0)});
}

TEST_CASE("compute_contacts: matches brute force on random scenes") {
  Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<PointCloud> clouds;
    const int n = 3 + rng.uniform_int(3);
    for (int i = 0; i < n; ++i) {
      clouds.push_back(
          cluster_at(rng, testing::random_vec(rng, 0.05), 25, 0.008));
    }
    const double thresh = rng.uniform(0.005, 0.03);
    const HandObservation hand =
        hand_at(testing::random_vec(rng, 0.05),
                trial % 2 ? GripState::Closed : GripState::Open);

    const ContactSet got = compute_contacts(clouds, hand, thresh);

    ContactSet want;
    for (int i = 0; i < n; ++i) {
      for (int k = i + 1; k < n; ++k) {
        if (min_distance(clouds[i], clouds[k]) <= thresh) {
          want.insert(ContactPair::objects(i, k));
        }
      }
      if (hand.grip == GripState::Closed) {
        double d = std::numeric_limits<double>::infinity();
        for (const Vec3& p : clouds[i].points) {
          d = std::min(d, (p - hand.thumb_tip).norm());
          d = std::min(d, (p - hand.index_tip).norm());
        }
        if (d <= thresh) want.insert(ContactPair::hand(i));
      }
    }
    CHECK(got == want);
  }
}

TEST_CASE("compute_contacts: A-B touch, closed hand near C") {
  Rng rng(44);
  PointCloud a = cluster_at(rng, {-0.1, 0, 0});
  PointCloud b = cluster_at(rng, {0.1, 0, 0});
  a.points.push_back({-0.001, 0, 0});
  b.points.push_back({0.001, 0, 0});  // A-B gap 0.002
  const PointCloud c = cluster_at(rng, {0.5, 0.5, 0});

  // Hand 0.002 from cloud c: pick a point of c and hover just above it.
  const Vec3 probe = c.points[0] + Vec3{0, -0.004, 0.002};
  const ContactSet got =
      compute_contacts({a, b, c}, hand_at(probe, GripState::Closed), 0.01);
  CHECK(got.contains(ContactPair::objects(0, 1)));
  CHECK(got.contains(ContactPair::hand(2)));
  CHECK(got.size() == 2);
}

TEST_CASE("compute_contacts: monotone in threshold") {
  Rng rng(45);
  std::vector<PointCloud> clouds;
  for (int i = 0; i < 4; ++i) {
    clouds.push_back(cluster_at(rng, testing::random_vec(rng, 0.04)));
  }
  const HandObservation hand =
      hand_at(testing::random_vec(rng, 0.04), GripState::Closed);
  ContactSet prev;
  for (double thresh : {0.002, 0.01, 0.02, 0.05, 0.2}) {
    const ContactSet cur = compute_contacts(clouds, hand, thresh);
    CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    prev = cur;
  }
}

TEST_CASE("compute_contacts: permutation of the object list is isomorphic") {
  Rng rng(46);
  std::vector<PointCloud> clouds;
  for (int i = 0; i < 4; ++i) {
    clouds.push_back(cluster_at(rng, testing::random_vec(rng, 0.03)));
  }
  const HandObservation hand = hand_at({0, 0, 0.012}, GripState::Closed);
  const ContactSet base = compute_contacts(clouds, hand, 0.015);

  const std::vector<int> perm{2, 0, 3, 1};
  std::vector<PointCloud> shuffled(4);
  for (int i = 0; i < 4; ++i) shuffled[perm[i]] = clouds[i];
  const ContactSet permuted = compute_contacts(shuffled, hand, 0.015);

  ContactSet mapped;
  for (const ContactPair& p : base) {
    mapped.insert(p.is_hand()
                      ? ContactPair::hand(perm[p.a])
                      : ContactPair::objects(perm[p.a], perm[p.b]));
  }
  CHECK(permuted == mapped);
}

TEST_CASE("contact_set projects stored edges") {
  CHECK(contact_set(two_object_oog(false)).empty());
  CHECK(contact_set(two_object_oog(true)) ==
        ContactSet{ContactPair::objects(0, 1)});
  CHECK(contact_set(two_object_oog(true, true)) ==
        ContactSet{ContactPair::objects(0, 1), ContactPair::hand(2)});
}

TEST_CASE("contact_set round-trips compute_contacts output") {
  Rng rng(47);
  const std::vector<PointCloud> clouds{cluster_at(rng, {0, 0, 0}),
                                       cluster_at(rng, {0.005, 0, 0}),
                                       cluster_at(rng, {0.4, 0, 0})};
  const HandObservation hand = hand_at({0.4, 0, 0.01}, GripState::Closed);
  const ContactSet computed = compute_contacts(clouds, hand, 0.02);

  OOG g;
  for (int i = 0; i < 3; ++i) g.object_nodes.push_back({i, clouds[i]});
  g.hand_node = hand;
  for (int i = 0; i < 3; ++i) {
    for (int k = i + 1; k < 3; ++k) {
      g.object_object_edges.push_back(
          {i, k, computed.contains(ContactPair::objects(i, k))});
    }
    g.object_hand_edges.push_back({i, computed.contains(ContactPair::hand(i))});
  }
  CHECK(contact_set(g) == computed);
}

TEST_CASE("match_oog: retrieval and terminal states") {
  std::vector<OOG> plan(3);
  plan[0] = two_object_oog(false);
  plan[1] = two_object_oog(false, true);
  plan[2] = two_object_oog(true);

  const MatchResult m0 = match_oog(plan, {});
  CHECK(m0.status == MatchStatus::Matched);
  CHECK(m0.index == 0);

  const MatchResult m1 = match_oog(plan, {ContactPair::hand(2)});
  CHECK(m1.status == MatchStatus::Matched);
  CHECK(m1.index == 1);

  const MatchResult mf = match_oog(plan, {ContactPair::objects(0, 1)});
  CHECK(mf.status == MatchStatus::AtFinal);
  CHECK(mf.index == 2);

  const MatchResult none =
      match_oog(plan, {ContactPair::objects(1, 2)});
  CHECK(none.status == MatchStatus::NoMatch);
}

TEST_CASE("match_oog: ambiguous sets resolve to the smallest index") {
  std::vector<OOG> plan(4);
  plan[0] = two_object_oog(false);
  plan[1] = two_object_oog(true);
  plan[2] = two_object_oog(false);  // duplicate of G_0
  plan[3] = two_object_oog(true, true);

  const MatchResult m = match_oog(plan, {});
  CHECK(m.status == MatchStatus::Matched);
  CHECK(m.index == 0);
  CHECK(m.ambiguous);
}
