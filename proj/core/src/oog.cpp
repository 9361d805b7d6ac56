#include "oog/oog.hpp"

#include <algorithm>

#include "oog/errors.hpp"
#include "spatial_grid.hpp"

namespace oog {

namespace {

bool clouds_touch(const PointCloud& a, const PointCloud& b, double thresh) {
  // Grid over the larger cloud, probe with the smaller one.
  const PointCloud& big = a.size() >= b.size() ? a : b;
  const PointCloud& small = a.size() >= b.size() ? b : a;
  const detail::SpatialGrid grid(big.points, thresh);
  for (const Vec3& p : small.points) {
    if (grid.any_within(p, thresh)) return true;
  }
  return false;
}

bool hand_touches(const PointCloud& cloud, const HandObservation& hand,
                  double thresh) {
  if (hand.grip != GripState::Closed) return false;
  const detail::SpatialGrid grid(cloud.points, thresh);
  return grid.any_within(hand.thumb_tip, thresh) ||
         grid.any_within(hand.index_tip, thresh);
}

}  // namespace

ContactSet compute_contacts(const std::vector<ObjectNode>& objects,
                            const HandObservation& hand,
                            double contact_thresh) {
  if (!(contact_thresh > 0.0)) throw Error("contact_thresh must be > 0");
  for (const ObjectNode& node : objects) {
    if (node.cloud.empty()) throw Error("contact check on empty cloud");
  }
  ContactSet out;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    for (std::size_t k = i + 1; k < objects.size(); ++k) {
      if (clouds_touch(objects[i].cloud, objects[k].cloud, contact_thresh)) {
        out.insert(
            ContactPair::objects(objects[i].object_id, objects[k].object_id));
      }
    }
    if (hand_touches(objects[i].cloud, hand, contact_thresh)) {
      out.insert(ContactPair::hand(objects[i].object_id));
    }
  }
  return out;
}

ContactSet compute_contacts(const std::vector<PointCloud>& objects,
                            const HandObservation& hand,
                            double contact_thresh) {
  std::vector<ObjectNode> nodes(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    nodes[i].object_id = static_cast<int>(i);
    nodes[i].cloud = objects[i];
  }
  return compute_contacts(nodes, hand, contact_thresh);
}

ContactSet contact_set(const OOG& g) {
  ContactSet out;
  for (const ObjectObjectEdge& e : g.object_object_edges) {
    if (e.contact) out.insert(ContactPair::objects(e.a, e.b));
  }
  for (const ObjectHandEdge& e : g.object_hand_edges) {
    if (e.contact) out.insert(ContactPair::hand(e.object_id));
  }
  return out;
}

MatchResult match_oog(const std::vector<OOG>& plan, const ContactSet& observed) {
  if (plan.empty()) throw Error("match_oog on empty plan");
  MatchResult result;
  for (std::size_t f = 0; f < plan.size(); ++f) {
    if (contact_set(plan[f]) == observed) {
      if (result.index < 0) {
        result.index = static_cast<int>(f);
        result.status = (f + 1 == plan.size()) ? MatchStatus::AtFinal
                                               : MatchStatus::Matched;
      } else {
        result.ambiguous = true;
      }
    }
  }
  return result;
}

}  // namespace oog
