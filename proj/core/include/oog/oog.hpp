#pragma once

#include <set>
#include <vector>

#include "oog/geometry.hpp"
#include "oog/recording.hpp"
#include "oog/trajectory.hpp"

namespace oog {

// ============================================================================
// Open-world Object Graph: one keyframe state of a manipulation plan.
// Object nodes carry point clouds, the hand node fingertip locations and
// grip status, point nodes the keypoint trajectories of the segment that
// starts at this keyframe. Object/hand nodes are fully connected with
// binary contact edges; point nodes belong to their object via object_id.
// ============================================================================

struct ObjectNode {
  int object_id = 0;
  PointCloud cloud;
};

struct PointNode {
  int object_id = 0;
  /// Trajectory over [t_f, t_{f+1}] (inclusive); empty for the final OOG.
  KeypointTrajectory trajectory;
};

struct ObjectObjectEdge {
  int a = 0;
  int b = 0;  // object ids, a < b
  bool contact = false;
};

struct ObjectHandEdge {
  int object_id = 0;
  bool contact = false;
};

struct OOG {
  int keyframe_index = 0;  // frame index in the source recording
  double fps = 0.0;
  std::vector<ObjectNode> object_nodes;
  HandObservation hand_node;
  std::vector<PointNode> point_nodes;
  std::vector<ObjectObjectEdge> object_object_edges;  // every unordered pair
  std::vector<ObjectHandEdge> object_hand_edges;      // every object
};

// ============================================================================
// Contact sets
// ============================================================================

/// One satisfied contact relation: Obj(a)-Obj(b) with a < b, or Obj(a)-Hand
/// encoded as b == kHand.
struct ContactPair {
  static constexpr int kHand = -1;

  int a = 0;
  int b = kHand;

  static ContactPair objects(int i, int k) {
    return i < k ? ContactPair{i, k} : ContactPair{k, i};
  }
  static ContactPair hand(int i) { return ContactPair{i, kHand}; }

  bool is_hand() const { return b == kHand; }
  bool involves(int object_id) const { return a == object_id || b == object_id; }

  friend bool operator==(const ContactPair&, const ContactPair&) = default;
  friend auto operator<=>(const ContactPair&, const ContactPair&) = default;
};

using ContactSet = std::set<ContactPair>;

/// Contact relations from raw geometry: Obj(i)-Obj(k) iff the minimum
/// pairwise point distance is <= thresh; Obj(i)-Hand iff either fingertip is
/// within thresh of cloud i AND the grip is closed. Exact (the internal
/// spatial grid only accelerates).
ContactSet compute_contacts(const std::vector<PointCloud>& objects,
                            const HandObservation& hand, double contact_thresh);

/// Variant taking (object_id, cloud) pairs so ids need not be dense/ordered.
ContactSet compute_contacts(const std::vector<ObjectNode>& objects,
                            const HandObservation& hand, double contact_thresh);

/// The edges flagged contact=true, canonicalized.
ContactSet contact_set(const OOG& g);

// ============================================================================
// Plan retrieval
// ============================================================================

enum class MatchStatus {
  Matched,  ///< index is the smallest f with contact_set(G_f) == observed
  AtFinal,  ///< observed matches the final OOG: task complete
  NoMatch,  ///< no plan OOG has the observed contact set
};

struct MatchResult {
  MatchStatus status = MatchStatus::NoMatch;
  int index = -1;
  /// True when more than one keyframe shares the observed contact set.
  bool ambiguous = false;
};

/// Retrieves the smallest f with contact_set(plan[f]) == observed. A match
/// at the final OOG reports AtFinal (there is no next keyframe to execute
/// toward). An ambiguous match keeps the smallest index and sets the flag.
MatchResult match_oog(const std::vector<OOG>& plan, const ContactSet& observed);

}  // namespace oog
