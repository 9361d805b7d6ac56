#include "oog/recording.hpp"

#include <algorithm>
#include <numeric>

#include "oog/errors.hpp"

namespace oog {

namespace {

std::string at(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

}  // namespace

void validate(const Recording& rec) {
  if (rec.version != "1.0") {
    throw VersionError("unsupported recording version: " + rec.version);
  }
  if (!(rec.fps > 0.0)) throw SchemaError("fps must be > 0", "fps");
  if (rec.frames.size() < 2) {
    throw SchemaError("recording needs at least 2 frames", "frames");
  }
  if (rec.object_names.empty()) {
    throw SchemaError("object_names must be non-empty", "object_names");
  }
  const std::size_t n_obj = rec.object_names.size();
  for (std::size_t f = 0; f < rec.frames.size(); ++f) {
    const Frame& frame = rec.frames[f];
    const std::string base = at("frames", f);
    if (frame.objects.size() != n_obj) {
      throw SchemaError("frame must observe every object exactly once",
                        base + ".objects");
    }
    std::vector<bool> seen(n_obj, false);
    for (std::size_t k = 0; k < frame.objects.size(); ++k) {
      const ObjectObservation& obs = frame.objects[k];
      const std::string path = at(base + ".objects", k);
      if (obs.object_id < 0 || obs.object_id >= static_cast<int>(n_obj)) {
        throw SchemaError("object_id out of range", path + ".object_id");
      }
      if (seen[obs.object_id]) {
        throw SchemaError("duplicate object_id in frame", path + ".object_id");
      }
      seen[obs.object_id] = true;
      if (obs.cloud.empty()) {
        throw SchemaError("object cloud must be non-empty", path + ".points");
      }
      for (std::size_t p = 0; p < obs.cloud.points.size(); ++p) {
        if (!obs.cloud.points[p].finite()) {
          throw SchemaError("non-finite point", at(path + ".points", p));
        }
      }
      if (obs.cloud.colors &&
          obs.cloud.colors->size() != obs.cloud.points.size()) {
        throw SchemaError("colors length must equal points length",
                          path + ".colors");
      }
    }
    if (!frame.hand.thumb_tip.finite() || !frame.hand.index_tip.finite()) {
      throw SchemaError("non-finite fingertip", base + ".hand");
    }
  }
  for (std::size_t k = 0; k < rec.keypoint_tracks.size(); ++k) {
    const KeypointTrack& track = rec.keypoint_tracks[k];
    const std::string path = at("keypoint_tracks", k);
    if (track.object_id < 0 || track.object_id >= static_cast<int>(n_obj)) {
      throw SchemaError("object_id out of range", path + ".object_id");
    }
    if (track.trajectory.size() != rec.frames.size()) {
      throw SchemaError("track length must equal frame count",
                        path + ".positions");
    }
    if (track.trajectory.occluded.size() != track.trajectory.positions.size()) {
      throw SchemaError("positions and occluded must have equal length",
                        path + ".positions");
    }
    if (!track.trajectory.has_visible()) {
      throw SchemaError("track has no visible sample", path + ".positions");
    }
    for (std::size_t t = 0; t < track.trajectory.size(); ++t) {
      if (track.trajectory.visible(t) &&
          !track.trajectory.positions[t].finite()) {
        throw SchemaError("non-finite keypoint position",
                          at(path + ".positions", t));
      }
    }
  }
  for (std::size_t p = 0; p < rec.table_points.size(); ++p) {
    if (!rec.table_points[p].finite()) {
      throw SchemaError("non-finite table point", at("table_points", p));
    }
  }
}

Recording table_align(const Recording& rec, const TableAlignParams& params) {
  validate(rec);

  PointCloud table;
  if (!rec.table_points.empty()) {
    table.points = rec.table_points;
  } else {
    // Fallback: objects rest on the table, so the lowest-z decile of the
    // frame-0 object points is a usable table proxy.
    std::vector<Vec3> all;
    for (const ObjectObservation& obs : rec.frames.front().objects) {
      all.insert(all.end(), obs.cloud.points.begin(), obs.cloud.points.end());
    }
    std::sort(all.begin(), all.end(),
              [](const Vec3& a, const Vec3& b) { return a.z < b.z; });
    std::size_t keep = std::max<std::size_t>(
        3, static_cast<std::size_t>(params.fallback_decile *
                                    static_cast<double>(all.size())));
    keep = std::min(keep, all.size());
    table.points.assign(all.begin(), all.begin() + keep);
  }
  if (table.size() < 3) {
    throw TooFewPoints("table alignment needs at least 3 table points");
  }

  const PlaneFitResult fit = fit_plane_ransac(table, params.dist_thresh,
                                              params.iterations, params.seed);
  const Pose t = plane_alignment_transform(fit.model);

  Recording out = rec;
  for (Vec3& p : out.table_points) p = apply(t, p);
  for (Frame& frame : out.frames) {
    for (ObjectObservation& obs : frame.objects) {
      for (Vec3& p : obs.cloud.points) p = apply(t, p);
    }
    frame.hand.thumb_tip = apply(t, frame.hand.thumb_tip);
    frame.hand.index_tip = apply(t, frame.hand.index_tip);
  }
  for (KeypointTrack& track : out.keypoint_tracks) {
    for (Vec3& p : track.trajectory.positions) p = apply(t, p);
  }
  return out;
}

}  // namespace oog
