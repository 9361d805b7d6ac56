#include "oog/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oog/errors.hpp"

namespace oog {

using nlohmann::json;

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

// ============================================================================
// Emitter helpers
// ============================================================================

namespace {

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void append_vec3(std::string& out, const Vec3& v) {
  out += '[';
  out += format_double(v.x);
  out += ',';
  out += format_double(v.y);
  out += ',';
  out += format_double(v.z);
  out += ']';
}

void append_cloud(std::string& out, const PointCloud& cloud) {
  out += "\"points\":[";
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (i) out += ',';
    append_vec3(out, cloud.points[i]);
  }
  out += ']';
  if (cloud.colors) {
    out += ",\"colors\":[";
    for (std::size_t i = 0; i < cloud.colors->size(); ++i) {
      if (i) out += ',';
      const Rgb& c = (*cloud.colors)[i];
      out += '[';
      out += format_double(c.r);
      out += ',';
      out += format_double(c.g);
      out += ',';
      out += format_double(c.b);
      out += ']';
    }
    out += ']';
  }
}

void append_hand(std::string& out, const HandObservation& hand) {
  out += "{\"thumb_tip\":";
  append_vec3(out, hand.thumb_tip);
  out += ",\"index_tip\":";
  append_vec3(out, hand.index_tip);
  out += ",\"grip\":";
  out += hand.grip == GripState::Closed ? "\"closed\"" : "\"open\"";
  out += '}';
}

void append_trajectory(std::string& out, const KeypointTrajectory& traj) {
  out += "\"positions\":[";
  for (std::size_t t = 0; t < traj.size(); ++t) {
    if (t) out += ',';
    if (traj.occluded[t]) {
      out += "null";
    } else {
      append_vec3(out, traj.positions[t]);
    }
  }
  out += ']';
}

// ============================================================================
// Parser helpers (path-tracked)
// ============================================================================

const json& require(const json& j, const char* key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError(std::string("missing field '") + key + "'", path);
  }
  return *it;
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError("expected a number", path);
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError("expected an integer", path);
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError("expected a string", path);
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError("expected an array", path);
  return j;
}

Vec3 as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) {
    throw SchemaError("expected [x, y, z]", path);
  }
  return {as_double(j[0], path), as_double(j[1], path), as_double(j[2], path)};
}

GripState as_grip(const json& j, const std::string& path) {
  const std::string s = as_string(j, path);
  if (s == "open") return GripState::Open;
  if (s == "closed") return GripState::Closed;
  throw SchemaError("grip must be \"open\" or \"closed\"", path);
}

PointCloud parse_cloud(const json& j, const std::string& path) {
  PointCloud cloud;
  const json& pts = as_array(require(j, "points", path), path + ".points");
  cloud.points.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cloud.points.push_back(
        as_vec3(pts[i], path + ".points[" + std::to_string(i) + "]"));
  }
  if (j.contains("colors")) {
    const json& cols = as_array(j["colors"], path + ".colors");
    std::vector<Rgb> colors;
    colors.reserve(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string cp = path + ".colors[" + std::to_string(i) + "]";
      if (!cols[i].is_array() || cols[i].size() != 3) {
        throw SchemaError("expected [r, g, b]", cp);
      }
      colors.push_back({as_double(cols[i][0], cp), as_double(cols[i][1], cp),
                        as_double(cols[i][2], cp)});
    }
    cloud.colors = std::move(colors);
  }
  return cloud;
}

HandObservation parse_hand(const json& j, const std::string& path) {
  HandObservation hand;
  hand.thumb_tip = as_vec3(require(j, "thumb_tip", path), path + ".thumb_tip");
  hand.index_tip = as_vec3(require(j, "index_tip", path), path + ".index_tip");
  hand.grip = as_grip(require(j, "grip", path), path + ".grip");
  return hand;
}

KeypointTrajectory parse_trajectory(const json& j, const std::string& path) {
  KeypointTrajectory traj;
  const json& arr = as_array(j, path);
  traj.positions.reserve(arr.size());
  traj.occluded.reserve(arr.size());
  for (std::size_t t = 0; t < arr.size(); ++t) {
    if (arr[t].is_null()) {
      traj.positions.push_back({});
      traj.occluded.push_back(true);
    } else {
      traj.positions.push_back(
          as_vec3(arr[t], path + "[" + std::to_string(t) + "]"));
      traj.occluded.push_back(false);
    }
  }
  return traj;
}

json parse_root(const std::string& text) {
  json root = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) throw ParseError("malformed JSON");
  if (!root.is_object()) throw ParseError("top level must be a JSON object");
  return root;
}

}  // namespace

// ============================================================================
// Recording
// ============================================================================

std::string serialize_recording(const Recording& rec) {
  std::string out;
  out.reserve(1 << 20);
  out += "{\"version\":";
  append_escaped(out, rec.version);
  out += ",\"fps\":";
  out += format_double(rec.fps);
  out += ",\"object_names\":[";
  for (std::size_t i = 0; i < rec.object_names.size(); ++i) {
    if (i) out += ',';
    append_escaped(out, rec.object_names[i]);
  }
  out += ']';
  if (!rec.table_points.empty()) {
    out += ",\"table_points\":[";
    for (std::size_t i = 0; i < rec.table_points.size(); ++i) {
      if (i) out += ',';
      append_vec3(out, rec.table_points[i]);
    }
    out += ']';
  }
  out += ",\"frames\":[";
  for (std::size_t f = 0; f < rec.frames.size(); ++f) {
    const Frame& frame = rec.frames[f];
    if (f) out += ',';
    out += "\n{\"index\":";
    out += std::to_string(frame.index);
    out += ",\"objects\":[";
    for (std::size_t k = 0; k < frame.objects.size(); ++k) {
      if (k) out += ',';
      out += "{\"object_id\":";
      out += std::to_string(frame.objects[k].object_id);
      out += ',';
      append_cloud(out, frame.objects[k].cloud);
      out += '}';
    }
    out += "],\"hand\":";
    append_hand(out, frame.hand);
    out += '}';
  }
  out += "],\"keypoint_tracks\":[";
  for (std::size_t k = 0; k < rec.keypoint_tracks.size(); ++k) {
    if (k) out += ',';
    out += "\n{\"object_id\":";
    out += std::to_string(rec.keypoint_tracks[k].object_id);
    out += ',';
    append_trajectory(out, rec.keypoint_tracks[k].trajectory);
    out += '}';
  }
  out += "]}\n";
  return out;
}

Recording load_recording(const std::string& text) {
  const json root = parse_root(text);

  Recording rec;
  rec.version = as_string(require(root, "version", ""), "version");
  if (rec.version != "1.0") {
    throw VersionError("unsupported recording version: " + rec.version);
  }
  rec.fps = as_double(require(root, "fps", ""), "fps");

  const json& names = as_array(require(root, "object_names", ""),
                               "object_names");
  for (std::size_t i = 0; i < names.size(); ++i) {
    rec.object_names.push_back(
        as_string(names[i], "object_names[" + std::to_string(i) + "]"));
  }

  if (root.contains("table_points")) {
    const json& pts = as_array(root["table_points"], "table_points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      rec.table_points.push_back(
          as_vec3(pts[i], "table_points[" + std::to_string(i) + "]"));
    }
  }

  const json& frames = as_array(require(root, "frames", ""), "frames");
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::string fp = "frames[" + std::to_string(f) + "]";
    const json& jf = frames[f];
    if (!jf.is_object()) throw SchemaError("expected a frame object", fp);
    Frame frame;
    frame.index = as_int(require(jf, "index", fp), fp + ".index");
    const json& objs = as_array(require(jf, "objects", fp), fp + ".objects");
    for (std::size_t k = 0; k < objs.size(); ++k) {
      const std::string op = fp + ".objects[" + std::to_string(k) + "]";
      ObjectObservation obs;
      obs.object_id = as_int(require(objs[k], "object_id", op),
                             op + ".object_id");
      obs.cloud = parse_cloud(objs[k], op);
      frame.objects.push_back(std::move(obs));
    }
    frame.hand = parse_hand(require(jf, "hand", fp), fp + ".hand");
    rec.frames.push_back(std::move(frame));
  }

  const json& tracks = as_array(require(root, "keypoint_tracks", ""),
                                "keypoint_tracks");
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    const std::string tp = "keypoint_tracks[" + std::to_string(k) + "]";
    KeypointTrack track;
    track.object_id = as_int(require(tracks[k], "object_id", tp),
                             tp + ".object_id");
    track.trajectory = parse_trajectory(require(tracks[k], "positions", tp),
                                        tp + ".positions");
    rec.keypoint_tracks.push_back(std::move(track));
  }

  validate(rec);
  return rec;
}

Recording load_recording_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_recording(buffer.str());
}

void save_recording_file(const Recording& rec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << serialize_recording(rec);
}

// ============================================================================
// Plan
// ============================================================================

std::string serialize_plan(const ManipulationPlan& plan,
                           const PlanDiagnostics& diag) {
  std::string out;
  out.reserve(1 << 20);
  out += "{\"version\":\"1.0\",\"fps\":";
  out += format_double(plan.fps);
  out += ",\"frame_count\":";
  out += std::to_string(plan.frame_count);
  out += ",\"object_names\":[";
  for (std::size_t i = 0; i < plan.object_names.size(); ++i) {
    if (i) out += ',';
    append_escaped(out, plan.object_names[i]);
  }
  out += "],\"keyframes\":[";
  for (std::size_t i = 0; i < plan.keyframes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(plan.keyframes[i]);
  }
  out += "],\"segments\":[";
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    if (i) out += ',';
    out += "{\"target\":";
    out += plan.segments[i].target_object
               ? std::to_string(*plan.segments[i].target_object)
               : "null";
    out += ",\"reference\":";
    out += plan.segments[i].reference_object
               ? std::to_string(*plan.segments[i].reference_object)
               : "null";
    out += '}';
  }
  out += "],\"oogs\":[";
  for (std::size_t f = 0; f < plan.oogs.size(); ++f) {
    const OOG& g = plan.oogs[f];
    if (f) out += ',';
    out += "\n{\"keyframe_index\":";
    out += std::to_string(g.keyframe_index);
    out += ",\"object_nodes\":[";
    for (std::size_t i = 0; i < g.object_nodes.size(); ++i) {
      if (i) out += ',';
      out += "{\"object_id\":";
      out += std::to_string(g.object_nodes[i].object_id);
      out += ',';
      append_cloud(out, g.object_nodes[i].cloud);
      out += '}';
    }
    out += "],\"hand_node\":";
    append_hand(out, g.hand_node);
    out += ",\"point_nodes\":[";
    for (std::size_t i = 0; i < g.point_nodes.size(); ++i) {
      if (i) out += ',';
      out += "{\"object_id\":";
      out += std::to_string(g.point_nodes[i].object_id);
      out += ',';
      append_trajectory(out, g.point_nodes[i].trajectory);
      out += '}';
    }
    out += "],\"object_object_edges\":[";
    for (std::size_t i = 0; i < g.object_object_edges.size(); ++i) {
      const ObjectObjectEdge& e = g.object_object_edges[i];
      if (i) out += ',';
      out += '[';
      out += std::to_string(e.a);
      out += ',';
      out += std::to_string(e.b);
      out += ',';
      out += e.contact ? "true" : "false";
      out += ']';
    }
    out += "],\"object_hand_edges\":[";
    for (std::size_t i = 0; i < g.object_hand_edges.size(); ++i) {
      const ObjectHandEdge& e = g.object_hand_edges[i];
      if (i) out += ',';
      out += '[';
      out += std::to_string(e.object_id);
      out += ',';
      out += e.contact ? "true" : "false";
      out += ']';
    }
    out += "]}";
  }
  out += "],\n\"diagnostics\":{\"velocity_series\":[";
  for (std::size_t i = 0; i < diag.velocity_series.size(); ++i) {
    if (i) out += ',';
    out += format_double(diag.velocity_series[i]);
  }
  out += "],\"velocity_series_smoothed\":[";
  for (std::size_t i = 0; i < diag.velocity_series_smoothed.size(); ++i) {
    if (i) out += ',';
    out += format_double(diag.velocity_series_smoothed[i]);
  }
  out += "],\"changepoints\":[";
  for (std::size_t i = 0; i < diag.changepoints.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(diag.changepoints[i]);
  }
  out += "],\"merged_keyframes\":[";
  for (std::size_t i = 0; i < diag.merged_keyframes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(diag.merged_keyframes[i]);
  }
  out += "],\"warnings\":[";
  for (std::size_t i = 0; i < diag.warnings.size(); ++i) {
    if (i) out += ',';
    append_escaped(out, diag.warnings[i]);
  }
  out += "]}}\n";
  return out;
}

LoadedPlan load_plan(const std::string& text) {
  const json root = parse_root(text);

  const std::string version = as_string(require(root, "version", ""),
                                        "version");
  if (version != "1.0") {
    throw VersionError("unsupported plan version: " + version);
  }

  LoadedPlan loaded;
  ManipulationPlan& plan = loaded.plan;
  plan.fps = as_double(require(root, "fps", ""), "fps");
  plan.frame_count = as_int(require(root, "frame_count", ""), "frame_count");

  const json& names = as_array(require(root, "object_names", ""),
                               "object_names");
  for (std::size_t i = 0; i < names.size(); ++i) {
    plan.object_names.push_back(
        as_string(names[i], "object_names[" + std::to_string(i) + "]"));
  }
  const json& kfs = as_array(require(root, "keyframes", ""), "keyframes");
  for (std::size_t i = 0; i < kfs.size(); ++i) {
    plan.keyframes.push_back(
        as_int(kfs[i], "keyframes[" + std::to_string(i) + "]"));
  }
  const json& segs = as_array(require(root, "segments", ""), "segments");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string sp = "segments[" + std::to_string(i) + "]";
    SegmentRoles roles;
    const json& jt = require(segs[i], "target", sp);
    if (!jt.is_null()) roles.target_object = as_int(jt, sp + ".target");
    const json& jr = require(segs[i], "reference", sp);
    if (!jr.is_null()) roles.reference_object = as_int(jr, sp + ".reference");
    plan.segments.push_back(roles);
  }

  const json& oogs = as_array(require(root, "oogs", ""), "oogs");
  for (std::size_t f = 0; f < oogs.size(); ++f) {
    const std::string gp = "oogs[" + std::to_string(f) + "]";
    const json& jg = oogs[f];
    if (!jg.is_object()) throw SchemaError("expected an OOG object", gp);
    OOG g;
    g.fps = plan.fps;
    g.keyframe_index = as_int(require(jg, "keyframe_index", gp),
                              gp + ".keyframe_index");
    const json& nodes = as_array(require(jg, "object_nodes", gp),
                                 gp + ".object_nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::string np = gp + ".object_nodes[" + std::to_string(i) + "]";
      ObjectNode node;
      node.object_id = as_int(require(nodes[i], "object_id", np),
                              np + ".object_id");
      node.cloud = parse_cloud(nodes[i], np);
      g.object_nodes.push_back(std::move(node));
    }
    g.hand_node = parse_hand(require(jg, "hand_node", gp), gp + ".hand_node");
    const json& pnodes = as_array(require(jg, "point_nodes", gp),
                                  gp + ".point_nodes");
    for (std::size_t i = 0; i < pnodes.size(); ++i) {
      const std::string np = gp + ".point_nodes[" + std::to_string(i) + "]";
      PointNode node;
      node.object_id = as_int(require(pnodes[i], "object_id", np),
                              np + ".object_id");
      node.trajectory = parse_trajectory(require(pnodes[i], "positions", np),
                                         np + ".positions");
      g.point_nodes.push_back(std::move(node));
    }
    const json& ooe = as_array(require(jg, "object_object_edges", gp),
                               gp + ".object_object_edges");
    for (std::size_t i = 0; i < ooe.size(); ++i) {
      const std::string ep =
          gp + ".object_object_edges[" + std::to_string(i) + "]";
      if (!ooe[i].is_array() || ooe[i].size() != 3 || !ooe[i][2].is_boolean()) {
        throw SchemaError("expected [a, b, contact]", ep);
      }
      g.object_object_edges.push_back({as_int(ooe[i][0], ep),
                                       as_int(ooe[i][1], ep),
                                       ooe[i][2].get<bool>()});
    }
    const json& ohe = as_array(require(jg, "object_hand_edges", gp),
                               gp + ".object_hand_edges");
    for (std::size_t i = 0; i < ohe.size(); ++i) {
      const std::string ep =
          gp + ".object_hand_edges[" + std::to_string(i) + "]";
      if (!ohe[i].is_array() || ohe[i].size() != 2 || !ohe[i][1].is_boolean()) {
        throw SchemaError("expected [object_id, contact]", ep);
      }
      g.object_hand_edges.push_back(
          {as_int(ohe[i][0], ep), ohe[i][1].get<bool>()});
    }
    plan.oogs.push_back(std::move(g));
  }

  if (root.contains("diagnostics")) {
    const json& jd = root["diagnostics"];
    PlanDiagnostics& diag = loaded.diagnostics;
    if (jd.contains("velocity_series")) {
      for (const json& v : jd["velocity_series"]) {
        diag.velocity_series.push_back(
            as_double(v, "diagnostics.velocity_series"));
      }
    }
    if (jd.contains("velocity_series_smoothed")) {
      for (const json& v : jd["velocity_series_smoothed"]) {
        diag.velocity_series_smoothed.push_back(
            as_double(v, "diagnostics.velocity_series_smoothed"));
      }
    }
    if (jd.contains("changepoints")) {
      for (const json& v : jd["changepoints"]) {
        diag.changepoints.push_back(as_int(v, "diagnostics.changepoints"));
      }
    }
    if (jd.contains("merged_keyframes")) {
      for (const json& v : jd["merged_keyframes"]) {
        diag.merged_keyframes.push_back(
            as_int(v, "diagnostics.merged_keyframes"));
      }
    }
    if (jd.contains("warnings")) {
      for (const json& v : jd["warnings"]) {
        diag.warnings.push_back(as_string(v, "diagnostics.warnings"));
      }
    }
  }

  validate(plan);
  return loaded;
}

LoadedPlan load_plan_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_plan(buffer.str());
}

void save_plan_file(const ManipulationPlan& plan,
                    const PlanDiagnostics& diagnostics,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << serialize_plan(plan, diagnostics);
}

}  // namespace oog
