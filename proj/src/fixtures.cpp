#include "geodepth/fixtures.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "geodepth/analysis.hpp"
#include "geodepth/box_geometry.hpp"
#include "geodepth/camera.hpp"
#include "geodepth/depth_formula.hpp"
#include "geodepth/errors.hpp"
#include "geodepth/eval_depth.hpp"
#include "geodepth/eval_detection.hpp"
#include "geodepth/kitti_io.hpp"
#include "geodepth/losses.hpp"
#include "geodepth/util.hpp"

namespace geodepth {
namespace {

using json = nlohmann::ordered_json;

// --- input decoding helpers ---------------------------------------------

CameraIntrinsics decode_camera(const json& j) {
  CameraIntrinsics cam;
  cam.f_u = j.at("f_u").get<double>();
  cam.f_v = j.at("f_v").get<double>();
  cam.c_u = j.at("c_u").get<double>();
  cam.c_v = j.at("c_v").get<double>();
  if (j.contains("t_proj")) {
    const auto& t = j.at("t_proj");
    cam.t_proj << t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>();
  }
  return cam;
}

Eigen::Vector3d decode_vec3(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

Box3D decode_box(const json& j) {
  return Box3D(j.at("W").get<double>(), j.at("H").get<double>(), j.at("L").get<double>(),
               decode_vec3(j.at("center")), j.at("r_y").get<double>());
}

std::vector<LabelRecord> decode_labels(const json& lines) {
  std::vector<LabelRecord> out;
  int n = 0;
  for (const auto& line : lines) {
    out.push_back(parse_label_line(line.get<std::string>(), ++n));
  }
  return out;
}

std::vector<double> decode_grid(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  return uniform_grid(j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("points").get<int>());
}

EvalConfig decode_eval_config(const json& j) {
  EvalConfig cfg;
  if (j.contains("iou_threshold")) cfg.iou_threshold = j.at("iou_threshold").get<double>();
  if (j.contains("recall_positions")) cfg.recall_positions = j.at("recall_positions").get<int>();
  if (j.contains("category")) cfg.category = j.at("category").get<std::string>();
  if (j.contains("difficulty")) {
    const std::string d = j.at("difficulty").get<std::string>();
    if (d == "easy") {
      cfg.difficulty = Difficulty::easy;
    } else if (d == "moderate") {
      cfg.difficulty = Difficulty::moderate;
    } else if (d == "hard") {
      cfg.difficulty = Difficulty::hard;
    } else {
      throw std::invalid_argument(msg("fixture: unknown difficulty '", d, "'"));
    }
  }
  if (j.contains("task")) {
    const std::string t = j.at("task").get<std::string>();
    if (t == "2d") {
      cfg.task = EvalTask::detection2d;
    } else if (t == "bev") {
      cfg.task = EvalTask::bev;
    } else if (t == "3d") {
      cfg.task = EvalTask::detection3d;
    } else {
      throw std::invalid_argument(msg("fixture: unknown task '", t, "'"));
    }
  }
  return cfg;
}

SyntheticSceneSpec decode_scene_spec(const json& j) {
  SyntheticSceneSpec spec;
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("boxes_per_frame")) spec.boxes_per_frame = j.at("boxes_per_frame").get<int>();
  if (j.contains("z_range")) spec.z_range = {j.at("z_range").at(0), j.at("z_range").at(1)};
  if (j.contains("x_range")) spec.x_range = {j.at("x_range").at(0), j.at("x_range").at(1)};
  if (j.contains("yaw_range")) spec.yaw_range = {j.at("yaw_range").at(0), j.at("yaw_range").at(1)};
  if (j.contains("camera")) spec.camera = decode_camera(j.at("camera"));
  if (j.contains("image_width")) spec.image_width = j.at("image_width").get<int>();
  if (j.contains("image_height")) spec.image_height = j.at("image_height").get<int>();
  if (j.contains("category")) spec.category = j.at("category").get<std::string>();
  return spec;
}

std::vector<Frame> decode_frames(const json& j) {
  std::vector<Frame> frames;
  int id = 0;
  for (const auto& f : j) {
    Frame frame;
    frame.id = f.contains("id") ? f.at("id").get<int>() : id;
    frame.labels = decode_labels(f.at("labels"));
    frame.calib = parse_calib_text(f.at("calib_text").get<std::string>(),
                                   f.contains("reference_key") ? f.at("reference_key").get<std::string>() : "P2");
    frames.push_back(std::move(frame));
    ++id;
  }
  return frames;
}

// --- output encoding helpers --------------------------------------------

json encode_label(const LabelRecord& r) {
  json j{{"category", r.category}, {"truncation", r.truncation}, {"occlusion", r.occlusion},
         {"alpha", r.alpha},       {"left", r.left},             {"top", r.top},
         {"right", r.right},       {"bottom", r.bottom},         {"dim_h", r.dim_h},
         {"dim_w", r.dim_w},       {"dim_l", r.dim_l},           {"x", r.x},
         {"y", r.y},               {"z", r.z},                   {"rotation_y", r.rotation_y},
         {"ignorable", r.ignorable()}};
  if (r.score) j["score"] = *r.score;
  return j;
}

json encode_corner_matrix(const Eigen::Matrix<double, 3, 8>& m) {
  json out = json::array();
  for (int k = 0; k < 8; ++k) {
    out.push_back(json::array({m(0, k), m(1, k), m(2, k)}));
  }
  return out;
}

json encode_stats(const DepthErrorStats& s) {
  return json{{"range_lo", s.range_lo},
              {"range_hi", std::isfinite(s.range_hi) ? json(s.range_hi) : json(nullptr)},
              {"count", s.count},
              {"silog", s.silog},
              {"abs_rel", s.abs_rel},
              {"sq_rel", s.sq_rel},
              {"irmse", s.irmse}};
}

/// Scratch directory for fixtures that exercise real file I/O.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<unsigned> counter{0};
    path = std::filesystem::temp_directory_path() /
           msg("geodepth-fixture-", static_cast<unsigned long>(::getpid()), "-", counter++);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

// --- the evaluator -------------------------------------------------------

json evaluate_op(const std::string& op, const json& in);

json evaluate_meta_fixtures(const json& in) {
  int passed = 0;
  int failed = 0;
  for (const auto& f : in.at("fixtures")) {
    GoldenFixture fix;
    fix.name = f.at("name").get<std::string>();
    fix.op = f.at("op").get<std::string>();
    fix.input = f.at("input");
    fix.expected = f.at("expected");
    if (f.contains("tolerance")) fix.tolerance = f.at("tolerance").get<double>();
    (verify_fixture(fix).pass ? passed : failed)++;
  }
  return json{{"passed", passed}, {"failed", failed}};
}

json evaluate_op(const std::string& op, const json& in) {
  if (op == "project_point") {
    const auto q = project_point(decode_camera(in.at("camera")), decode_vec3(in.at("point")));
    return json{{"u", q.u}, {"v", q.v}, {"z", q.z}};
  }
  if (op == "backproject_pixel") {
    const auto p = backproject_pixel(decode_camera(in.at("camera")), in.at("u").get<double>(),
                                     in.at("v").get<double>(), in.at("z").get<double>());
    return json::array({p.x(), p.y(), p.z()});
  }
  if (op == "backproject_depth_map") {
    DepthMap depth(in.at("rows").get<int>(), in.at("cols").get<int>());
    const auto& values = in.at("depths");
    for (std::size_t i = 0; i < values.size(); ++i) {
      depth.depths[i] = values[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : values[i].get<double>();
    }
    const PointMap points = backproject_depth_map(decode_camera(in.at("camera")), depth);
    json out = json::array();
    for (int r = 0; r < points.rows; ++r) {
      for (int c = 0; c < points.cols; ++c) {
        if (points.valid(r, c)) {
          const auto& p = points.at(r, c);
          out.push_back(json::array({p.x(), p.y(), p.z()}));
        } else {
          out.push_back(nullptr);
        }
      }
    }
    return json{{"points", out}};
  }
  if (op == "beta_from_pixel") {
    return beta_from_pixel(decode_camera(in.at("camera")), in.at("v_o").get<double>());
  }
  if (op == "corner_offsets") {
    return json{{"offsets", encode_corner_matrix(corner_offsets(
                                in.at("W").get<double>(), in.at("H").get<double>(), in.at("L").get<double>(),
                                in.at("r_y").get<double>()))}};
  }
  if (op == "corners_camera") {
    const CornerSet cs = corners_camera(decode_box(in.at("box")));
    return json{{"corners", encode_corner_matrix(cs.corners)}, {"offsets", encode_corner_matrix(cs.offsets)}};
  }
  if (op == "delta_z_max") {
    return delta_z_max(in.at("W").get<double>(), in.at("L").get<double>(), in.at("r_y").get<double>());
  }
  if (op == "project_box") {
    const Box2D b = project_box(decode_box(in.at("box")), decode_camera(in.at("camera")));
    return json{{"left", b.left()}, {"top", b.top()},  {"right", b.right()},
                {"bottom", b.bottom()}, {"width", b.w}, {"height", b.h}};
  }
  if (op == "alpha_from_ry") {
    return alpha_from_ry(in.at("r_y").get<double>(), in.at("x").get<double>(), in.at("z").get<double>());
  }
  if (op == "ry_from_alpha") {
    return ry_from_alpha(in.at("alpha").get<double>(), in.at("x").get<double>(), in.at("z").get<double>());
  }
  if (op == "height_forward") {
    return height_forward(in.at("z").get<double>(), in.at("beta").get<double>(), in.at("H").get<double>(),
                          in.at("dz").get<double>(), in.at("f_v").get<double>());
  }
  if (op == "depth_full") {
    return depth_full(GeometryObservation{in.at("h").get<double>(), in.at("beta").get<double>(),
                                          in.at("H").get<double>(), in.at("dz").get<double>(),
                                          in.at("f_v").get<double>()});
  }
  if (op == "depth_v1") {
    return depth_v1(in.at("h").get<double>(), in.at("beta").get<double>(), in.at("H").get<double>(),
                    in.at("dz").get<double>(), in.at("f_v").get<double>());
  }
  if (op == "depth_v2") {
    return depth_v2(in.at("h").get<double>(), in.at("H").get<double>(), DepthV2Scale{in.at("k").get<double>()});
  }
  if (op == "compare_formulas") {
    std::vector<Box3D> boxes;
    for (const auto& b : in.at("boxes")) boxes.push_back(decode_box(b));
    const auto rows = compare_formulas(boxes, decode_camera(in.at("camera")), 1);
    json out = json::array();
    for (const FormulaComparisonRow& r : rows) {
      json o{{"index", r.index}, {"ok", r.ok}, {"z_true", r.z_true}};
      if (r.ok) {
        o["h"] = r.h;
        o["z_full"] = r.z_full;
        o["z_v1"] = r.z_v1;
        o["z_v2"] = r.z_v2;
      }
      out.push_back(std::move(o));
    }
    return json{{"rows", out}};
  }
  if (op == "parse_label_line") {
    return encode_label(parse_label_line(in.at("line").get<std::string>(), 1));
  }
  if (op == "serialize_label") {
    return serialize_label(parse_label_line(in.at("line").get<std::string>(), 1));
  }
  if (op == "parse_calib_file") {
    const FrameCalib calib =
        parse_calib_text(in.at("text").get<std::string>(),
                         in.contains("reference_key") ? in.at("reference_key").get<std::string>() : "P2");
    return json{{"f_u", calib.camera.f_u},
                {"f_v", calib.camera.f_v},
                {"c_u", calib.camera.c_u},
                {"c_v", calib.camera.c_v},
                {"t_proj", json::array({calib.camera.t_proj(0), calib.camera.t_proj(1), calib.camera.t_proj(2)})},
                {"matrix_keys", [&] {
                   json keys = json::array();
                   for (const auto& [k, m] : calib.matrices) keys.push_back(k);
                   return keys;
                 }()}};
  }
  if (op == "load_frame_set") {
    TempDir tmp;
    for (const auto& [rel, content] : in.at("files").items()) {
      const std::filesystem::path p = tmp.path / rel;
      std::filesystem::create_directories(p.parent_path());
      std::ofstream(p, std::ios::binary) << content.get<std::string>();
    }
    const FrameSet set =
        load_frame_set(tmp.path / in.at("label_dir").get<std::string>(),
                       tmp.path / in.at("calib_dir").get<std::string>(), in.at("ids").get<std::vector<int>>());
    json frames = json::array();
    for (const Frame& f : set.frames) {
      frames.push_back(json{{"id", f.id}, {"labels", f.labels.size()}});
    }
    return json{{"frames", frames}, {"errors", set.errors.size()}};
  }
  if (op == "iou_2d") {
    const auto rect = [](const json& r) {
      return Box2D::from_corners(r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
                                 r.at(3).get<double>());
    };
    return iou_2d(rect(in.at("a")), rect(in.at("b")));
  }
  if (op == "iou_bev") {
    return iou_bev(decode_box(in.at("a")), decode_box(in.at("b")));
  }
  if (op == "iou_3d") {
    return iou_3d(decode_box(in.at("a")), decode_box(in.at("b")));
  }
  if (op == "assign_difficulty") {
    return to_string(assign_difficulty(parse_label_line(in.at("line").get<std::string>(), 1)));
  }
  if (op == "evaluate_ap") {
    const APResult r =
        evaluate_ap(decode_labels(in.at("dets")), decode_labels(in.at("gts")), decode_eval_config(in.at("config")));
    return json{{"ap", r.ap},
                {"counted_gts", r.counted_gts},
                {"matched", r.matched},
                {"unmatched_gts", r.unmatched_gts},
                {"false_positives", r.false_positives}};
  }
  if (op == "depth_errors") {
    return encode_stats(depth_errors(in.at("pred").get<std::vector<double>>(), in.at("gt").get<std::vector<double>>()));
  }
  if (op == "bucketed_depth_errors") {
    std::vector<DepthSample> samples;
    for (const auto& s : in.at("samples")) {
      samples.push_back({s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()});
    }
    std::vector<std::pair<double, double>> ranges;
    for (const auto& r : in.at("ranges")) {
      ranges.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
    }
    json out = json::array();
    for (const DepthErrorStats& s : bucketed_depth_errors(samples, ranges)) out.push_back(encode_stats(s));
    return json{{"buckets", out}};
  }
  if (op == "focal_variant") {
    FocalConfig cfg;
    if (in.contains("alpha_f")) cfg.alpha_f = in.at("alpha_f").get<double>();
    if (in.contains("beta_f")) cfg.beta_f = in.at("beta_f").get<double>();
    const FocalResult r = focal_variant(in.at("p").get<double>(), in.at("y").get<double>(), cfg);
    return json{{"loss", r.loss}, {"d_loss_d_p", r.d_loss_d_p}};
  }
  if (op == "uncertainty_l1") {
    const UncertaintyL1Result r = uncertainty_l1(
        UncertainDepthPrediction{in.at("d_pred").get<double>(), in.at("sigma").get<double>()},
        in.at("d_gt").get<double>());
    return json{{"loss", r.loss}, {"d_loss_d_pred", r.d_loss_d_pred}, {"d_loss_d_sigma", r.d_loss_d_sigma}};
  }
  if (op == "total_loss") {
    LossWeights w;
    if (in.contains("lambda1")) w.lambda1 = in.at("lambda1").get<double>();
    if (in.contains("lambda2")) w.lambda2 = in.at("lambda2").get<double>();
    return total_loss(in.at("l_c").get<double>(), in.at("l_2d").get<double>(), in.at("l_3d").get<double>(), w);
  }
  if (op == "generate_scenes") {
    const auto frames = generate_scenes(decode_scene_spec(in.at("spec")), in.at("n_frames").get<int>(), 1);
    json out{{"frames", frames.size()}};
    if (!frames.empty()) out["label_text_frame0"] = serialize_labels(frames.front().labels);
    return out;
  }
  if (op == "misalignment_report") {
    const MisalignmentReport r = misalignment_report(
        decode_frames(in.at("frames")),
        in.contains("image_width") ? in.at("image_width").get<int>() : kDefaultImageWidth,
        in.contains("image_height") ? in.at("image_height").get<int>() : kDefaultImageHeight);
    json buckets = json::array();
    for (const MisalignmentBucket& b : r.buckets) {
      buckets.push_back(json{{"range_lo", b.range_lo},
                             {"range_hi", std::isfinite(b.range_hi) ? json(b.range_hi) : json(nullptr)},
                             {"count", b.count},
                             {"truncated", b.truncated},
                             {"mean_iou", b.mean_iou},
                             {"mean_abs_du", b.mean_du},
                             {"mean_abs_dv", b.mean_dv},
                             {"mean_abs_dw", b.mean_dw},
                             {"mean_abs_dh", b.mean_dh}});
    }
    return json{{"total", r.total}, {"skipped", r.skipped}, {"buckets", buckets}};
  }
  if (op == "depth_spread_table") {
    const DepthSpreadTable t = depth_spread_table(
        decode_frames(in.at("frames")), in.at("h_centers").get<std::vector<double>>(),
        in.at("H_centers").get<std::vector<double>>(),
        in.contains("h_tol") ? in.at("h_tol").get<double>() : 0.5,
        in.contains("H_tol") ? in.at("H_tol").get<double>() : 0.005,
        in.contains("annotated_h") && in.at("annotated_h").get<bool>());
    json rows = json::array();
    for (const DepthSpreadRow& row : t.rows) {
      json cells = json::array();
      for (const DepthSpreadCell& cell : row.cells) {
        cells.push_back(json{{"H_center", cell.H_center},
                             {"count", cell.count},
                             {"max", cell.max_z},
                             {"min", cell.min_z},
                             {"diff", cell.diff}});
      }
      rows.push_back(json{{"h_center", row.h_center},
                          {"cells", cells},
                          {"nonempty_cells", row.nonempty_cells},
                          {"avg_max", row.avg_max},
                          {"avg_min", row.avg_min},
                          {"avg_diff", row.avg_diff}});
    }
    return json{{"rows", rows}};
  }
  if (op == "sensitivity_sweep") {
    const SweepResult r = sensitivity_sweep(
        in.at("H").get<double>(), in.at("h").get<double>(), decode_camera(in.at("camera")),
        decode_grid(in.at("beta_grid")), decode_grid(in.at("ry_grid")),
        in.contains("W") ? in.at("W").get<double>() : kCarWidth,
        in.contains("L") ? in.at("L").get<double>() : kCarLength);
    return json{{"ok_count", r.ok_count}, {"min", r.min_z}, {"max", r.max_z}, {"spread", r.spread}};
  }
  if (op == "verify_fixtures") {
    return evaluate_meta_fixtures(in);
  }
  throw ConfigError(msg("fixture references unknown operation '", op, "'"));
}

std::string exception_kind(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "parse_error";
  if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
  if (dynamic_cast<const IoError*>(&e)) return "io_error";
  if (dynamic_cast<const std::domain_error*>(&e)) return "domain_error";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
  return "error";
}

std::string describe(const json& v) {
  const std::string s = v.dump();
  if (s.size() <= 160) return s;
  return s.substr(0, 157) + "...";
}

std::string mismatch_impl(const json& actual, const json& expected, double tol, const std::string& path) {
  const std::string where = path.empty() ? "value" : path;
  if (expected.is_number() && actual.is_number()) {
    const double e = expected.get<double>();
    const double a = actual.get<double>();
    const double limit = tol * std::max(1.0, std::abs(e));
    const bool pass = (tol == 0) ? (a == e) : (std::abs(a - e) <= limit);
    if (!pass) {
      return msg(where, ": got ", describe(actual), ", expected ", describe(expected), " (tolerance ", tol, ")");
    }
    return {};
  }
  if (expected.is_object()) {
    if (!actual.is_object()) return msg(where, ": got ", describe(actual), ", expected an object");
    for (const auto& [key, value] : expected.items()) {
      if (!actual.contains(key)) return msg(where, ": missing key '", key, "'");
      const std::string sub = mismatch_impl(actual.at(key), value, tol, path.empty() ? key : path + "." + key);
      if (!sub.empty()) return sub;
    }
    return {};
  }
  if (expected.is_array()) {
    if (!actual.is_array()) return msg(where, ": got ", describe(actual), ", expected an array");
    if (actual.size() != expected.size()) {
      return msg(where, ": got ", actual.size(), " elements, expected ", expected.size());
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const std::string sub = mismatch_impl(actual[i], expected[i], tol, msg(path, "[", i, "]"));
      if (!sub.empty()) return sub;
    }
    return {};
  }
  if (actual != expected) {
    return msg(where, ": got ", describe(actual), ", expected ", describe(expected));
  }
  return {};
}

}  // namespace

std::string json_mismatch(const nlohmann::ordered_json& actual, const nlohmann::ordered_json& expected,
                          double tolerance) {
  return mismatch_impl(actual, expected, tolerance, "");
}

std::vector<GoldenFixture> load_fixtures(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw ConfigError(msg("fixture directory missing: ", dir.string()));
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<GoldenFixture> fixtures;
  for (const auto& file : files) {
    GoldenFixture f;
    f.file = file;
    f.name = file.stem().string();
    try {
      const json j = json::parse(read_text_file(file));
      f.name = j.at("name").get<std::string>();
      f.op = j.at("op").get<std::string>();
      f.input = j.at("input");
      f.expected = j.at("expected");
      if (j.contains("source")) f.source = j.at("source").get<std::string>();
      if (j.contains("harness")) f.harness = j.at("harness").get<std::string>();
      if (j.contains("tolerance")) f.tolerance = j.at("tolerance").get<double>();
    } catch (const std::exception& e) {
      f.op = "__invalid__";
      f.source = e.what();
    }
    fixtures.push_back(std::move(f));
  }
  return fixtures;
}

FixtureResult verify_fixture(const GoldenFixture& fixture) {
  FixtureResult result;
  result.name = fixture.name;
  result.op = fixture.op;
  if (fixture.op == "__invalid__") {
    result.pass = false;
    result.detail = msg("unreadable fixture: ", fixture.source);
    return result;
  }
  json actual;
  try {
    actual = evaluate_op(fixture.op, fixture.input);
  } catch (const std::exception& e) {
    actual = json{{"error", exception_kind(e)}, {"message", e.what()}};
  }
  result.detail = json_mismatch(actual, fixture.expected, fixture.tolerance);
  result.pass = result.detail.empty();
  return result;
}

FixtureReport verify_fixtures(const std::filesystem::path& dir) {
  FixtureReport report;
  for (const GoldenFixture& fixture : load_fixtures(dir)) {
    if (fixture.harness == "cli") {
      ++report.skipped;
      continue;
    }
    FixtureResult r = verify_fixture(fixture);
    (r.pass ? report.passed : report.failed)++;
    report.results.push_back(std::move(r));
  }
  return report;
}

}  // namespace geodepth
