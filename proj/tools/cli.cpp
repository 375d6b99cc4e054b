#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geodepth/analysis.hpp"
#include "geodepth/box_geometry.hpp"
#include "geodepth/camera.hpp"
#include "geodepth/depth_formula.hpp"
#include "geodepth/errors.hpp"
#include "geodepth/eval_depth.hpp"
#include "geodepth/eval_detection.hpp"
#include "geodepth/kitti_io.hpp"
#include "geodepth/losses.hpp"
#include "geodepth/report.hpp"
#include "geodepth/util.hpp"

namespace geodepth {
namespace {

namespace fs = std::filesystem;

// --- shared option plumbing ----------------------------------------------

struct OutputOptions {
  std::string out;     ///< empty: stdout
  std::string format;  ///< empty: inferred from --out extension
  bool raw = false;
};

void add_output_flags(CLI::App& cmd, OutputOptions& o) {
  cmd.add_option("--out", o.out, "Output file (default: stdout)");
  cmd.add_option("--format", o.format, "csv or json (default: from --out extension, else csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd.add_flag("--raw", o.raw, "Full-precision numbers instead of 6 significant digits");
}

bool wants_json(const OutputOptions& o) {
  if (!o.format.empty()) return o.format == "json";
  return fs::path(o.out).extension() == ".json";
}

void emit(const OutputOptions& o, const std::string& text) {
  if (o.out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text_file_atomic(o.out, text);
  }
}

int resolve_jobs(int jobs_flag) {
  if (jobs_flag > 0) return jobs_flag;
  if (const char* env = std::getenv("GEODEPTH_JOBS")) {
    const std::string_view sv(env);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (ec != std::errc{} || ptr != sv.data() + sv.size() || value < 1) {
      throw ConfigError(msg("GEODEPTH_JOBS must be a positive integer, got '", env, "'"));
    }
    return value;
  }
  return 0;  // auto
}

double parse_double_arg(std::string_view text, std::string_view what) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(msg(what, ": expected a number, got '", text, "'"));
  }
  return value;
}

std::vector<double> parse_double_list(const std::string& text, std::string_view what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::size_t end = (comma == std::string::npos) ? text.size() : comma;
    out.push_back(parse_double_arg(std::string_view(text).substr(pos, end - pos), what));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

/// "0:10,10:20,40:inf" -> half-open (lo, hi] range bounds.
std::vector<std::pair<double, double>> parse_ranges(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::size_t end = (comma == std::string::npos) ? text.size() : comma;
    const std::string_view item = std::string_view(text).substr(pos, end - pos);
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError(msg("--ranges: expected lo:hi, got '", item, "'"));
    }
    out.emplace_back(parse_double_arg(item.substr(0, colon), "--ranges"),
                     parse_double_arg(item.substr(colon + 1), "--ranges"));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// --- frame loading --------------------------------------------------------

std::vector<int> scan_frame_ids(const fs::path& dir) {
  std::vector<int> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    const std::string stem = entry.path().stem().string();
    int id = 0;
    const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), id);
    if (ec == std::errc{} && ptr == stem.data() + stem.size() && id >= 0) {
      ids.push_back(id);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<Frame> load_frames_arg(const std::string& labels, const std::string& calib,
                                   const std::string& camera_key) {
  if (labels.empty()) throw ConfigError("--labels is required");
  if (calib.empty()) throw ConfigError("--calib is required");
  if (fs::is_directory(labels)) {
    if (!fs::is_directory(calib)) {
      throw ConfigError("--labels is a directory, so --calib must be a directory too");
    }
    std::vector<int> ids = scan_frame_ids(labels);
    if (ids.empty()) throw ConfigError(msg("no numeric .txt label files under ", labels));
    FrameSet set = load_frame_set(labels, calib, std::move(ids), camera_key);
    if (!set.errors.empty()) {
      std::string detail;
      for (std::size_t i = 0; i < set.errors.size() && i < 5; ++i) {
        detail += msg("\n  frame ", set.errors[i].first, ": ", set.errors[i].second);
      }
      throw IoError(msg(set.errors.size(), " frame(s) failed to load:", detail));
    }
    return std::move(set.frames);
  }
  Frame frame;
  frame.id = 0;
  frame.labels = load_label_file(labels);
  frame.calib = load_calib_file(calib, camera_key);
  return {std::move(frame)};
}

std::vector<std::vector<LabelRecord>> load_detection_files(const std::string& dets,
                                                           const std::vector<int>& ids) {
  std::vector<std::vector<LabelRecord>> out;
  out.reserve(ids.size());
  for (int id : ids) {
    const fs::path file = fs::path(dets) / frame_file_name(id);
    // A frame with no detections commonly has no file at all.
    out.push_back(fs::exists(file) ? load_label_file(file) : std::vector<LabelRecord>{});
  }
  return out;
}

// --- subcommand options ---------------------------------------------------

struct FrameInputOptions {
  std::string labels;
  std::string calib;
  std::string camera_key = "P2";
};

void add_frame_input_flags(CLI::App& cmd, FrameInputOptions& o, bool required = true) {
  auto* labels = cmd.add_option("--labels,--kitti-labels", o.labels, "Label file, or directory of NNNNNN.txt files");
  auto* calib = cmd.add_option("--calib", o.calib, "Calibration file, or directory matching --labels");
  if (required) {
    labels->required();
    calib->required();
  }
  cmd.add_option("--camera", o.camera_key, "Projection matrix key to read intrinsics from")
      ->capture_default_str();
}

struct ProjectOptions {
  FrameInputOptions input;
  OutputOptions output;
};

struct RecoverOptions {
  FrameInputOptions input;
  OutputOptions output;
  std::string formula = "full";
  double k = 0;  ///< 0: use f_v
  bool annotated_h = false;
};

struct CompareOptions {
  FrameInputOptions input;
  OutputOptions output;
  int jobs = 0;
};

struct MisalignOptions {
  FrameInputOptions input;
  OutputOptions output;
  int image_width = kDefaultImageWidth;
  int image_height = kDefaultImageHeight;
};

struct DepthStatsOptions {
  FrameInputOptions input;
  OutputOptions output;
  std::string h_centers = "30,35";
  std::string H_centers = "1.49,1.5,1.51,1.52";
  double h_tol = 0.5;
  double H_tol = 0.005;
  bool annotated_h = false;
  // sweep mode
  bool sweep = false;
  double sweep_H = 1.51;
  double sweep_h = 30;
  double W = kCarWidth;
  double L = kCarLength;
  std::string beta_grid = "";
  std::string ry_grid = "";
};

struct EvalApOptions {
  std::string dets;
  std::string gts;
  OutputOptions output;
  double iou = 0.7;
  int recall = 40;
  std::string task = "3d";
  std::string category = "Car";
  std::string difficulty = "all";
};

struct DepthMetricsOptions {
  std::string pairs;
  OutputOptions output;
  std::string pred_col = "pred";
  std::string gt_col = "gt";
  std::string depth_col;
  std::string ranges;
};

struct GenScenesOptions {
  std::string out_dir;
  int frames = 10;
  std::uint64_t seed = 1;
  int boxes = 5;
  std::string category = "Car";
  int image_width = kDefaultImageWidth;
  int image_height = kDefaultImageHeight;
  int jobs = 0;
};

// --- subcommand bodies ----------------------------------------------------

void run_project(const ProjectOptions& o) {
  std::vector<ProjectedBoxRow> rows;
  for (const Frame& frame : load_frames_arg(o.input.labels, o.input.calib, o.input.camera_key)) {
    for (std::size_t i = 0; i < frame.labels.size(); ++i) {
      const LabelRecord& rec = frame.labels[i];
      if (rec.ignorable()) continue;
      ProjectedBoxRow row;
      row.frame = frame.id;
      row.index = static_cast<int>(i);
      row.category = rec.category;
      try {
        const Box2D box = project_box(to_box3d(rec), frame.calib.camera);
        row.ok = true;
        row.left = box.left();
        row.top = box.top();
        row.right = box.right();
        row.bottom = box.bottom();
        row.w = box.w;
        row.h = box.h;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  const ReportFormat fmt{o.output.raw};
  emit(o.output, wants_json(o.output) ? json_text(projected_boxes_json(rows, fmt))
                                      : projected_boxes_csv(rows, fmt));
}

void run_recover_depth(const RecoverOptions& o) {
  std::vector<RecoveredDepthRow> rows;
  for (const Frame& frame : load_frames_arg(o.input.labels, o.input.calib, o.input.camera_key)) {
    const CameraIntrinsics& cam = frame.calib.camera;
    for (std::size_t i = 0; i < frame.labels.size(); ++i) {
      const LabelRecord& rec = frame.labels[i];
      if (rec.ignorable()) continue;
      RecoveredDepthRow row;
      row.frame = frame.id;
      row.index = static_cast<int>(i);
      row.category = rec.category;
      row.z_label = rec.z;
      try {
        const Box3D box = to_box3d(rec);
        const Box2D proj = project_box(box, cam);
        row.h = o.annotated_h ? rec.bbox_height() : proj.h;
        row.beta = angles_for_box(box, cam).beta;
        row.dz = delta_z_max(box.W, box.L, box.r_y);
        row.H = box.H;
        const GeometryObservation obs{row.h, row.beta, row.H, row.dz, cam.f_v};
        if (o.formula == "full") {
          row.z_geo = depth_full(obs);
        } else if (o.formula == "v1") {
          row.z_geo = depth_v1(obs.h, obs.beta, obs.H, obs.dz, obs.f_v);
        } else {
          row.z_geo = depth_v2(row.h, row.H, DepthV2Scale{o.k > 0 ? o.k : cam.f_v});
        }
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  const ReportFormat fmt{o.output.raw};
  emit(o.output, wants_json(o.output) ? json_text(recovered_depth_json(rows, fmt))
                                      : recovered_depth_csv(rows, fmt));
}

void run_compare_formulas(const CompareOptions& o) {
  const int jobs = resolve_jobs(o.jobs);
  std::vector<std::pair<int, std::vector<FormulaComparisonRow>>> frames;
  for (const Frame& frame : load_frames_arg(o.input.labels, o.input.calib, o.input.camera_key)) {
    std::vector<Box3D> boxes;
    for (const LabelRecord& rec : frame.labels) {
      if (!rec.ignorable()) boxes.push_back(to_box3d(rec));
    }
    frames.emplace_back(frame.id, compare_formulas(boxes, frame.calib.camera, jobs));
  }
  const ReportFormat fmt{o.output.raw};
  emit(o.output, wants_json(o.output) ? json_text(formula_comparison_json(frames, fmt))
                                      : formula_comparison_csv(frames, fmt));
}

void run_misalign_report(const MisalignOptions& o) {
  const MisalignmentReport report =
      misalignment_report(load_frames_arg(o.input.labels, o.input.calib, o.input.camera_key),
                          o.image_width, o.image_height);
  const ReportFormat fmt{o.output.raw};
  emit(o.output, wants_json(o.output) ? json_text(misalignment_json(report, fmt))
                                      : misalignment_csv(report, fmt));
}

void run_depth_stats(const DepthStatsOptions& o) {
  const ReportFormat fmt{o.output.raw};
  if (o.sweep) {
    CameraIntrinsics cam = kitti_like_camera();
    if (!o.input.calib.empty()) {
      cam = load_calib_file(o.input.calib, o.input.camera_key).camera;
    }
    const std::vector<double> betas =
        o.beta_grid.empty() ? default_beta_grid() : parse_double_list(o.beta_grid, "--beta-grid");
    const std::vector<double> rys =
        o.ry_grid.empty() ? default_ry_grid() : parse_double_list(o.ry_grid, "--ry-grid");
    const SweepResult sweep = sensitivity_sweep(o.sweep_H, o.sweep_h, cam, betas, rys, o.W, o.L);
    emit(o.output, wants_json(o.output) ? json_text(sweep_json(sweep, fmt)) : sweep_csv(sweep, fmt));
    return;
  }
  const DepthSpreadTable table = depth_spread_table(
      load_frames_arg(o.input.labels, o.input.calib, o.input.camera_key),
      parse_double_list(o.h_centers, "--h-centers"), parse_double_list(o.H_centers, "--H-centers"),
      o.h_tol, o.H_tol, o.annotated_h);
  emit(o.output, wants_json(o.output) ? json_text(depth_spread_json(table, fmt))
                                      : depth_spread_csv(table, fmt));
}

void run_eval_ap(const EvalApOptions& o) {
  std::vector<std::vector<LabelRecord>> dets;
  std::vector<std::vector<LabelRecord>> gts;
  if (fs::is_directory(o.gts)) {
    if (!fs::exists(o.dets) || !fs::is_directory(o.dets)) {
      throw ConfigError("--gts is a directory, so --dets must be a directory too");
    }
    const std::vector<int> ids = scan_frame_ids(o.gts);
    if (ids.empty()) throw ConfigError(msg("no numeric .txt label files under ", o.gts));
    gts.reserve(ids.size());
    for (int id : ids) gts.push_back(load_label_file(fs::path(o.gts) / frame_file_name(id)));
    dets = load_detection_files(o.dets, ids);
  } else {
    gts.push_back(load_label_file(o.gts));
    dets.push_back(fs::exists(o.dets) ? load_label_file(o.dets) : std::vector<LabelRecord>{});
  }

  EvalConfig cfg;
  cfg.iou_threshold = o.iou;
  cfg.recall_positions = o.recall;
  cfg.category = o.category;
  cfg.task = o.task == "2d" ? EvalTask::detection2d : o.task == "bev" ? EvalTask::bev : EvalTask::detection3d;

  std::vector<Difficulty> difficulties;
  if (o.difficulty == "all") {
    difficulties = {Difficulty::easy, Difficulty::moderate, Difficulty::hard};
  } else if (o.difficulty == "easy") {
    difficulties = {Difficulty::easy};
  } else if (o.difficulty == "moderate") {
    difficulties = {Difficulty::moderate};
  } else {
    difficulties = {Difficulty::hard};
  }

  std::vector<APRunSummary> runs;
  for (Difficulty d : difficulties) {
    cfg.difficulty = d;
    runs.push_back({cfg, evaluate_ap_frames(dets, gts, cfg)});
  }
  const ReportFormat fmt{o.output.raw};
  emit(o.output, wants_json(o.output) ? json_text(ap_report_json(runs, fmt)) : ap_report_csv(runs, fmt));
}

void run_depth_metrics(const DepthMetricsOptions& o) {
  const CsvData csv = read_csv(o.pairs);
  const std::size_t pred_col = csv.column(o.pred_col);
  const std::size_t gt_col = csv.column(o.gt_col);
  std::optional<std::size_t> depth_col;
  if (!o.depth_col.empty()) depth_col = csv.column(o.depth_col);

  std::vector<DepthSample> samples;
  samples.reserve(csv.rows.size());
  for (const auto& row : csv.rows) {
    DepthSample s;
    s.pred = parse_double_arg(row.at(pred_col), o.pred_col);
    s.gt = parse_double_arg(row.at(gt_col), o.gt_col);
    s.gt_depth = depth_col ? parse_double_arg(row.at(*depth_col), o.depth_col) : s.gt;
    samples.push_back(s);
  }

  std::vector<std::pair<double, double>> ranges =
      o.ranges.empty() ? std::vector<std::pair<double, double>>{{0.0, std::numeric_limits<double>::infinity()}}
                       : parse_ranges(o.ranges);
  const auto stats = bucketed_depth_errors(samples, ranges);
  const ReportFormat fmt{o.output.raw};
  emit(o.output, wants_json(o.output) ? json_text(depth_metrics_json(stats, fmt))
                                      : depth_metrics_csv(stats, fmt));
}

void run_gen_scenes(const GenScenesOptions& o) {
  SyntheticSceneSpec spec;
  spec.seed = o.seed;
  spec.boxes_per_frame = o.boxes;
  spec.category = o.category;
  spec.image_width = o.image_width;
  spec.image_height = o.image_height;
  const std::vector<Frame> frames = generate_scenes(spec, o.frames, resolve_jobs(o.jobs));

  const fs::path label_dir = fs::path(o.out_dir) / "label_2";
  const fs::path calib_dir = fs::path(o.out_dir) / "calib";
  for (const Frame& frame : frames) {
    const std::string name = frame_file_name(frame.id);
    write_text_file_atomic(label_dir / name, serialize_labels(frame.labels));
    write_text_file_atomic(calib_dir / name, serialize_calib(frame.calib));
  }
  std::cerr << "wrote " << frames.size() << " frame(s) under " << o.out_dir << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Projective geometry toolkit for monocular 3D object detection"};
  app.set_version_flag("--version", "geodepth 0.1.0");
  app.require_subcommand(1);

  ProjectOptions project;
  auto* cmd_project = app.add_subcommand("project", "Project 3D boxes to tight 2D image boxes");
  add_frame_input_flags(*cmd_project, project.input);
  add_output_flags(*cmd_project, project.output);
  cmd_project->callback([&] { run_project(project); });

  RecoverOptions recover;
  auto* cmd_recover = app.add_subcommand("recover-depth", "Recover object depth from projected box height");
  add_frame_input_flags(*cmd_recover, recover.input);
  add_output_flags(*cmd_recover, recover.output);
  cmd_recover->add_option("--formula", recover.formula, "Depth formula: full, v1, or v2")
      ->check(CLI::IsMember({"full", "v1", "v2"}))
      ->capture_default_str();
  cmd_recover->add_option("--k", recover.k, "Scale for --formula v2 (default: the camera's f_v)");
  cmd_recover->add_flag("--annotated-h", recover.annotated_h,
                        "Use the annotated 2D box height instead of the projected height");
  cmd_recover->callback([&] { run_recover_depth(recover); });

  CompareOptions compare;
  auto* cmd_compare = app.add_subcommand("compare-formulas",
                                         "Recover depth with every formula and compare to the label depth");
  add_frame_input_flags(*cmd_compare, compare.input);
  add_output_flags(*cmd_compare, compare.output);
  cmd_compare->add_option("--jobs", compare.jobs, "Worker threads (default: GEODEPTH_JOBS, else all cores)")
      ->check(CLI::PositiveNumber);
  cmd_compare->callback([&] { run_compare_formulas(compare); });

  MisalignOptions misalign;
  auto* cmd_misalign = app.add_subcommand("misalign-report",
                                          "Compare annotated 2D boxes against projected 3D boxes by depth bucket");
  add_frame_input_flags(*cmd_misalign, misalign.input);
  add_output_flags(*cmd_misalign, misalign.output);
  cmd_misalign->add_option("--image-width", misalign.image_width, "Image width in pixels")->capture_default_str();
  cmd_misalign->add_option("--image-height", misalign.image_height, "Image height in pixels")->capture_default_str();
  cmd_misalign->callback([&] { run_misalign_report(misalign); });

  DepthStatsOptions stats;
  auto* cmd_stats = app.add_subcommand("depth-stats",
                                       "Depth spread per (pixel height, object height) bucket, or a formula sweep");
  add_frame_input_flags(*cmd_stats, stats.input, /*required=*/false);
  add_output_flags(*cmd_stats, stats.output);
  cmd_stats->add_option("--h-centers", stats.h_centers, "Pixel-height bucket centers")->capture_default_str();
  cmd_stats->add_option("--H-centers", stats.H_centers, "Object-height bucket centers in meters")
      ->capture_default_str();
  cmd_stats->add_option("--h-tol", stats.h_tol, "Pixel-height bucket half width")->capture_default_str();
  cmd_stats->add_option("--H-tol", stats.H_tol, "Object-height bucket half width")->capture_default_str();
  cmd_stats->add_flag("--annotated-h", stats.annotated_h,
                      "Bucket by annotated 2D box height instead of projected height");
  cmd_stats->add_flag("--sweep", stats.sweep,
                      "Sweep the full depth formula over viewing-angle and yaw grids instead of reading labels");
  cmd_stats->add_option("--H", stats.sweep_H, "Sweep: object height in meters")->capture_default_str();
  cmd_stats->add_option("--h-px", stats.sweep_h, "Sweep: projected box height in pixels")->capture_default_str();
  cmd_stats->add_option("--W", stats.W, "Sweep: footprint width in meters")->capture_default_str();
  cmd_stats->add_option("--L", stats.L, "Sweep: footprint length in meters")->capture_default_str();
  cmd_stats->add_option("--beta-grid", stats.beta_grid,
                        "Sweep: comma-separated viewing angles in radians (default: 16 points in [-0.05, 0.10])");
  cmd_stats->add_option("--ry-grid", stats.ry_grid,
                        "Sweep: comma-separated yaw values in radians (default: 64 points in [-pi, pi])");
  cmd_stats->callback([&] { run_depth_stats(stats); });

  EvalApOptions evalap;
  auto* cmd_evalap = app.add_subcommand("eval-ap", "Average precision of detections against ground truth");
  cmd_evalap->add_option("--dets", evalap.dets, "Detection label file or directory (files may carry a 16th score field)")
      ->required();
  cmd_evalap->add_option("--gts", evalap.gts, "Ground-truth label file or directory")->required();
  cmd_evalap->add_option("--iou", evalap.iou, "Overlap threshold for a match")->capture_default_str();
  cmd_evalap->add_option("--recall", evalap.recall, "Recall positions: 11 or 40")
      ->check(CLI::IsMember({11, 40}))
      ->capture_default_str();
  cmd_evalap->add_option("--task", evalap.task, "Overlap kind: 2d, bev, or 3d")
      ->check(CLI::IsMember({"2d", "bev", "3d"}))
      ->capture_default_str();
  cmd_evalap->add_option("--category", evalap.category, "Category to evaluate")->capture_default_str();
  cmd_evalap->add_option("--difficulty", evalap.difficulty, "easy, moderate, hard, or all")
      ->check(CLI::IsMember({"easy", "moderate", "hard", "all"}))
      ->capture_default_str();
  add_output_flags(*cmd_evalap, evalap.output);
  cmd_evalap->callback([&] { run_eval_ap(evalap); });

  DepthMetricsOptions metrics;
  auto* cmd_metrics = app.add_subcommand("depth-metrics", "Depth error metrics over predicted/true depth pairs");
  cmd_metrics->add_option("--pairs", metrics.pairs, "CSV file of depth pairs")->required();
  cmd_metrics->add_option("--pred-col", metrics.pred_col, "Predicted-depth column name")->capture_default_str();
  cmd_metrics->add_option("--gt-col", metrics.gt_col, "True-depth column name")->capture_default_str();
  cmd_metrics->add_option("--depth-col", metrics.depth_col,
                          "Column used for range bucketing (default: the --gt-col values)");
  cmd_metrics->add_option("--ranges", metrics.ranges,
                          "Depth buckets as lo:hi pairs, e.g. 0:10,10:20,20:40,40:inf (default: one 0:inf bucket)");
  add_output_flags(*cmd_metrics, metrics.output);
  cmd_metrics->callback([&] { run_depth_metrics(metrics); });

  GenScenesOptions gen;
  auto* cmd_gen = app.add_subcommand("gen-scenes", "Generate synthetic label and calibration files");
  cmd_gen->add_option("--out-dir", gen.out_dir, "Directory receiving label_2/ and calib/ trees")->required();
  cmd_gen->add_option("--frames", gen.frames, "Number of frames")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd_gen->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  cmd_gen->add_option("--boxes", gen.boxes, "Boxes per frame")->check(CLI::PositiveNumber)->capture_default_str();
  cmd_gen->add_option("--category", gen.category, "Category written to every label")->capture_default_str();
  cmd_gen->add_option("--image-width", gen.image_width, "Image width in pixels")->capture_default_str();
  cmd_gen->add_option("--image-height", gen.image_height, "Image height in pixels")->capture_default_str();
  cmd_gen->add_option("--jobs", gen.jobs, "Worker threads (default: GEODEPTH_JOBS, else all cores)")
      ->check(CLI::PositiveNumber);
  cmd_gen->callback([&] { run_gen_scenes(gen); });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage error
    return code == 0 ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace geodepth
