#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geodepth/box_geometry.hpp"
#include "geodepth/camera.hpp"
#include "geodepth/errors.hpp"

namespace geodepth {

/// One object annotation line in the dataset label format. Field names
/// and order follow the file layout: category token, truncation,
/// occlusion, observation angle alpha, 2D box corners, 3D dimensions in
/// file order (height, width, length), 3D location of the bottom center,
/// yaw, and an optional detection score as a 16th field.
struct LabelRecord {
  std::string category;
  double truncation = 0;  ///< 0..1, or -1 for sentinel records
  int occlusion = 0;      ///< 0..3, or -1 for sentinel records
  double alpha = 0;
  double left = 0;
  double top = 0;
  double right = 0;
  double bottom = 0;
  double dim_h = 0;
  double dim_w = 0;
  double dim_l = 0;
  double x = 0;
  double y = 0;
  double z = 0;
  double rotation_y = 0;
  std::optional<double> score;

  /// True for records that mark regions rather than objects: the
  /// DontCare category or sentinel (non-positive) dimensions.
  bool ignorable() const {
    return category == "DontCare" || !(dim_h > 0) || !(dim_w > 0) || !(dim_l > 0);
  }

  /// The annotated 2D box as a center/size rectangle.
  Box2D bbox() const { return Box2D::from_corners(left, top, right, bottom, BoxKind::annotated); }

  double bbox_height() const { return bottom - top; }
};

/// Maps a non-ignorable record to the oriented 3D box it annotates:
/// file dims (h, w, l) become (H, W, L) and the location becomes the
/// bottom center.
Box3D to_box3d(const LabelRecord& rec);

/// Parses one label line of 15 or 16 whitespace-separated fields.
/// line_number is carried into any ParseError for context; columns in
/// errors are 1-based character positions within the line.
LabelRecord parse_label_line(std::string_view line, int line_number = 0);

/// Parses a whole label file body; blank lines are skipped.
std::vector<LabelRecord> parse_label_text(std::string_view text);

std::vector<LabelRecord> load_label_file(const std::filesystem::path& path);

/// Canonical one-line form: reals with two decimals, occlusion as a bare
/// integer, single spaces, no trailing whitespace. Parsing the result
/// reproduces every parsed value exactly.
std::string serialize_label(const LabelRecord& rec);

/// All records, one per line, with a trailing newline (empty input gives
/// an empty string).
std::string serialize_labels(const std::vector<LabelRecord>& recs);

/// Calibration data for one frame: the projection matrices keyed by
/// camera id (keys like "P0".."P3"), non-matrix lines preserved verbatim,
/// and the pinhole camera extracted from the reference matrix.
struct FrameCalib {
  std::map<std::string, Eigen::Matrix<double, 3, 4>> matrices;
  std::vector<std::pair<std::string, std::string>> extra;  ///< key, raw value text
  std::string reference_key;
  CameraIntrinsics camera;
};

/// Parses "Key: values" calibration lines. Keys of the form P<digits>
/// must carry exactly 12 reals forming a row-major 3x4 matrix; other keys
/// are preserved untouched. The camera is extracted from reference_key.
FrameCalib parse_calib_text(std::string_view text, const std::string& reference_key = "P2");

FrameCalib load_calib_file(const std::filesystem::path& path, const std::string& reference_key = "P2");

/// Writes matrices (in key order) then preserved lines, matching the
/// dataset's scientific-notation style.
std::string serialize_calib(const FrameCalib& calib);

/// Frame ids map to zero-padded six-digit file names, e.g. 7 -> "000007.txt".
std::string frame_file_name(int id);

struct Frame {
  int id = 0;
  std::vector<LabelRecord> labels;
  FrameCalib calib;
};

struct FrameSet {
  std::vector<Frame> frames;                         ///< ascending by id
  std::vector<std::pair<int, std::string>> errors;   ///< per-id load problems
};

/// Loads label/calib pairs for the given ids in ascending order. Ids that
/// fail to load (missing or malformed files) become error entries; only
/// when every requested id fails is the whole call an error.
FrameSet load_frame_set(const std::filesystem::path& label_dir, const std::filesystem::path& calib_dir,
                        std::vector<int> ids, const std::string& reference_key = "P2");

/// Reads a whole file as bytes; IoError when unreadable.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace geodepth
