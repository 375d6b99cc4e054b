#include "geodepth/kitti_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "geodepth/util.hpp"

namespace geodepth {
namespace {

struct Token {
  std::string_view text;
  int column = 0;  // 1-based start position in the line
};

std::vector<Token> split_tokens(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

double parse_real(const Token& tok, const char* field, int line_number) {
  double value = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(msg("field '", field, "': expected a finite number, got '", tok.text, "'"), line_number,
                     tok.column);
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_projection_key(std::string_view key) {
  if (key.size() < 2 || key[0] != 'P') return false;
  return std::all_of(key.begin() + 1, key.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

void append_real_2dp(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  out += buf;
}

}  // namespace

Box3D to_box3d(const LabelRecord& rec) {
  if (rec.ignorable()) {
    throw std::domain_error(msg("to_box3d: record '", rec.category, "' has no valid 3D box"));
  }
  return Box3D(rec.dim_w, rec.dim_h, rec.dim_l, Eigen::Vector3d(rec.x, rec.y, rec.z), rec.rotation_y);
}

LabelRecord parse_label_line(std::string_view line, int line_number) {
  const std::vector<Token> tok = split_tokens(line);
  if (tok.size() != 15 && tok.size() != 16) {
    throw ParseError(msg("expected 15 or 16 fields, got ", tok.size()), line_number,
                     tok.empty() ? 1 : tok.front().column);
  }
  LabelRecord rec;
  rec.category = std::string(tok[0].text);
  rec.truncation = parse_real(tok[1], "truncation", line_number);
  if (!((rec.truncation >= 0.0 && rec.truncation <= 1.0) || rec.truncation == -1.0)) {
    throw ParseError(msg("field 'truncation': value ", rec.truncation, " outside [0, 1] (or the -1 sentinel)"),
                     line_number, tok[1].column);
  }
  const double occ = parse_real(tok[2], "occlusion", line_number);
  if (occ != std::floor(occ) || occ < -1.0 || occ > 3.0) {
    throw ParseError(msg("field 'occlusion': expected an integer in [-1, 3], got '", tok[2].text, "'"), line_number,
                     tok[2].column);
  }
  rec.occlusion = static_cast<int>(occ);
  rec.alpha = parse_real(tok[3], "alpha", line_number);
  rec.left = parse_real(tok[4], "bbox_left", line_number);
  rec.top = parse_real(tok[5], "bbox_top", line_number);
  rec.right = parse_real(tok[6], "bbox_right", line_number);
  rec.bottom = parse_real(tok[7], "bbox_bottom", line_number);
  if (rec.right < rec.left) {
    throw ParseError(msg("field 'bbox_right': ", rec.right, " is left of bbox_left ", rec.left), line_number,
                     tok[6].column);
  }
  if (rec.bottom < rec.top) {
    throw ParseError(msg("field 'bbox_bottom': ", rec.bottom, " is above bbox_top ", rec.top), line_number,
                     tok[7].column);
  }
  rec.dim_h = parse_real(tok[8], "height", line_number);
  rec.dim_w = parse_real(tok[9], "width", line_number);
  rec.dim_l = parse_real(tok[10], "length", line_number);
  rec.x = parse_real(tok[11], "x", line_number);
  rec.y = parse_real(tok[12], "y", line_number);
  rec.z = parse_real(tok[13], "z", line_number);
  rec.rotation_y = parse_real(tok[14], "rotation_y", line_number);
  if (tok.size() == 16) rec.score = parse_real(tok[15], "score", line_number);
  return rec;
}

std::vector<LabelRecord> parse_label_text(std::string_view text) {
  std::vector<LabelRecord> out;
  int line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = (nl == std::string_view::npos) ? text.size() : nl;
    std::string_view line = text.substr(pos, end - pos);
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) out.push_back(parse_label_line(line, line_number));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::vector<LabelRecord> load_label_file(const std::filesystem::path& path) {
  try {
    return parse_label_text(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(msg(path.string(), ": ", e.what()), e.line(), e.column());
  }
}

std::string serialize_label(const LabelRecord& rec) {
  std::string out = rec.category;
  out += ' ';
  append_real_2dp(out, rec.truncation);
  out += ' ';
  out += std::to_string(rec.occlusion);
  const double reals[] = {rec.alpha, rec.left,  rec.top,   rec.right, rec.bottom, rec.dim_h,
                          rec.dim_w, rec.dim_l, rec.x,     rec.y,     rec.z,      rec.rotation_y};
  for (const double v : reals) {
    out += ' ';
    append_real_2dp(out, v);
  }
  if (rec.score) {
    out += ' ';
    append_real_2dp(out, *rec.score);
  }
  return out;
}

std::string serialize_labels(const std::vector<LabelRecord>& recs) {
  std::string out;
  for (const LabelRecord& rec : recs) {
    out += serialize_label(rec);
    out += '\n';
  }
  return out;
}

FrameCalib parse_calib_text(std::string_view text, const std::string& reference_key) {
  FrameCalib calib;
  calib.reference_key = reference_key;
  int line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = (nl == std::string_view::npos) ? text.size() : nl;
    std::string_view line = text.substr(pos, end - pos);
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) {
      const std::size_t colon = line.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("expected 'Key: values'", line_number, 1);
      }
      const std::string key{trim(line.substr(0, colon))};
      const std::string_view rest = line.substr(colon + 1);
      if (is_projection_key(key)) {
        const std::vector<Token> tok = split_tokens(rest);
        if (tok.size() != 12) {
          throw ParseError(msg("calibration key '", key, "': expected 12 values, got ", tok.size()), line_number,
                           static_cast<int>(colon) + 2);
        }
        Eigen::Matrix<double, 3, 4> M;
        for (int i = 0; i < 12; ++i) {
          Token t = tok[static_cast<std::size_t>(i)];
          t.column += static_cast<int>(colon) + 1;
          M(i / 4, i % 4) = parse_real(t, key.c_str(), line_number);
        }
        calib.matrices[key] = M;
      } else {
        calib.extra.emplace_back(key, std::string(trim(rest)));
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  const auto it = calib.matrices.find(reference_key);
  if (it == calib.matrices.end()) {
    throw ParseError(msg("missing reference calibration key '", reference_key, "'"));
  }
  calib.camera = CameraIntrinsics::from_projection_matrix(it->second);
  return calib;
}

FrameCalib load_calib_file(const std::filesystem::path& path, const std::string& reference_key) {
  try {
    return parse_calib_text(read_text_file(path), reference_key);
  } catch (const ParseError& e) {
    throw ParseError(msg(path.string(), ": ", e.what()), e.line(), e.column());
  }
}

std::string serialize_calib(const FrameCalib& calib) {
  std::string out;
  char buf[64];
  for (const auto& [key, M] : calib.matrices) {
    out += key;
    out += ':';
    for (int i = 0; i < 12; ++i) {
      std::snprintf(buf, sizeof(buf), " %.12e", M(i / 4, i % 4));
      out += buf;
    }
    out += '\n';
  }
  for (const auto& [key, value] : calib.extra) {
    out += key;
    out += ": ";
    out += value;
    out += '\n';
  }
  return out;
}

std::string frame_file_name(int id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.txt", id);
  return buf;
}

FrameSet load_frame_set(const std::filesystem::path& label_dir, const std::filesystem::path& calib_dir,
                        std::vector<int> ids, const std::string& reference_key) {
  std::error_code ec;
  for (const auto& dir : {label_dir, calib_dir}) {
    if (!std::filesystem::is_directory(dir, ec)) {
      throw IoError(msg("not a readable directory: ", dir.string()));
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  FrameSet set;
  for (const int id : ids) {
    try {
      Frame frame;
      frame.id = id;
      frame.labels = load_label_file(label_dir / frame_file_name(id));
      frame.calib = load_calib_file(calib_dir / frame_file_name(id), reference_key);
      set.frames.push_back(std::move(frame));
    } catch (const std::exception& e) {
      set.errors.emplace_back(id, e.what());
    }
  }
  if (!ids.empty() && set.frames.empty()) {
    throw IoError(msg("all ", ids.size(), " requested frames failed to load from ", label_dir.string(), " and ",
                      calib_dir.string()));
  }
  return set;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(msg("cannot open for reading: ", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(msg("read failure: ", path.string()));
  return std::move(ss).str();
}

}  // namespace geodepth
