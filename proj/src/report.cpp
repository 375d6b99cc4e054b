#include "geodepth/report.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "geodepth/errors.hpp"
#include "geodepth/kitti_io.hpp"
#include "geodepth/util.hpp"

namespace geodepth {
namespace {

std::atomic<unsigned> g_temp_counter{0};

nlohmann::ordered_json bound_or_null(double v, const ReportFormat& fmt) {
  if (!std::isfinite(v)) return nullptr;
  return fmt.jnum(v);
}

}  // namespace

std::string ReportFormat::num(double v) const {
  char buf[48];
  std::snprintf(buf, sizeof(buf), raw ? "%.17g" : "%.6g", v);
  return buf;
}

double ReportFormat::jnum(double v) const {
  if (raw || !std::isfinite(v)) return v;
  return std::strtod(num(v).c_str(), nullptr);
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path parent = path.parent_path();
  std::error_code ec;
  if (!parent.empty()) {
    std::filesystem::create_directories(parent, ec);
    if (ec) throw IoError(msg("cannot create directory ", parent.string(), ": ", ec.message()));
  }
  std::filesystem::path tmp = path;
  tmp += msg(".tmp.", static_cast<unsigned long>(::getpid()), ".", g_temp_counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(msg("cannot open for writing: ", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp, ec);
      throw IoError(msg("write failure: ", tmp.string()));
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(msg("cannot move report into place at ", path.string(), ": ", ec.message()));
  }
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw std::invalid_argument(
        msg("CsvTable: row with ", cells.size(), " cells against ", header_.size(), " columns"));
  }
  rows_.push_back(std::move(cells));
}

std::string CsvTable::escape(std::string_view cell) {
  if (cell.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (const char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string CsvTable::str() const {
  std::string out;
  const auto append_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += escape(row[i]);
    }
    out += '\n';
  };
  append_row(header_);
  for (const auto& row : rows_) append_row(row);
  return out;
}

std::size_t CsvData::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError(msg("missing CSV column '", name, "'"));
}

CsvData parse_csv(std::string_view text) {
  CsvData data;
  std::vector<std::string> row;
  std::string cell;
  bool in_quotes = false;
  bool row_has_content = false;

  const auto end_cell = [&] {
    row.push_back(std::move(cell));
    cell.clear();
  };
  const auto end_row = [&] {
    end_cell();
    if (data.header.empty()) {
      data.header = std::move(row);
    } else {
      data.rows.push_back(std::move(row));
    }
    row.clear();
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        break;
      case ',':
        end_cell();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !cell.empty() || !row.empty()) end_row();
        break;
      default:
        cell += c;
        row_has_content = true;
    }
  }
  if (row_has_content || !cell.empty() || !row.empty()) end_row();
  return data;
}

CsvData read_csv(const std::filesystem::path& path) { return parse_csv(read_text_file(path)); }

std::string projected_boxes_csv(const std::vector<ProjectedBoxRow>& rows, const ReportFormat& fmt) {
  CsvTable t({"frame", "index", "category", "status", "left", "top", "right", "bottom", "width", "height", "error"});
  for (const ProjectedBoxRow& r : rows) {
    if (r.ok) {
      t.add_row({std::to_string(r.frame), std::to_string(r.index), r.category, "ok", fmt.num(r.left),
                 fmt.num(r.top), fmt.num(r.right), fmt.num(r.bottom), fmt.num(r.w), fmt.num(r.h), ""});
    } else {
      t.add_row({std::to_string(r.frame), std::to_string(r.index), r.category, "error", "", "", "", "", "", "",
                 r.error});
    }
  }
  return t.str();
}

nlohmann::ordered_json projected_boxes_json(const std::vector<ProjectedBoxRow>& rows, const ReportFormat& fmt) {
  nlohmann::ordered_json j{{"report", "projected_boxes"}};
  auto& objects = j["objects"] = nlohmann::ordered_json::array();
  for (const ProjectedBoxRow& r : rows) {
    nlohmann::ordered_json o{{"frame", r.frame}, {"index", r.index}, {"category", r.category}, {"ok", r.ok}};
    if (r.ok) {
      o["left"] = fmt.jnum(r.left);
      o["top"] = fmt.jnum(r.top);
      o["right"] = fmt.jnum(r.right);
      o["bottom"] = fmt.jnum(r.bottom);
      o["width"] = fmt.jnum(r.w);
      o["height"] = fmt.jnum(r.h);
    } else {
      o["error"] = r.error;
    }
    objects.push_back(std::move(o));
  }
  return j;
}

std::string recovered_depth_csv(const std::vector<RecoveredDepthRow>& rows, const ReportFormat& fmt) {
  CsvTable t({"frame", "index", "category", "status", "h", "beta", "dz", "H", "z_label", "z_geo", "error"});
  for (const RecoveredDepthRow& r : rows) {
    if (r.ok) {
      t.add_row({std::to_string(r.frame), std::to_string(r.index), r.category, "ok", fmt.num(r.h),
                 fmt.num(r.beta), fmt.num(r.dz), fmt.num(r.H), fmt.num(r.z_label), fmt.num(r.z_geo), ""});
    } else {
      t.add_row({std::to_string(r.frame), std::to_string(r.index), r.category, "error", "", "", "", "", "", "",
                 r.error});
    }
  }
  return t.str();
}

nlohmann::ordered_json recovered_depth_json(const std::vector<RecoveredDepthRow>& rows, const ReportFormat& fmt) {
  nlohmann::ordered_json j{{"report", "recovered_depth"}};
  auto& objects = j["objects"] = nlohmann::ordered_json::array();
  for (const RecoveredDepthRow& r : rows) {
    nlohmann::ordered_json o{{"frame", r.frame}, {"index", r.index}, {"category", r.category}, {"ok", r.ok}};
    if (r.ok) {
      o["h"] = fmt.jnum(r.h);
      o["beta"] = fmt.jnum(r.beta);
      o["dz"] = fmt.jnum(r.dz);
      o["H"] = fmt.jnum(r.H);
      o["z_label"] = fmt.jnum(r.z_label);
      o["z_geo"] = fmt.jnum(r.z_geo);
    } else {
      o["error"] = r.error;
    }
    objects.push_back(std::move(o));
  }
  return j;
}

std::string formula_comparison_csv(const std::vector<std::pair<int, std::vector<FormulaComparisonRow>>>& frames,
                                   const ReportFormat& fmt) {
  CsvTable t({"frame", "index", "status", "z_true", "h", "z_full", "z_v1", "z_v2", "err_full", "err_v1",
              "err_v2", "rel_full", "rel_v1", "rel_v2", "error"});
  for (const auto& [frame_id, rows] : frames) {
    for (const FormulaComparisonRow& r : rows) {
      if (r.ok) {
        t.add_row({std::to_string(frame_id), std::to_string(r.index), "ok", fmt.num(r.z_true), fmt.num(r.h),
                   fmt.num(r.z_full), fmt.num(r.z_v1), fmt.num(r.z_v2), fmt.num(r.err_full), fmt.num(r.err_v1),
                   fmt.num(r.err_v2), fmt.num(r.rel_full), fmt.num(r.rel_v1), fmt.num(r.rel_v2), ""});
      } else {
        t.add_row({std::to_string(frame_id), std::to_string(r.index), "error", fmt.num(r.z_true), "", "", "", "",
                   "", "", "", "", "", "", r.error});
      }
    }
  }
  return t.str();
}

nlohmann::ordered_json formula_comparison_json(
    const std::vector<std::pair<int, std::vector<FormulaComparisonRow>>>& frames, const ReportFormat& fmt) {
  nlohmann::ordered_json j{{"report", "formula_comparison"}};
  auto& objects = j["objects"] = nlohmann::ordered_json::array();
  for (const auto& [frame_id, rows] : frames) {
    for (const FormulaComparisonRow& r : rows) {
      nlohmann::ordered_json o{{"frame", frame_id}, {"index", r.index}, {"ok", r.ok}};
      o["z_true"] = fmt.jnum(r.z_true);
      if (r.ok) {
        o["h"] = fmt.jnum(r.h);
        o["z_full"] = fmt.jnum(r.z_full);
        o["z_v1"] = fmt.jnum(r.z_v1);
        o["z_v2"] = fmt.jnum(r.z_v2);
        o["err_full"] = fmt.jnum(r.err_full);
        o["err_v1"] = fmt.jnum(r.err_v1);
        o["err_v2"] = fmt.jnum(r.err_v2);
        o["rel_full"] = fmt.jnum(r.rel_full);
        o["rel_v1"] = fmt.jnum(r.rel_v1);
        o["rel_v2"] = fmt.jnum(r.rel_v2);
      } else {
        o["error"] = r.error;
      }
      objects.push_back(std::move(o));
    }
  }
  return j;
}

std::string misalignment_csv(const MisalignmentReport& report, const ReportFormat& fmt) {
  CsvTable t({"range_lo", "range_hi", "count", "truncated", "mean_iou", "mean_abs_du", "mean_abs_dv",
              "mean_abs_dw", "mean_abs_dh"});
  for (const MisalignmentBucket& b : report.buckets) {
    t.add_row({fmt.num(b.range_lo), fmt.num(b.range_hi), std::to_string(b.count), std::to_string(b.truncated),
               fmt.num(b.mean_iou), fmt.num(b.mean_du), fmt.num(b.mean_dv), fmt.num(b.mean_dw),
               fmt.num(b.mean_dh)});
  }
  return t.str();
}

nlohmann::ordered_json misalignment_json(const MisalignmentReport& report, const ReportFormat& fmt) {
  nlohmann::ordered_json j{{"report", "misalignment"}, {"total", report.total}, {"skipped", report.skipped}};
  auto& buckets = j["buckets"] = nlohmann::ordered_json::array();
  for (const MisalignmentBucket& b : report.buckets) {
    buckets.push_back(nlohmann::ordered_json{{"range_lo", fmt.jnum(b.range_lo)},
                                             {"range_hi", bound_or_null(b.range_hi, fmt)},
                                             {"count", b.count},
                                             {"truncated", b.truncated},
                                             {"mean_iou", fmt.jnum(b.mean_iou)},
                                             {"mean_abs_du", fmt.jnum(b.mean_du)},
                                             {"mean_abs_dv", fmt.jnum(b.mean_dv)},
                                             {"mean_abs_dw", fmt.jnum(b.mean_dw)},
                                             {"mean_abs_dh", fmt.jnum(b.mean_dh)}});
  }
  return j;
}

std::string depth_spread_csv(const DepthSpreadTable& table, const ReportFormat& fmt) {
  CsvTable t({"kind", "h_center", "H_center", "count", "max", "min", "diff"});
  for (const DepthSpreadRow& row : table.rows) {
    for (const DepthSpreadCell& cell : row.cells) {
      t.add_row({"cell", fmt.num(cell.h_center), fmt.num(cell.H_center), std::to_string(cell.count),
                 fmt.num(cell.max_z), fmt.num(cell.min_z), fmt.num(cell.diff)});
    }
    t.add_row({"row_avg", fmt.num(row.h_center), "", std::to_string(row.nonempty_cells), fmt.num(row.avg_max),
               fmt.num(row.avg_min), fmt.num(row.avg_diff)});
  }
  return t.str();
}

nlohmann::ordered_json depth_spread_json(const DepthSpreadTable& table, const ReportFormat& fmt) {
  nlohmann::ordered_json j{{"report", "depth_spread"},
                           {"h_tol", fmt.jnum(table.h_tol)},
                           {"H_tol", fmt.jnum(table.H_tol)},
                           {"annotated_h", table.annotated_h}};
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const DepthSpreadRow& row : table.rows) {
    nlohmann::ordered_json r{{"h_center", fmt.jnum(row.h_center)}};
    auto& cells = r["cells"] = nlohmann::ordered_json::array();
    for (const DepthSpreadCell& cell : row.cells) {
      cells.push_back(nlohmann::ordered_json{{"H_center", fmt.jnum(cell.H_center)},
                                             {"count", cell.count},
                                             {"max", fmt.jnum(cell.max_z)},
                                             {"min", fmt.jnum(cell.min_z)},
                                             {"diff", fmt.jnum(cell.diff)}});
    }
    r["avg"] = nlohmann::ordered_json{{"nonempty_cells", row.nonempty_cells},
                                      {"max", fmt.jnum(row.avg_max)},
                                      {"min", fmt.jnum(row.avg_min)},
                                      {"diff", fmt.jnum(row.avg_diff)}};
    rows.push_back(std::move(r));
  }
  return j;
}

std::string sweep_csv(const SweepResult& sweep, const ReportFormat& fmt) {
  CsvTable t({"beta", "r_y", "dz", "status", "z", "error"});
  for (const SweepCell& cell : sweep.cells) {
    if (cell.ok) {
      t.add_row({fmt.num(cell.beta), fmt.num(cell.r_y), fmt.num(cell.dz), "ok", fmt.num(cell.z), ""});
    } else {
      t.add_row({fmt.num(cell.beta), fmt.num(cell.r_y), fmt.num(cell.dz), "error", "", cell.error});
    }
  }
  return t.str();
}

nlohmann::ordered_json sweep_json(const SweepResult& sweep, const ReportFormat& fmt) {
  nlohmann::ordered_json j{{"report", "sensitivity_sweep"},
                           {"ok_count", sweep.ok_count},
                           {"min", fmt.jnum(sweep.min_z)},
                           {"max", fmt.jnum(sweep.max_z)},
                           {"spread", fmt.jnum(sweep.spread)}};
  auto& cells = j["cells"] = nlohmann::ordered_json::array();
  for (const SweepCell& cell : sweep.cells) {
    nlohmann::ordered_json c{{"beta", fmt.jnum(cell.beta)},
                             {"r_y", fmt.jnum(cell.r_y)},
                             {"dz", fmt.jnum(cell.dz)},
                             {"ok", cell.ok}};
    if (cell.ok) {
      c["z"] = fmt.jnum(cell.z);
    } else {
      c["error"] = cell.error;
    }
    cells.push_back(std::move(c));
  }
  return j;
}

std::string depth_metrics_csv(const std::vector<DepthErrorStats>& stats, const ReportFormat& fmt) {
  CsvTable t({"range_lo", "range_hi", "count", "silog", "abs_rel", "sq_rel", "irmse"});
  for (const DepthErrorStats& s : stats) {
    t.add_row({fmt.num(s.range_lo), fmt.num(s.range_hi), std::to_string(s.count), fmt.num(s.silog),
               fmt.num(s.abs_rel), fmt.num(s.sq_rel), fmt.num(s.irmse)});
  }
  return t.str();
}

nlohmann::ordered_json depth_metrics_json(const std::vector<DepthErrorStats>& stats, const ReportFormat& fmt) {
  nlohmann::ordered_json j{{"report", "depth_metrics"}};
  auto& buckets = j["buckets"] = nlohmann::ordered_json::array();
  for (const DepthErrorStats& s : stats) {
    buckets.push_back(nlohmann::ordered_json{{"range_lo", fmt.jnum(s.range_lo)},
                                             {"range_hi", bound_or_null(s.range_hi, fmt)},
                                             {"count", s.count},
                                             {"silog", fmt.jnum(s.silog)},
                                             {"abs_rel", fmt.jnum(s.abs_rel)},
                                             {"sq_rel", fmt.jnum(s.sq_rel)},
                                             {"irmse", fmt.jnum(s.irmse)}});
  }
  return j;
}

std::string ap_report_csv(const std::vector<APRunSummary>& runs, const ReportFormat& fmt) {
  CsvTable t({"category", "task", "difficulty", "iou_threshold", "recall_positions", "ap", "counted_gts",
              "matched", "unmatched_gts", "false_positives"});
  for (const APRunSummary& run : runs) {
    t.add_row({run.config.category, to_string(run.config.task), to_string(run.config.difficulty),
               fmt.num(run.config.iou_threshold), std::to_string(run.config.recall_positions),
               fmt.num(run.result.ap), std::to_string(run.result.counted_gts), std::to_string(run.result.matched),
               std::to_string(run.result.unmatched_gts), std::to_string(run.result.false_positives)});
  }
  return t.str();
}

nlohmann::ordered_json ap_report_json(const std::vector<APRunSummary>& runs, const ReportFormat& fmt) {
  nlohmann::ordered_json j{{"report", "average_precision"}};
  auto& out = j["runs"] = nlohmann::ordered_json::array();
  for (const APRunSummary& run : runs) {
    nlohmann::ordered_json r{{"category", run.config.category},
                             {"task", to_string(run.config.task)},
                             {"difficulty", to_string(run.config.difficulty)},
                             {"iou_threshold", fmt.jnum(run.config.iou_threshold)},
                             {"recall_positions", run.config.recall_positions},
                             {"ap", fmt.jnum(run.result.ap)},
                             {"counted_gts", run.result.counted_gts},
                             {"matched", run.result.matched},
                             {"unmatched_gts", run.result.unmatched_gts},
                             {"false_positives", run.result.false_positives}};
    auto& samples = r["pr_samples"] = nlohmann::ordered_json::array();
    for (const auto& [recall, precision] : run.result.pr_samples) {
      samples.push_back(nlohmann::ordered_json::array({fmt.jnum(recall), fmt.jnum(precision)}));
    }
    out.push_back(std::move(r));
  }
  return j;
}

std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace geodepth
