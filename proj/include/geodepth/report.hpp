#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geodepth/analysis.hpp"
#include "geodepth/depth_formula.hpp"
#include "geodepth/eval_depth.hpp"
#include "geodepth/eval_detection.hpp"

namespace geodepth {

/// Number formatting shared by every emitted report: six significant
/// digits by default for stable goldens, or full precision when raw is
/// set.
struct ReportFormat {
  bool raw = false;

  /// Text form of a value ("%.6g" or "%.17g"; infinities print as inf).
  std::string num(double v) const;

  /// The value a JSON report stores: v itself when raw, otherwise v
  /// re-parsed from its six-digit text so CSV and JSON agree.
  double jnum(double v) const;
};

/// Writes via a sibling temporary file plus rename, creating parent
/// directories as needed; a failed write never leaves a partial file at
/// the destination.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Minimal CSV support: comma separator, newline rows, cells quoted only
/// when they contain a comma, quote, or newline.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::string str() const;

  static std::string escape(std::string_view cell);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parsed CSV file: header names plus rows of raw cell text.
struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws ParseError when absent.
  std::size_t column(const std::string& name) const;
};

CsvData read_csv(const std::filesystem::path& path);
CsvData parse_csv(std::string_view text);

// --- concrete report emitters -------------------------------------------

/// Per-object projected 2D box, or the reason projection failed.
struct ProjectedBoxRow {
  int frame = 0;
  int index = 0;
  std::string category;
  bool ok = false;
  std::string error;
  double left = 0, top = 0, right = 0, bottom = 0;
  double w = 0, h = 0;
};

std::string projected_boxes_csv(const std::vector<ProjectedBoxRow>& rows, const ReportFormat& fmt);
nlohmann::ordered_json projected_boxes_json(const std::vector<ProjectedBoxRow>& rows, const ReportFormat& fmt);

/// Per-object geometric depth recovery result.
struct RecoveredDepthRow {
  int frame = 0;
  int index = 0;
  std::string category;
  bool ok = false;
  std::string error;
  double h = 0;
  double beta = 0;
  double dz = 0;
  double H = 0;
  double z_label = 0;
  double z_geo = 0;
};

std::string recovered_depth_csv(const std::vector<RecoveredDepthRow>& rows, const ReportFormat& fmt);
nlohmann::ordered_json recovered_depth_json(const std::vector<RecoveredDepthRow>& rows, const ReportFormat& fmt);

std::string formula_comparison_csv(const std::vector<std::pair<int, std::vector<FormulaComparisonRow>>>& frames,
                                   const ReportFormat& fmt);
nlohmann::ordered_json formula_comparison_json(
    const std::vector<std::pair<int, std::vector<FormulaComparisonRow>>>& frames, const ReportFormat& fmt);

std::string misalignment_csv(const MisalignmentReport& report, const ReportFormat& fmt);
nlohmann::ordered_json misalignment_json(const MisalignmentReport& report, const ReportFormat& fmt);

std::string depth_spread_csv(const DepthSpreadTable& table, const ReportFormat& fmt);
nlohmann::ordered_json depth_spread_json(const DepthSpreadTable& table, const ReportFormat& fmt);

std::string sweep_csv(const SweepResult& sweep, const ReportFormat& fmt);
nlohmann::ordered_json sweep_json(const SweepResult& sweep, const ReportFormat& fmt);

std::string depth_metrics_csv(const std::vector<DepthErrorStats>& stats, const ReportFormat& fmt);
nlohmann::ordered_json depth_metrics_json(const std::vector<DepthErrorStats>& stats, const ReportFormat& fmt);

/// One AP evaluation run and its outcome.
struct APRunSummary {
  EvalConfig config;
  APResult result;
};

std::string ap_report_csv(const std::vector<APRunSummary>& runs, const ReportFormat& fmt);
nlohmann::ordered_json ap_report_json(const std::vector<APRunSummary>& runs, const ReportFormat& fmt);

/// Canonical serialized form of a JSON report: two-space indent plus a
/// trailing newline.
std::string json_text(const nlohmann::ordered_json& j);

}  // namespace geodepth
