#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "geodepth/analysis.hpp"
#include "geodepth/depth_formula.hpp"
#include "geodepth/errors.hpp"
#include "geodepth/eval_depth.hpp"
#include "geodepth/eval_detection.hpp"
#include "geodepth/kitti_io.hpp"
#include "geodepth/report.hpp"

using namespace geodepth;
namespace fs = std::filesystem;

namespace {

/// Self-deleting scratch directory for file-writing tests.
struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path = fs::temp_directory_path() /
           ("geodepth-report-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("csv cells are quoted only when they need to be") {
  CHECK(CsvTable::escape("plain") == "plain");
  CHECK(CsvTable::escape("") == "");
  CHECK(CsvTable::escape("with space") == "with space");
  CHECK(CsvTable::escape("a,b") == "\"a,b\"");
  CHECK(CsvTable::escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(CsvTable::escape("two\nlines") == "\"two\nlines\"");

  CsvTable t({"name", "note"});
  t.add_row({"x", "a,b"});
  CHECK(t.str() == "name,note\nx,\"a,b\"\n");
  CHECK_THROWS_AS(t.add_row({"only one"}), std::invalid_argument);
}

TEST_CASE("csv writer and parser round-trip awkward content") {
  CsvTable t({"id", "text"});
  t.add_row({"1", "comma, inside"});
  t.add_row({"2", "a \"quoted\" word"});
  t.add_row({"3", "line\nbreak"});
  t.add_row({"4", ""});
  const CsvData data = parse_csv(t.str());
  REQUIRE(data.header == std::vector<std::string>{"id", "text"});
  REQUIRE(data.rows.size() == 4);
  CHECK(data.rows[0][1] == "comma, inside");
  CHECK(data.rows[1][1] == "a \"quoted\" word");
  CHECK(data.rows[2][1] == "line\nbreak");
  CHECK(data.rows[3][1] == "");

  // Windows line endings and a missing final newline both parse.
  const CsvData crlf = parse_csv("a,b\r\n1,2\r\n3,4");
  REQUIRE(crlf.rows.size() == 2);
  CHECK(crlf.rows[1] == std::vector<std::string>{"3", "4"});
  CHECK(parse_csv("").header.empty());

  CHECK(data.column("text") == 1);
  CHECK_THROWS_AS(data.column("absent"), ParseError);
}

TEST_CASE("report numbers default to six significant digits with a raw escape hatch") {
  const ReportFormat fmt;
  CHECK(fmt.num(1.0 / 3.0) == "0.333333");
  CHECK(fmt.num(123456789.0) == "1.23457e+08");
  CHECK(fmt.num(2.0) == "2");
  CHECK(fmt.num(std::numeric_limits<double>::infinity()) == "inf");

  const ReportFormat raw{true};
  const double v = 0.1234567890123456789;
  CHECK(std::strtod(raw.num(v).c_str(), nullptr) == v);  // %.17g is lossless
  CHECK(raw.jnum(v) == v);

  // The JSON value is the six-digit text re-parsed, so both formats agree.
  CHECK(fmt.jnum(v) == std::strtod(fmt.num(v).c_str(), nullptr));
  CHECK(fmt.num(fmt.jnum(v)) == fmt.num(v));
  CHECK(std::isinf(fmt.jnum(std::numeric_limits<double>::infinity())));
}

TEST_CASE("atomic writes create parents and leave no temporaries behind") {
  TempDir tmp;
  const fs::path target = tmp.path / "a" / "b" / "report.csv";
  write_text_file_atomic(target, "hello\n");
  CHECK(read_text_file(target) == "hello\n");
  write_text_file_atomic(target, "replaced");
  CHECK(read_text_file(target) == "replaced");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(target.parent_path())) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("depth metrics reports use the fixed header and null open bounds") {
  const std::vector<DepthSample> samples{{10.0, 10.0, 10.0}, {22.0, 20.0, 20.0}};
  const double inf = std::numeric_limits<double>::infinity();
  const auto stats = bucketed_depth_errors(samples, {{0, 15}, {15, inf}});
  const ReportFormat fmt;

  const CsvData csv = parse_csv(depth_metrics_csv(stats, fmt));
  CHECK(csv.header ==
        std::vector<std::string>{"range_lo", "range_hi", "count", "silog", "abs_rel", "sq_rel", "irmse"});
  REQUIRE(csv.rows.size() == 2);
  CHECK(csv.rows[0][1] == "15");
  CHECK(csv.rows[1][1] == "inf");
  CHECK(csv.rows[1][2] == "1");
  CHECK(csv.rows[1][4] == fmt.num(stats[1].abs_rel));

  const nlohmann::ordered_json j = depth_metrics_json(stats, fmt);
  CHECK(j["report"] == "depth_metrics");
  REQUIRE(j["buckets"].size() == 2);
  CHECK(j["buckets"][1]["range_hi"].is_null());
  CHECK(j["buckets"][0]["range_hi"] == 15.0);
  // CSV text and JSON value describe the same number.
  CHECK(j["buckets"][1]["abs_rel"].get<double>() == std::strtod(csv.rows[1][4].c_str(), nullptr));
}

TEST_CASE("projected box and recovered depth reports carry ok and error rows") {
  const ReportFormat fmt;
  std::vector<ProjectedBoxRow> rows(2);
  rows[0].frame = 3;
  rows[0].index = 0;
  rows[0].category = "Car";
  rows[0].ok = true;
  rows[0].left = 10.5;
  rows[0].top = 20.25;
  rows[0].right = 110.5;
  rows[0].bottom = 60.25;
  rows[0].w = 100;
  rows[0].h = 40;
  rows[1].frame = 3;
  rows[1].index = 1;
  rows[1].category = "Pedestrian";
  rows[1].ok = false;
  rows[1].error = "corner behind camera";

  const CsvData csv = parse_csv(projected_boxes_csv(rows, fmt));
  REQUIRE(csv.rows.size() == 2);
  CHECK(csv.rows[0][csv.column("status")] == "ok");
  CHECK(csv.rows[0][csv.column("left")] == "10.5");
  CHECK(csv.rows[0][csv.column("error")] == "");
  CHECK(csv.rows[1][csv.column("status")] == "error");
  CHECK(csv.rows[1][csv.column("left")] == "");
  CHECK(csv.rows[1][csv.column("error")] == "corner behind camera");

  const nlohmann::ordered_json j = projected_boxes_json(rows, fmt);
  CHECK(j["report"] == "projected_boxes");
  CHECK(j["objects"][0]["ok"] == true);
  CHECK(j["objects"][0]["left"] == 10.5);
  CHECK(!j["objects"][0].contains("error"));
  CHECK(j["objects"][1]["error"] == "corner behind camera");
  CHECK(!j["objects"][1].contains("left"));

  std::vector<RecoveredDepthRow> drows(1);
  drows[0].frame = 0;
  drows[0].index = 2;
  drows[0].category = "Car";
  drows[0].ok = true;
  drows[0].h = 30;
  drows[0].beta = 0.02;
  drows[0].dz = 0.8;
  drows[0].H = 1.5;
  drows[0].z_label = 35.5;
  drows[0].z_geo = 36.1;
  const CsvData dcsv = parse_csv(recovered_depth_csv(drows, fmt));
  CHECK(dcsv.header == std::vector<std::string>{"frame", "index", "category", "status", "h", "beta", "dz", "H",
                                               "z_label", "z_geo", "error"});
  CHECK(dcsv.rows[0][dcsv.column("z_geo")] == "36.1");
  const nlohmann::ordered_json dj = recovered_depth_json(drows, fmt);
  CHECK(dj["objects"][0]["z_geo"] == 36.1);
}

TEST_CASE("formula comparison report keeps frame attribution and error rows") {
  const ReportFormat fmt;
  FormulaComparisonRow ok;
  ok.index = 0;
  ok.ok = true;
  ok.z_true = 30;
  ok.h = 36.2;
  ok.z_full = 30.4;
  ok.z_v1 = 30.1;
  ok.z_v2 = 29.9;
  ok.err_full = 0.4;
  ok.err_v1 = 0.1;
  ok.err_v2 = -0.1;
  ok.rel_full = 0.4 / 30;
  ok.rel_v1 = 0.1 / 30;
  ok.rel_v2 = -0.1 / 30;
  FormulaComparisonRow bad;
  bad.index = 1;
  bad.ok = false;
  bad.z_true = 0.3;
  bad.error = "behind camera";

  const std::vector<std::pair<int, std::vector<FormulaComparisonRow>>> frames{{7, {ok, bad}}};
  const CsvData csv = parse_csv(formula_comparison_csv(frames, fmt));
  REQUIRE(csv.rows.size() == 2);
  CHECK(csv.rows[0][csv.column("frame")] == "7");
  CHECK(csv.rows[0][csv.column("z_full")] == "30.4");
  CHECK(csv.rows[1][csv.column("status")] == "error");
  CHECK(csv.rows[1][csv.column("error")] == "behind camera");

  const nlohmann::ordered_json j = formula_comparison_json(frames, fmt);
  CHECK(j["report"] == "formula_comparison");
  CHECK(j["objects"][0]["frame"] == 7);
  CHECK(j["objects"][1]["z_true"] == 0.3);
  CHECK(j["objects"][1]["error"] == "behind camera");
}

TEST_CASE("misalignment and depth spread reports mirror their structures") {
  const ReportFormat fmt;
  MisalignmentReport report = misalignment_report({});
  report.total = 5;
  report.skipped = 1;
  report.buckets[1].count = 2;
  report.buckets[1].mean_iou = 0.875;

  const CsvData csv = parse_csv(misalignment_csv(report, fmt));
  CHECK(csv.header == std::vector<std::string>{"range_lo", "range_hi", "count", "truncated", "mean_iou",
                                              "mean_abs_du", "mean_abs_dv", "mean_abs_dw", "mean_abs_dh"});
  REQUIRE(csv.rows.size() == 4);
  CHECK(csv.rows[1][csv.column("mean_iou")] == "0.875");
  CHECK(csv.rows[3][csv.column("range_hi")] == "inf");

  const nlohmann::ordered_json j = misalignment_json(report, fmt);
  CHECK(j["report"] == "misalignment");
  CHECK(j["total"] == 5);
  CHECK(j["buckets"][3]["range_hi"].is_null());
  CHECK(j["buckets"][1]["mean_iou"] == 0.875);

  Frame frame;
  frame.id = 0;
  LabelRecord rec;
  rec.category = "Car";
  rec.left = 100;
  rec.top = 100;
  rec.right = 150;
  rec.bottom = 130;
  rec.dim_h = 1.5;
  rec.dim_w = 1.6;
  rec.dim_l = 3.9;
  rec.z = 40;
  frame.labels.push_back(rec);
  const DepthSpreadTable table = depth_spread_table({frame}, {30.0}, {1.5, 1.6}, 0.5, 0.005, true);
  const CsvData scsv = parse_csv(depth_spread_csv(table, fmt));
  CHECK(scsv.header == std::vector<std::string>{"kind", "h_center", "H_center", "count", "max", "min", "diff"});
  REQUIRE(scsv.rows.size() == 3);  // two cells plus one row average
  CHECK(scsv.rows[0][0] == "cell");
  CHECK(scsv.rows[2][0] == "row_avg");
  CHECK(scsv.rows[2][scsv.column("H_center")] == "");
  CHECK(scsv.rows[0][scsv.column("count")] == "1");
  const nlohmann::ordered_json sj = depth_spread_json(table, fmt);
  CHECK(sj["report"] == "depth_spread");
  CHECK(sj["rows"][0]["cells"].size() == 2);
  CHECK(sj["rows"][0]["avg"]["nonempty_cells"] == 1);
}

TEST_CASE("sweep and average precision reports mirror their structures") {
  const ReportFormat fmt;
  const SweepResult sweep = sensitivity_sweep(1.5, 30.0, kitti_like_camera(), {0.0, 0.05}, {0.0});
  const CsvData csv = parse_csv(sweep_csv(sweep, fmt));
  CHECK(csv.header == std::vector<std::string>{"beta", "r_y", "dz", "status", "z", "error"});
  REQUIRE(csv.rows.size() == 2);
  CHECK(csv.rows[0][csv.column("status")] == "ok");
  CHECK(csv.rows[0][csv.column("z")] == fmt.num(sweep.cells[0].z));
  const nlohmann::ordered_json j = sweep_json(sweep, fmt);
  CHECK(j["report"] == "sensitivity_sweep");
  CHECK(j["ok_count"] == 2);
  CHECK(j["cells"].size() == 2);
  CHECK(j["cells"][0]["z"].get<double>() == fmt.jnum(sweep.cells[0].z));

  APRunSummary run;
  run.config.category = "Car";
  run.config.task = EvalTask::bev;
  run.config.difficulty = Difficulty::moderate;
  run.config.iou_threshold = 0.7;
  run.config.recall_positions = 40;
  run.result.ap = 87.5;
  run.result.matched = 7;
  run.result.unmatched_gts = 1;
  run.result.false_positives = 2;
  run.result.counted_gts = 8;
  run.result.pr_samples = {{0.5, 1.0}, {0.875, 0.7}};
  const CsvData acsv = parse_csv(ap_report_csv({run}, fmt));
  CHECK(acsv.header == std::vector<std::string>{"category", "task", "difficulty", "iou_threshold",
                                               "recall_positions", "ap", "counted_gts", "matched",
                                               "unmatched_gts", "false_positives"});
  REQUIRE(acsv.rows.size() == 1);
  CHECK(acsv.rows[0][acsv.column("task")] == to_string(EvalTask::bev));
  CHECK(acsv.rows[0][acsv.column("ap")] == "87.5");
  CHECK(acsv.rows[0][acsv.column("counted_gts")] == "8");
  const nlohmann::ordered_json aj = ap_report_json({run}, fmt);
  CHECK(aj["report"] == "average_precision");
  CHECK(aj["runs"][0]["task"] == to_string(EvalTask::bev));
  CHECK(aj["runs"][0]["difficulty"] == to_string(Difficulty::moderate));
  CHECK(aj["runs"][0]["pr_samples"].size() == 2);
  CHECK(aj["runs"][0]["pr_samples"][1][0] == 0.875);
}

TEST_CASE("json reports serialize with two-space indent and a trailing newline") {
  const nlohmann::ordered_json j{{"a", 1}};
  const std::string text = json_text(j);
  CHECK(text == "{\n  \"a\": 1\n}\n");
}
