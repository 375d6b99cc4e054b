#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "geodepth/errors.hpp"
#include "geodepth/kitti_io.hpp"
#include "geodepth/util.hpp"

using namespace geodepth;
namespace fs = std::filesystem;

namespace {

const char kCarLine[] =
    "Car 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59";
const char kDontCareLine[] =
    "DontCare -1 -1 -10 500 160 520 170 -1 -1 -1 -1000 -1000 -1000 -10";

const char kCalibText[] =
    "P0: 7.215377000000e+02 0.000000000000e+00 6.095593000000e+02 0.000000000000e+00 "
    "0.000000000000e+00 7.215377000000e+02 1.728540000000e+02 0.000000000000e+00 "
    "0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 0.000000000000e+00\n"
    "P2: 7.215377000000e+02 0.000000000000e+00 6.095593000000e+02 4.485728000000e+01 "
    "0.000000000000e+00 7.215377000000e+02 1.728540000000e+02 2.163791000000e-01 "
    "0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 2.745884000000e-03\n"
    "R0_rect: 9.999239000000e-01 9.837760000000e-03 -7.445048000000e-03\n"
    "Tr_velo_to_cam: 7.533745000000e-03 -9.999714000000e-01 -6.166020000000e-04\n";

/// Unique scratch directory, removed on destruction.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("geodepth-test-" + std::to_string(::getpid()) + "-" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("the canonical object line parses field by field") {
  const LabelRecord r = parse_label_line(kCarLine, 1);
  CHECK(r.category == "Car");
  CHECK(r.truncation == 0.0);
  CHECK(r.occlusion == 0);
  CHECK(r.alpha == -1.58);
  CHECK(r.left == 587.01);
  CHECK(r.top == 173.33);
  CHECK(r.right == 614.12);
  CHECK(r.bottom == 200.12);
  CHECK(r.dim_h == 1.65);
  CHECK(r.dim_w == 1.67);
  CHECK(r.dim_l == 3.64);
  CHECK(r.x == -0.65);
  CHECK(r.y == 1.71);
  CHECK(r.z == 46.70);
  CHECK(r.rotation_y == -1.59);
  CHECK_FALSE(r.score.has_value());
  CHECK_FALSE(r.ignorable());
  CHECK(r.bbox_height() == doctest::Approx(26.79));
  // This line is already in canonical form, so serialization reproduces it.
  CHECK(serialize_label(r) == kCarLine);
}

TEST_CASE("sentinel records parse and stay ignorable through a round trip") {
  const LabelRecord r = parse_label_line(kDontCareLine, 1);
  CHECK(r.category == "DontCare");
  CHECK(r.truncation == -1.0);
  CHECK(r.occlusion == -1);
  CHECK(r.ignorable());
  CHECK_THROWS_AS(to_box3d(r), std::domain_error);
  // Non-canonical input (bare integers): values survive even though the
  // text is reformatted.
  const LabelRecord again = parse_label_line(serialize_label(r), 1);
  CHECK(again.category == r.category);
  CHECK(again.truncation == r.truncation);
  CHECK(again.occlusion == r.occlusion);
  CHECK(again.left == r.left);
  CHECK(again.z == r.z);
  CHECK(again.rotation_y == r.rotation_y);
}

TEST_CASE("a 16th field is the detection score") {
  const std::string line = std::string(kCarLine) + " 0.97";
  const LabelRecord r = parse_label_line(line, 1);
  REQUIRE(r.score.has_value());
  CHECK(*r.score == 0.97);
  CHECK(serialize_label(r) == line);
}

TEST_CASE("malformed label lines raise parse errors with position info") {
  CHECK_THROWS_AS(parse_label_line("Car 0.00 0", 3), ParseError);
  CHECK_THROWS_AS(parse_label_line(std::string(kCarLine) + " 1.0 2.0", 1), ParseError);
  CHECK_THROWS_AS(parse_label_line("Car zero 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59", 1),
                  ParseError);
  // Occlusion must be integral and in range.
  CHECK_THROWS_AS(parse_label_line("Car 0.00 0.5 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59", 1),
                  ParseError);
  CHECK_THROWS_AS(parse_label_line("Car 0.00 4 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59", 1),
                  ParseError);
  // Truncation is 0..1 or the -1 sentinel.
  CHECK_THROWS_AS(parse_label_line("Car 1.50 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59", 1),
                  ParseError);
  CHECK_THROWS_AS(parse_label_line("Car -0.50 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59", 1),
                  ParseError);
  // Non-finite reals never pass.
  CHECK_THROWS_AS(parse_label_line("Car 0.00 0 nan 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59", 1),
                  ParseError);
  try {
    parse_label_line("Car 0.00 0", 7);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 7") != std::string::npos);
  }
}

TEST_CASE("fuzzed records survive parse-serialize-parse") {
  DeterministicRng rng(51);
  for (int i = 0; i < 1000; ++i) {
    LabelRecord rec;
    rec.category = (i % 7 == 0) ? "Pedestrian" : "Car";
    rec.truncation = (i % 11 == 0) ? -1.0 : std::round(rng.uniform(0, 1) * 100) / 100;
    rec.occlusion = rng.uniform_int(-1, 3);
    rec.alpha = rng.uniform(-4, 4);
    rec.left = rng.uniform(0, 600);
    rec.top = rng.uniform(0, 180);
    rec.right = rec.left + rng.uniform(0, 600);
    rec.bottom = rec.top + rng.uniform(0, 180);
    rec.dim_h = rng.uniform(0.5, 3);
    rec.dim_w = rng.uniform(0.5, 3);
    rec.dim_l = rng.uniform(0.5, 10);
    rec.x = rng.uniform(-50, 50);
    rec.y = rng.uniform(-5, 5);
    rec.z = rng.uniform(0, 100);
    rec.rotation_y = rng.uniform(-4, 4);
    if (i % 3 == 0) rec.score = rng.uniform(0, 1);

    const std::string text = serialize_label(parse_label_line(serialize_label(rec), 1));
    const LabelRecord a = parse_label_line(text, 1);
    const std::string text2 = serialize_label(a);
    CHECK(text == text2);  // serialization is a fixed point after one parse
    const LabelRecord b = parse_label_line(text2, 1);
    CHECK(a.category == b.category);
    CHECK(a.truncation == b.truncation);
    CHECK(a.occlusion == b.occlusion);
    CHECK(a.alpha == b.alpha);
    CHECK(a.left == b.left);
    CHECK(a.top == b.top);
    CHECK(a.right == b.right);
    CHECK(a.bottom == b.bottom);
    CHECK(a.dim_h == b.dim_h);
    CHECK(a.dim_w == b.dim_w);
    CHECK(a.dim_l == b.dim_l);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.z == b.z);
    CHECK(a.rotation_y == b.rotation_y);
    CHECK(a.score.has_value() == b.score.has_value());
    if (a.score) CHECK(*a.score == *b.score);
  }
}

TEST_CASE("to_box3d maps the annotation onto the box type") {
  const LabelRecord r = parse_label_line(kCarLine, 1);
  const Box3D box = to_box3d(r);
  CHECK(box.W == r.dim_w);
  CHECK(box.H == r.dim_h);
  CHECK(box.L == r.dim_l);
  CHECK(box.bottom_center.x() == r.x);
  CHECK(box.bottom_center.y() == r.y);
  CHECK(box.bottom_center.z() == r.z);
  CHECK(box.r_y == doctest::Approx(r.rotation_y));
}

TEST_CASE("label text splits into records and reports the offending line") {
  const std::string text = std::string(kCarLine) + "\n" + kDontCareLine + "\n";
  const auto recs = parse_label_text(text);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].category == "Car");
  CHECK(recs[1].category == "DontCare");
  CHECK(parse_label_text("").empty());
  CHECK(parse_label_text("\n\n").empty());
  try {
    parse_label_text(std::string(kCarLine) + "\nCar bogus\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("calibration extraction matches the positional layout") {
  const FrameCalib calib = parse_calib_text(kCalibText, "P2");
  CHECK(calib.camera.f_u == 721.5377);
  CHECK(calib.camera.f_v == 721.5377);
  CHECK(calib.camera.c_u == 609.5593);
  CHECK(calib.camera.c_v == 172.854);
  CHECK(calib.camera.t_proj.x() == 44.85728);
  CHECK(calib.camera.t_proj.y() == 0.2163791);
  CHECK(calib.camera.t_proj.z() == 0.002745884);
  CHECK(calib.reference_key == "P2");
  REQUIRE(calib.matrices.count("P0") == 1);
  REQUIRE(calib.matrices.count("P2") == 1);
  // Row-major positions: (0,0) (0,2) (1,1) (1,2).
  const auto& P2 = calib.matrices.at("P2");
  CHECK(P2(0, 0) == 721.5377);
  CHECK(P2(0, 2) == 609.5593);
  CHECK(P2(1, 1) == 721.5377);
  CHECK(P2(1, 2) == 172.854);
  CHECK(P2(2, 3) == 0.002745884);
  // Non-matrix lines survive verbatim.
  REQUIRE(calib.extra.size() == 2);
  CHECK(calib.extra[0].first == "R0_rect");
  CHECK(calib.extra[1].first == "Tr_velo_to_cam");

  // Choosing the other camera changes the extracted projection offset.
  const FrameCalib p0 = parse_calib_text(kCalibText, "P0");
  CHECK(p0.camera.t_proj.x() == 0.0);
}

TEST_CASE("calibration text round-trips through serialization") {
  const FrameCalib calib = parse_calib_text(kCalibText, "P2");
  const FrameCalib again = parse_calib_text(serialize_calib(calib), "P2");
  REQUIRE(again.matrices.size() == calib.matrices.size());
  for (const auto& [key, M] : calib.matrices) {
    REQUIRE(again.matrices.count(key) == 1);
    CHECK((again.matrices.at(key) - M).cwiseAbs().maxCoeff() == 0.0);
  }
  REQUIRE(again.extra.size() == calib.extra.size());
  for (std::size_t i = 0; i < calib.extra.size(); ++i) {
    CHECK(again.extra[i].first == calib.extra[i].first);
  }
}

TEST_CASE("calibration parsing rejects malformed input") {
  CHECK_THROWS_AS(parse_calib_text("P2: 1 2 3\n", "P2"), ParseError);      // 12 reals required
  CHECK_THROWS_AS(parse_calib_text("no colon here\n", "P2"), ParseError);
  CHECK_THROWS_AS(parse_calib_text(kCalibText, "P7"), ParseError);         // missing reference
  CHECK_THROWS_AS(parse_calib_text("P2: 1 2 3 4 5 6 7 8 9 10 11 twelve\n", "P2"), ParseError);
}

TEST_CASE("frame ids format as six-digit file names") {
  CHECK(frame_file_name(0) == "000000.txt");
  CHECK(frame_file_name(7) == "000007.txt");
  CHECK(frame_file_name(123456) == "123456.txt");
}

TEST_CASE("frame sets load label and calibration pairs by id") {
  TempDir tmp;
  const fs::path labels = tmp.path / "label_2";
  const fs::path calib = tmp.path / "calib";
  write_file(labels / "000000.txt", std::string(kCarLine) + "\n");
  write_file(labels / "000002.txt", "");
  write_file(calib / "000000.txt", kCalibText);
  write_file(calib / "000002.txt", kCalibText);

  const FrameSet set = load_frame_set(labels, calib, {0, 2});
  REQUIRE(set.frames.size() == 2);
  CHECK(set.errors.empty());
  CHECK(set.frames[0].id == 0);
  CHECK(set.frames[0].labels.size() == 1);
  CHECK(set.frames[1].id == 2);
  CHECK(set.frames[1].labels.empty());
  CHECK(set.frames[0].calib.camera.f_u == 721.5377);
}

TEST_CASE("frame sets report partial failures and reject total ones") {
  TempDir tmp;
  const fs::path labels = tmp.path / "label_2";
  const fs::path calib = tmp.path / "calib";
  write_file(labels / "000000.txt", std::string(kCarLine) + "\n");
  write_file(calib / "000000.txt", kCalibText);

  const FrameSet set = load_frame_set(labels, calib, {0, 5});
  CHECK(set.frames.size() == 1);
  REQUIRE(set.errors.size() == 1);
  CHECK(set.errors[0].first == 5);

  CHECK_THROWS_AS(load_frame_set(labels, calib, {9, 10}), IoError);
  CHECK_THROWS_AS(load_frame_set(tmp.path / "missing", calib, {0}), IoError);
}

TEST_CASE("read_text_file reports unreadable paths") {
  CHECK_THROWS_AS(read_text_file("/nonexistent/geodepth/file.txt"), IoError);
}
