#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "geodepth/analysis.hpp"
#include "geodepth/camera.hpp"
#include "geodepth/util.hpp"
#include "oracles.hpp"

using namespace geodepth;

namespace {

CameraIntrinsics offset_camera() {
  CameraIntrinsics cam;
  cam.f_u = 721.5377;
  cam.f_v = 721.5377;
  cam.c_u = 609.5593;
  cam.c_v = 172.854;
  cam.t_proj << 44.85728, 0.2163791, 0.002745884;
  return cam;
}

}  // namespace

TEST_CASE("project_point matches the homogeneous matrix oracle") {
  const CameraIntrinsics cam = offset_camera();
  DeterministicRng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Vector3d p(rng.uniform(-30, 30), rng.uniform(-5, 5), rng.uniform(0.5, 90));
    const PixelPoint got = project_point(cam, p);
    const PixelPoint want = oracles::project_matrix(cam, p);
    CHECK(got.u == doctest::Approx(want.u).epsilon(1e-12));
    CHECK(got.v == doctest::Approx(want.v).epsilon(1e-12));
    CHECK(got.z == want.z);
  }
}

TEST_CASE("project then backproject is the identity") {
  const CameraIntrinsics cam = offset_camera();
  DeterministicRng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Vector3d p(rng.uniform(-40, 40), rng.uniform(-10, 10), rng.uniform(1e-3, 120));
    const Eigen::Vector3d back = backproject_pixel(cam, project_point(cam, p));
    CHECK(back.x() == doctest::Approx(p.x()).epsilon(1e-9));
    CHECK(back.y() == doctest::Approx(p.y()).epsilon(1e-9));
    CHECK(back.z() == p.z());
  }
}

TEST_CASE("projection respects the minimum depth") {
  const CameraIntrinsics cam = kitti_like_camera();
  CHECK_THROWS_AS(project_point(cam, {0.0, 0.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(project_point(cam, {0.0, 0.0, 1e-7}), std::domain_error);
  CHECK_THROWS_AS(project_point(cam, {0.0, 0.0, -5.0}), std::domain_error);
  CHECK_THROWS_AS(backproject_pixel(cam, 0.0, 0.0, 0.0), std::domain_error);
  CHECK_NOTHROW(project_point(cam, {0.0, 0.0, kMinDepth}));
}

TEST_CASE("principal point projects to the principal pixel") {
  CameraIntrinsics cam = kitti_like_camera();
  const PixelPoint q = project_point(cam, {0.0, 0.0, 17.0});
  CHECK(q.u == doctest::Approx(cam.c_u));
  CHECK(q.v == doctest::Approx(cam.c_v));

  // The projective offset shifts pixels by t/z.
  cam.t_proj << 10.0, -20.0, 0.0;
  const PixelPoint shifted = project_point(cam, {0.0, 0.0, 17.0});
  CHECK(shifted.u == doctest::Approx(cam.c_u + 10.0 / 17.0));
  CHECK(shifted.v == doctest::Approx(cam.c_v - 20.0 / 17.0));
}

TEST_CASE("projection matrix round trip preserves the camera") {
  const CameraIntrinsics cam = offset_camera();
  const CameraIntrinsics back = CameraIntrinsics::from_projection_matrix(cam.projection_matrix());
  CHECK(back.f_u == cam.f_u);
  CHECK(back.f_v == cam.f_v);
  CHECK(back.c_u == cam.c_u);
  CHECK(back.c_v == cam.c_v);
  CHECK((back.t_proj - cam.t_proj).norm() == 0.0);
}

TEST_CASE("beta_from_pixel inverts the row equation") {
  const CameraIntrinsics cam = kitti_like_camera();
  CHECK(beta_from_pixel(cam, cam.c_v) == 0.0);
  DeterministicRng rng(13);
  for (int i = 0; i < 200; ++i) {
    const double beta = rng.uniform(-0.3, 0.3);
    const double row = cam.c_v + cam.f_v * std::tan(beta);
    CHECK(beta_from_pixel(cam, row) == doctest::Approx(beta).epsilon(1e-12));
  }
  // Rows below the principal point (larger v, y down) give positive beta.
  CHECK(beta_from_pixel(cam, cam.c_v + 50) > 0);
  CHECK(beta_from_pixel(cam, cam.c_v - 50) < 0);
}

TEST_CASE("backproject_depth_map equals per-pixel backprojection") {
  const CameraIntrinsics cam = offset_camera();
  DepthMap depth(7, 9);
  DeterministicRng rng(14);
  for (int r = 0; r < depth.rows; ++r) {
    for (int c = 0; c < depth.cols; ++c) {
      depth.at(r, c) = rng.uniform(0.5, 60);
    }
  }
  // Sprinkle every flavor of invalid cell.
  depth.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
  depth.at(1, 2) = 0.0;
  depth.at(2, 4) = -3.0;
  depth.at(3, 6) = std::numeric_limits<double>::infinity();
  depth.at(4, 8) = kMinDepth / 2;

  const PointMap points = backproject_depth_map(cam, depth);
  REQUIRE(points.rows == depth.rows);
  REQUIRE(points.cols == depth.cols);
  for (int r = 0; r < depth.rows; ++r) {
    for (int c = 0; c < depth.cols; ++c) {
      if (depth.valid(r, c)) {
        REQUIRE(points.valid(r, c));
        const Eigen::Vector3d want =
            backproject_pixel(cam, static_cast<double>(c), static_cast<double>(r), depth.at(r, c));
        CHECK((points.at(r, c) - want).norm() == 0.0);
      } else {
        CHECK_FALSE(points.valid(r, c));
        CHECK(std::isnan(points.at(r, c).x()));
      }
    }
  }
}

TEST_CASE("backproject_depth_map rejects empty grids") {
  const CameraIntrinsics cam = kitti_like_camera();
  CHECK_THROWS_AS(backproject_depth_map(cam, DepthMap()), std::invalid_argument);
  CHECK_THROWS_AS(backproject_depth_map(cam, DepthMap(0, 5)), std::invalid_argument);
  CHECK_THROWS_AS(backproject_depth_map(cam, DepthMap(5, 0)), std::invalid_argument);
}

TEST_CASE("depth map validity distinguishes markers from data") {
  DepthMap depth(2, 2, 1.5);
  CHECK(depth.valid(0, 0));
  depth.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
  depth.at(1, 0) = 0.0;
  depth.at(1, 1) = kMinDepth;
  CHECK_FALSE(depth.valid(0, 1));
  CHECK_FALSE(depth.valid(1, 0));
  CHECK(depth.valid(1, 1));
}
