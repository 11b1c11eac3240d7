#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dsar/radar.hpp"

using namespace dsar;

namespace {

bool approx_mat(const Mat3& a, const Mat3& b, double tol = 1e-12) {
    for (int i = 0; i < 9; ++i)
        if (std::abs(a.a[i] - b.a[i]) > tol) return false;
    return true;
}

} // namespace

TEST_CASE("rotation matrix at alpha=90, beta=0") {
    RadarView v;
    v.incident_deg = 90;
    v.azimuth_deg = 0;
    const Mat3 r = rotation_matrix(v);
    const Mat3 expect = Mat3::from_rows({-1, 0, 0}, {0, 1, 0}, {0, 0, -1});
    CHECK(approx_mat(r, expect));
}

TEST_CASE("rotation matrix orthonormality and det for random angles") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ang(-180.0, 180.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Mat3 r = rotation_matrix(deg_to_rad(ang(rng)), deg_to_rad(ang(rng)));
        CHECK(approx_mat(r.transposed() * r, Mat3::identity()));
        CHECK(r.det() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("rotation matrix at alpha=45, beta=45 vs high-precision oracle") {
    // frozen from a 30-digit symbolic evaluation of the closed form
    const Mat3 r = rotation_matrix(deg_to_rad(45), deg_to_rad(45));
    const double s = 0.70710678118654752; // sqrt(2)/2
    const Mat3 expect = Mat3::from_rows({-s, -0.5, -0.5}, {0, s, -s}, {s, -0.5, -0.5});
    CHECK(approx_mat(r, expect, 1e-15));
}

TEST_CASE("rotations preserve norms") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec3 p{u(rng), u(rng), u(rng)};
        const Mat3 r = rotation_matrix(deg_to_rad(u(rng) * 9), deg_to_rad(u(rng) * 18));
        CHECK((r * p).norm() == doctest::Approx(p.norm()).epsilon(1e-12));
        const Mat3 e = euler_matrix(u(rng) * 9, u(rng) * 9, u(rng) * 9);
        CHECK((e * p).norm() == doctest::Approx(p.norm()).epsilon(1e-12));
    }
}

TEST_CASE("world_to_radar maps the radar position to the origin") {
    RadarView v;
    v.incident_deg = 37;
    v.azimuth_deg = -122;
    const Vec3 at_radar = world_to_radar(v.effective_radar_pos(), v);
    CHECK(at_radar.norm() < 1e-9);
}

TEST_CASE("world_to_radar round trip and oracle") {
    RadarView v;
    v.incident_deg = 30;
    v.azimuth_deg = 60;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 p{u(rng), u(rng), u(rng)};
        const Vec3 rt = radar_to_world(world_to_radar(p, v), v);
        CHECK((rt - p).norm() < 1e-9);

        // independent matrix-vector product: R^T (p - p_r), written out longhand
        const Mat3 r = rotation_matrix(v);
        const Vec3 d = p - v.effective_radar_pos();
        const Vec3 expect{r(0, 0) * d.x + r(1, 0) * d.y + r(2, 0) * d.z,
                          r(0, 1) * d.x + r(1, 1) * d.y + r(2, 1) * d.z,
                          r(0, 2) * d.x + r(1, 2) * d.y + r(2, 2) * d.z};
        CHECK((world_to_radar(p, v) - expect).norm() < 1e-12);
    }
}

TEST_CASE("scene center lands at reference range along the look axis") {
    RadarView v;
    v.incident_deg = 52;
    v.azimuth_deg = 204;
    v.ref_range = 800;
    const Vec3 c = world_to_radar({0, 0, 0}, v);
    CHECK(c.x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(c.y == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(c.z == doctest::Approx(800.0));
}

TEST_CASE("slant range transform examples") {
    const Vec3 a = slant_range_transform({7, 3, 4}, 0.0);
    CHECK(a.x == 7);
    CHECK(a.y == 0);
    CHECK(a.z == doctest::Approx(5.0)); // 3-4-5 triangle

    const Vec3 b = slant_range_transform({2, 0, 9.5}, 9.5);
    CHECK(b.z == doctest::Approx(0.0)); // scene center at reference range

    // layover: same x, same slant range, different (y, z)
    const Vec3 p1 = slant_range_transform({1, 3, 4}, 5.0);
    const Vec3 p2 = slant_range_transform({1, -4, 3}, 5.0);
    CHECK((p1 - p2).norm() < 1e-12);
    CHECK(p1.z == doctest::Approx(0.0));
}

TEST_CASE("slant transform is rotation-invariant in the (y,z) plane") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 p{u(rng), u(rng), u(rng) + 5.0};
        const double ang = u(rng);
        const Vec3 rotated{p.x, p.y * std::cos(ang) - p.z * std::sin(ang),
                           p.y * std::sin(ang) + p.z * std::cos(ang)};
        const Vec3 a = slant_range_transform(p, 2.0);
        const Vec3 b = slant_range_transform(rotated, 2.0);
        CHECK(std::abs(a.z - b.z) < 1e-12);
    }
}

TEST_CASE("euler matrix identity and 90-degree z rotation") {
    CHECK(approx_mat(euler_matrix(0, 0, 0), Mat3::identity()));
    const Vec3 rotated = euler_matrix(0, 0, 90) * Vec3{1, 0, 0};
    CHECK((rotated - Vec3{0, -1, 0}).norm() < 1e-12);
}

TEST_CASE("euler matrix composes R_y R_x R_z in that order") {
    const double tx = 31, ty = -47, tz = 112;
    const Mat3 composed = euler_rotation_y(deg_to_rad(ty)) * euler_rotation_x(deg_to_rad(tx)) *
                          euler_rotation_z(deg_to_rad(tz));
    CHECK(approx_mat(euler_matrix(tx, ty, tz), composed));
    CHECK(approx_mat(euler_matrix(tx, ty, tz).transposed() * euler_matrix(tx, ty, tz),
                     Mat3::identity()));
}

TEST_CASE("grid_from_view sizes") {
    RadarView v;
    v.incident_deg = 45;
    GridSpec g = grid_from_view(128, 128, 0.1, v);
    CHECK(g.n_y == 128);
    CHECK(g.r_y == doctest::Approx(0.1)); // tan 45 = cot 45 = 1

    v.incident_deg = 60;
    g = grid_from_view(128, 128, 0.1, v);
    CHECK(g.n_y == 222); // ceil(128 * 1.7320508)

    v.incident_deg = 15;
    g = grid_from_view(128, 128, 0.1, v);
    CHECK(g.n_y == 35); // ceil(128 * 0.26794919)

    v.incident_deg = -60; // negative angles size by |alpha|
    g = grid_from_view(128, 128, 0.1, v);
    CHECK(g.n_y == 222);

    v.incident_deg = 0;
    CHECK_THROWS_AS(grid_from_view(128, 128, 0.1, v), std::runtime_error);
    v.incident_deg = 90;
    CHECK_THROWS_AS(grid_from_view(128, 128, 0.1, v), std::runtime_error);
}

TEST_CASE("grid invariants: R_y relation and monotone N_y") {
    RadarView v;
    int last = 0;
    for (double a = 5; a < 90; a += 5) {
        v.incident_deg = a;
        const GridSpec g = grid_from_view(128, 128, 0.07, v);
        CHECK(std::abs(g.r_y - g.r_z / std::tan(deg_to_rad(a))) < 1e-9);
        CHECK(g.n_y >= last);
        last = g.n_y;
    }
}

TEST_CASE("isar resolution against the published configuration") {
    const IsarResolution r = isar_resolution(16.7e9, 1e9, deg_to_rad(3.5));
    CHECK(std::abs(r.range_m - 0.150) < 0.001);
    CHECK(std::abs(r.azimuth_m - 0.147) < 0.001);

    // doubling bandwidth halves range resolution
    const IsarResolution r2 = isar_resolution(16.7e9, 2e9, deg_to_rad(3.5));
    CHECK(r2.range_m == doctest::Approx(r.range_m / 2));

    // azimuth resolution vanishes as the angular span grows
    const IsarResolution r3 = isar_resolution(16.7e9, 1e9, 1e9);
    CHECK(r3.azimuth_m < 1e-9);

    CHECK_THROWS_AS(isar_resolution(-1.0, 1e9, 0.1), std::runtime_error);
}

TEST_CASE("radar view validation") {
    RadarView v;
    v.z_near = 10;
    v.z_far = 5;
    CHECK_THROWS_AS(v.check(), std::runtime_error);
    v.z_far = 20;
    v.scale = 0.0;
    CHECK_THROWS_AS(v.check(), std::runtime_error);
}

TEST_CASE("posed transform: euler in radar frame keeps scene center fixed") {
    RadarView v;
    v.incident_deg = 33;
    v.azimuth_deg = 71;
    v.euler_deg = {10, 20, 30};
    v.scale = 1.7;
    const Mat3 lin = posed_linear_map(v);
    const Vec3 off = posed_offset(v);
    const Vec3 center = pose_to_radar({0, 0, 0}, lin, off);
    CHECK(center.x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(center.y == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(center.z == doctest::Approx(v.ref_range));

    // identity pose reduces to the plain radar transform
    RadarView plain = v;
    plain.euler_deg = {0, 0, 0};
    plain.scale = 1.0;
    const Vec3 p{1.5, -2.0, 0.5};
    const Vec3 via_pose = pose_to_radar(p, posed_linear_map(plain), posed_offset(plain));
    CHECK((via_pose - world_to_radar(p, plain)).norm() < 1e-9);
}
