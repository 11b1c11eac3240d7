#include "dsar/radar.hpp"

#include <cmath>
#include <stdexcept>

namespace dsar {

void RadarView::check() const {
    if (!(z_near < z_far)) throw std::runtime_error("RadarView: requires z_near < z_far");
    if (!(scale > 0.0)) throw std::runtime_error("RadarView: requires scale > 0");
}

Mat3 rotation_matrix(double a, double b) {
    const double ca = std::cos(a), sa = std::sin(a);
    const double cb = std::cos(b), sb = std::sin(b);
    return Mat3::from_rows({-cb, -ca * sb, -sa * sb},
                           {0.0, sa, -ca},
                           {sb, -ca * cb, -sa * cb});
}

Mat3 rotation_matrix(const RadarView& view) {
    return rotation_matrix(deg_to_rad(view.incident_deg), deg_to_rad(view.azimuth_deg));
}

Mat3 rotation_matrix_dalpha(double a, double b) {
    const double ca = std::cos(a), sa = std::sin(a);
    const double cb = std::cos(b), sb = std::sin(b);
    return Mat3::from_rows({0.0, sa * sb, -ca * sb},
                           {0.0, ca, sa},
                           {0.0, sa * cb, -ca * cb});
}

Mat3 rotation_matrix_dbeta(double a, double b) {
    const double ca = std::cos(a), sa = std::sin(a);
    const double cb = std::cos(b), sb = std::sin(b);
    return Mat3::from_rows({sb, -ca * cb, -sa * cb},
                           {0.0, 0.0, 0.0},
                           {cb, ca * sb, sa * sb});
}

Vec3 RadarView::effective_radar_pos() const {
    if (has_explicit_radar_pos) return radar_pos;
    // ref_range behind the scene center along the look axis (third radar axis)
    return rotation_matrix(*this).col(2) * -ref_range;
}

Vec3 world_to_radar(const Vec3& v, const RadarView& view) {
    return rotation_matrix(view).transposed() * (v - view.effective_radar_pos());
}

Vec3 radar_to_world(const Vec3& v_r, const RadarView& view) {
    return rotation_matrix(view) * v_r + view.effective_radar_pos();
}

Vec3 slant_range_transform(const Vec3& v, double ref_range) {
    return {v.x, 0.0, std::hypot(v.y, v.z) - ref_range};
}

Mat3 euler_rotation_x(double t) {
    const double c = std::cos(t), s = std::sin(t);
    return Mat3::from_rows({1, 0, 0}, {0, c, s}, {0, -s, c});
}

Mat3 euler_rotation_y(double t) {
    const double c = std::cos(t), s = std::sin(t);
    return Mat3::from_rows({c, 0, -s}, {0, 1, 0}, {s, 0, c});
}

Mat3 euler_rotation_z(double t) {
    const double c = std::cos(t), s = std::sin(t);
    return Mat3::from_rows({c, s, 0}, {-s, c, 0}, {0, 0, 1});
}

Mat3 euler_rotation_x_deriv(double t) {
    const double c = std::cos(t), s = std::sin(t);
    return Mat3::from_rows({0, 0, 0}, {0, -s, c}, {0, -c, -s});
}

Mat3 euler_rotation_y_deriv(double t) {
    const double c = std::cos(t), s = std::sin(t);
    return Mat3::from_rows({-s, 0, -c}, {0, 0, 0}, {c, 0, -s});
}

Mat3 euler_rotation_z_deriv(double t) {
    const double c = std::cos(t), s = std::sin(t);
    return Mat3::from_rows({-s, c, 0}, {-c, -s, 0}, {0, 0, 0});
}

Mat3 euler_matrix(double tx_deg, double ty_deg, double tz_deg) {
    return euler_rotation_y(deg_to_rad(ty_deg)) * euler_rotation_x(deg_to_rad(tx_deg)) *
           euler_rotation_z(deg_to_rad(tz_deg));
}

Mat3 posed_linear_map(const RadarView& view) {
    const Mat3 rt = rotation_matrix(view).transposed();
    const Mat3 re = euler_matrix(view.euler_deg.x, view.euler_deg.y, view.euler_deg.z);
    if (view.euler_in_world) return (rt * re) * view.scale;
    return (re * rt) * view.scale;
}

Vec3 posed_offset(const RadarView& view) {
    // scene center (world origin) stays put under either pose hook
    const Mat3 rt = rotation_matrix(view).transposed();
    return rt * (Vec3{0, 0, 0} - view.effective_radar_pos());
}

std::vector<Vec3> transform_mesh_to_radar(const TriangleMesh& mesh, const RadarView& view) {
    const Mat3 lin = posed_linear_map(view);
    const Vec3 off = posed_offset(view);
    std::vector<Vec3> out;
    out.reserve(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) out.push_back(pose_to_radar(v, lin, off));
    return out;
}

GridSpec grid_from_view(int n_x, int n_z, double r_z, const RadarView& view) {
    const double a = std::abs(deg_to_rad(view.incident_deg));
    if (!(a > 0.0) || !(a < M_PI / 2))
        throw std::runtime_error("grid_from_view: requires 0 < |incident angle| < 90 degrees");
    if (n_x < 1 || n_z < 1 || !(r_z > 0.0))
        throw std::runtime_error("grid_from_view: counts must be >= 1 and r_z > 0");
    GridSpec g;
    g.n_x = n_x;
    g.n_z = n_z;
    g.r_z = r_z;
    g.r_az = r_z;
    g.r_y = r_z / std::tan(a);
    g.n_y = static_cast<int>(std::ceil(n_z * std::tan(a)));
    return g;
}

IsarResolution isar_resolution(double fc, double bw, double dphi) {
    if (!(fc > 0.0) || !(bw > 0.0) || !(dphi > 0.0))
        throw std::runtime_error("isar_resolution: all inputs must be positive");
    return {kSpeedOfLight / (2.0 * fc * dphi), kSpeedOfLight / (2.0 * bw)};
}

} // namespace dsar
