#pragma once

#include <vector>

#include "dsar/mesh.hpp"
#include "dsar/vec.hpp"

namespace dsar {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

// Viewing configuration. Angles are kept in degrees (the on-disk unit);
// matrix builders convert internally.
struct RadarView {
    double incident_deg = 45.0; // alpha, may be negative
    double azimuth_deg = 0.0;   // beta
    double ref_range = 1000.0;  // f, radar to scene center (m)
    double z_near = 995.0;      // Z_n
    double z_far = 1005.0;      // Z_f
    Vec3 euler_deg{0, 0, 0};    // (theta_x, theta_y, theta_z), target attitude
    double scale = 1.0;         // uniform model scaling before rendering
    bool euler_in_world = false; // alternative hook: pose applied in world frame

    // Defaults to ref_range along the look direction behind the scene center
    // so the scene center lands at zero slant offset.
    bool has_explicit_radar_pos = false;
    Vec3 radar_pos{0, 0, 0};

    Vec3 effective_radar_pos() const;
    void check() const; // throws on z_near >= z_far or scale <= 0
};

// World -> radar axes (columns are the radar axes in world coordinates).
Mat3 rotation_matrix(const RadarView& view);
Mat3 rotation_matrix(double incident_rad, double azimuth_rad);
// d rotation / d angle, used by the pose backward pass.
Mat3 rotation_matrix_dalpha(double incident_rad, double azimuth_rad);
Mat3 rotation_matrix_dbeta(double incident_rad, double azimuth_rad);

Vec3 world_to_radar(const Vec3& v, const RadarView& view);
Vec3 radar_to_world(const Vec3& v_r, const RadarView& view);

// (x, y, z) -> (x, 0, sqrt(y^2+z^2) - f). Collapses layover sets.
Vec3 slant_range_transform(const Vec3& v_radar, double ref_range);

// Eq-form elementary rotations and their composition R_y(ty) R_x(tx) R_z(tz).
Mat3 euler_rotation_x(double rad);
Mat3 euler_rotation_y(double rad);
Mat3 euler_rotation_z(double rad);
Mat3 euler_rotation_x_deriv(double rad);
Mat3 euler_rotation_y_deriv(double rad);
Mat3 euler_rotation_z_deriv(double rad);
Mat3 euler_matrix(double theta_x_deg, double theta_y_deg, double theta_z_deg);

// Full posed transform into the radar frame. The Euler/scale pose acts on
// radar-frame offsets about the scene center (world origin) unless
// euler_in_world is set, in which case vertices are posed in world space
// before the radar transform.
Mat3 posed_linear_map(const RadarView& view);      // 3x3 acting on world vertices
Vec3 posed_offset(const RadarView& view);          // constant term
inline Vec3 pose_to_radar(const Vec3& v_world, const Mat3& lin, const Vec3& off) {
    return lin * v_world + off;
}
std::vector<Vec3> transform_mesh_to_radar(const TriangleMesh& mesh, const RadarView& view);

// Image / ray discretization. Azimuth cell size equals the slant cell size
// (square slant-plane pixels).
struct GridSpec {
    int n_x = 128; // azimuth cells
    int n_z = 128; // slant-range cells
    int n_y = 128; // projection (ray) rows
    double r_z = 0.05;  // slant cell size (m)
    double r_y = 0.05;  // projection cell size (m)
    double r_az = 0.05; // azimuth cell size (m)

    // cell-center coordinates (m), symmetric about the scene center
    double col_coord(int l) const { return (l - (n_x - 1) * 0.5) * r_az; }
    double row_coord(int k) const { return (k - (n_z - 1) * 0.5) * r_z; }  // slant offset
    double ray_coord(int i) const { return (i - (n_y - 1) * 0.5) * r_y; }  // Y' offset
};

// R_y = R_z cot|alpha|, N_y = ceil(N_z tan|alpha|). Requires 0 < |alpha| < 90.
GridSpec grid_from_view(int n_x, int n_z, double r_z, const RadarView& view);

// Eq-form ISAR resolutions: r_a = c/(2 f_c dphi), r_r = c/(2 B).
struct IsarResolution {
    double azimuth_m = 0.0;
    double range_m = 0.0;
};
IsarResolution isar_resolution(double center_freq_hz, double bandwidth_hz, double angle_span_rad);

} // namespace dsar
