#include "dsar/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsar {

namespace {

struct PixelFacet {
    int facet;
    double delta;
    EdgeDistance ed;
};

// Accumulates the silhouette adjoint into radar-frame per-vertex gradients.
// Pixel-major (column, then row), facets in index order within a pixel.
std::vector<Vec3> silhouette_radar_gradients(const Image& upstream, const SceneContext& scene) {
    const GridSpec& g = scene.grid;
    if (upstream.width != g.n_x || upstream.height != g.n_z)
        throw std::runtime_error("backward_silhouette: upstream image does not match grid");

    std::vector<Vec3> grad_radar(scene.mesh->vertex_count());
    std::vector<PixelFacet> active;
    std::vector<double> prefix, suffix;

    for (int l = 0; l < g.n_x; ++l) {
        if (scene.map_by_col[l].empty()) continue;
        for (int k = 0; k < g.n_z; ++k) {
            const double up = upstream.at(k, l);
            if (up == 0.0) continue;

            active.clear();
            const Vec2 p{g.col_coord(l) / g.r_az, g.row_coord(k) / g.r_z};
            for (int j : scene.map_by_col[l]) {
                if (!scene.map_rows[j].contains(k)) continue;
                const FacetScreen2D& f = scene.map_screen[j];
                PixelFacet pf;
                pf.facet = j;
                pf.ed = point_triangle_distance(f, p);
                pf.delta = facet_probability(pf.ed.dist, pf.ed.inside, scene.params.sigma);
                active.push_back(pf);
            }
            if (active.empty()) continue;

            // dI_sil/ddelta_j = prod_{m != j} (1 - delta_m)
            const size_t n = active.size();
            prefix.assign(n + 1, 1.0);
            suffix.assign(n + 1, 1.0);
            for (size_t m = 0; m < n; ++m) prefix[m + 1] = prefix[m] * (1.0 - active[m].delta);
            for (size_t m = n; m > 0; --m) suffix[m - 1] = suffix[m] * (1.0 - active[m - 1].delta);

            for (size_t m = 0; m < n; ++m) {
                const PixelFacet& pf = active[m];
                const double d_delta = up * prefix[m] * suffix[m + 1];
                if (d_delta == 0.0) continue;
                const double dd2 =
                    facet_probability_dd2(pf.ed.dist, pf.ed.inside, scene.params.sigma);
                if (dd2 == 0.0) continue; // saturated

                Vec2 gscreen[3];
                point_triangle_distance_backward(scene.map_screen[pf.facet], p, pf.ed, gscreen);
                for (int c = 0; c < 3; ++c) {
                    const Vec2 gs = gscreen[c] * (d_delta * dd2);
                    if (gs.x == 0.0 && gs.y == 0.0) continue;
                    const int vidx = scene.mesh->facets[pf.facet][c];
                    const Vec3 vr = scene.radar_verts[vidx];
                    // screen = (x/r_az, (hypot(y,z) - f)/r_z)
                    const double slant_norm = std::hypot(vr.y, vr.z);
                    Vec3 gr{gs.x / g.r_az, 0.0, 0.0};
                    if (slant_norm > 0.0) {
                        gr.y = gs.y * vr.y / (slant_norm * g.r_z);
                        gr.z = gs.y * vr.z / (slant_norm * g.r_z);
                    }
                    grad_radar[vidx] += gr;
                }
            }
        }
    }
    return grad_radar;
}

} // namespace

GradientSet backward_silhouette(const Image& upstream, const SceneContext& scene) {
    const std::vector<Vec3> grad_radar = silhouette_radar_gradients(upstream, scene);
    GradientSet out;
    out.d_vertices.resize(scene.mesh->vertex_count());
    out.d_scattering.assign(scene.mesh->facet_count(), 0.0);
    const Mat3 lin_t = posed_linear_map(scene.view).transposed();
    for (int i = 0; i < scene.mesh->vertex_count(); ++i) out.d_vertices[i] = lin_t * grad_radar[i];
    return out;
}

Vec3 pose_jacobian_column(const RadarView& view, const Vec3& v, int param) {
    const double to_rad = M_PI / 180.0;
    const double tx = deg_to_rad(view.euler_deg.x);
    const double ty = deg_to_rad(view.euler_deg.y);
    const double tz = deg_to_rad(view.euler_deg.z);
    const double a = deg_to_rad(view.incident_deg);
    const double b = deg_to_rad(view.azimuth_deg);
    const Mat3 rx = euler_rotation_x(tx), ry = euler_rotation_y(ty), rz = euler_rotation_z(tz);
    const Mat3 rt = rotation_matrix(a, b).transposed();
    const double s = view.scale;

    switch (param) {
        case kPoseAlpha:
            return (ry * rx * rz * rotation_matrix_dalpha(a, b).transposed()) * v * (s * to_rad);
        case kPoseBeta:
            return (ry * rx * rz * rotation_matrix_dbeta(a, b).transposed()) * v * (s * to_rad);
        case kPoseThetaX:
            return (ry * euler_rotation_x_deriv(tx) * rz * rt) * v * (s * to_rad);
        case kPoseThetaY:
            return (euler_rotation_y_deriv(ty) * rx * rz * rt) * v * (s * to_rad);
        case kPoseThetaZ:
            return (ry * rx * euler_rotation_z_deriv(tz) * rt) * v * (s * to_rad);
        case kPoseScale:
            return (ry * rx * rz * rt) * v;
    }
    throw std::runtime_error("pose_jacobian_column: bad parameter index");
}

GradientSet backward_pose(const Image& upstream, const SceneContext& scene) {
    if (scene.view.has_explicit_radar_pos)
        throw std::runtime_error("backward_pose: requires the default radar placement");
    if (scene.view.euler_in_world)
        throw std::runtime_error("backward_pose: requires the radar-frame Euler hook");

    const std::vector<Vec3> grad_radar = silhouette_radar_gradients(upstream, scene);
    GradientSet out;
    out.d_vertices.resize(scene.mesh->vertex_count());
    out.d_scattering.assign(scene.mesh->facet_count(), 0.0);
    out.has_pose = true;
    for (int i = 0; i < scene.mesh->vertex_count(); ++i) {
        const Vec3& gr = grad_radar[i];
        if (gr.x == 0.0 && gr.y == 0.0 && gr.z == 0.0) continue;
        const Vec3& v = scene.mesh->vertices[i];
        for (int p = 0; p < 6; ++p) out.d_pose[p] += pose_jacobian_column(scene.view, v, p).dot(gr);
    }
    return out;
}

GradientSet backward_scattering(const Image& upstream, const SceneContext& scene,
                                const ForwardCache& cache) {
    const GridSpec& g = scene.grid;
    if (upstream.width != g.n_x || upstream.height != g.n_z)
        throw std::runtime_error("backward_scattering: upstream image does not match grid");
    if (cache.scene_key != scene.key || cache.n_y != g.n_y || cache.n_x != g.n_x)
        throw std::runtime_error("backward_scattering: forward cache does not match this scene");

    GradientSet out;
    out.d_vertices.resize(scene.mesh->vertex_count());
    out.d_scattering.assign(scene.mesh->facet_count(), 0.0);

    const double off_z = (g.n_z - 1) * 0.5;
    const double sg = scene.params.sigma_g;
    const double inv2sg2 = 1.0 / (2.0 * sg * sg);
    std::vector<RayFacet> ray;

    for (int l = 0; l < g.n_x; ++l) {
        if (scene.proj_by_col[l].empty()) continue;
        for (int i = 0; i < g.n_y; ++i) {
            const RayEval ev = eval_ray(scene, i, l, ray, &cache);
            if (!ev.live) continue;
            for (const RayFacet& rf : ray) {
                if (!scene.map_cols[rf.facet].contains(l)) continue;
                const FacetBand& rows = scene.map_rows[rf.facet];
                const double cut = scene.params.gauss_cutoff * sg;
                int klo = std::max(rows.lo,
                                   static_cast<int>(std::ceil(rf.z_center_cells - cut + off_z)));
                int khi = std::min(rows.hi,
                                   static_cast<int>(std::floor(rf.z_center_cells + cut + off_z)));
                double acc = 0.0;
                for (int k = klo; k <= khi; ++k) {
                    const double up = upstream.at(k, l);
                    if (up == 0.0) continue;
                    const double dz = rf.z_center_cells - (k - off_z);
                    acc += up * scene.map_delta(rf.facet, k, l) * std::exp(-dz * dz * inv2sg2);
                }
                out.d_scattering[rf.facet] += acc * rf.rho;
            }
        }
    }

    const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * sg);
    for (double& v : out.d_scattering) v *= norm;
    return out;
}

std::vector<double> finite_difference_oracle(
    const std::function<double(const std::vector<double>&)>& loss,
    const std::vector<double>& params, double h) {
    std::vector<double> grad(params.size());
    std::vector<double> probe = params;
    for (size_t i = 0; i < params.size(); ++i) {
        probe[i] = params[i] + h;
        const double hi = loss(probe);
        probe[i] = params[i] - h;
        const double lo = loss(probe);
        probe[i] = params[i];
        grad[i] = (hi - lo) / (2.0 * h);
    }
    return grad;
}

} // namespace dsar
