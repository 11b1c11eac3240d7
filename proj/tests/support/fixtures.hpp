#pragma once

// Shared scene fixtures and independent oracles for the test suites. The
// oracles intentionally avoid the library's soft-raster code paths.

#include <cmath>
#include <random>
#include <vector>

#include "dsar/image.hpp"
#include "dsar/mesh.hpp"
#include "dsar/radar.hpp"

namespace dsar::testing {

inline RadarView default_view(double incident_deg, double azimuth_deg) {
    RadarView v;
    v.incident_deg = incident_deg;
    v.azimuth_deg = azimuth_deg;
    v.ref_range = 1000.0;
    v.z_near = 995.0;
    v.z_far = 1005.0;
    return v;
}

// Flat-topped building on a square ground plate. Scattering: ground 0.1,
// walls (and hidden floor) 0.5, roof 1.0. `width` is the roof extent along
// the ground-range axis (world y at beta = 0), `length` along azimuth.
struct BuildingScene {
    TriangleMesh mesh;
    int ground_facets = 0; // facets [0, ground_facets) belong to the ground
};

inline BuildingScene make_building_scene(double width, double length, double height,
                                         double ground_size) {
    BuildingScene out;
    TriangleMesh ground = make_ground_plane(ground_size, ground_size, 0.0, 6);
    for (double& s : ground.scattering) s = 0.1;
    out.ground_facets = ground.facet_count();

    TriangleMesh box = make_box({0, 0, height / 2}, {length, width, height});
    for (size_t j = 0; j < box.facets.size(); ++j) box.scattering[j] = (j == 2 || j == 3) ? 1.0 : 0.5;
    out.mesh = merge_meshes(ground, box);
    return out;
}

// Distinct-scale cuboid body with a smaller cuboid turret on top; the
// round-trip reconstruction target.
inline TriangleMesh make_turret_cuboid() {
    const TriangleMesh body = make_box({0, 0, 0}, {3.0, 2.0, 1.2});
    const TriangleMesh turret = make_box({0.3, 0, 0.92}, {1.6, 1.1, 0.6});
    return merge_meshes(body, turret);
}

// Random triangle soup near the origin, deterministic per seed.
inline TriangleMesh random_facets(int count, double extent, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-extent, extent);
    std::uniform_real_distribution<double> size(0.1 * extent, 0.4 * extent);
    TriangleMesh m;
    for (int j = 0; j < count; ++j) {
        const Vec3 c{pos(rng), pos(rng), pos(rng)};
        Vec3 a{pos(rng), pos(rng), pos(rng)}, b{pos(rng), pos(rng), pos(rng)};
        a = c + a.normalized() * size(rng);
        b = c + b.normalized() * size(rng);
        const int base = m.vertex_count();
        m.vertices.push_back(c);
        m.vertices.push_back(a);
        m.vertices.push_back(b);
        m.facets.push_back({base, base + 1, base + 2});
        m.scattering.push_back(0.2 + 0.8 * std::uniform_real_distribution<double>(0, 1)(rng));
    }
    return m;
}

// Hard point-in-triangle rasterizer on the mapping plane: 1 where any
// slant-projected facet covers the pixel center. Written from scratch as the
// sigma->0 silhouette oracle.
inline Image hard_silhouette(const TriangleMesh& mesh, const RadarView& view,
                             const GridSpec& grid) {
    const std::vector<Vec3> rv = transform_mesh_to_radar(mesh, view);
    Image img(grid.n_x, grid.n_z, ImageDomain::binary);
    for (int j = 0; j < mesh.facet_count(); ++j) {
        double sx[3], sz[3];
        for (int n = 0; n < 3; ++n) {
            const Vec3 v = rv[mesh.facets[j][n]];
            sx[n] = v.x / grid.r_az;
            sz[n] = (std::hypot(v.y, v.z) - view.ref_range) / grid.r_z;
        }
        const double minx = std::min({sx[0], sx[1], sx[2]}), maxx = std::max({sx[0], sx[1], sx[2]});
        const double minz = std::min({sz[0], sz[1], sz[2]}), maxz = std::max({sz[0], sz[1], sz[2]});
        for (int k = 0; k < grid.n_z; ++k) {
            const double pz = k - (grid.n_z - 1) * 0.5;
            if (pz < minz - 1 || pz > maxz + 1) continue;
            for (int l = 0; l < grid.n_x; ++l) {
                const double px = l - (grid.n_x - 1) * 0.5;
                if (px < minx - 1 || px > maxx + 1) continue;
                // consistent-sign half-plane test, winding-agnostic
                double cr[3];
                for (int e = 0; e < 3; ++e) {
                    const int e2 = (e + 1) % 3;
                    cr[e] = (sx[e2] - sx[e]) * (pz - sz[e]) - (sz[e2] - sz[e]) * (px - sx[e]);
                }
                const bool inside = (cr[0] >= 0 && cr[1] >= 0 && cr[2] >= 0) ||
                                    (cr[0] <= 0 && cr[1] <= 0 && cr[2] <= 0);
                if (inside) img.at(k, l) = 1.0;
            }
        }
    }
    return img;
}

// Distance (in cells) from a pixel center to the nearest slant-projected
// facet edge; used to exclude boundary pixels from hard-limit comparisons.
inline Image edge_distance_map(const TriangleMesh& mesh, const RadarView& view,
                               const GridSpec& grid) {
    const std::vector<Vec3> rv = transform_mesh_to_radar(mesh, view);
    Image dist(grid.n_x, grid.n_z, ImageDomain::linear);
    std::fill(dist.data.begin(), dist.data.end(), 1e30);
    for (int j = 0; j < mesh.facet_count(); ++j) {
        double sx[3], sz[3];
        for (int n = 0; n < 3; ++n) {
            const Vec3 v = rv[mesh.facets[j][n]];
            sx[n] = v.x / grid.r_az;
            sz[n] = (std::hypot(v.y, v.z) - view.ref_range) / grid.r_z;
        }
        for (int k = 0; k < grid.n_z; ++k)
            for (int l = 0; l < grid.n_x; ++l) {
                const double px = l - (grid.n_x - 1) * 0.5;
                const double pz = k - (grid.n_z - 1) * 0.5;
                double best = dist.at(k, l);
                for (int e = 0; e < 3; ++e) {
                    const int e2 = (e + 1) % 3;
                    const double ex = sx[e2] - sx[e], ez = sz[e2] - sz[e];
                    const double q = ex * ex + ez * ez;
                    double t = q > 0 ? ((px - sx[e]) * ex + (pz - sz[e]) * ez) / q : 0.0;
                    t = std::clamp(t, 0.0, 1.0);
                    const double dx = sx[e] + t * ex - px, dz = sz[e] + t * ez - pz;
                    best = std::min(best, std::sqrt(dx * dx + dz * dz));
                }
                dist.at(k, l) = best;
            }
    }
    return dist;
}

} // namespace dsar::testing
