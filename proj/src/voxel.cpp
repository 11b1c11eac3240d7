#include "dsar/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dsar {

Aabb mesh_bounds(const TriangleMesh& mesh) {
    if (mesh.vertices.empty()) throw std::runtime_error("mesh_bounds: empty mesh");
    Aabb b{mesh.vertices[0], mesh.vertices[0]};
    for (const Vec3& v : mesh.vertices) {
        b.lo.x = std::min(b.lo.x, v.x); b.hi.x = std::max(b.hi.x, v.x);
        b.lo.y = std::min(b.lo.y, v.y); b.hi.y = std::max(b.hi.y, v.y);
        b.lo.z = std::min(b.lo.z, v.z); b.hi.z = std::max(b.hi.z, v.z);
    }
    return b;
}

Aabb expanded_bounds(const Aabb& tight) {
    Aabb b = tight;
    for (int axis = 0; axis < 3; ++axis) {
        double pad = 0.02 * ((&tight.hi.x)[axis] - (&tight.lo.x)[axis]);
        (&b.lo.x)[axis] -= pad;
        (&b.hi.x)[axis] += pad;
    }
    return b;
}

Vec3 VoxelGrid::cell_center(int ix, int iy, int iz) const {
    const Vec3 ext = bounds.hi - bounds.lo;
    return {bounds.lo.x + ext.x * (ix + 0.5) / resolution,
            bounds.lo.y + ext.y * (iy + 0.5) / resolution,
            bounds.lo.z + ext.z * (iz + 0.5) / resolution};
}

size_t VoxelGrid::occupied_count() const {
    size_t n = 0;
    for (uint8_t v : occupancy) n += v;
    return n;
}

namespace {

// Moller-Trumbore against a +x ray from `origin`. Returns 1 on a clean
// crossing, 0 on a clean miss, -1 when the hit is too close to an edge or
// to the ray plane for the parity to be trusted.
int ray_x_crossing(const Vec3& origin, const Vec3& v0, const Vec3& v1, const Vec3& v2) {
    constexpr double kEps = 1e-10;
    const Vec3 dir{1.0, 0.0, 0.0};
    const Vec3 e1 = v1 - v0, e2 = v2 - v0;
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    const double scale = std::max({std::abs(e1.x), std::abs(e1.y), std::abs(e1.z),
                                   std::abs(e2.x), std::abs(e2.y), std::abs(e2.z), 1.0});
    if (std::abs(det) < kEps * scale * scale) return std::abs(det) == 0.0 ? 0 : -1;
    const double inv = 1.0 / det;
    const Vec3 t0 = origin - v0;
    const double u = t0.dot(p) * inv;
    if (u < -kEps || u > 1 + kEps) return 0;
    const Vec3 q = t0.cross(e1);
    const double v = dir.dot(q) * inv;
    if (v < -kEps || u + v > 1 + kEps) return 0;
    const double t = e2.dot(q) * inv;
    if (t < -kEps) return 0;
    // ties: grazing edges, vertex hits, or origin on the surface
    if (u < kEps || v < kEps || u + v > 1 - kEps || t < kEps) return -1;
    return 1;
}

bool point_inside(const TriangleMesh& mesh, const Vec3& p, double jitter_scale) {
    // jittered +x ray parity; re-jitter (deterministically) on any tie
    Vec3 origin = p;
    for (int attempt = 0; attempt < 16; ++attempt) {
        int crossings = 0;
        bool tie = false;
        for (int j = 0; j < mesh.facet_count() && !tie; ++j) {
            int r = ray_x_crossing(origin, mesh.facet_vertex(j, 0), mesh.facet_vertex(j, 1),
                                   mesh.facet_vertex(j, 2));
            if (r < 0) tie = true;
            else crossings += r;
        }
        if (!tie) return (crossings % 2) == 1;
        const double j = jitter_scale * 1e-4 * (attempt + 1);
        origin = p + Vec3{0.0, j * 1.090529, j * 0.871263};
    }
    throw std::runtime_error("voxelize: ray parity unresolved after 16 jitters");
}

bool triangle_overlaps_box(const Vec3& lo, const Vec3& hi, const Vec3& a, const Vec3& b,
                           const Vec3& c) {
    // conservative: triangle AABB vs cell box
    for (int axis = 0; axis < 3; ++axis) {
        double tmin = std::min({(&a.x)[axis], (&b.x)[axis], (&c.x)[axis]});
        double tmax = std::max({(&a.x)[axis], (&b.x)[axis], (&c.x)[axis]});
        if (tmax < (&lo.x)[axis] || tmin > (&hi.x)[axis]) return false;
    }
    return true;
}

} // namespace

VoxelGrid voxelize_with_bounds(const TriangleMesh& mesh, int resolution, const Aabb& bounds,
                               bool surface_only) {
    if (resolution < 2) throw std::runtime_error("voxelize: resolution must be >= 2");
    if (!surface_only) {
        const MeshTopology topo = build_topology(mesh);
        if (!topo.watertight)
            throw std::runtime_error(
                "voxelize: mesh is not watertight; use surface-only voxelization instead");
    }

    VoxelGrid grid;
    grid.resolution = resolution;
    grid.bounds = bounds;
    grid.occupancy.assign(static_cast<size_t>(resolution) * resolution * resolution, 0);

    if (surface_only) {
        const Vec3 ext = bounds.hi - bounds.lo;
        const Vec3 cell{ext.x / resolution, ext.y / resolution, ext.z / resolution};
        for (int j = 0; j < mesh.facet_count(); ++j) {
            const Vec3 a = mesh.facet_vertex(j, 0), b = mesh.facet_vertex(j, 1),
                       c = mesh.facet_vertex(j, 2);
            Vec3 tlo{std::min({a.x, b.x, c.x}), std::min({a.y, b.y, c.y}), std::min({a.z, b.z, c.z})};
            Vec3 thi{std::max({a.x, b.x, c.x}), std::max({a.y, b.y, c.y}), std::max({a.z, b.z, c.z})};
            auto clamp_idx = [&](double t, double lo, double step) {
                return std::clamp(static_cast<int>(std::floor((t - lo) / step)), 0, resolution - 1);
            };
            int x0 = clamp_idx(tlo.x, bounds.lo.x, cell.x), x1 = clamp_idx(thi.x, bounds.lo.x, cell.x);
            int y0 = clamp_idx(tlo.y, bounds.lo.y, cell.y), y1 = clamp_idx(thi.y, bounds.lo.y, cell.y);
            int z0 = clamp_idx(tlo.z, bounds.lo.z, cell.z), z1 = clamp_idx(thi.z, bounds.lo.z, cell.z);
            for (int iz = z0; iz <= z1; ++iz)
                for (int iy = y0; iy <= y1; ++iy)
                    for (int ix = x0; ix <= x1; ++ix) {
                        Vec3 clo = bounds.lo + Vec3{ix * cell.x, iy * cell.y, iz * cell.z};
                        if (triangle_overlaps_box(clo, clo + cell, a, b, c))
                            grid.occupancy[grid.index(ix, iy, iz)] = 1;
                    }
        }
        return grid;
    }

    const double jitter_scale = (bounds.hi - bounds.lo).norm() / resolution;
    for (int iz = 0; iz < resolution; ++iz)
        for (int iy = 0; iy < resolution; ++iy)
            for (int ix = 0; ix < resolution; ++ix)
                if (point_inside(mesh, grid.cell_center(ix, iy, iz), jitter_scale))
                    grid.occupancy[grid.index(ix, iy, iz)] = 1;
    return grid;
}

VoxelGrid voxelize(const TriangleMesh& mesh, int resolution, bool surface_only) {
    return voxelize_with_bounds(mesh, resolution, expanded_bounds(mesh_bounds(mesh)), surface_only);
}

double voxel_iou(const VoxelGrid& a, const VoxelGrid& b) {
    if (a.resolution != b.resolution || !(a.bounds == b.bounds))
        throw std::runtime_error("voxel_iou: grids have mismatched resolution or bounds");
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < a.occupancy.size(); ++i) {
        inter += (a.occupancy[i] & b.occupancy[i]);
        uni += (a.occupancy[i] | b.occupancy[i]);
    }
    if (uni == 0) return 1.0; // both empty: identical
    return static_cast<double>(inter) / static_cast<double>(uni);
}

void write_vox(const std::string& path, const VoxelGrid& grid) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f.precision(17);
    f << "VOX " << grid.resolution << " " << grid.bounds.lo.x << " " << grid.bounds.lo.y << " "
      << grid.bounds.lo.z << " " << grid.bounds.hi.x << " " << grid.bounds.hi.y << " "
      << grid.bounds.hi.z << "\n";
    // run lengths alternating bit values, starting from 0
    uint8_t current = 0;
    size_t run = 0;
    for (uint8_t v : grid.occupancy) {
        if (v == current) {
            ++run;
        } else {
            f << run << " ";
            current = v;
            run = 1;
        }
    }
    f << run << "\n";
}

VoxelGrid read_vox(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string magic;
    VoxelGrid grid;
    f >> magic >> grid.resolution >> grid.bounds.lo.x >> grid.bounds.lo.y >> grid.bounds.lo.z >>
        grid.bounds.hi.x >> grid.bounds.hi.y >> grid.bounds.hi.z;
    if (magic != "VOX" || grid.resolution < 1) throw std::runtime_error("bad vox header: " + path);
    const size_t total = static_cast<size_t>(grid.resolution) * grid.resolution * grid.resolution;
    grid.occupancy.reserve(total);
    uint8_t current = 0;
    size_t run = 0;
    while (f >> run) {
        if (grid.occupancy.size() + run > total) throw std::runtime_error("vox runs overflow: " + path);
        grid.occupancy.insert(grid.occupancy.end(), run, current);
        current ^= 1;
    }
    if (grid.occupancy.size() != total) throw std::runtime_error("vox runs truncated: " + path);
    return grid;
}

} // namespace dsar
