#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dsar/vec.hpp"

namespace dsar {

// Facet area below this (m^2) is rejected as degenerate on load.
inline constexpr double kDegenerateAreaTol = 1e-12;

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> facets; // 0-based vertex indices
    std::vector<double> scattering;         // one value per facet, >= 0

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int facet_count() const { return static_cast<int>(facets.size()); }

    Vec3 facet_vertex(int facet, int corner) const { return vertices[facets[facet][corner]]; }
    double facet_area(int facet) const;
    Vec3 facet_centroid(int facet) const;

    // throws std::runtime_error on any broken invariant
    void validate() const;
};

struct SharedEdge {
    int facet_a = -1, facet_b = -1;
    int edge_v1 = -1, edge_v2 = -1; // shared edge endpoints
    int opposite_a = -1, opposite_b = -1; // v3 (in facet_a), v4 (in facet_b)
};

struct MeshTopology {
    std::vector<int> vertex_degree;
    std::vector<std::vector<int>> vertex_neighbors;
    std::vector<SharedEdge> shared_edge_pairs; // interior (2-facet) edges only
    int edge_count = 0;                        // unique edges, boundary included
    bool watertight = false;                   // every edge has exactly two facets
};

MeshTopology build_topology(const TriangleMesh& mesh);

// --- file I/O -------------------------------------------------------------

// Wavefront OBJ subset: `v x y z` and triangular `f i j k` records (1-based
// indices, `i/t/n` forms accepted, negatives rejected). `#` comments and any
// other record types are ignored; unknown records emit one warning each to
// stderr. An optional sidecar `<path minus .obj>.scat` (one float per line,
// line i <-> facet i) provides per-facet scattering; absent sidecar means
// scattering = 1 everywhere.
TriangleMesh load_mesh(const std::string& path);
void save_mesh_obj(const std::string& path, const TriangleMesh& mesh);
void save_scattering(const std::string& path, const TriangleMesh& mesh);
std::vector<double> load_scattering(const std::string& path, int expected_count);

// --- templates ------------------------------------------------------------

// Watertight sphere: subdivided icosahedron, 20*4^subdivisions facets,
// vertices projected to `radius`. subdivisions in 0..6.
TriangleMesh icosphere(int subdivisions, double radius);

// Axis-aligned closed box spanning [center - size/2, center + size/2].
TriangleMesh make_box(const Vec3& center, const Vec3& size);

// Flat rectangle in the world x-y plane at height z, facing +z, split into
// a grid of triangles.
TriangleMesh make_ground_plane(double size_x, double size_y, double z, int cells = 8);

// Concatenates meshes (disjoint vertex sets).
TriangleMesh merge_meshes(const TriangleMesh& a, const TriangleMesh& b);

// --- Laplacian ------------------------------------------------------------

// Row i of the random-walk Laplacian applied to vertex positions:
//   v_i - mean of neighbors   (zero for isolated vertices)
std::vector<Vec3> laplacian_apply(const TriangleMesh& mesh, const MeshTopology& topo);

// --- voxel grids ----------------------------------------------------------

struct Aabb {
    Vec3 lo, hi;
    bool operator==(const Aabb& o) const {
        return lo.x == o.lo.x && lo.y == o.lo.y && lo.z == o.lo.z &&
               hi.x == o.hi.x && hi.y == o.hi.y && hi.z == o.hi.z;
    }
};

Aabb mesh_bounds(const TriangleMesh& mesh);
// tight AABB grown by 2% of each axis extent per side
Aabb expanded_bounds(const Aabb& tight);

struct VoxelGrid {
    int resolution = 0;
    Aabb bounds;
    std::vector<uint8_t> occupancy; // resolution^3, x fastest then y then z

    size_t index(int ix, int iy, int iz) const {
        return (static_cast<size_t>(iz) * resolution + iy) * resolution + ix;
    }
    Vec3 cell_center(int ix, int iy, int iz) const;
    size_t occupied_count() const;
};

// Occupancy by parity of +x ray crossings from each cell center; requires a
// watertight mesh unless surface_only is set (surface_only marks cells whose
// box overlaps any facet and skips the interior fill).
VoxelGrid voxelize(const TriangleMesh& mesh, int resolution, bool surface_only = false);
VoxelGrid voxelize_with_bounds(const TriangleMesh& mesh, int resolution, const Aabb& bounds,
                               bool surface_only = false);

// |a n b| / |a u b|; 1.0 when both grids are empty.
double voxel_iou(const VoxelGrid& a, const VoxelGrid& b);

void write_vox(const std::string& path, const VoxelGrid& grid);
VoxelGrid read_vox(const std::string& path);

} // namespace dsar
