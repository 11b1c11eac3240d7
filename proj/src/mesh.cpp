#include "dsar/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace dsar {

double TriangleMesh::facet_area(int facet) const {
    const Vec3 a = facet_vertex(facet, 0);
    const Vec3 b = facet_vertex(facet, 1);
    const Vec3 c = facet_vertex(facet, 2);
    return 0.5 * (b - a).cross(c - a).norm();
}

Vec3 TriangleMesh::facet_centroid(int facet) const {
    return (facet_vertex(facet, 0) + facet_vertex(facet, 1) + facet_vertex(facet, 2)) / 3.0;
}

void TriangleMesh::validate() const {
    if (scattering.size() != facets.size())
        throw std::runtime_error("scattering count (" + std::to_string(scattering.size()) +
                                 ") != facet count (" + std::to_string(facets.size()) + ")");
    for (size_t j = 0; j < facets.size(); ++j) {
        const auto& f = facets[j];
        for (int idx : f) {
            if (idx < 0 || idx >= vertex_count())
                throw std::runtime_error("facet " + std::to_string(j) + ": vertex index " +
                                         std::to_string(idx) + " out of range");
        }
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw std::runtime_error("facet " + std::to_string(j) + ": repeated vertex index");
        if (facet_area(static_cast<int>(j)) < kDegenerateAreaTol)
            throw std::runtime_error("facet " + std::to_string(j) + ": degenerate (area < 1e-12)");
    }
    for (size_t j = 0; j < scattering.size(); ++j)
        if (!(scattering[j] >= 0.0))
            throw std::runtime_error("scattering " + std::to_string(j) + " negative or NaN");
}

MeshTopology build_topology(const TriangleMesh& mesh) {
    MeshTopology topo;
    const int nv = mesh.vertex_count();
    topo.vertex_neighbors.resize(nv);

    struct EdgeInfo {
        std::vector<std::pair<int, int>> facets; // (facet index, opposite vertex)
    };
    std::map<std::pair<int, int>, EdgeInfo> edges;

    for (int j = 0; j < mesh.facet_count(); ++j) {
        const auto& f = mesh.facets[j];
        for (int e = 0; e < 3; ++e) {
            int a = f[e], b = f[(e + 1) % 3], opp = f[(e + 2) % 3];
            if (a > b) std::swap(a, b);
            edges[{a, b}].facets.emplace_back(j, opp);
        }
    }

    std::vector<std::set<int>> nbr(nv);
    topo.watertight = !edges.empty();
    for (const auto& [key, info] : edges) {
        nbr[key.first].insert(key.second);
        nbr[key.second].insert(key.first);
        if (info.facets.size() != 2) topo.watertight = false;
        if (info.facets.size() == 2) {
            SharedEdge se;
            se.facet_a = info.facets[0].first;
            se.facet_b = info.facets[1].first;
            se.edge_v1 = key.first;
            se.edge_v2 = key.second;
            se.opposite_a = info.facets[0].second;
            se.opposite_b = info.facets[1].second;
            topo.shared_edge_pairs.push_back(se);
        }
    }
    topo.edge_count = static_cast<int>(edges.size());
    topo.vertex_degree.resize(nv);
    for (int i = 0; i < nv; ++i) {
        topo.vertex_neighbors[i].assign(nbr[i].begin(), nbr[i].end());
        topo.vertex_degree[i] = static_cast<int>(nbr[i].size());
    }
    return topo;
}

// --- OBJ ---------------------------------------------------------------

namespace {

// leading integer of an OBJ face token ("7", "7/2", "7//3", "7/2/3")
int parse_face_index(const std::string& token, int line_no) {
    size_t slash = token.find('/');
    const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
    size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(head, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad face index '" + token + "'");
    }
    if (pos != head.size())
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad face index '" + token + "'");
    if (v < 0)
        throw std::runtime_error("line " + std::to_string(line_no) + ": negative OBJ indices not supported");
    if (v == 0)
        throw std::runtime_error("line " + std::to_string(line_no) + ": OBJ indices are 1-based");
    return v - 1;
}

} // namespace

TriangleMesh load_mesh(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open mesh file: " + path);

    TriangleMesh mesh;
    std::set<std::string> warned;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string rec;
        if (!(ls >> rec)) continue;
        if (rec == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z))
                throw std::runtime_error("line " + std::to_string(line_no) + ": malformed vertex");
            mesh.vertices.push_back(v);
        } else if (rec == "f") {
            std::vector<int> idx;
            std::string token;
            while (ls >> token) idx.push_back(parse_face_index(token, line_no));
            if (idx.size() != 3)
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": only triangular faces supported (got " +
                                         std::to_string(idx.size()) + " vertices)");
            mesh.facets.push_back({idx[0], idx[1], idx[2]});
        } else if (warned.insert(rec).second) {
            std::cerr << "warning: " << path << ": ignoring OBJ record type '" << rec << "'\n";
        }
    }

    mesh.scattering.assign(mesh.facets.size(), 1.0);
    std::string scat_path = path;
    if (scat_path.size() > 4 && scat_path.substr(scat_path.size() - 4) == ".obj")
        scat_path = scat_path.substr(0, scat_path.size() - 4);
    scat_path += ".scat";
    if (std::ifstream probe(scat_path); probe.good())
        mesh.scattering = load_scattering(scat_path, mesh.facet_count());

    try {
        mesh.validate();
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return mesh;
}

std::vector<double> load_scattering(const std::string& path, int expected_count) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open scattering file: " + path);
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        double v;
        if (!(ls >> v))
            throw std::runtime_error(path + " line " + std::to_string(line_no) + ": expected one float");
        if (v < 0.0)
            throw std::runtime_error(path + " line " + std::to_string(line_no) + ": negative scattering");
        values.push_back(v);
    }
    if (static_cast<int>(values.size()) != expected_count)
        throw std::runtime_error(path + ": " + std::to_string(values.size()) +
                                 " values for " + std::to_string(expected_count) + " facets");
    return values;
}

void save_mesh_obj(const std::string& path, const TriangleMesh& mesh) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f.precision(17);
    for (const Vec3& v : mesh.vertices) f << "v " << v.x << " " << v.y << " " << v.z << "\n";
    for (const auto& fc : mesh.facets)
        f << "f " << fc[0] + 1 << " " << fc[1] + 1 << " " << fc[2] + 1 << "\n";
}

void save_scattering(const std::string& path, const TriangleMesh& mesh) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f.precision(17);
    for (double s : mesh.scattering) f << s << "\n";
}

// --- templates ----------------------------------------------------------

TriangleMesh icosphere(int subdivisions, double radius) {
    if (subdivisions < 0 || subdivisions > 6)
        throw std::runtime_error("icosphere subdivisions must be in 0..6");

    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            verts.push_back((verts[a] + verts[b]) * 0.5);
            int idx = static_cast<int>(verts.size()) - 1;
            midpoint[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            int m01 = mid(f[0], f[1]), m12 = mid(f[1], f[2]), m20 = mid(f[2], f[0]);
            next.push_back({f[0], m01, m20});
            next.push_back({f[1], m12, m01});
            next.push_back({f[2], m20, m12});
            next.push_back({m01, m12, m20});
        }
        faces = std::move(next);
    }

    TriangleMesh mesh;
    mesh.vertices.reserve(verts.size());
    for (const Vec3& v : verts) mesh.vertices.push_back(v.normalized() * radius);
    mesh.facets = std::move(faces);
    mesh.scattering.assign(mesh.facets.size(), 1.0);
    return mesh;
}

TriangleMesh make_box(const Vec3& center, const Vec3& size) {
    const Vec3 h = size * 0.5;
    TriangleMesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({center.x + ((i & 1) ? h.x : -h.x),
                              center.y + ((i & 2) ? h.y : -h.y),
                              center.z + ((i & 4) ? h.z : -h.z)});
    // each face split into two triangles, outward winding
    const int quads[6][4] = {
        {0, 2, 3, 1},  // z- (bottom)
        {4, 5, 7, 6},  // z+ (top)
        {0, 1, 5, 4},  // y-
        {2, 6, 7, 3},  // y+
        {0, 4, 6, 2},  // x-
        {1, 3, 7, 5},  // x+
    };
    for (const auto& q : quads) {
        m.facets.push_back({q[0], q[1], q[2]});
        m.facets.push_back({q[0], q[2], q[3]});
    }
    m.scattering.assign(m.facets.size(), 1.0);
    return m;
}

TriangleMesh make_ground_plane(double size_x, double size_y, double z, int cells) {
    TriangleMesh m;
    const int n = cells + 1;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            m.vertices.push_back({-size_x / 2 + size_x * ix / cells,
                                  -size_y / 2 + size_y * iy / cells, z});
    for (int iy = 0; iy < cells; ++iy)
        for (int ix = 0; ix < cells; ++ix) {
            int a = iy * n + ix, b = a + 1, c = a + n, d = c + 1;
            m.facets.push_back({a, b, d});
            m.facets.push_back({a, d, c});
        }
    m.scattering.assign(m.facets.size(), 1.0);
    return m;
}

TriangleMesh merge_meshes(const TriangleMesh& a, const TriangleMesh& b) {
    TriangleMesh m = a;
    const int off = a.vertex_count();
    m.vertices.insert(m.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (const auto& f : b.facets) m.facets.push_back({f[0] + off, f[1] + off, f[2] + off});
    m.scattering.insert(m.scattering.end(), b.scattering.begin(), b.scattering.end());
    return m;
}

// --- Laplacian ------------------------------------------------------------

std::vector<Vec3> laplacian_apply(const TriangleMesh& mesh, const MeshTopology& topo) {
    std::vector<Vec3> out(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const int deg = topo.vertex_degree[i];
        if (deg == 0) continue; // isolated vertex: zero row
        Vec3 sum;
        for (int j : topo.vertex_neighbors[i]) sum += mesh.vertices[j];
        out[i] = mesh.vertices[i] - sum / static_cast<double>(deg);
    }
    return out;
}

} // namespace dsar
