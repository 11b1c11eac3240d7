#include "dsar/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace dsar {

namespace {

constexpr double kEmptyRayLogGuard = -27.631021115928547; // ln(1e-12)
constexpr double kZnormClamp = 10.0; // harmonic extrapolation safety window

uint64_t fnv1a(const void* data, size_t n, uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t scene_hash(const TriangleMesh& mesh, const RadarView& view, const GridSpec& grid,
                    const RenderParams& params) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* d, size_t n) { h = fnv1a(d, n, h); };
    int counts[2] = {mesh.vertex_count(), mesh.facet_count()};
    mix(counts, sizeof(counts));
    if (!mesh.vertices.empty()) mix(mesh.vertices.data(), mesh.vertices.size() * sizeof(Vec3));
    double vp[10] = {view.incident_deg, view.azimuth_deg, view.ref_range, view.z_near,
                     view.z_far, view.euler_deg.x, view.euler_deg.y, view.euler_deg.z,
                     view.scale, params.sigma};
    mix(vp, sizeof(vp));
    double gp[5] = {static_cast<double>(grid.n_x), static_cast<double>(grid.n_z),
                    static_cast<double>(grid.n_y), grid.r_z, params.gamma};
    mix(gp, sizeof(gp));
    return h;
}

// inclusive index band covering [lo_coord, hi_coord] (cell units) inflated by
// `pad`, intersected with [0, count)
FacetBand coord_band(double lo_coord, double hi_coord, double pad, double center_offset,
                     int count) {
    FacetBand b;
    b.lo = std::max(0, static_cast<int>(std::ceil(lo_coord - pad + center_offset)));
    b.hi = std::min(count - 1, static_cast<int>(std::floor(hi_coord + pad + center_offset)));
    return b;
}

} // namespace

SceneContext prepare_scene(const TriangleMesh& mesh, const RadarView& view, const GridSpec& grid,
                           const RenderParams& params) {
    view.check();
    params.check();

    SceneContext s;
    s.mesh = &mesh;
    s.view = view;
    s.grid = grid;
    s.params = params;
    s.key = scene_hash(mesh, view, grid, params);
    s.radar_verts = transform_mesh_to_radar(mesh, view);

    const int nf = mesh.facet_count();
    s.proj_screen.resize(nf);
    s.map_screen.resize(nf);
    s.proj_cols.resize(nf);
    s.proj_rays.resize(nf);
    s.map_cols.resize(nf);
    s.map_rows.resize(nf);
    s.proj_by_col.assign(grid.n_x, {});
    s.map_by_col.assign(grid.n_x, {});

    // probability support band: sigmoid(-d^2/sigma) >= cull_eps within it
    const double band = std::sqrt(params.sigma * std::log(1.0 / params.cull_eps));
    const double off_x = (grid.n_x - 1) * 0.5;
    const double off_y = (grid.n_y - 1) * 0.5;
    const double off_z = (grid.n_z - 1) * 0.5;

    for (int j = 0; j < nf; ++j) {
        FacetScreen2D& pr = s.proj_screen[j];
        FacetScreen2D& mp = s.map_screen[j];
        for (int n = 0; n < 3; ++n) {
            const Vec3 v = s.radar_verts[mesh.facets[j][n]];
            pr.v[n] = {v.x / grid.r_az, v.y / grid.r_y};
            pr.depth[n] = v.z;
            const double slant = std::hypot(v.y, v.z) - view.ref_range;
            mp.v[n] = {v.x / grid.r_az, slant / grid.r_z};
        }
        auto degenerate = [](const FacetScreen2D& f) {
            return std::abs((f.v[1] - f.v[0]).cross(f.v[2] - f.v[0])) < kScreenDegenerateTol;
        };
        pr.valid = !degenerate(pr);
        mp.valid = !degenerate(mp);

        if (pr.valid) {
            const double xs[3] = {pr.v[0].x, pr.v[1].x, pr.v[2].x};
            const double ys[3] = {pr.v[0].y, pr.v[1].y, pr.v[2].y};
            s.proj_cols[j] = coord_band(*std::min_element(xs, xs + 3), *std::max_element(xs, xs + 3),
                                        band, off_x, grid.n_x);
            s.proj_rays[j] = coord_band(*std::min_element(ys, ys + 3), *std::max_element(ys, ys + 3),
                                        band, off_y, grid.n_y);
            for (int l = s.proj_cols[j].lo; l <= s.proj_cols[j].hi; ++l)
                s.proj_by_col[l].push_back(j);
        }
        if (mp.valid) {
            const double xs[3] = {mp.v[0].x, mp.v[1].x, mp.v[2].x};
            const double zs[3] = {mp.v[0].y, mp.v[1].y, mp.v[2].y};
            s.map_cols[j] = coord_band(*std::min_element(xs, xs + 3), *std::max_element(xs, xs + 3),
                                       band, off_x, grid.n_x);
            s.map_rows[j] = coord_band(*std::min_element(zs, zs + 3), *std::max_element(zs, zs + 3),
                                       band, off_z, grid.n_z);
            for (int l = s.map_cols[j].lo; l <= s.map_cols[j].hi; ++l)
                s.map_by_col[l].push_back(j);
        }
    }
    return s;
}

double SceneContext::map_delta(int facet, int k, int l) const {
    const FacetScreen2D& f = map_screen[facet];
    if (!f.valid) return 0.0;
    const Vec2 p{grid.col_coord(l) / grid.r_az, grid.row_coord(k) / grid.r_z};
    const EdgeDistance ed = point_triangle_distance(f, p);
    return facet_probability(ed.dist, ed.inside, params.sigma);
}

std::vector<double> shadowing_weights(std::span<const double> deltas,
                                      std::span<const double> z_norms, double gamma) {
    if (deltas.size() != z_norms.size())
        throw std::runtime_error("shadowing_weights: mismatched array sizes");
    std::vector<double> rho(deltas.size(), 0.0);

    double z_shift = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < deltas.size(); ++j)
        if (deltas[j] > 0.0) z_shift = std::max(z_shift, z_norms[j]);
    if (!std::isfinite(z_shift)) return rho; // no facet hit at all

    double t = 0.0;
    for (size_t j = 0; j < deltas.size(); ++j)
        if (deltas[j] > 0.0) t += deltas[j] * std::exp((z_norms[j] - z_shift) / gamma);
    // empty-ray guard on the unshifted normalizer, evaluated in log space
    if (t <= 0.0 || z_shift / gamma + std::log(t) < kEmptyRayLogGuard) return rho;

    for (size_t j = 0; j < deltas.size(); ++j)
        if (deltas[j] > 0.0) rho[j] = deltas[j] * std::exp((z_norms[j] - z_shift) / gamma) / t;
    return rho;
}

double energy_transfer(double rho, double z_actual_m, double z_cell_m, double ref_range_m,
                       double sigma_g, double r_z) {
    if (!(sigma_g > 0.0)) throw std::runtime_error("energy_transfer: sigma_g must be positive");
    const double dz_cells = ((z_actual_m - ref_range_m) - z_cell_m) / r_z;
    return rho * std::exp(-dz_cells * dz_cells / (2.0 * sigma_g * sigma_g)) /
           (std::sqrt(2.0 * M_PI) * sigma_g);
}

double silhouette_from_deltas(std::span<const double> deltas) {
    double keep = 1.0;
    for (double d : deltas) keep *= (1.0 - d);
    return 1.0 - keep;
}

RayEval eval_ray(const SceneContext& scene, int ray_i, int col_l, std::vector<RayFacet>& out,
                 const ForwardCache* cache) {
    out.clear();
    const GridSpec& g = scene.grid;
    const Vec2 p{g.col_coord(col_l) / g.r_az, g.ray_coord(ray_i) / g.r_y};

    double z_shift = -std::numeric_limits<double>::infinity();
    for (int j : scene.proj_by_col[col_l]) {
        if (!scene.proj_rays[j].contains(ray_i)) continue;
        const FacetScreen2D& f = scene.proj_screen[j];
        Barycentric b;
        if (!barycentric(f, p, b)) continue;
        const EdgeDistance ed = point_triangle_distance(f, p);
        const double delta = facet_probability(ed.dist, ed.inside, scene.params.sigma);
        if (!(delta > 0.0)) continue;
        const DepthSample ds = normalized_depth(f, b, scene.view.z_near, scene.view.z_far);
        RayFacet rf;
        rf.facet = j;
        rf.delta = delta;
        rf.z_norm = std::clamp(ds.z_norm, -kZnormClamp, kZnormClamp);
        rf.z_center_cells = (ds.z_actual - scene.view.ref_range) / g.r_z;
        out.push_back(rf);
        z_shift = std::max(z_shift, rf.z_norm);
    }

    RayEval ev;
    if (out.empty()) return ev;

    if (cache) {
        ev.t_shifted = cache->t(ray_i, col_l);
        ev.z_shift = cache->z_shift[static_cast<size_t>(ray_i) * g.n_x + col_l];
        if (!(ev.t_shifted > 0.0)) return ev; // forward pass skipped this ray
    } else {
        ev.z_shift = z_shift;
        double t = 0.0;
        for (const RayFacet& rf : out) t += rf.delta * std::exp((rf.z_norm - z_shift) / scene.params.gamma);
        if (t <= 0.0 || z_shift / scene.params.gamma + std::log(t) < kEmptyRayLogGuard) return ev;
        ev.t_shifted = t;
    }

    ev.live = true;
    for (RayFacet& rf : out)
        rf.rho = rf.delta * std::exp((rf.z_norm - ev.z_shift) / scene.params.gamma) / ev.t_shifted;
    return ev;
}

namespace {

struct GaussBand {
    int lo, hi;
};

GaussBand gauss_band(const SceneContext& s, double z_center_cells) {
    const double off_z = (s.grid.n_z - 1) * 0.5;
    const double cut = s.params.gauss_cutoff * s.params.sigma_g;
    GaussBand b;
    b.lo = std::max(0, static_cast<int>(std::ceil(z_center_cells - cut + off_z)));
    b.hi = std::min(s.grid.n_z - 1, static_cast<int>(std::floor(z_center_cells + cut + off_z)));
    return b;
}

} // namespace

SarRender render_sar(const SceneContext& scene) {
    const GridSpec& g = scene.grid;
    SarRender out;
    out.image = Image(g.n_x, g.n_z, ImageDomain::linear);
    out.cache.n_y = g.n_y;
    out.cache.n_x = g.n_x;
    out.cache.t_shifted.assign(static_cast<size_t>(g.n_y) * g.n_x, 0.0);
    out.cache.z_shift.assign(static_cast<size_t>(g.n_y) * g.n_x, 0.0);
    out.cache.scene_key = scene.key;

    const double off_z = (g.n_z - 1) * 0.5;
    const double inv2sg2 = 1.0 / (2.0 * scene.params.sigma_g * scene.params.sigma_g);
    std::vector<RayFacet> ray;
    ray.reserve(scene.mesh->facet_count());

    for (int l = 0; l < g.n_x; ++l) {
        if (scene.proj_by_col[l].empty()) continue;
        for (int i = 0; i < g.n_y; ++i) {
            const RayEval ev = eval_ray(scene, i, l, ray);
            if (!ev.live) continue;
            out.cache.t(i, l) = ev.t_shifted;
            out.cache.z_shift[static_cast<size_t>(i) * g.n_x + l] = ev.z_shift;

            for (const RayFacet& rf : ray) {
                const FacetBand& rows = scene.map_rows[rf.facet];
                GaussBand gb = gauss_band(scene, rf.z_center_cells);
                gb.lo = std::max(gb.lo, rows.lo);
                gb.hi = std::min(gb.hi, rows.hi);
                if (gb.lo > gb.hi) continue;
                if (!scene.map_cols[rf.facet].contains(l)) continue;
                const double sj = scene.mesh->scattering[rf.facet];
                for (int k = gb.lo; k <= gb.hi; ++k) {
                    const double dz = rf.z_center_cells - (k - off_z);
                    const double ds = scene.map_delta(rf.facet, k, l);
                    out.image.at(k, l) += ds * sj * rf.rho * std::exp(-dz * dz * inv2sg2);
                }
            }
        }
    }

    const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * scene.params.sigma_g);
    for (double& v : out.image.data) v *= norm;

    // the streamed pass keeps the image plus one per-ray facet buffer; the
    // buffer is bounded by the facet count, never by N_y
    out.working_bytes = out.image.data.capacity() * sizeof(double) +
                        ray.capacity() * sizeof(RayFacet);
    return out;
}

SarRender render_sar(const TriangleMesh& mesh, const RadarView& view, const GridSpec& grid,
                     const RenderParams& params) {
    return render_sar(prepare_scene(mesh, view, grid, params));
}

Image render_sar_direct(const SceneContext& scene) {
    const GridSpec& g = scene.grid;
    Image img(g.n_x, g.n_z, ImageDomain::linear);
    const double off_z = (g.n_z - 1) * 0.5;
    const double inv2sg2 = 1.0 / (2.0 * scene.params.sigma_g * scene.params.sigma_g);
    std::vector<RayFacet> ray;
    std::vector<double> omega(scene.mesh->facet_count());

    for (int l = 0; l < g.n_x; ++l) {
        if (scene.proj_by_col[l].empty()) continue;
        for (int k = 0; k < g.n_z; ++k) {
            std::fill(omega.begin(), omega.end(), 0.0);
            // full ray-energy accumulation for this cell
            for (int i = 0; i < g.n_y; ++i) {
                const RayEval ev = eval_ray(scene, i, l, ray);
                if (!ev.live) continue;
                for (const RayFacet& rf : ray) {
                    const double dz = rf.z_center_cells - (k - off_z);
                    if (std::abs(dz) > scene.params.gauss_cutoff * scene.params.sigma_g) continue;
                    omega[rf.facet] += rf.rho * std::exp(-dz * dz * inv2sg2);
                }
            }
            double acc = 0.0;
            for (int j = 0; j < scene.mesh->facet_count(); ++j) {
                if (omega[j] == 0.0) continue;
                if (!scene.map_cols[j].contains(l) || !scene.map_rows[j].contains(k)) continue;
                acc += scene.map_delta(j, k, l) * omega[j] * scene.mesh->scattering[j];
            }
            img.at(k, l) = acc / (std::sqrt(2.0 * M_PI) * scene.params.sigma_g);
        }
    }
    return img;
}

Image render_silhouette(const SceneContext& scene) {
    const GridSpec& g = scene.grid;
    Image img(g.n_x, g.n_z, ImageDomain::linear);
    std::vector<double> keep(g.n_z);

    for (int l = 0; l < g.n_x; ++l) {
        std::fill(keep.begin(), keep.end(), 1.0);
        for (int j : scene.map_by_col[l]) {
            const FacetBand& rows = scene.map_rows[j];
            for (int k = rows.lo; k <= rows.hi; ++k) keep[k] *= (1.0 - scene.map_delta(j, k, l));
        }
        for (int k = 0; k < g.n_z; ++k) img.at(k, l) = 1.0 - keep[k];
    }
    return img;
}

Image render_silhouette(const TriangleMesh& mesh, const RadarView& view, const GridSpec& grid,
                        const RenderParams& params) {
    return render_silhouette(prepare_scene(mesh, view, grid, params));
}

} // namespace dsar
