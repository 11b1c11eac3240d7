#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsar/image.hpp"
#include "dsar/mesh.hpp"
#include "dsar/radar.hpp"
#include "dsar/soft_raster.hpp"

namespace dsar {

// Per-ray normalizers of the shadowing softmax, kept from the forward pass
// for the scattering backward pass. Values are stored in the max-shifted
// domain (t_shifted, z_shift) so the backward pass reproduces the forward
// weights exactly; t_shifted == 0 marks a skipped (empty) ray.
struct ForwardCache {
    int n_y = 0, n_x = 0;
    std::vector<double> t_shifted;
    std::vector<double> z_shift;
    uint64_t scene_key = 0;

    double& t(int i, int l) { return t_shifted[static_cast<size_t>(i) * n_x + l]; }
    double t(int i, int l) const { return t_shifted[static_cast<size_t>(i) * n_x + l]; }
};

// Everything derived from (mesh, view, grid, params) that both directions of
// the renderer need: radar-frame vertices, per-plane screen facets in cell
// units, and conservative per-facet index bands used for culling. Bands are
// sized so that skipped facets have probability below params.cull_eps.
struct FacetBand {
    int lo = 0, hi = -1; // inclusive; empty when hi < lo
    bool contains(int v) const { return v >= lo && v <= hi; }
};

struct SceneContext {
    const TriangleMesh* mesh = nullptr;
    RadarView view;
    GridSpec grid;
    RenderParams params;

    std::vector<Vec3> radar_verts;
    std::vector<FacetScreen2D> proj_screen; // (x/r_az, y/r_y), depths filled
    std::vector<FacetScreen2D> map_screen;  // (x/r_az, slant/r_z)
    std::vector<FacetBand> proj_cols, proj_rays, map_cols, map_rows;
    std::vector<std::vector<int>> proj_by_col, map_by_col;
    uint64_t key = 0;

    double map_delta(int facet, int k, int l) const;  // mapping-plane probability
};

SceneContext prepare_scene(const TriangleMesh& mesh, const RadarView& view, const GridSpec& grid,
                           const RenderParams& params);

// One projection ray's interaction with a facet.
struct RayFacet {
    int facet = -1;
    double delta = 0.0;        // projection-plane probability
    double z_norm = 0.0;       // normalized depth
    double z_center_cells = 0.0; // (Z_actual - f)/r_z, energy landing row
    double rho = 0.0;          // normalized shadowing weight
};

struct RayEval {
    bool live = false;     // false when the empty-ray guard tripped
    double t_shifted = 0.0;
    double z_shift = 0.0;
};

// Evaluates probabilities, depths and shadowing weights of one projection
// ray. When `cache` is given the stored normalizer is used instead of the
// freshly summed one (the backward-pass contract).
RayEval eval_ray(const SceneContext& scene, int ray_i, int col_l, std::vector<RayFacet>& out,
                 const ForwardCache* cache = nullptr);

// Softmax-by-depth energy split of one ray (Eq-form rho weights). Inputs are
// parallel arrays of facet probabilities and normalized depths; the result
// sums to 1 unless the empty-ray guard trips, in which case all weights are
// zero.
std::vector<double> shadowing_weights(std::span<const double> deltas,
                                      std::span<const double> z_norms, double gamma);

// Gaussian energy contribution of one facet-ray pair onto a mapping cell at
// slant coordinate z_cell (meters from scene center, away from radar
// positive). The distance is evaluated in slant-cell units of r_z.
double energy_transfer(double rho, double z_actual_m, double z_cell_m, double ref_range_m,
                       double sigma_g, double r_z);

// 1 - prod(1 - delta): silhouette aggregation over facet probabilities.
double silhouette_from_deltas(std::span<const double> deltas);

struct SarRender {
    Image image; // linear domain, N_z x N_x
    ForwardCache cache;
    // transient working-buffer bytes of the streamed pass, excluding inputs
    // and outputs; stays constant as the ray count N_y grows
    size_t working_bytes = 0;
};

// Streamed renderer (per-ray inner loop keeps scalars only; working memory
// independent of the ray count).
SarRender render_sar(const TriangleMesh& mesh, const RadarView& view, const GridSpec& grid,
                     const RenderParams& params);
SarRender render_sar(const SceneContext& scene);

// Textbook formulation that accumulates each facet's full ray-energy sum per
// mapping cell before aggregation. Slow; kept as the equivalence reference
// for the streamed renderer.
Image render_sar_direct(const SceneContext& scene);

Image render_silhouette(const TriangleMesh& mesh, const RadarView& view, const GridSpec& grid,
                        const RenderParams& params);
Image render_silhouette(const SceneContext& scene);

} // namespace dsar
