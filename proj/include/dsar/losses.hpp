#pragma once

#include <optional>
#include <vector>

#include "dsar/gradients.hpp"
#include "dsar/image.hpp"
#include "dsar/mesh.hpp"

namespace dsar {

struct LossWeights {
    double lambda_tex = 1.0;    // lambda_1
    double lambda_lap = 0.03;   // lambda_2
    double lambda_flat = 0.003; // lambda_3
};

enum class LossMode { full, silhouette_only };

struct ImageLoss {
    double value = 0.0;
    Image grad; // d value / d predicted pixel
};

// 1 - sum(I*Ihat) / sum(I + Ihat - I*Ihat), the negative-IoU loss over the
// whole image. Two empty images compare as loss 0.
ImageLoss loss_silhouette(const Image& pred, const Image& truth);

// Mask IoU after thresholding both images; the reporting metric for
// silhouette agreement (1.0 when both masks are empty).
double binary_iou(const Image& a, const Image& b, double threshold = 0.5);

// L1 distance; gradient is the per-pixel sign (zero at ties).
ImageLoss loss_texture(const Image& pred, const Image& truth);

struct MeshLoss {
    double value = 0.0;
    std::vector<Vec3> grad; // per vertex
};

// Sum of squared rows of the random-walk Laplacian applied to the vertices.
MeshLoss loss_laplacian(const TriangleMesh& mesh, const MeshTopology& topo);

// Sum over interior edges of (1 + cos theta)^2, theta measured between the
// perpendicular feet of the two opposite vertices on the shared edge.
MeshLoss loss_flatness(const TriangleMesh& mesh, const MeshTopology& topo);

struct HybridLoss {
    double total = 0.0;
    double l_sil = 0.0, l_tex = 0.0, l_lap = 0.0, l_flat = 0.0;
    GradientSet grads; // vertex gradients (world) + scattering gradients
};

// Full objective for one view: silhouette IoU + weighted texture L1 +
// weighted regularizers, with gradients routed per the renderer's gradient
// flow (geometry through the silhouette, scattering through the SAR image).
// In silhouette-only mode the texture term is dropped and pred/truth SAR may
// be null.
HybridLoss hybrid_loss(const SceneContext& scene, const MeshTopology& topo,
                       const Image& pred_sil, const Image& truth_sil, const Image* pred_sar,
                       const Image* truth_sar, const ForwardCache* cache,
                       const LossWeights& weights, LossMode mode);

} // namespace dsar
