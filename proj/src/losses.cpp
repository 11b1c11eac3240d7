#include "dsar/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace dsar {

namespace {

void require_same_shape(const Image& a, const Image& b, const char* who) {
    if (a.width != b.width || a.height != b.height)
        throw std::runtime_error(std::string(who) + ": image shapes differ");
}

} // namespace

ImageLoss loss_silhouette(const Image& pred, const Image& truth) {
    require_same_shape(pred, truth, "loss_silhouette");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double prod = truth.data[i] * pred.data[i];
        num += prod;
        den += truth.data[i] + pred.data[i] - prod;
    }
    ImageLoss out;
    out.grad = Image(pred.width, pred.height);
    if (den == 0.0) return out; // both empty: identical by convention
    out.value = 1.0 - num / den;
    const double den2 = den * den;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double t = truth.data[i];
        // d(1 - N/D)/dpred_i with dN = t, dD = 1 - t
        out.grad.data[i] = (num * (1.0 - t) - t * den) / den2;
    }
    return out;
}

double binary_iou(const Image& a, const Image& b, double threshold) {
    require_same_shape(a, b, "binary_iou");
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        const bool pa = a.data[i] >= threshold, pb = b.data[i] >= threshold;
        inter += pa && pb;
        uni += pa || pb;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

ImageLoss loss_texture(const Image& pred, const Image& truth) {
    require_same_shape(pred, truth, "loss_texture");
    ImageLoss out;
    out.grad = Image(pred.width, pred.height);
    for (size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred.data[i] - truth.data[i];
        out.value += std::abs(diff);
        out.grad.data[i] = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    }
    return out;
}

MeshLoss loss_laplacian(const TriangleMesh& mesh, const MeshTopology& topo) {
    if (static_cast<int>(topo.vertex_degree.size()) != mesh.vertex_count())
        throw std::runtime_error("loss_laplacian: topology does not match mesh");
    const std::vector<Vec3> lv = laplacian_apply(mesh, topo);
    MeshLoss out;
    out.grad.resize(mesh.vertex_count());
    for (const Vec3& r : lv) out.value += r.norm2();
    // gradient = 2 L^T (L V): diagonal part plus neighbor pullback
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        Vec3 g = topo.vertex_degree[i] > 0 ? lv[i] : Vec3{};
        for (int j : topo.vertex_neighbors[i]) g -= lv[j] / static_cast<double>(topo.vertex_degree[j]);
        out.grad[i] = g * 2.0;
    }
    return out;
}

MeshLoss loss_flatness(const TriangleMesh& mesh, const MeshTopology& topo) {
    MeshLoss out;
    out.grad.resize(mesh.vertex_count());
    constexpr double kPerpTol = 1e-12;

    for (const SharedEdge& se : topo.shared_edge_pairs) {
        const Vec3 v1 = mesh.vertices[se.edge_v1];
        const Vec3 v2 = mesh.vertices[se.edge_v2];
        const Vec3 v3 = mesh.vertices[se.opposite_a];
        const Vec3 v4 = mesh.vertices[se.opposite_b];

        const Vec3 e = v2 - v1;
        const double q = e.norm2();
        if (q < kPerpTol * kPerpTol) continue;
        const Vec3 a = v3 - v1;
        const Vec3 b = v4 - v1;
        // perpendicular feet offsets: component of a (and b) orthogonal to e
        const Vec3 u = a - e * (a.dot(e) / q);
        const Vec3 w = b - e * (b.dot(e) / q);
        const double nu = u.norm(), nw = w.norm();
        if (nu < kPerpTol || nw < kPerpTol) continue; // opposite vertex on the edge line

        const double c = u.dot(w) / (nu * nw);
        out.value += (1.0 + c) * (1.0 + c);

        const double dterm = 2.0 * (1.0 + c);
        const Vec3 g_u = (w / (nu * nw) - u * (c / (nu * nu))) * dterm;
        const Vec3 g_w = (u / (nu * nw) - w * (c / (nw * nw))) * dterm;
        const Vec3 g_e = (g_u * a.dot(e) + g_w * b.dot(e)) / -q;

        out.grad[se.opposite_a] += g_u;
        out.grad[se.opposite_b] += g_w;
        out.grad[se.edge_v2] += g_e;
        out.grad[se.edge_v1] -= g_e + g_u + g_w;
    }
    return out;
}

HybridLoss hybrid_loss(const SceneContext& scene, const MeshTopology& topo,
                       const Image& pred_sil, const Image& truth_sil, const Image* pred_sar,
                       const Image* truth_sar, const ForwardCache* cache,
                       const LossWeights& weights, LossMode mode) {
    HybridLoss out;

    const ImageLoss sil = loss_silhouette(pred_sil, truth_sil);
    out.l_sil = sil.value;
    out.grads = backward_silhouette(sil.grad, scene);

    if (mode == LossMode::full) {
        if (!pred_sar || !truth_sar || !cache)
            throw std::runtime_error("hybrid_loss: full mode needs SAR images and forward cache");
        const ImageLoss tex = loss_texture(*pred_sar, *truth_sar);
        out.l_tex = tex.value;
        GradientSet dscat = backward_scattering(tex.grad, scene, *cache);
        for (size_t j = 0; j < dscat.d_scattering.size(); ++j)
            out.grads.d_scattering[j] += weights.lambda_tex * dscat.d_scattering[j];
    }

    const MeshLoss lap = loss_laplacian(*scene.mesh, topo);
    const MeshLoss flat = loss_flatness(*scene.mesh, topo);
    out.l_lap = lap.value;
    out.l_flat = flat.value;
    for (int i = 0; i < scene.mesh->vertex_count(); ++i)
        out.grads.d_vertices[i] +=
            lap.grad[i] * weights.lambda_lap + flat.grad[i] * weights.lambda_flat;

    out.total = out.l_sil + weights.lambda_lap * out.l_lap + weights.lambda_flat * out.l_flat;
    if (mode == LossMode::full) out.total += weights.lambda_tex * out.l_tex;
    return out;
}

} // namespace dsar
