#pragma once

#include <array>
#include <functional>
#include <vector>

#include "dsar/render.hpp"

namespace dsar {

// Pose parameter order used throughout: alpha, beta, theta_x, theta_y,
// theta_z (all degrees), then scale.
enum PoseParam { kPoseAlpha = 0, kPoseBeta, kPoseThetaX, kPoseThetaY, kPoseThetaZ, kPoseScale };

struct GradientSet {
    std::vector<Vec3> d_vertices;     // world frame, one per mesh vertex
    std::vector<double> d_scattering; // one per facet
    bool has_pose = false;
    std::array<double, 6> d_pose{};
};

// Backpropagates an adjoint silhouette image to world-frame vertex
// gradients. Geometry gradients flow through the silhouette only; the chain
// runs sigmoid -> squared edge distance -> mapping-plane screen coordinates
// -> radar-frame positions -> posed world vertices.
GradientSet backward_silhouette(const Image& upstream, const SceneContext& scene);

// Adjoint of the SAR image w.r.t. per-facet scattering. Streams rays exactly
// like the forward pass, reusing the cached per-ray normalizers; throws if
// the cache was built for a different scene.
GradientSet backward_scattering(const Image& upstream, const SceneContext& scene,
                                const ForwardCache& cache);

// Silhouette adjoint routed to the six pose parameters instead of vertices.
// Requires the default radar placement and the radar-frame Euler hook.
GradientSet backward_pose(const Image& upstream, const SceneContext& scene);

// d(posed radar-frame position)/d(pose parameter) for one world vertex.
Vec3 pose_jacobian_column(const RadarView& view, const Vec3& v_world, int param);

// Central finite differences, the reference oracle for every analytic
// gradient in the project.
std::vector<double> finite_difference_oracle(
    const std::function<double(const std::vector<double>&)>& loss,
    const std::vector<double>& params, double h = 1e-4);

} // namespace dsar
