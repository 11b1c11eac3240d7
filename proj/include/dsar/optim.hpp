#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsar/losses.hpp"

namespace dsar {

// Bias-corrected Adam with the standard constants.
struct OptimState {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 8;
    long step = 0;
    std::vector<double> m, v;

    void init(size_t n);
    // one update; throws on non-finite gradients
    void apply(std::span<double> params, std::span<const double> grads);
};

struct ViewSample {
    RadarView view;
    Image truth_sil;
    std::optional<Image> truth_sar;
};

struct ReconstructConfig {
    GridSpec grid;
    RenderParams params;
    LossWeights weights;
    LossMode mode = LossMode::full;
    double lr = 0.01;
    int batch_size = 8;
    int epochs = 500;
    uint64_t seed = 0;
    int threads = 1;
    // optional per-epoch snapshots: every `snapshot_every` epochs into
    // `snapshot_dir` as recon_epochNNN.obj
    int snapshot_every = 0;
    std::string snapshot_dir;
};

struct BatchRecord {
    int epoch = 0;
    int batch = 0;
    double l_sil = 0, l_tex = 0, l_lap = 0, l_flat = 0, total = 0;
};

struct ReconstructResult {
    TriangleMesh mesh;
    std::vector<BatchRecord> history;
    bool diverged = false;
};

// Multi-view shape (and texture, in full mode) optimization: per epoch the
// views are shuffled into batches, per-view gradients are averaged, and one
// Adam step updates vertices (and scattering, clamped at zero). Aborts and
// returns the last finite mesh if any loss goes non-finite.
ReconstructResult reconstruct(const std::vector<ViewSample>& views, const TriangleMesh& tmpl,
                              const ReconstructConfig& cfg);

void write_history_csv(const std::string& path, const std::vector<BatchRecord>& history);

struct PoseConfig {
    GridSpec grid;
    RenderParams params;
    double lr = 0.1;
    int epochs = 500;
};

struct PoseEstimate {
    RadarView initial;
    RadarView final_view;
    double initial_iou = 0.0;
    double final_iou = 0.0;
    Image predicted_sil;
};

// Adam on (alpha, beta, theta_x, theta_y, theta_z, scale) against the
// silhouette IoU loss for a known mesh; success is measured by IoU, not by
// angle agreement (the parameterization is redundant).
PoseEstimate estimate_pose(const Image& observed_sil, const TriangleMesh& mesh,
                           const RadarView& init, const PoseConfig& cfg);

} // namespace dsar
