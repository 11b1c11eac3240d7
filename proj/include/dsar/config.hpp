#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsar/losses.hpp"
#include "dsar/optim.hpp"
#include "dsar/radar.hpp"
#include "dsar/soft_raster.hpp"

namespace dsar {

// One flat run configuration shared by every subcommand. Serialized as
// sectioned `key = value` text; command-line flags override file values.
struct RunConfig {
    // [scene]
    std::string mesh;
    std::string mesh_b; // second mesh for eval-iou
    double ref_range = 1000.0;
    double z_near = 995.0;
    double z_far = 1005.0;
    double scale = 1.0;
    double euler_x = 0.0, euler_y = 0.0, euler_z = 0.0;

    // [views]
    std::vector<double> incident_angles{15, 30, 45, 60};
    std::vector<double> azimuth_angles{0, 45, 90, 135, 180, 225, 270, 315};

    // [grid]
    int n_x = 128;
    int n_z = 128;
    double r_z = 0.05;

    // [render]
    double sigma = 1e-5;
    double gamma = 1e-5;
    double sigma_g = 0.5;

    // [loss]
    double lambda_tex = 1.0;
    double lambda_lap = 0.03;
    double lambda_flat = 0.003;
    std::string mode = "full"; // full | silhouette-only

    // [optim]
    double lr = 0.01;
    int batch_size = 8;
    int epochs = 500;
    double recon_sigma = 0.04; // softer probability sharpness for optimization
    int template_subdivisions = 3;
    double template_radius = 1.0;
    int snapshot_every = 0;

    // [pose]
    double pose_incident = 60.0;
    double pose_azimuth = 0.0;
    double pose_euler_x = 0.0, pose_euler_y = 0.0, pose_euler_z = 0.0;
    double pose_scale = 1.0;
    double pose_lr = 0.1;
    int pose_epochs = 500;

    // [imaging]
    double db_floor = -40.0;
    double sil_threshold = 0.5;
    double peak_threshold_db = 30.0;
    std::string psf_domain = "db"; // db | linear

    // [eval]
    int voxel_resolution = 32;

    // [run]
    uint64_t seed = 0;
    int threads = 1;
    std::string out_dir = ".";

    RadarView make_view(double incident_deg, double azimuth_deg) const;
    GridSpec make_grid(const RadarView& view) const;
    RenderParams make_render_params() const;
    RenderParams make_recon_params() const;
    LossWeights make_weights() const;
    LossMode make_mode() const;
};

RunConfig load_config(const std::string& path);
void save_config(const std::string& path, const RunConfig& cfg);
// apply one `section.key=value` override (the CLI flag form)
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

} // namespace dsar
