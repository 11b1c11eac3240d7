// Command-line front end: render / reconstruct / estimate-pose / eval-iou /
// filter-sidelobes / synth-texture over the shared run configuration.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "dsar/config.hpp"
#include "dsar/gradients.hpp"
#include "dsar/imaging.hpp"
#include "dsar/optim.hpp"
#include "dsar/render.hpp"

namespace fs = std::filesystem;
using namespace dsar;

namespace {

std::string angle_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string view_stem(const RunConfig& cfg, double incident, double azimuth) {
    return cfg.out_dir + "/a" + angle_tag(incident) + "_b" + angle_tag(azimuth);
}

TriangleMesh load_mesh_checked(const std::string& path) {
    if (path.empty()) throw std::runtime_error("no mesh path configured (scene.mesh)");
    if (!fs::exists(path)) throw std::runtime_error("mesh file does not exist: " + path);
    return load_mesh(path);
}

void export_image(const RunConfig& cfg, const Image& img, const std::string& stem) {
    write_fimg(stem + ".fimg", img);
    const Image db = to_db(img, cfg.db_floor);
    write_png_gray(stem + ".png", to_gray8(db, cfg.db_floor), img.width, img.height);
}

int cmd_render(const RunConfig& cfg) {
    const TriangleMesh mesh = load_mesh_checked(cfg.mesh);
    fs::create_directories(cfg.out_dir);
    const RenderParams params = cfg.make_render_params();
    int count = 0;
    for (double inc : cfg.incident_angles) {
        for (double az : cfg.azimuth_angles) {
            const RadarView view = cfg.make_view(inc, az);
            const GridSpec grid = cfg.make_grid(view);
            const SceneContext scene = prepare_scene(mesh, view, grid, params);
            const SarRender sar = render_sar(scene);
            const Image sil = render_silhouette(scene);
            const std::string stem = view_stem(cfg, inc, az);
            export_image(cfg, sar.image, stem + "_sar");
            write_fimg(stem + "_sil.fimg", sil);
            std::vector<uint8_t> px(sil.size());
            for (size_t i = 0; i < sil.size(); ++i)
                px[i] = static_cast<uint8_t>(std::lround(std::clamp(sil.data[i], 0.0, 1.0) * 255));
            write_png_gray(stem + "_sil.png", px, sil.width, sil.height);
            ++count;
        }
    }
    std::cout << "rendered " << count << " views into " << cfg.out_dir << "\n";
    return 0;
}

int cmd_reconstruct(const RunConfig& cfg, const std::string& data_dir) {
    fs::create_directories(cfg.out_dir);
    const std::string dir = data_dir.empty() ? cfg.out_dir : data_dir;

    ReconstructConfig rc;
    rc.params = cfg.make_recon_params();
    rc.weights = cfg.make_weights();
    rc.mode = cfg.make_mode();
    rc.lr = cfg.lr;
    rc.batch_size = cfg.batch_size;
    rc.epochs = cfg.epochs;
    rc.seed = cfg.seed;
    rc.threads = cfg.threads;
    rc.snapshot_every = cfg.snapshot_every;
    rc.snapshot_dir = cfg.out_dir;

    std::vector<ViewSample> views;
    for (double inc : cfg.incident_angles) {
        for (double az : cfg.azimuth_angles) {
            ViewSample s;
            s.view = cfg.make_view(inc, az);
            const std::string stem = dir + "/a" + angle_tag(inc) + "_b" + angle_tag(az);
            s.truth_sil = read_fimg(stem + "_sil.fimg");
            if (rc.mode == LossMode::full) s.truth_sar = read_fimg(stem + "_sar.fimg");
            views.push_back(std::move(s));
        }
    }
    if (views.empty()) throw std::runtime_error("no views configured");
    rc.grid = cfg.make_grid(views.front().view);

    const TriangleMesh tmpl = icosphere(cfg.template_subdivisions, cfg.template_radius);
    const ReconstructResult res = reconstruct(views, tmpl, rc);

    save_mesh_obj(cfg.out_dir + "/recon.obj", res.mesh);
    if (rc.mode == LossMode::full) save_scattering(cfg.out_dir + "/recon.scat", res.mesh);
    write_history_csv(cfg.out_dir + "/history.csv", res.history);
    if (res.diverged) {
        std::cerr << "reconstruction diverged (non-finite loss); last mesh kept\n";
        return 1;
    }
    std::cout << "reconstructed mesh written to " << cfg.out_dir << "/recon.obj\n";
    return 0;
}

int cmd_estimate_pose(const RunConfig& cfg, const std::string& observed_path,
                      const std::vector<double>& truth) {
    const TriangleMesh mesh = load_mesh_checked(cfg.mesh);
    const Image observed = read_fimg(observed_path);
    fs::create_directories(cfg.out_dir);

    RadarView init = cfg.make_view(cfg.pose_incident, cfg.pose_azimuth);
    init.euler_deg = {cfg.pose_euler_x, cfg.pose_euler_y, cfg.pose_euler_z};
    init.scale = cfg.pose_scale;

    PoseConfig pc;
    pc.grid = cfg.make_grid(init);
    pc.params = cfg.make_recon_params();
    pc.lr = cfg.pose_lr;
    pc.epochs = cfg.pose_epochs;

    const PoseEstimate est = estimate_pose(observed, mesh, init, pc);

    auto row = [](const char* name, double t, double i, double p, bool has_truth) {
        std::printf("%-18s %14s %14.4f %14.4f\n", name,
                    has_truth ? std::to_string(t).c_str() : "-", i, p);
    };
    std::printf("%-18s %14s %14s %14s\n", "parameter", "ground truth", "initialization",
                "prediction");
    const bool ht = truth.size() == 6;
    row("incident angle", ht ? truth[0] : 0, est.initial.incident_deg, est.final_view.incident_deg, ht);
    row("azimuth angle", ht ? truth[1] : 0, est.initial.azimuth_deg, est.final_view.azimuth_deg, ht);
    row("euler x", ht ? truth[2] : 0, est.initial.euler_deg.x, est.final_view.euler_deg.x, ht);
    row("euler y", ht ? truth[3] : 0, est.initial.euler_deg.y, est.final_view.euler_deg.y, ht);
    row("euler z", ht ? truth[4] : 0, est.initial.euler_deg.z, est.final_view.euler_deg.z, ht);
    row("scale", ht ? truth[5] : 0, est.initial.scale, est.final_view.scale, ht);
    std::printf("silhouette IoU: initial %.4f -> final %.4f\n", est.initial_iou, est.final_iou);
    if (est.final_iou < 0.5) std::printf("warning: did not converge (final IoU < 0.5)\n");

    write_fimg(cfg.out_dir + "/pose_predicted_sil.fimg", est.predicted_sil);
    return 0;
}

int cmd_eval_iou(const RunConfig& cfg) {
    const TriangleMesh a = load_mesh_checked(cfg.mesh);
    if (cfg.mesh_b.empty()) throw std::runtime_error("eval-iou needs scene.mesh_b");
    const TriangleMesh b = load_mesh_checked(cfg.mesh_b);

    // shared bounds: union of the two tight boxes, expanded 2% per side
    const Aabb ba = mesh_bounds(a), bb = mesh_bounds(b);
    Aabb u{{std::min(ba.lo.x, bb.lo.x), std::min(ba.lo.y, bb.lo.y), std::min(ba.lo.z, bb.lo.z)},
           {std::max(ba.hi.x, bb.hi.x), std::max(ba.hi.y, bb.hi.y), std::max(ba.hi.z, bb.hi.z)}};
    u = expanded_bounds(u);
    const VoxelGrid ga = voxelize_with_bounds(a, cfg.voxel_resolution, u);
    const VoxelGrid gb = voxelize_with_bounds(b, cfg.voxel_resolution, u);
    std::printf("voxel IoU @ %d^3: %.6f\n", cfg.voxel_resolution, voxel_iou(ga, gb));
    return 0;
}

int cmd_filter_sidelobes(const RunConfig& cfg, const std::string& image_path,
                         const std::string& psf_path) {
    const Image img = read_fimg(image_path);
    const Image psf = read_fimg(psf_path);
    const PsfDomain domain =
        cfg.psf_domain == "linear" ? PsfDomain::linear : PsfDomain::db;
    const Image filtered = sidelobe_filter(img, psf, cfg.peak_threshold_db, domain);
    fs::create_directories(cfg.out_dir);
    export_image(cfg, filtered, cfg.out_dir + "/filtered");
    std::cout << "filtered image written to " << cfg.out_dir << "/filtered.fimg\n";
    return 0;
}

int cmd_synth_texture(const RunConfig& cfg, int background_start, double target_shape,
                      double target_scale, double bg_shape, double bg_scale) {
    TriangleMesh mesh = load_mesh_checked(cfg.mesh);
    GammaTextureSpec spec;
    GammaRegion target{target_shape, target_scale, {}};
    GammaRegion background{bg_shape, bg_scale, {}};
    for (int j = 0; j < mesh.facet_count(); ++j) {
        if (background_start >= 0 && j >= background_start)
            background.facets.push_back(j);
        else
            target.facets.push_back(j);
    }
    spec.regions.push_back(target);
    if (!background.facets.empty()) spec.regions.push_back(background);
    mesh.scattering = synthesize_textures(mesh, spec, cfg.seed);
    fs::create_directories(cfg.out_dir);
    save_scattering(cfg.out_dir + "/synth.scat", mesh);
    std::cout << "textures written to " << cfg.out_dir << "/synth.scat\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"differentiable SAR renderer and inverse reconstruction"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may appear after the subcommand

    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
    app.add_option("--config", config_path, "run configuration file");
    app.add_option("--set", overrides, "override a config value: section.key=value");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--threads", threads, "worker thread cap");
    app.add_option("--out", out_dir, "output directory");

    auto* render = app.add_subcommand("render", "render SAR + silhouette images per view");
    std::string mesh_flag;
    render->add_option("--mesh", mesh_flag, "mesh OBJ path");
    int views_flag = 0;
    render->add_option("--views", views_flag, "expect this many views (sanity check)");

    auto* recon = app.add_subcommand("reconstruct", "optimize a template mesh against images");
    std::string data_dir, mode_flag;
    recon->add_option("--data", data_dir, "directory with <view>_sil.fimg (and _sar.fimg)");
    recon->add_option("--mode", mode_flag, "full | silhouette-only");
    std::optional<int> epochs_flag;
    recon->add_option("--epochs", epochs_flag, "training epochs");

    auto* pose = app.add_subcommand("estimate-pose", "fit view/pose parameters to a silhouette");
    std::string observed_path;
    pose->add_option("--observed", observed_path, "observed silhouette .fimg")->required();
    pose->add_option("--mesh", mesh_flag, "mesh OBJ path");
    std::vector<double> pose_truth;
    pose->add_option("--truth", pose_truth,
                     "ground-truth pose for the report: alpha beta tx ty tz scale");

    auto* evaliou = app.add_subcommand("eval-iou", "voxel IoU between two meshes");
    evaliou->add_option("--mesh", mesh_flag, "first mesh");
    std::string mesh_b_flag;
    evaliou->add_option("--mesh-b", mesh_b_flag, "second mesh");
    std::optional<int> resolution_flag;
    evaliou->add_option("--resolution", resolution_flag, "voxel resolution");

    auto* filter = app.add_subcommand("filter-sidelobes", "PSF-based sidelobe suppression");
    std::string image_path, psf_path;
    filter->add_option("--image", image_path, "input .fimg")->required();
    filter->add_option("--psf", psf_path, "PSF .fimg")->required();

    auto* synth = app.add_subcommand("synth-texture", "draw Gamma-distributed facet textures");
    synth->add_option("--mesh", mesh_flag, "mesh OBJ path");
    int background_start = -1;
    synth->add_option("--background-start", background_start,
                      "facets at or past this index form the background region");
    double t_shape = 1.1948, t_scale = 0.1508, b_shape = 2.7179, b_scale = 0.0177;
    synth->add_option("--target-shape", t_shape);
    synth->add_option("--target-scale", t_scale);
    synth->add_option("--background-shape", b_shape);
    synth->add_option("--background-scale", b_scale);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        for (const std::string& ov : overrides) {
            const size_t eq = ov.find('=');
            if (eq == std::string::npos) throw std::runtime_error("--set expects key=value");
            apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
        }
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        if (out_dir) cfg.out_dir = *out_dir;
        if (!mesh_flag.empty()) cfg.mesh = mesh_flag;
        if (!mesh_b_flag.empty()) cfg.mesh_b = mesh_b_flag;
        if (!mode_flag.empty()) cfg.mode = mode_flag;
        if (epochs_flag) cfg.epochs = *epochs_flag;
        if (resolution_flag) cfg.voxel_resolution = *resolution_flag;

        if (render->parsed()) {
            const int n = static_cast<int>(cfg.incident_angles.size() * cfg.azimuth_angles.size());
            if (views_flag > 0 && views_flag != n)
                throw std::runtime_error("--views " + std::to_string(views_flag) +
                                         " but config yields " + std::to_string(n));
            return cmd_render(cfg);
        }
        if (recon->parsed()) return cmd_reconstruct(cfg, data_dir);
        if (pose->parsed()) return cmd_estimate_pose(cfg, observed_path, pose_truth);
        if (evaliou->parsed()) return cmd_eval_iou(cfg);
        if (filter->parsed()) return cmd_filter_sidelobes(cfg, image_path, psf_path);
        if (synth->parsed())
            return cmd_synth_texture(cfg, background_start, t_shape, t_scale, b_shape, b_scale);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        const std::string msg = e.what();
        return msg.find("does not exist") != std::string::npos ? 2 : 1;
    }
    return 0;
}
