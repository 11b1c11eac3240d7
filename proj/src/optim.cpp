#include "dsar/optim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace dsar {

void OptimState::init(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    step = 0;
}

void OptimState::apply(std::span<double> params, std::span<const double> grads) {
    if (params.size() != grads.size() || params.size() != m.size())
        throw std::runtime_error("OptimState: parameter/gradient size mismatch");
    for (double g : grads)
        if (!std::isfinite(g)) throw std::runtime_error("OptimState: non-finite gradient");
    ++step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (size_t i = 0; i < params.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

namespace {

struct ViewResult {
    HybridLoss loss;
    bool ok = false;
};

ViewResult evaluate_view(const TriangleMesh& mesh, const MeshTopology& topo,
                         const ViewSample& sample, const ReconstructConfig& cfg) {
    ViewResult r;
    const SceneContext scene = prepare_scene(mesh, sample.view, cfg.grid, cfg.params);
    const Image pred_sil = render_silhouette(scene);
    if (cfg.mode == LossMode::full) {
        if (!sample.truth_sar)
            throw std::runtime_error("reconstruct: full mode requires SAR ground truth per view");
        const SarRender sar = render_sar(scene);
        r.loss = hybrid_loss(scene, topo, pred_sil, sample.truth_sil, &sar.image,
                             &*sample.truth_sar, &sar.cache, cfg.weights, cfg.mode);
    } else {
        r.loss = hybrid_loss(scene, topo, pred_sil, sample.truth_sil, nullptr, nullptr, nullptr,
                             cfg.weights, cfg.mode);
    }
    r.ok = std::isfinite(r.loss.total);
    return r;
}

bool finite_gradients(const GradientSet& g) {
    for (const Vec3& v : g.d_vertices)
        if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) return false;
    for (double s : g.d_scattering)
        if (!std::isfinite(s)) return false;
    return true;
}

} // namespace

ReconstructResult reconstruct(const std::vector<ViewSample>& views, const TriangleMesh& tmpl,
                              const ReconstructConfig& cfg) {
    if (views.empty()) throw std::runtime_error("reconstruct: needs at least one view");
    tmpl.validate();

    ReconstructResult result;
    result.mesh = tmpl;
    TriangleMesh& mesh = result.mesh;
    const MeshTopology topo = build_topology(mesh);

    const bool optimize_texture = cfg.mode == LossMode::full;
    const size_t n_vertex_params = static_cast<size_t>(mesh.vertex_count()) * 3;
    const size_t n_params = n_vertex_params + (optimize_texture ? mesh.facets.size() : 0);

    OptimState opt;
    opt.lr = cfg.lr;
    opt.batch_size = cfg.batch_size;
    opt.init(n_params);

    std::mt19937_64 rng(cfg.seed);
    std::vector<int> order(views.size());
    std::iota(order.begin(), order.end(), 0);

    const int bs = std::max(1, std::min<int>(cfg.batch_size, static_cast<int>(views.size())));
    std::vector<double> params(n_params), grads(n_params);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        const int n_batches = (static_cast<int>(views.size()) + bs - 1) / bs;

        for (int batch = 0; batch < n_batches; ++batch) {
            const int begin = batch * bs;
            const int end = std::min<int>(begin + bs, static_cast<int>(views.size()));
            const int count = end - begin;

            std::vector<ViewResult> results(count);
            if (cfg.threads > 1 && count > 1) {
                std::vector<std::thread> pool;
                std::atomic<int> next{0};
                const int workers = std::min(cfg.threads, count);
                for (int w = 0; w < workers; ++w)
                    pool.emplace_back([&] {
                        for (int t = next.fetch_add(1); t < count; t = next.fetch_add(1))
                            results[t] = evaluate_view(mesh, topo, views[order[begin + t]], cfg);
                    });
                for (auto& th : pool) th.join();
            } else {
                for (int t = 0; t < count; ++t)
                    results[t] = evaluate_view(mesh, topo, views[order[begin + t]], cfg);
            }

            BatchRecord rec;
            rec.epoch = epoch;
            rec.batch = batch;
            std::fill(grads.begin(), grads.end(), 0.0);
            bool bad = false;
            for (const ViewResult& r : results) {
                if (!r.ok || !finite_gradients(r.loss.grads)) bad = true;
                rec.l_sil += r.loss.l_sil;
                rec.l_tex += r.loss.l_tex;
                rec.l_lap += r.loss.l_lap;
                rec.l_flat += r.loss.l_flat;
                rec.total += r.loss.total;
            }
            const double inv = 1.0 / count;
            rec.l_sil *= inv;
            rec.l_tex *= inv;
            rec.l_lap *= inv;
            rec.l_flat *= inv;
            rec.total *= inv;
            result.history.push_back(rec);
            if (bad) {
                result.diverged = true;
                return result;
            }

            // batch gradient = mean of per-view gradients (merged in view order)
            for (const ViewResult& r : results) {
                for (int i = 0; i < mesh.vertex_count(); ++i) {
                    grads[i * 3 + 0] += r.loss.grads.d_vertices[i].x * inv;
                    grads[i * 3 + 1] += r.loss.grads.d_vertices[i].y * inv;
                    grads[i * 3 + 2] += r.loss.grads.d_vertices[i].z * inv;
                }
                if (optimize_texture)
                    for (size_t j = 0; j < mesh.facets.size(); ++j)
                        grads[n_vertex_params + j] += r.loss.grads.d_scattering[j] * inv;
            }

            for (int i = 0; i < mesh.vertex_count(); ++i) {
                params[i * 3 + 0] = mesh.vertices[i].x;
                params[i * 3 + 1] = mesh.vertices[i].y;
                params[i * 3 + 2] = mesh.vertices[i].z;
            }
            if (optimize_texture)
                for (size_t j = 0; j < mesh.facets.size(); ++j)
                    params[n_vertex_params + j] = mesh.scattering[j];

            opt.apply(params, grads);

            for (int i = 0; i < mesh.vertex_count(); ++i)
                mesh.vertices[i] = {params[i * 3], params[i * 3 + 1], params[i * 3 + 2]};
            if (optimize_texture)
                for (size_t j = 0; j < mesh.facets.size(); ++j)
                    mesh.scattering[j] = std::max(0.0, params[n_vertex_params + j]);
        }

        if (cfg.snapshot_every > 0 && !cfg.snapshot_dir.empty() &&
            (epoch + 1) % cfg.snapshot_every == 0) {
            save_mesh_obj(cfg.snapshot_dir + "/recon_epoch" + std::to_string(epoch + 1) + ".obj",
                          mesh);
        }
    }
    return result;
}

void write_history_csv(const std::string& path, const std::vector<BatchRecord>& history) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f << "epoch,batch,L_sil,L_tex,L_lap,L_flat,total\n";
    f.precision(12);
    for (const BatchRecord& r : history)
        f << r.epoch << "," << r.batch << "," << r.l_sil << "," << r.l_tex << "," << r.l_lap << ","
          << r.l_flat << "," << r.total << "\n";
}

PoseEstimate estimate_pose(const Image& observed_sil, const TriangleMesh& mesh,
                           const RadarView& init, const PoseConfig& cfg) {
    mesh.validate();
    if (init.has_explicit_radar_pos || init.euler_in_world)
        throw std::runtime_error("estimate_pose: requires default radar placement and radar-frame pose");

    PoseEstimate out;
    out.initial = init;

    std::array<double, 6> p = {init.incident_deg, init.azimuth_deg, init.euler_deg.x,
                               init.euler_deg.y, init.euler_deg.z, init.scale};
    OptimState opt;
    opt.lr = cfg.lr;
    opt.init(6);

    auto make_view = [&](const std::array<double, 6>& q) {
        RadarView v = init;
        v.incident_deg = q[kPoseAlpha];
        v.azimuth_deg = q[kPoseBeta];
        v.euler_deg = {q[kPoseThetaX], q[kPoseThetaY], q[kPoseThetaZ]};
        v.scale = std::max(q[kPoseScale], 1e-3);
        return v;
    };

    for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
        const RadarView view = make_view(p);
        const SceneContext scene = prepare_scene(mesh, view, cfg.grid, cfg.params);
        const Image pred = render_silhouette(scene);
        // mask IoU for reporting; the optimizer follows the soft loss below
        if (epoch == 0) out.initial_iou = binary_iou(pred, observed_sil);
        if (epoch == cfg.epochs) {
            out.final_view = view;
            out.final_iou = binary_iou(pred, observed_sil);
            out.predicted_sil = pred;
            break;
        }
        const ImageLoss sil = loss_silhouette(pred, observed_sil);
        const GradientSet g = backward_pose(sil.grad, scene);
        opt.apply(std::span<double>(p.data(), 6), std::span<const double>(g.d_pose.data(), 6));
    }
    return out;
}

} // namespace dsar
