#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "dsar/config.hpp"
#include "dsar/image.hpp"

using namespace dsar;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

std::vector<uint8_t> read_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("fimg round trip is exact at float32 precision") {
    Image img(7, 5, ImageDomain::db);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (double& v : img.data) v = static_cast<float>(u(rng)); // float-representable values

    const std::string path = tmp_path("dsar_rt.fimg");
    write_fimg(path, img);
    const Image back = read_fimg(path);
    CHECK(back.width == 7);
    CHECK(back.height == 5);
    CHECK(back.domain == ImageDomain::db);
    CHECK(back.data == img.data);
}

TEST_CASE("fimg writes are byte-identical across runs") {
    Image img(9, 9, ImageDomain::linear);
    for (size_t i = 0; i < img.size(); ++i) img.data[i] = std::sin(static_cast<double>(i));
    const std::string a = tmp_path("dsar_det_a.fimg");
    const std::string b = tmp_path("dsar_det_b.fimg");
    write_fimg(a, img);
    write_fimg(b, img);
    CHECK(read_bytes(a) == read_bytes(b));
}

TEST_CASE("fimg rejects malformed headers and truncation") {
    const std::string path = tmp_path("dsar_bad.fimg");
    {
        std::ofstream f(path, std::ios::binary);
        f << "BOGUS 3 3 linear\n";
    }
    CHECK_THROWS_AS(read_fimg(path), std::runtime_error);
    {
        std::ofstream f(path, std::ios::binary);
        f << "FIMG 4 4 linear\n";
        const float one = 1.0f;
        f.write(reinterpret_cast<const char*>(&one), sizeof(one)); // 1 of 16 samples
    }
    CHECK_THROWS_WITH_AS(read_fimg(path), doctest::Contains("truncated"), std::runtime_error);
}

TEST_CASE("png writer emits a well-formed grayscale file") {
    std::vector<uint8_t> px(32 * 16);
    for (size_t i = 0; i < px.size(); ++i) px[i] = static_cast<uint8_t>(i % 251);
    const std::string path = tmp_path("dsar_test.png");
    write_png_gray(path, px, 32, 16);
    const auto bytes = read_bytes(path);
    REQUIRE(bytes.size() > 40);
    const uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    for (int i = 0; i < 8; ++i) CHECK(bytes[i] == sig[i]);
    // IHDR width/height big-endian at offsets 16 and 20
    CHECK(bytes[16 + 3] == 32);
    CHECK(bytes[20 + 3] == 16);
    CHECK_THROWS_AS(write_png_gray(path, px, 10, 10), std::runtime_error);
}

TEST_CASE("config default values follow the published setup") {
    const RunConfig cfg;
    CHECK(cfg.n_x == 128);
    CHECK(cfg.n_z == 128);
    CHECK(cfg.sigma == 1e-5);
    CHECK(cfg.gamma == 1e-5);
    CHECK(cfg.sigma_g == 0.5);
    CHECK(cfg.lambda_tex == 1.0);
    CHECK(cfg.lambda_lap == 0.03);
    CHECK(cfg.lambda_flat == 0.003);
    CHECK(cfg.lr == 0.01);
    CHECK(cfg.batch_size == 8);
    CHECK(cfg.epochs == 500);
    CHECK(cfg.incident_angles == std::vector<double>{15, 30, 45, 60});
    CHECK(cfg.azimuth_angles.size() == 8);
    CHECK(cfg.voxel_resolution == 32);
}

TEST_CASE("config round trips losslessly") {
    RunConfig cfg;
    cfg.mesh = "some/dir/tank.obj";
    cfg.r_z = 0.072345678912345678;
    cfg.sigma = 3.25e-7;
    cfg.incident_angles = {-30, -40, -52.5};
    cfg.azimuth_angles = {11.25};
    cfg.seed = 0xfeedface12345678ull;
    cfg.lr = 1.0 / 3.0;
    cfg.mode = "silhouette-only";
    cfg.pose_euler_z = 135;
    cfg.threads = 4;

    const std::string path = tmp_path("dsar_cfg.ini");
    save_config(path, cfg);
    const RunConfig back = load_config(path);

    CHECK(back.mesh == cfg.mesh);
    CHECK(back.r_z == cfg.r_z);
    CHECK(back.sigma == cfg.sigma);
    CHECK(back.incident_angles == cfg.incident_angles);
    CHECK(back.azimuth_angles == cfg.azimuth_angles);
    CHECK(back.seed == cfg.seed);
    CHECK(back.lr == cfg.lr);
    CHECK(back.mode == cfg.mode);
    CHECK(back.pose_euler_z == cfg.pose_euler_z);
    CHECK(back.threads == cfg.threads);

    // serialize again: identical file
    const std::string path2 = tmp_path("dsar_cfg2.ini");
    save_config(path2, back);
    CHECK(read_bytes(path) == read_bytes(path2));
}

TEST_CASE("config rejects unknown keys and bad lines") {
    const std::string path = tmp_path("dsar_badcfg.ini");
    {
        std::ofstream f(path);
        f << "[grid]\nn_x = 64\nbogus_key = 3\n";
    }
    CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("unknown key"), std::runtime_error);
    {
        std::ofstream f(path);
        f << "[grid]\nno equals sign here\n";
    }
    CHECK_THROWS_AS(load_config(path), std::runtime_error);
}

TEST_CASE("config overrides") {
    RunConfig cfg;
    apply_override(cfg, "grid.n_x", "256");
    CHECK(cfg.n_x == 256);
    apply_override(cfg, "render.sigma", "0.25");
    CHECK(cfg.sigma == 0.25);
    apply_override(cfg, "views.incident", "45");
    CHECK(cfg.incident_angles == std::vector<double>{45});
    CHECK_THROWS_AS(apply_override(cfg, "nope.nope", "1"), std::runtime_error);
}

TEST_CASE("config derived objects") {
    RunConfig cfg;
    cfg.recon_sigma = 0.07;
    const RadarView v = cfg.make_view(45, 90);
    CHECK(v.incident_deg == 45);
    CHECK(v.azimuth_deg == 90);
    const GridSpec g = cfg.make_grid(v);
    CHECK(g.n_y == 128);
    CHECK(cfg.make_render_params().sigma == 1e-5);
    CHECK(cfg.make_recon_params().sigma == 0.07);
    CHECK(cfg.make_mode() == LossMode::full);
    cfg.mode = "nonsense";
    CHECK_THROWS_AS(cfg.make_mode(), std::runtime_error);
}
