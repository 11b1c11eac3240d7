#include "dsar/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dsar {

RadarView RunConfig::make_view(double incident_deg, double azimuth_deg) const {
    RadarView v;
    v.incident_deg = incident_deg;
    v.azimuth_deg = azimuth_deg;
    v.ref_range = ref_range;
    v.z_near = z_near;
    v.z_far = z_far;
    v.euler_deg = {euler_x, euler_y, euler_z};
    v.scale = scale;
    return v;
}

GridSpec RunConfig::make_grid(const RadarView& view) const {
    return grid_from_view(n_x, n_z, r_z, view);
}

RenderParams RunConfig::make_render_params() const {
    RenderParams p;
    p.sigma = sigma;
    p.gamma = gamma;
    p.sigma_g = sigma_g;
    return p;
}

RenderParams RunConfig::make_recon_params() const {
    RenderParams p = make_render_params();
    p.sigma = recon_sigma;
    return p;
}

LossWeights RunConfig::make_weights() const { return {lambda_tex, lambda_lap, lambda_flat}; }

LossMode RunConfig::make_mode() const {
    if (mode == "full") return LossMode::full;
    if (mode == "silhouette-only") return LossMode::silhouette_only;
    throw std::runtime_error("config: mode must be 'full' or 'silhouette-only'");
}

namespace {

struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string fmt_list(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(17);
    for (size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    return os.str();
}

std::vector<double> parse_list(const std::string& s) {
    std::istringstream is(s);
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    return out;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> t;
        auto add_str = [&](const char* sec, const char* key, std::string RunConfig::* mem) {
            t.push_back({sec, key, [mem](const RunConfig& c) { return c.*mem; },
                         [mem](RunConfig& c, const std::string& v) { c.*mem = v; }});
        };
        auto add_d = [&](const char* sec, const char* key, double RunConfig::* mem) {
            t.push_back({sec, key, [mem](const RunConfig& c) { return fmt_double(c.*mem); },
                         [mem](RunConfig& c, const std::string& v) { c.*mem = std::stod(v); }});
        };
        auto add_i = [&](const char* sec, const char* key, int RunConfig::* mem) {
            t.push_back({sec, key, [mem](const RunConfig& c) { return std::to_string(c.*mem); },
                         [mem](RunConfig& c, const std::string& v) { c.*mem = std::stoi(v); }});
        };
        auto add_u64 = [&](const char* sec, const char* key, uint64_t RunConfig::* mem) {
            t.push_back({sec, key, [mem](const RunConfig& c) { return std::to_string(c.*mem); },
                         [mem](RunConfig& c, const std::string& v) { c.*mem = std::stoull(v); }});
        };
        auto add_list = [&](const char* sec, const char* key, std::vector<double> RunConfig::* mem) {
            t.push_back({sec, key, [mem](const RunConfig& c) { return fmt_list(c.*mem); },
                         [mem](RunConfig& c, const std::string& v) { c.*mem = parse_list(v); }});
        };

        add_str("scene", "mesh", &RunConfig::mesh);
        add_str("scene", "mesh_b", &RunConfig::mesh_b);
        add_d("scene", "ref_range", &RunConfig::ref_range);
        add_d("scene", "z_near", &RunConfig::z_near);
        add_d("scene", "z_far", &RunConfig::z_far);
        add_d("scene", "scale", &RunConfig::scale);
        add_d("scene", "euler_x", &RunConfig::euler_x);
        add_d("scene", "euler_y", &RunConfig::euler_y);
        add_d("scene", "euler_z", &RunConfig::euler_z);
        add_list("views", "incident", &RunConfig::incident_angles);
        add_list("views", "azimuth", &RunConfig::azimuth_angles);
        add_i("grid", "n_x", &RunConfig::n_x);
        add_i("grid", "n_z", &RunConfig::n_z);
        add_d("grid", "r_z", &RunConfig::r_z);
        add_d("render", "sigma", &RunConfig::sigma);
        add_d("render", "gamma", &RunConfig::gamma);
        add_d("render", "sigma_g", &RunConfig::sigma_g);
        add_d("loss", "lambda_tex", &RunConfig::lambda_tex);
        add_d("loss", "lambda_lap", &RunConfig::lambda_lap);
        add_d("loss", "lambda_flat", &RunConfig::lambda_flat);
        add_str("loss", "mode", &RunConfig::mode);
        add_d("optim", "lr", &RunConfig::lr);
        add_i("optim", "batch_size", &RunConfig::batch_size);
        add_i("optim", "epochs", &RunConfig::epochs);
        add_d("optim", "recon_sigma", &RunConfig::recon_sigma);
        add_i("optim", "template_subdivisions", &RunConfig::template_subdivisions);
        add_d("optim", "template_radius", &RunConfig::template_radius);
        add_i("optim", "snapshot_every", &RunConfig::snapshot_every);
        add_d("pose", "incident", &RunConfig::pose_incident);
        add_d("pose", "azimuth", &RunConfig::pose_azimuth);
        add_d("pose", "euler_x", &RunConfig::pose_euler_x);
        add_d("pose", "euler_y", &RunConfig::pose_euler_y);
        add_d("pose", "euler_z", &RunConfig::pose_euler_z);
        add_d("pose", "scale", &RunConfig::pose_scale);
        add_d("pose", "lr", &RunConfig::pose_lr);
        add_i("pose", "epochs", &RunConfig::pose_epochs);
        add_d("imaging", "db_floor", &RunConfig::db_floor);
        add_d("imaging", "sil_threshold", &RunConfig::sil_threshold);
        add_d("imaging", "peak_threshold_db", &RunConfig::peak_threshold_db);
        add_str("imaging", "psf_domain", &RunConfig::psf_domain);
        add_i("eval", "voxel_resolution", &RunConfig::voxel_resolution);
        add_u64("run", "seed", &RunConfig::seed);
        add_i("run", "threads", &RunConfig::threads);
        add_str("run", "out_dir", &RunConfig::out_dir);
        return t;
    }();
    return table;
}

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    RunConfig cfg;
    std::string line, section;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        bool found = false;
        for (const Field& fl : fields()) {
            if (fl.section == section && fl.key == key) {
                fl.set(cfg, value);
                found = true;
                break;
            }
        }
        if (!found)
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": unknown key '" + section + "." + key + "'");
    }
    return cfg;
}

void save_config(const std::string& path, const RunConfig& cfg) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    std::string section;
    for (const Field& fl : fields()) {
        if (fl.section != section) {
            if (!section.empty()) f << "\n";
            section = fl.section;
            f << "[" << section << "]\n";
        }
        f << fl.key << " = " << fl.get(cfg) << "\n";
    }
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    const size_t dot = key.find('.');
    const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    for (const Field& fl : fields()) {
        if ((sec.empty() || fl.section == sec) && fl.key == name) {
            fl.set(cfg, value);
            return;
        }
    }
    throw std::runtime_error("unknown config key: " + key);
}

} // namespace dsar
