#include "bali/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bali/errors.hpp"

namespace bali {

std::string normalization_name(NormalizationKind kind) {
    switch (kind) {
    case NormalizationKind::Interpupil: return "interpupil";
    case NormalizationKind::Interocular: return "interocular";
    case NormalizationKind::BoxGeomean: return "box_geomean";
    case NormalizationKind::BoxDiagonal: return "box_diagonal";
    }
    return "interocular";
}

NormalizationKind normalization_from_name(const std::string& name) {
    for (auto kind : {NormalizationKind::Interpupil, NormalizationKind::Interocular, NormalizationKind::BoxGeomean,
                      NormalizationKind::BoxDiagonal}) {
        if (normalization_name(kind) == name) return kind;
    }
    throw ValidationError("unknown normalization '" + name + "'");
}

void RunConfig::validate() const {
    encode.boundary.validate();
    if (encode.field_radius < 1) throw ValidationError("field_radius must be >= 1");
    if (decode.crop_radius < 0) throw ValidationError("crop_radius must be >= 0");
    weights.validate();
    policy.validate();
    if (taus.empty()) throw ValidationError("tau lists no thresholds");
    for (double t : taus) {
        if (!(t > 0.0)) throw ValidationError("tau thresholds must be positive");
    }
    if (stages < 1) throw ValidationError("stages must be >= 1");
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

double to_double(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ValidationError("expected a number, got '" + s + "'");
    }
    return v;
}

template <typename Int>
Int to_int(const std::string& s) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ValidationError("expected an integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ValidationError("expected true or false, got '" + s + "'");
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Kernel keys combine into one KernelSpec after all lines are read.
struct KernelKeys {
    std::string family = "gaussian";
    double sigma = 1.5;
    double shape = 0.0;
    double dof = 10.0;
};

using Setter = std::function<void(RunConfig&, KernelKeys&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"grid_width", [](RunConfig& c, KernelKeys&, const std::string& v) {
             c.encode.grid = GridSpec(to_int<int>(v), c.encode.grid.height());
         }},
        {"grid_height", [](RunConfig& c, KernelKeys&, const std::string& v) {
             c.encode.grid = GridSpec(c.encode.grid.width(), to_int<int>(v));
         }},
        {"kernel", [](RunConfig&, KernelKeys& k, const std::string& v) {
             if (v != "gaussian" && v != "ged" && v != "student_t") {
                 throw ValidationError("kernel must be gaussian, ged or student_t");
             }
             k.family = v;
         }},
        {"kernel_sigma", [](RunConfig&, KernelKeys& k, const std::string& v) { k.sigma = to_double(v); }},
        {"kernel_shape", [](RunConfig&, KernelKeys& k, const std::string& v) { k.shape = to_double(v); }},
        {"kernel_dof", [](RunConfig&, KernelKeys& k, const std::string& v) { k.dof = to_double(v); }},
        {"boundary_sigma",
         [](RunConfig& c, KernelKeys&, const std::string& v) { c.encode.boundary.sigma = to_double(v); }},
        {"xi", [](RunConfig& c, KernelKeys&, const std::string& v) { c.encode.boundary.xi = to_double(v); }},
        {"boundary_exponent", [](RunConfig& c, KernelKeys&, const std::string& v) {
             if (v == "linear") c.encode.boundary.exponent = BoundaryExponent::Linear;
             else if (v == "squared") c.encode.boundary.exponent = BoundaryExponent::Squared;
             else throw ValidationError("boundary_exponent must be linear or squared");
         }},
        {"boundary_step",
         [](RunConfig& c, KernelKeys&, const std::string& v) { c.encode.boundary.step = to_double(v); }},
        {"field_radius", [](RunConfig& c, KernelKeys&, const std::string& v) { c.encode.field_radius = to_int<int>(v); }},
        {"crop_radius", [](RunConfig& c, KernelKeys&, const std::string& v) { c.decode.crop_radius = to_int<int>(v); }},
        {"decode_mode", [](RunConfig& c, KernelKeys&, const std::string& v) {
             if (v == "field") c.decode.mode = DecodeMode::FieldWeighted;
             else if (v == "heatmap") c.decode.mode = DecodeMode::HeatmapSoftArgmax;
             else throw ValidationError("decode_mode must be field or heatmap");
         }},
        {"lambda1", [](RunConfig& c, KernelKeys&, const std::string& v) { c.weights.lambda1 = to_double(v); }},
        {"lambda2", [](RunConfig& c, KernelKeys&, const std::string& v) { c.weights.lambda2 = to_double(v); }},
        {"gamma", [](RunConfig& c, KernelKeys&, const std::string& v) { c.weights.gamma = to_double(v); }},
        {"eta", [](RunConfig& c, KernelKeys&, const std::string& v) { c.weights.eta = to_double(v); }},
        {"disturbances", [](RunConfig& c, KernelKeys&, const std::string& v) {
             c.policy.kinds.clear();
             for (const auto& name : split_list(v)) c.policy.kinds.push_back(kind_from_name(name));
         }},
        {"combine_disturbances",
         [](RunConfig& c, KernelKeys&, const std::string& v) { c.policy.combine = to_bool(v); }},
        {"max_rotation",
         [](RunConfig& c, KernelKeys&, const std::string& v) { c.policy.max_rotation_deg = to_double(v); }},
        {"min_scale", [](RunConfig& c, KernelKeys&, const std::string& v) { c.policy.min_scale = to_double(v); }},
        {"max_scale", [](RunConfig& c, KernelKeys&, const std::string& v) { c.policy.max_scale = to_double(v); }},
        {"blur_factors", [](RunConfig& c, KernelKeys&, const std::string& v) {
             c.policy.blur_factors.clear();
             for (const auto& f : split_list(v)) c.policy.blur_factors.push_back(to_int<int>(f));
         }},
        {"noise_sigma", [](RunConfig& c, KernelKeys&, const std::string& v) { c.policy.noise_sigma = to_double(v); }},
        {"salt_prob", [](RunConfig& c, KernelKeys&, const std::string& v) { c.policy.salt_prob = to_double(v); }},
        {"occlusion_min",
         [](RunConfig& c, KernelKeys&, const std::string& v) { c.policy.occlusion_min = to_double(v); }},
        {"occlusion_max",
         [](RunConfig& c, KernelKeys&, const std::string& v) { c.policy.occlusion_max = to_double(v); }},
        {"seed", [](RunConfig& c, KernelKeys&, const std::string& v) { c.seed = to_int<std::uint64_t>(v); }},
        {"tau", [](RunConfig& c, KernelKeys&, const std::string& v) {
             c.taus.clear();
             for (const auto& t : split_list(v)) c.taus.push_back(to_double(t));
         }},
        {"normalization",
         [](RunConfig& c, KernelKeys&, const std::string& v) { c.normalization = normalization_from_name(v); }},
        {"stages", [](RunConfig& c, KernelKeys&, const std::string& v) { c.stages = to_int<int>(v); }},
        {"intermediate_width", [](RunConfig& c, KernelKeys&, const std::string& v) {
             c.intermediate_grid = GridSpec(to_int<int>(v), c.intermediate_grid.height());
         }},
        {"intermediate_height", [](RunConfig& c, KernelKeys&, const std::string& v) {
             c.intermediate_grid = GridSpec(c.intermediate_grid.width(), to_int<int>(v));
         }},
    };
    return table;
}

std::string kernel_family_key(const KernelSpec& k) {
    switch (k.family()) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::GeneralizedError: return "ged";
    case KernelFamily::StudentT: return "student_t";
    }
    return "gaussian";
}

} // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    KernelKeys kernel;
    std::map<std::string, int> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        auto fail = [&](const std::string& what) {
            throw ValidationError("config line " + std::to_string(line_no) + ": " + what);
        };
        if (eq == std::string::npos) fail("expected `key = value`");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) fail("unknown key '" + key + "'");
        if (auto [pos, fresh] = seen.emplace(key, line_no); !fresh) {
            fail("duplicate key '" + key + "' (first set on line " + std::to_string(pos->second) + ")");
        }
        if (value.empty()) fail("missing value for '" + key + "'");
        try {
            it->second(config, kernel, value);
        } catch (const ValidationError& e) {
            fail(key + ": " + e.what());
        }
    }
    if (kernel.family == "gaussian") config.encode.kernel = KernelSpec::gaussian(kernel.sigma);
    else if (kernel.family == "ged") config.encode.kernel = KernelSpec::generalized_error(kernel.shape, kernel.sigma);
    else config.encode.kernel = KernelSpec::student_t(kernel.dof, kernel.sigma);
    config.validate();
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open config");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

std::string format_config(const RunConfig& c) {
    std::ostringstream os;
    auto put = [&os](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
    auto join = [](const auto& items, auto fmt) {
        std::string s;
        for (const auto& item : items) s += (s.empty() ? "" : ", ") + fmt(item);
        return s;
    };
    put("grid_width", std::to_string(c.encode.grid.width()));
    put("grid_height", std::to_string(c.encode.grid.height()));
    put("kernel", kernel_family_key(c.encode.kernel));
    put("kernel_sigma", format_double(c.encode.kernel.sigma()));
    if (c.encode.kernel.family() == KernelFamily::GeneralizedError) {
        put("kernel_shape", format_double(c.encode.kernel.parameter()));
    } else if (c.encode.kernel.family() == KernelFamily::StudentT) {
        put("kernel_dof", format_double(c.encode.kernel.parameter()));
    }
    put("boundary_sigma", format_double(c.encode.boundary.sigma));
    put("xi", format_double(c.encode.boundary.xi));
    put("boundary_exponent", c.encode.boundary.exponent == BoundaryExponent::Linear ? "linear" : "squared");
    put("boundary_step", format_double(c.encode.boundary.step));
    put("field_radius", std::to_string(c.encode.field_radius));
    put("crop_radius", std::to_string(c.decode.crop_radius));
    put("decode_mode", c.decode.mode == DecodeMode::FieldWeighted ? "field" : "heatmap");
    put("lambda1", format_double(c.weights.lambda1));
    put("lambda2", format_double(c.weights.lambda2));
    put("gamma", format_double(c.weights.gamma));
    put("eta", format_double(c.weights.eta));
    put("disturbances", join(c.policy.kinds, [](DisturbanceKind k) { return kind_name(k); }));
    put("combine_disturbances", c.policy.combine ? "true" : "false");
    put("max_rotation", format_double(c.policy.max_rotation_deg));
    put("min_scale", format_double(c.policy.min_scale));
    put("max_scale", format_double(c.policy.max_scale));
    put("blur_factors", join(c.policy.blur_factors, [](int f) { return std::to_string(f); }));
    put("noise_sigma", format_double(c.policy.noise_sigma));
    put("salt_prob", format_double(c.policy.salt_prob));
    put("occlusion_min", format_double(c.policy.occlusion_min));
    put("occlusion_max", format_double(c.policy.occlusion_max));
    put("seed", std::to_string(c.seed));
    put("tau", join(c.taus, [](double t) { return format_double(t); }));
    put("normalization", normalization_name(c.normalization));
    put("stages", std::to_string(c.stages));
    put("intermediate_width", std::to_string(c.intermediate_grid.width()));
    put("intermediate_height", std::to_string(c.intermediate_grid.height()));
    return os.str();
}

std::optional<std::string> config_path_from_env() {
    const char* value = std::getenv(kConfigEnvVar);
    if (value == nullptr || *value == '\0') return std::nullopt;
    return std::string(value);
}

} // namespace bali
