#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "bali/config.hpp"
#include "bali/decode.hpp"
#include "bali/disturb.hpp"
#include "bali/errors.hpp"
#include "bali/field.hpp"
#include "bali/losses.hpp"
#include "bali/metrics.hpp"
#include "bali/png_io.hpp"
#include "bali/pts_io.hpp"
#include "bali/render.hpp"
#include "bali/tables.hpp"
#include "bali/tensor_io.hpp"
#include "selfcheck.hpp"

namespace bali::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

namespace {

/// Runs fn(0..count-1) on up to `jobs` threads. Every index runs; the
/// exception of the lowest failing index is rethrown afterwards.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn fn) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                fn(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, jobs));
    if (threads == 1 || count <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError(path, "read failed");
    return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << text;
    if (!out) throw IoError(path, "write failed");
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError(dir, "cannot create output directory");
}

/// Files with `extension` directly inside directories, plus plain files, sorted.
std::vector<fs::path> collect_inputs(const std::vector<std::string>& inputs, const std::string& extension) {
    std::vector<fs::path> files;
    for (const std::string& input : inputs) {
        std::error_code ec;
        if (fs::is_directory(input, ec)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(input, ec)) {
                if (entry.is_regular_file() && entry.path().extension() == extension) found.push_back(entry.path());
            }
            if (ec) throw IoError(input, "cannot list directory");
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (fs::exists(input, ec)) {
            files.emplace_back(input);
        } else {
            throw IoError(input, "no such file or directory");
        }
    }
    if (files.empty()) throw ValidationError("no " + extension + " inputs found");
    return files;
}

std::string out_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

struct Globals {
    std::string config_path;
    int jobs = 1;
};

RunConfig resolve_config(const Globals& g) {
    if (!g.config_path.empty()) return load_config(g.config_path);
    if (auto env = config_path_from_env()) return load_config(*env);
    return RunConfig{};
}

struct ImageSize {
    int width = 0;
    int height = 0;
    bool given() const { return width > 0 || height > 0; }
    GridSpec grid() const { return GridSpec(width, height); }
};

ImageSize checked(const ImageSize& s) {
    if (s.given() && (s.width <= 0 || s.height <= 0)) {
        throw ValidationError("--image-width and --image-height must be given together");
    }
    return s;
}

void add_image_size(CLI::App* cmd, ImageSize& size) {
    cmd->add_option("--image-width", size.width, "Annotation space width (px); rescaled to the grid")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--image-height", size.height, "Annotation space height (px)")->check(CLI::PositiveNumber);
}

ChannelFlips flips_for(Scheme scheme, int landmarks, int boundaries) {
    if (scheme != Scheme::Custom) {
        ChannelFlips f = ChannelFlips::for_scheme(scheme);
        if (f.boundaries.size() != boundaries) f.boundaries = FlipPermutation::identity(boundaries);
        return f;
    }
    return {FlipPermutation::identity(landmarks), FlipPermutation::identity(boundaries)};
}

void require_flip_table(Scheme scheme, const Disturbance& d) {
    if (scheme == Scheme::Custom && d.flip_count() % 2 == 1) {
        throw ValidationError("flip disturbances need a named landmark scheme with a mirror table");
    }
}

BoundaryScheme boundaries_for(Scheme scheme) {
    return scheme == Scheme::IBUG68 ? default_boundary_scheme(scheme) : BoundaryScheme{};
}

StageOutputs stages_of(const ContainerContents& c) {
    StageOutputs s;
    s.landmarks = c.stage_landmarks;
    s.boundaries = c.stage_boundaries;
    s.landmarks.push_back(c.landmarks);
    s.boundaries.push_back(c.composite.boundary);
    s.field = c.composite.field;
    return s;
}

// encode ---------------------------------------------------------------------

struct EncodeArgs {
    std::vector<std::string> inputs;
    std::string output;
    bool one_based = false;
    bool support = false;
    std::optional<int> stages;
    ImageSize size;
};

int cmd_encode(const Globals& g, const EncodeArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve_config(g);
    if (a.stages) cfg.stages = *a.stages;
    cfg.validate();
    const ImageSize size = checked(a.size);
    const auto files = collect_inputs(a.inputs, ".pts");
    ensure_directory(a.output);

    std::vector<LandmarkSet> sets(files.size());
    parallel_for(files.size(), g.jobs, [&](std::size_t k) {
        sets[k] = read_pts_file(files[k].string(), size.given() ? size.grid() : cfg.encode.grid, a.one_based);
    });
    if (!a.one_based) {
        if (auto warning = one_based_warning(sets)) err << "warning: " << *warning << '\n';
    }
    if (std::any_of(sets.begin(), sets.end(), [](const LandmarkSet& l) { return l.scheme() != Scheme::IBUG68; })) {
        err << "warning: boundary channels are only defined for IBUG68; other schemes encode without them\n";
    }

    std::vector<std::string> written(files.size());
    parallel_for(files.size(), g.jobs, [&](std::size_t k) {
        const LandmarkSet l = size.given() ? rescale_landmarks(sets[k], cfg.encode.grid) : sets[k];
        const StageOutputs s = make_ground_truth(l, boundaries_for(l.scheme()), cfg.encode, cfg.stages,
                                                 cfg.intermediate_grid);
        ContainerContents c;
        c.scheme = l.scheme();
        c.landmarks = s.final_landmarks();
        c.composite = {s.final_boundaries(), *s.field};
        c.stage_landmarks.assign(s.landmarks.begin(), s.landmarks.end() - 1);
        c.stage_boundaries.assign(s.boundaries.begin(), s.boundaries.end() - 1);
        written[k] = out_path(a.output, files[k].stem().string() + ".bali");
        write_tensor_file(written[k], composite_to_tensors(c, a.support));
    });
    for (const auto& path : written) out << path << '\n';
    return kExitOk;
}

// decode ---------------------------------------------------------------------

struct DecodeArgs {
    std::vector<std::string> inputs;
    std::string output;
    bool one_based = false;
    std::string mode;
    std::optional<int> crop;
    ImageSize size;
};

int cmd_decode(const Globals& g, const DecodeArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve_config(g);
    if (a.mode == "field") cfg.decode.mode = DecodeMode::FieldWeighted;
    if (a.mode == "heatmap") cfg.decode.mode = DecodeMode::HeatmapSoftArgmax;
    if (a.crop) cfg.decode.crop_radius = *a.crop;
    cfg.validate();
    const ImageSize size = checked(a.size);
    const auto files = collect_inputs(a.inputs, ".bali");
    ensure_directory(a.output);

    std::vector<std::string> written(files.size());
    std::vector<std::string> notes(files.size());
    parallel_for(files.size(), g.jobs, [&](std::size_t k) {
        const ContainerContents c = tensors_to_composite(read_tensor_file(files[k].string()));
        const DecodeResult r = decode_all(c.landmarks, c.composite.field, cfg.decode, c.scheme);
        std::ostringstream note;
        for (const DecodeWarning& w : r.warnings) {
            const char* what = w.kind == DecodeWarningKind::NoPeak   ? "no peak, using the grid centre"
                               : w.kind == DecodeWarningKind::NoMass ? "no mass in the crop, using the grid centre"
                                                                     : "crop radius exceeds the field radius";
            note << "warning: " << files[k].string() << ": channel " << w.channel << ": " << what << '\n';
        }
        notes[k] = note.str();
        const LandmarkSet l = size.given() ? rescale_landmarks(r.landmarks, size.grid()) : r.landmarks;
        written[k] = out_path(a.output, files[k].stem().string() + ".pts");
        write_pts_file(written[k], l, a.one_based);
    });
    for (std::size_t k = 0; k < files.size(); ++k) {
        err << notes[k];
        out << written[k] << '\n';
    }
    return kExitOk;
}

// roundtrip ------------------------------------------------------------------

int cmd_roundtrip(const Globals& g, int n, std::optional<std::uint64_t> seed, std::ostream& out) {
    const RunConfig cfg = resolve_config(g);
    const auto stats = selfcheck::roundtrip_trials(n, seed.value_or(cfg.seed), g.jobs);
    char line[128];
    std::snprintf(line, sizeof line, "roundtrip: %d samples, max error %.3e px\n", stats.samples, stats.max_error);
    out << line;
    return stats.max_error < 1e-4 ? kExitOk : kExitValidation;
}

// perturb --------------------------------------------------------------------

struct PerturbArgs {
    std::string image;
    std::string pts;
    std::string output;
    std::string disturbance;
    std::optional<std::uint64_t> seed;
    int count = 1;
    bool one_based = false;
};

int cmd_perturb(const Globals& g, const PerturbArgs& a, std::ostream& out, std::ostream&) {
    RunConfig cfg = resolve_config(g);
    const Image image = to_float(read_png(a.image));
    cfg.policy.image_width = image.width;
    cfg.policy.image_height = image.height;
    cfg.validate();
    std::optional<LandmarkSet> landmarks;
    if (!a.pts.empty()) landmarks = read_pts_file(a.pts, GridSpec(image.width, image.height), a.one_based);
    std::optional<Disturbance> fixed;
    if (!a.disturbance.empty()) fixed = disturbance_from_json(read_text(a.disturbance));
    if (a.count < 1) throw ValidationError("--count must be >= 1");
    ensure_directory(a.output);

    const Scheme scheme = landmarks ? landmarks->scheme() : Scheme::Custom;
    const FlipPermutation perm = scheme == Scheme::Custom
                                     ? FlipPermutation::identity(landmarks ? landmarks->size() : 0)
                                     : flip_permutation(scheme);
    const std::string stem = fs::path(a.image).stem().string();
    const std::uint64_t seed = a.seed.value_or(cfg.seed);
    std::vector<std::vector<std::string>> written(static_cast<std::size_t>(a.count));
    parallel_for(static_cast<std::size_t>(a.count), g.jobs, [&](std::size_t k) {
        const Disturbance d = fixed ? *fixed : sample_disturbance(seed + k, cfg.policy);
        d.validate();
        if (landmarks) require_flip_table(scheme, d);
        const PairedSample pair = make_pair(image, landmarks, d, perm);
        const std::string base = a.count == 1 ? stem : stem + "_" + std::to_string(k);
        auto path = [&](const std::string& suffix) { return out_path(a.output, base + suffix); };
        auto& files = written[k];
        files.push_back(path("_alpha.png"));
        write_png(files.back(), to_rgb8(pair.image_alpha));
        files.push_back(path("_beta.png"));
        write_png(files.back(), to_rgb8(pair.image_beta));
        if (pair.landmarks_alpha) {
            files.push_back(path("_alpha.pts"));
            write_pts_file(files.back(), *pair.landmarks_alpha, a.one_based);
            files.push_back(path("_beta.pts"));
            write_pts_file(files.back(), *pair.landmarks_beta, a.one_based);
        }
        files.push_back(path("_disturbance.json"));
        write_text(files.back(), to_json_line(d) + "\n");
    });
    for (const auto& files : written) {
        for (const auto& f : files) out << f << '\n';
    }
    return kExitOk;
}

// loss -----------------------------------------------------------------------

struct LossArgs {
    std::string alpha, beta, disturbance, truth_alpha, truth_beta, output, scl_stages;
};

ordered_json breakdown_json(const std::string& mode, const LossBreakdown& b) {
    ordered_json j;
    j["mode"] = mode;
    j["terms"] = ordered_json::array();
    for (const LossTerm& t : b.terms) {
        j["terms"].push_back({{"label", t.label}, {"weight", t.weight}, {"raw", t.raw}, {"value", t.value}});
    }
    j["total"] = b.total;
    return j;
}

int cmd_loss(const Globals& g, const LossArgs& a, std::ostream& out, std::ostream&) {
    const RunConfig cfg = resolve_config(g);
    if ((a.truth_alpha.empty()) != (a.truth_beta.empty())) {
        throw ValidationError("--truth-alpha and --truth-beta must be given together");
    }
    const Disturbance d = disturbance_from_json(read_text(a.disturbance));
    d.validate();
    const ContainerContents ca = tensors_to_composite(read_tensor_file(a.alpha));
    const ContainerContents cb = tensors_to_composite(read_tensor_file(a.beta));
    require_flip_table(ca.scheme, d);
    const ChannelFlips flips =
        flips_for(ca.scheme, ca.landmarks.channel_count(), ca.composite.boundary.channel_count());
    const PairOutputs pred{stages_of(ca), stages_of(cb)};

    const bool supervised = !a.truth_alpha.empty();
    SclStages stages = supervised ? SclStages::Intermediate : SclStages::All;
    if (a.scl_stages == "all") stages = SclStages::All;
    if (a.scl_stages == "intermediate") stages = SclStages::Intermediate;

    ordered_json j;
    if (supervised) {
        auto truth_of = [&](const std::string& path) {
            const ContainerContents c = tensors_to_composite(read_tensor_file(path));
            const DecodeResult r = decode_all(c.landmarks, c.composite.field, {cfg.decode.crop_radius}, c.scheme);
            return Truth{stages_of(c), r.landmarks};
        };
        const PairTruth truth{truth_of(a.truth_alpha), truth_of(a.truth_beta)};
        LossOptions options;
        options.crop_radius = cfg.decode.crop_radius;
        options.decode = cfg.decode;
        options.overall_scl_stages = stages;
        j = breakdown_json("overall", loss_overall(pred, truth, d, flips, cfg.weights, options));
    } else {
        LossComponents parts;
        parts.scl = loss_scl(pred.alpha, pred.beta, d, flips, stages);
        LossBreakdown b = combine(parts, cfg.weights);
        LossBreakdown only;
        for (const LossTerm& t : b.terms) {
            if (t.label == "self_calibrated") only.terms.push_back(t);
        }
        only.total = only.terms.empty() ? 0.0 : only.terms.front().value;
        j = breakdown_json("self_calibrated", only);
    }
    const std::string text = j.dump(2) + "\n";
    if (a.output.empty()) out << text;
    else write_text(a.output, text);
    return kExitOk;
}

// eval -----------------------------------------------------------------------

struct EvalArgs {
    std::string pred, gt, csv, json, norm;
    std::vector<double> taus;
    bool one_based = false;
};

int cmd_eval(const Globals& g, const EvalArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve_config(g);
    if (!a.norm.empty()) cfg.normalization = normalization_from_name(a.norm);
    if (!a.taus.empty()) cfg.taus = a.taus;
    cfg.validate();
    const auto gt_files = collect_inputs({a.gt}, ".pts");
    const bool boxed =
        cfg.normalization == NormalizationKind::BoxGeomean || cfg.normalization == NormalizationKind::BoxDiagonal;

    const std::size_t n = gt_files.size();
    std::vector<LandmarkSet> preds(n), gts(n);
    std::vector<Normalization> norms(n, Normalization{cfg.normalization, {}});
    parallel_for(n, g.jobs, [&](std::size_t k) {
        const std::string stem = gt_files[k].stem().string();
        const fs::path pred_path = fs::path(a.pred) / (stem + ".pts");
        if (!fs::exists(pred_path)) throw IoError(pred_path.string(), "missing prediction for " + stem);
        gts[k] = read_pts_file(gt_files[k].string(), GridSpec{}, a.one_based);
        preds[k] = read_pts_file(pred_path.string(), GridSpec{}, a.one_based);
        if (preds[k].size() != gts[k].size()) {
            throw ValidationError(stem + ": prediction has " + std::to_string(preds[k].size()) +
                                  " points, ground truth " + std::to_string(gts[k].size()));
        }
        if (boxed) {
            const fs::path box = gt_files[k].parent_path() / (stem + ".box");
            if (!fs::exists(box)) throw IoError(box.string(), "box normalization needs this sidecar");
            norms[k].box = parse_box(read_text(box.string()));
        }
    });
    if (!a.one_based) {
        if (auto warning = one_based_warning(gts)) err << "warning: " << *warning << '\n';
    }

    std::vector<EvalReport> reports;
    for (double tau : cfg.taus) reports.push_back(evaluate(preds, gts, norms, tau));
    ordered_json summary;
    summary["samples"] = n;
    summary["normalization"] = normalization_name(cfg.normalization);
    summary["mean_nme"] = reports.front().mean_nme;
    summary["thresholds"] = ordered_json::array();
    for (const EvalReport& r : reports) summary["thresholds"].push_back({{"tau", r.tau}, {"auc", r.auc}, {"fr", r.fr}});

    if (!a.csv.empty()) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "sample,nme\r\n";
        for (std::size_t k = 0; k < n; ++k) {
            csv << csv_field(gt_files[k].stem().string()) << ',' << reports.front().per_sample_nme[k] << "\r\n";
        }
        write_text(a.csv, csv.str());
    }
    const std::string text = summary.dump(2) + "\n";
    if (a.json.empty()) out << text;
    else write_text(a.json, text);
    return kExitOk;
}

// render ---------------------------------------------------------------------

struct RenderArgs {
    std::vector<std::string> inputs;
    std::string output;
    std::string background;
    bool channels = false;
    RenderStyle style;
};

int cmd_render(const Globals& g, const RenderArgs& a, std::ostream& out, std::ostream&) {
    a.style.validate();
    const auto files = collect_inputs(a.inputs, ".bali");
    ensure_directory(a.output);
    std::optional<Image> background;
    if (!a.background.empty()) background = to_float(read_png(a.background));

    std::vector<std::vector<std::string>> written(files.size());
    parallel_for(files.size(), g.jobs, [&](std::size_t k) {
        const ContainerContents c = tensors_to_composite(read_tensor_file(files[k].string()));
        const std::string stem = files[k].stem().string();
        auto emit = [&](const std::string& suffix, const Rgb8Image& img) {
            const std::string path = out_path(a.output, stem + suffix + ".png");
            write_png(path, background ? blend_onto(img, *background, a.style.alpha) : img);
            written[k].push_back(path);
        };
        emit("_landmarks", render_confidence(max_composite(c.landmarks), a.style));
        if (c.composite.boundary.channel_count() > 0) {
            emit("_boundaries", render_confidence(max_composite(c.composite.boundary), a.style));
        }
        emit("_offset_u", render_offsets_composite(c.composite.field, OffsetAxis::U, a.style));
        emit("_offset_v", render_offsets_composite(c.composite.field, OffsetAxis::V, a.style));
        if (a.channels) {
            for (int ch = 0; ch < c.landmarks.channel_count(); ++ch) {
                const std::string id = std::to_string(ch);
                emit("_landmark_" + id, render_confidence(c.landmarks.channel(ch), a.style));
                emit("_offset_u_" + id, render_offsets(c.composite.field, ch, OffsetAxis::U, a.style));
                emit("_offset_v_" + id, render_offsets(c.composite.field, ch, OffsetAxis::V, a.style));
            }
            for (int ch = 0; ch < c.composite.boundary.channel_count(); ++ch) {
                emit("_boundary_" + std::to_string(ch), render_confidence(c.composite.boundary.channel(ch), a.style));
            }
        }
    });
    for (const auto& paths : written) {
        for (const auto& p : paths) out << p << '\n';
    }
    return kExitOk;
}

// selftest -------------------------------------------------------------------

int cmd_selftest(std::uint64_t seed, std::ostream& out) {
    int failed = 0;
    for (const auto& r : selfcheck::run_all(seed)) {
        out << selfcheck::format_result(r) << '\n' << std::flush;
        failed += !r.passed;
    }
    out << failed << " of 10 checks failed\n";
    return failed == 0 ? kExitOk : kExitValidation;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Boundary-aware landmark intensity codec: encode, decode, disturb, score and render"};
    app.name("bali");
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.fallthrough();

    Globals globals;
    app.add_option("--config", globals.config_path, "Run configuration file (default: $BALI_CODEC_CONFIG)");
    app.add_option("-j,--jobs", globals.jobs, "Worker threads")->check(CLI::Range(1, 1024));

    EncodeArgs enc;
    auto* encode = app.add_subcommand("encode", "Annotations (.pts) to composite containers (.bali)");
    encode->add_option("inputs", enc.inputs, ".pts files or directories")->required();
    encode->add_option("-o,--output", enc.output, "Output directory")->required();
    encode->add_flag("--one-based", enc.one_based, "Annotations use 1-based pixel coordinates");
    encode->add_flag("--support", enc.support, "Also store the offset support masks");
    encode->add_option("--stages", enc.stages, "Number of stages to write (intermediate stages on the coarse grid)")
        ->check(CLI::Range(1, 16));
    add_image_size(encode, enc.size);

    DecodeArgs dec;
    auto* decode = app.add_subcommand("decode", "Composite containers to annotations");
    decode->add_option("inputs", dec.inputs, ".bali files or directories")->required();
    decode->add_option("-o,--output", dec.output, "Output directory")->required();
    decode->add_flag("--one-based", dec.one_based, "Write 1-based coordinates");
    decode->add_option("--mode", dec.mode, "field or heatmap")->check(CLI::IsMember({"field", "heatmap"}));
    decode->add_option("--crop", dec.crop, "Crop half-width r")->check(CLI::NonNegativeNumber);
    add_image_size(decode, dec.size);

    int rt_n = 100;
    std::optional<std::uint64_t> rt_seed;
    auto* roundtrip = app.add_subcommand("roundtrip", "Encode and decode random landmark sets; print the max error");
    roundtrip->add_option("--n", rt_n, "Number of random sets")->check(CLI::PositiveNumber);
    roundtrip->add_option("--seed", rt_seed, "Random seed");

    PerturbArgs per;
    auto* perturb = app.add_subcommand("perturb", "Image (+ .pts) to a disturbed pair and its disturbance record");
    perturb->add_option("--image", per.image, "Input PNG")->required();
    perturb->add_option("--pts", per.pts, "Landmarks in image pixels");
    perturb->add_option("-o,--output", per.output, "Output directory")->required();
    perturb->add_option("--disturbance", per.disturbance, "Apply this JSON record instead of sampling one");
    perturb->add_option("--seed", per.seed, "Random seed");
    perturb->add_option("--count", per.count, "Number of pairs (seeds seed, seed+1, ...)")->check(CLI::PositiveNumber);
    perturb->add_flag("--one-based", per.one_based, "Annotations use 1-based pixel coordinates");

    LossArgs los;
    auto* loss = app.add_subcommand("loss", "Loss breakdown for a predicted pair as JSON");
    loss->add_option("--alpha", los.alpha, "Prediction for the original sample")->required();
    loss->add_option("--beta", los.beta, "Prediction for the disturbed sample")->required();
    loss->add_option("--disturbance", los.disturbance, "Disturbance record (JSON)")->required();
    loss->add_option("--truth-alpha", los.truth_alpha, "Ground-truth container for alpha");
    loss->add_option("--truth-beta", los.truth_beta, "Ground-truth container for beta");
    loss->add_option("--scl-stages", los.scl_stages, "all or intermediate")
        ->check(CLI::IsMember({"all", "intermediate"}));
    loss->add_option("-o,--output", los.output, "Write JSON here instead of stdout");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "NME, AUC and failure rate of predictions against ground truth");
    eval->add_option("--pred", ev.pred, "Directory of predicted .pts")->required();
    eval->add_option("--gt", ev.gt, "Directory of ground-truth .pts (and .box sidecars)")->required();
    eval->add_option("--norm", ev.norm, "interocular, interpupil, box_geomean or box_diagonal")
        ->check(CLI::IsMember({"interocular", "interpupil", "box_geomean", "box_diagonal"}));
    eval->add_option("--tau", ev.taus, "Failure thresholds");
    eval->add_option("--csv", ev.csv, "Per-sample CSV output");
    eval->add_option("--json", ev.json, "Summary JSON output (default stdout)");
    eval->add_flag("--one-based", ev.one_based, "Annotations use 1-based pixel coordinates");

    RenderArgs ren;
    auto* render = app.add_subcommand("render", "Containers to colour-mapped PNGs");
    render->add_option("inputs", ren.inputs, ".bali files or directories")->required();
    render->add_option("-o,--output", ren.output, "Output directory")->required();
    render->add_option("--scale", ren.style.scale, "Pixels per grid cell");
    render->add_flag("--channels", ren.channels, "Also write one image per channel");
    render->add_flag("--arrows", ren.style.arrows, "Draw offset arrows");
    render->add_option("--arrow-stride", ren.style.arrow_stride, "Cells between arrows");
    render->add_option("--background", ren.background, "Blend onto this PNG");
    render->add_option("--alpha", ren.style.alpha, "Overlay weight when blending");

    std::uint64_t st_seed = 20240601;
    auto* selftest = app.add_subcommand("selftest", "Run the invariant suite");
    selftest->add_option("--seed", st_seed, "Random seed");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*encode) return cmd_encode(globals, enc, out, err);
        if (*decode) return cmd_decode(globals, dec, out, err);
        if (*roundtrip) return cmd_roundtrip(globals, rt_n, rt_seed, out);
        if (*perturb) return cmd_perturb(globals, per, out, err);
        if (*loss) return cmd_loss(globals, los, out, err);
        if (*eval) return cmd_eval(globals, ev, out, err);
        if (*render) return cmd_render(globals, ren, out, err);
        if (*selftest) return cmd_selftest(st_seed, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace bali::cli
