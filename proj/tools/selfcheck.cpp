#include "selfcheck.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "bali/decode.hpp"
#include "bali/disturb.hpp"
#include "bali/field.hpp"
#include "bali/heatmap.hpp"
#include "bali/losses.hpp"
#include "bali/metrics.hpp"
#include "bali/pts_io.hpp"
#include "bali/tables.hpp"
#include "bali/tensor_io.hpp"

namespace bali::selfcheck {

namespace {

const GridSpec kGrid{128, 128};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

EncodeOptions default_options() {
    EncodeOptions options;
    options.grid = kGrid;
    options.kernel = KernelSpec::gaussian(1.5);
    options.field_radius = 5;
    return options;
}

double max_coordinate_error(const LandmarkSet& a, const LandmarkSet& b) {
    double worst = 0.0;
    for (int k = 0; k < a.size(); ++k) {
        worst = std::max({worst, std::abs(a[k].u - b[k].u), std::abs(a[k].v - b[k].v)});
    }
    return worst;
}

HeatmapStack jitter(const HeatmapStack& stack, std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> noise(-amplitude, amplitude);
    std::vector<Plane> channels = stack.channels();
    for (Plane& p : channels) {
        for (float& x : p.values()) x = static_cast<float>(std::max(0.0, x + noise(rng)));
    }
    return HeatmapStack(stack.kind(), stack.grid(), std::move(channels));
}

BaliField jitter(const BaliField& field, std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> noise(-amplitude, amplitude);
    std::vector<Plane> us = field.u_planes(), vs = field.v_planes();
    for (auto* planes : {&us, &vs}) {
        for (Plane& p : *planes) {
            for (float& x : p.values()) x = static_cast<float>(x + noise(rng));
        }
    }
    return BaliField(field.grid(), field.radius(), std::move(us), std::move(vs), field.supports());
}

StageOutputs transfer_stages(const StageOutputs& s, const Disturbance& d, const ChannelFlips& flips) {
    StageOutputs out;
    for (const HeatmapStack& h : s.landmarks) out.landmarks.push_back(transfer_heatmap(d, h, flips));
    for (const HeatmapStack& h : s.boundaries) out.boundaries.push_back(transfer_heatmap(d, h, flips));
    if (s.field) out.field = transfer_field(d, *s.field, flips.landmarks);
    return out;
}

// Oracles ----------------------------------------------------------------

double brute_force_distance(const BinaryMap& raster, int i, int j) {
    double best = std::numeric_limits<double>::infinity();
    for (int y = 0; y < raster.grid.height(); ++y) {
        for (int x = 0; x < raster.grid.width(); ++x) {
            if (!raster.test(x, y)) continue;
            best = std::min(best, static_cast<double>((x - i) * (x - i) + (y - j) * (y - j)));
        }
    }
    return std::sqrt(best);
}

double riemann_auc(std::vector<double> errors, double tau, int points) {
    std::sort(errors.begin(), errors.end());
    const double dx = tau / points;
    double area = 0.0;
    for (int k = 0; k < points; ++k) {
        const double x = (k + 0.5) * dx;
        const auto below = std::upper_bound(errors.begin(), errors.end(), x) - errors.begin();
        area += static_cast<double>(below) / errors.size() * dx;
    }
    return area / tau;
}

double gaussian_profile(double r, double sigma) { return std::exp(-r * r / (2.0 * sigma * sigma)); }

} // namespace

LandmarkSet random_landmarks(std::mt19937_64& rng, Scheme scheme, int count, GridSpec grid, double margin) {
    std::uniform_real_distribution<double> u(margin, grid.width() - 1 - margin);
    std::uniform_real_distribution<double> v(margin, grid.height() - 1 - margin);
    std::vector<Point2> points(static_cast<std::size_t>(count));
    for (Point2& p : points) p = {u(rng), v(rng)};
    return LandmarkSet(scheme, std::move(points), grid);
}

RoundtripStats roundtrip_trials(int n, std::uint64_t seed, int jobs) {
    if (n < 1) throw ValidationError("roundtrip needs at least one sample");
    jobs = std::clamp(jobs, 1, n);
    const EncodeOptions options = default_options();
    const BoundaryScheme boundaries = default_boundary_scheme(Scheme::IBUG68);
    const DecodeConfig config{3, DecodeMode::FieldWeighted};
    std::vector<double> errors(static_cast<std::size_t>(n), 0.0);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int k = next++; k < n; k = next++) {
            std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k));
            const LandmarkSet l = random_landmarks(rng, Scheme::IBUG68, 68, kGrid, 6.0);
            const EncodedSample s = encode_composite(l, boundaries, options);
            const DecodeResult r = decode_all(s.landmarks, s.composite.field, config, Scheme::IBUG68);
            errors[static_cast<std::size_t>(k)] =
                r.warnings.empty() ? max_coordinate_error(r.landmarks, l) : std::numeric_limits<double>::infinity();
        }
    };
    const auto start = std::chrono::steady_clock::now();
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    RoundtripStats stats;
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    stats.samples = n;
    stats.max_error = *std::max_element(errors.begin(), errors.end());
    return stats;
}

CheckResult check_roundtrip(std::uint64_t seed) {
    const RoundtripStats s = roundtrip_trials(500, seed, 1);
    CheckResult r{1, "round-trip exactness", s.max_error < 1e-4 && s.seconds < 60.0, ""};
    r.detail = fmt("500 IBUG68 sets, max error %.3g px (< 1e-4), %.2f s (< 60)", s.max_error, s.seconds);
    return r;
}

CheckResult check_field_advantage(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const EncodeOptions options = default_options();
    double field_sum = 0.0, heat_sum = 0.0;
    const int n = 1000;
    for (int k = 0; k < n; ++k) {
        const LandmarkSet l = random_landmarks(rng, Scheme::Custom, 1, kGrid, 6.0);
        const HeatmapStack h = render_landmark_heatmaps(l, options.kernel, kGrid);
        const BaliField f = encode_field(l, options.field_radius, kGrid);
        const Point2 pf = decode_landmark(h.channel(0), &f.u(0), &f.v(0), {3, DecodeMode::FieldWeighted});
        const Point2 ph = decode_landmark(h.channel(0), nullptr, nullptr, {3, DecodeMode::HeatmapSoftArgmax});
        field_sum += std::hypot(pf.u - l[0].u, pf.v - l[0].v);
        heat_sum += std::hypot(ph.u - l[0].u, ph.v - l[0].v);
    }
    const double field_mean = field_sum / n, heat_mean = heat_sum / n;
    CheckResult r{2, "field advantage", field_mean < heat_mean && heat_mean > 0.05 && field_mean < 1e-4, ""};
    r.detail = fmt("1000 landmarks, field mean %.3g px (< 1e-4), heatmap-only mean %.4f px (> 0.05)", field_mean,
                   heat_mean);
    return r;
}

CheckResult check_equivariance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const EncodeOptions options = default_options();
    const ChannelFlips flips = ChannelFlips::for_scheme(Scheme::IBUG68);
    const DecodeConfig config{3, DecodeMode::FieldWeighted};
    std::uniform_real_distribution<double> angle(-60.0, 60.0), scale(0.5, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> shape(0, 3);
    const double inside = options.field_radius + 1.0;

    double worst = 0.0;
    long compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const LandmarkSet l = random_landmarks(rng, Scheme::IBUG68, 68, kGrid, 16.0);
        Disturbance d;
        switch (shape(rng)) {
        case 0: d = Disturbance::rotate(angle(rng)); break;
        case 1: d = Disturbance::scaling(scale(rng)); break;
        case 2: d = Disturbance::flip(); break;
        default: {
            std::vector<Disturbance> steps{Disturbance::rotate(angle(rng)), Disturbance::scaling(scale(rng))};
            if (coin(rng)) steps.push_back(Disturbance::flip());
            d = Disturbance::compose(std::move(steps));
        }
        }
        const HeatmapStack h = render_landmark_heatmaps(l, options.kernel, kGrid);
        const BaliField f = encode_field(l, options.field_radius, kGrid);
        const LandmarkSet expected = transfer_landmarks(d, l, flips.landmarks);
        const DecodeResult got =
            decode_all(transfer_heatmap(d, h, flips), transfer_field(d, f, flips.landmarks), config, Scheme::IBUG68);
        for (int k = 0; k < l.size(); ++k) {
            const Point2 p = expected[k];
            if (p.u < inside || p.v < inside || p.u > kGrid.width() - 1 - inside || p.v > kGrid.height() - 1 - inside) {
                continue;
            }
            worst = std::max({worst, std::abs(got.landmarks[k].u - p.u), std::abs(got.landmarks[k].v - p.v)});
            ++compared;
        }
    }

    bool texture_identical = true;
    {
        const LandmarkSet l = random_landmarks(rng, Scheme::IBUG68, 68, kGrid, 6.0);
        const StageOutputs t = make_ground_truth(l, default_boundary_scheme(Scheme::IBUG68), options, 2, {64, 64});
        const std::vector<Disturbance> textures{
            Disturbance::occlude_black({10, 10, 60, 40}), Disturbance::occlude_self({0, 0, 50, 50}, {120, 120, 50, 50}),
            Disturbance::blur(8), Disturbance::gaussian_noise(0.05, 3), Disturbance::salt_noise(0.02, 4)};
        for (const Disturbance& d : textures) {
            const StageOutputs moved = transfer_stages(t, d, flips);
            texture_identical = texture_identical && moved.landmarks == t.landmarks &&
                                moved.boundaries == t.boundaries && *moved.field == *t.field;
        }
    }
    CheckResult r{3, "equivariance", worst < 0.5 && compared > 0 && texture_identical, ""};
    r.detail = fmt("200 spatial pairs, %ld landmarks, max error %.4f px (< 0.5); texture kinds bit-identical: %s",
                   compared, worst, texture_identical ? "yes" : "no");
    return r;
}

CheckResult check_self_calibration_null(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const EncodeOptions options = default_options();
    const ChannelFlips flips = ChannelFlips::for_scheme(Scheme::IBUG68);
    const LandmarkSet l = random_landmarks(rng, Scheme::IBUG68, 68, kGrid, 16.0);
    const StageOutputs alpha = make_ground_truth(l, default_boundary_scheme(Scheme::IBUG68), options, 2, {64, 64});

    struct Case {
        Disturbance d;
        double tolerance;
    };
    const std::vector<Case> cases{
        {Disturbance::occlude_black({10, 10, 60, 40}), 1e-6},
        {Disturbance::occlude_self({0, 0, 50, 50}, {120, 120, 50, 50}), 1e-6},
        {Disturbance::blur(4), 1e-6},
        {Disturbance::gaussian_noise(0.05, 11), 1e-6},
        {Disturbance::salt_noise(0.02, 12), 1e-6},
        {Disturbance::rotate(25.0), 1e-3},
        {Disturbance::scaling(0.7), 1e-3},
        {Disturbance::flip(), 1e-3},
        {Disturbance::compose({Disturbance::rotate(-40.0), Disturbance::scaling(0.6), Disturbance::flip()}), 1e-3},
    };
    const Disturbance extra = Disturbance::rotate(5.0);
    bool ok = true;
    double worst_null = 0.0, weakest_ratio = std::numeric_limits<double>::infinity();
    for (const Case& c : cases) {
        const StageOutputs beta = transfer_stages(alpha, c.d, flips);
        const double null_loss = loss_scl(alpha, beta, c.d, flips);
        const double rotated_loss = loss_scl(alpha, transfer_stages(beta, extra, flips), c.d, flips);
        const double floor = std::max(null_loss, c.tolerance);
        ok = ok && null_loss < c.tolerance && rotated_loss >= 10.0 * floor;
        worst_null = std::max(worst_null, null_loss);
        weakest_ratio = std::min(weakest_ratio, rotated_loss / floor);
    }
    CheckResult r{4, "self-calibrated loss null case", ok, ""};
    r.detail = fmt("9 kinds, max null loss %.3g; extra 5 deg rotation >= %.1fx max(null, tolerance) (>= 10x)",
                   worst_null, weakest_ratio);
    return r;
}

CheckResult check_js_axioms(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double asym = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool zero_iff_equal = true;
    for (int k = 0; k < 1000; ++k) {
        std::vector<double> a(64), b(64);
        for (double& x : a) x = unit(rng);
        for (double& x : b) x = unit(rng);
        const ProbMap p = normalize(std::span<const double>(a)), q = normalize(std::span<const double>(b));
        const double pq = js_divergence(p, q), qp = js_divergence(q, p);
        asym = std::max(asym, std::abs(pq - qp));
        lo = std::min(lo, pq);
        hi = std::max(hi, pq);
        zero_iff_equal = zero_iff_equal && js_divergence(p, p) == 0.0 && pq > 0.0;
    }
    const double hand = js_divergence(ProbMap{{1.0, 0.0}}, ProbMap{{0.5, 0.5}});
    const bool ok = asym < 1e-12 && lo >= 0.0 && hi <= std::log(2.0) + 1e-12 && zero_iff_equal &&
                    std::abs(hand - 0.21576) <= 1e-5;
    CheckResult r{5, "JS-divergence axioms", ok, ""};
    r.detail = fmt("1000 8x8 pairs, asymmetry %.2g, range [%.4f, %.4f], zero iff equal: %s; hand case %.6f", asym,
                   lo, hi, zero_iff_equal ? "yes" : "no", hand);
    return r;
}

CheckResult check_kernel_limits() {
    const double sigma = 1.5;
    const KernelSpec ged = KernelSpec::generalized_error(1e-8, sigma);
    const KernelSpec student = KernelSpec::student_t(200.0, sigma);
    double ged_sup = 0.0, student_sup = 0.0;
    const int steps = 40000;
    for (int k = 0; k <= steps; ++k) {
        const double r = 4.0 * sigma * k / steps;
        const double g = gaussian_profile(r, sigma);
        ged_sup = std::max(ged_sup, std::abs(kernel_value(r * r, ged) - g));
        student_sup = std::max(student_sup, std::abs(kernel_value(r * r, student) - g));
    }
    CheckResult r{6, "kernel limits", ged_sup < 1e-6 && student_sup < 1e-3, ""};
    r.detail = fmt("sup|GED(1e-8) - N| = %.3g (< 1e-6), sup|t(200) - N| = %.3g (< 1e-3)", ged_sup, student_sup);
    return r;
}

CheckResult check_distance_transform(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> side(GridSpec::kMinSide, 32);
    std::uniform_real_distribution<double> density(0.002, 0.3), unit(0.0, 1.0);
    int mismatches = 0;
    for (int k = 0; k < 200; ++k) {
        const GridSpec grid(side(rng), side(rng));
        BinaryMap raster(grid);
        const double p = density(rng);
        for (auto& c : raster.cells) c = unit(rng) < p;
        if (raster.count() == 0) {
            raster.set(std::uniform_int_distribution<int>(0, grid.width() - 1)(rng),
                       std::uniform_int_distribution<int>(0, grid.height() - 1)(rng));
        }
        const DistanceMap dt = distance_transform(raster);
        for (int j = 0; j < grid.height(); ++j) {
            for (int i = 0; i < grid.width(); ++i) mismatches += dt.at(i, j) != brute_force_distance(raster, i, j);
        }
    }
    CheckResult r{7, "distance transform oracle", mismatches == 0, ""};
    r.detail = fmt("200 rasters up to 32x32, %d cells differ from brute force", mismatches);
    return r;
}

CheckResult check_metrics(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    LandmarkSet gt = random_landmarks(rng, Scheme::IBUG68, 68, kGrid, 6.0);
    std::vector<Point2> gp = gt.points();
    gp[36] = {40.0, 60.0};
    gp[45] = {90.0, 60.0};
    gt = LandmarkSet(Scheme::IBUG68, gp, kGrid);
    std::vector<Point2> pp = gp;
    for (Point2& p : pp) p = {p.u + 3.0, p.v + 4.0};
    const double hand = nme(LandmarkSet(Scheme::IBUG68, pp, kGrid), gt, {NormalizationKind::Interocular, {}});

    std::uniform_real_distribution<double> err(0.0, 0.15);
    std::vector<double> errors(300);
    for (double& e : errors) e = err(rng);
    errors[0] = 0.1; // a jump exactly at tau
    const double tau = 0.1;
    const double exact = auc(errors, tau);
    const double oracle = riemann_auc(errors, tau, 1'000'000);

    const std::vector<double> fr_errors{0.03, 0.05, 0.12};
    const double fr = failure_rate(fr_errors, 0.10);

    const bool ok = std::abs(hand - 0.1) <= 1e-9 && std::abs(exact - oracle) < 1e-5 && fr == 1.0 / 3.0;
    CheckResult r{8, "metrics oracles", ok, ""};
    r.detail = fmt("NME hand case %.9f, AUC %.7f vs Riemann %.7f, FR %.6f", hand, exact, oracle, fr);
    return r;
}

CheckResult check_loss_bookkeeping(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const EncodeOptions options = default_options();
    const BoundaryScheme boundaries = default_boundary_scheme(Scheme::IBUG68);
    const ChannelFlips flips = ChannelFlips::for_scheme(Scheme::IBUG68);
    const Disturbance d = Disturbance::compose({Disturbance::rotate(12.0), Disturbance::scaling(0.85)});

    const LandmarkSet la = random_landmarks(rng, Scheme::IBUG68, 68, kGrid, 20.0);
    const LandmarkSet lb = transfer_landmarks(d, la, flips.landmarks);
    PairTruth truth{{make_ground_truth(la, boundaries, options, 3, {64, 64}), la},
                    {make_ground_truth(lb, boundaries, options, 3, {64, 64}), lb}};
    auto noisy = [&](const StageOutputs& s) {
        StageOutputs out;
        for (const auto& h : s.landmarks) out.landmarks.push_back(jitter(h, rng, 0.05));
        for (const auto& h : s.boundaries) out.boundaries.push_back(jitter(h, rng, 0.05));
        out.field = jitter(*s.field, rng, 0.2);
        return out;
    };
    const PairOutputs pred{noisy(truth.alpha.targets), noisy(truth.beta.targets)};

    const LossWeights weights;
    const LossBreakdown b = loss_overall(pred, truth, d, flips, weights);
    double sum = 0.0;
    for (const LossTerm& t : b.terms) sum += t.value;
    const double gap = std::abs(sum - b.total);

    PairTruth moved = truth;
    moved.alpha.targets = noisy(truth.alpha.targets);
    moved.beta.targets = noisy(truth.beta.targets);
    const L2Losses base = l2_losses(pred, truth, d, flips, 0.0, weights.eta);
    const L2Losses shifted = l2_losses(pred, moved, d, flips, 0.0, weights.eta);
    const bool independent = base.scm == shifted.scm && base.org != shifted.org;

    CheckResult r{9, "loss bookkeeping", gap <= 1e-9 && independent && b.total > 0.0, ""};
    r.detail = fmt("%zu terms sum to total within %.2g (<= 1e-9); lambda = 0 combination unchanged by targets: %s",
                   b.terms.size(), gap, independent ? "yes" : "no");
    return r;
}

CheckResult check_format_round_trips(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-50.0, 300.0);
    std::uniform_int_distribution<int> pick(0, 3), custom_size(1, 150), pad(0, 3);
    const GridSpec grid(256, 256);
    int pts_failures = 0;
    for (int k = 0; k < 100; ++k) {
        const int sizes[] = {68, 98, 19, custom_size(rng)};
        const int n = sizes[pick(rng)];
        auto spaces = [&] { return std::string(static_cast<std::size_t>(pad(rng)), pad(rng) == 0 ? '\t' : ' '); };
        const std::string eol = pick(rng) == 0 ? "\r\n" : "\n";
        std::string text = spaces() + "version:" + spaces() + "1" + eol + "n_points: " + std::to_string(n) + eol + "{" + eol;
        for (int i = 0; i < n; ++i) text += spaces() + fmt("%.6f", coord(rng)) + " " + spaces() + fmt("%.6f", coord(rng)) + spaces() + eol;
        text += "}" + eol;
        try {
            const LandmarkSet first = parse_pts(text, grid);
            const std::string written = write_pts(first);
            const LandmarkSet second = parse_pts(written, grid);
            pts_failures += !(second.points() == first.points() && second.scheme() == first.scheme() &&
                              write_pts(second) == written && first.size() == n);
        } catch (const std::exception&) {
            ++pts_failures;
        }
    }

    std::uniform_int_distribution<int> section_count(1, 5), ndim(1, 3), extent(1, 9), name_len(1, 12);
    std::uniform_int_distribution<std::uint32_t> kind(0, 100);
    std::normal_distribution<float> value(0.0f, 10.0f);
    int container_failures = 0;
    int corruption_failures = 0;
    for (int k = 0; k < 100; ++k) {
        std::vector<TensorSection> sections(static_cast<std::size_t>(section_count(rng)));
        const int shared = pick(rng) == 0 ? -1 : ndim(rng);
        std::vector<std::uint32_t> trailing;
        if (shared > 0) {
            for (int i = 1; i < shared; ++i) trailing.push_back(static_cast<std::uint32_t>(extent(rng)));
        }
        int index = 0;
        for (TensorSection& s : sections) {
            s.name = "s" + std::to_string(index++) + std::string(static_cast<std::size_t>(name_len(rng)), 'x');
            s.kind = kind(rng);
            if (shared > 0) {
                s.dims = {static_cast<std::uint32_t>(extent(rng))};
                s.dims.insert(s.dims.end(), trailing.begin(), trailing.end());
            } else {
                for (int i = ndim(rng); i > 0; --i) s.dims.push_back(static_cast<std::uint32_t>(extent(rng)));
            }
            std::size_t total = 1;
            for (auto d : s.dims) total *= d;
            s.data.resize(total);
            for (float& x : s.data) x = value(rng);
        }
        const TensorFile file = make_tensor_file(std::move(sections));
        try {
            const std::string bytes = encode_tensor_container(file);
            const TensorFile back = decode_tensor_container(bytes);
            container_failures += !(back == file && encode_tensor_container(back) == bytes);

            auto expect = [&](std::string corrupt, ContainerErrc code) {
                try {
                    decode_tensor_container(corrupt);
                    ++corruption_failures;
                } catch (const ContainerError& e) {
                    corruption_failures += e.code() != code;
                } catch (...) {
                    ++corruption_failures;
                }
            };
            expect(bytes.substr(0, bytes.size() - 1), ContainerErrc::TruncatedPayload);
            std::string magic = bytes;
            magic[pick(rng)] ^= 0x20;
            expect(magic, ContainerErrc::BadMagic);
            std::string swapped = bytes;
            for (std::size_t d = 0; d < file.dims.size(); ++d) {
                std::reverse(swapped.begin() + 16 + 4 * static_cast<std::ptrdiff_t>(d),
                             swapped.begin() + 20 + 4 * static_cast<std::ptrdiff_t>(d));
            }
            expect(swapped, ContainerErrc::SizeMismatch);
        } catch (const std::exception&) {
            ++container_failures;
        }
    }
    const bool ok = pts_failures == 0 && container_failures == 0 && corruption_failures == 0;
    CheckResult r{10, "format round trips", ok, ""};
    r.detail = fmt("100 .pts files: %d failures; 100 containers: %d failures; 300 corruptions: %d misclassified",
                   pts_failures, container_failures, corruption_failures);
    return r;
}

std::vector<CheckResult> run_all(std::uint64_t seed) {
    std::vector<CheckResult> results;
    auto guarded = [&results](int id, const char* name, auto&& check) {
        try {
            results.push_back(check());
        } catch (const std::exception& e) {
            results.push_back({id, name, false, std::string("threw: ") + e.what()});
        }
    };
    guarded(1, "round-trip exactness", [&] { return check_roundtrip(seed + 1); });
    guarded(2, "field advantage", [&] { return check_field_advantage(seed + 2); });
    guarded(3, "equivariance", [&] { return check_equivariance(seed + 3); });
    guarded(4, "self-calibrated loss null case", [&] { return check_self_calibration_null(seed + 4); });
    guarded(5, "JS-divergence axioms", [&] { return check_js_axioms(seed + 5); });
    guarded(6, "kernel limits", [] { return check_kernel_limits(); });
    guarded(7, "distance transform oracle", [&] { return check_distance_transform(seed + 7); });
    guarded(8, "metrics oracles", [&] { return check_metrics(seed + 8); });
    guarded(9, "loss bookkeeping", [&] { return check_loss_bookkeeping(seed + 9); });
    guarded(10, "format round trips", [&] { return check_format_round_trips(seed + 10); });
    return results;
}

std::string format_result(const CheckResult& result) {
    return fmt("%s %2d  %s: %s", result.passed ? "PASS" : "FAIL", result.id, result.name.c_str(),
               result.detail.c_str());
}

} // namespace bali::selfcheck
