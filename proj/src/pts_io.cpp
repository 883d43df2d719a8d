#include "bali/pts_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>


namespace bali {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_header(const std::string& line, const char* key, int& value) {
    const auto colon = line.find(':');
    if (colon == std::string::npos || trim(line.substr(0, colon)) != key) return false;
    std::istringstream in(line.substr(colon + 1));
    std::string extra;
    return static_cast<bool>(in >> value) && !(in >> extra);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError(path, "read failed");
    return buffer.str();
}

} // namespace

LandmarkSet parse_pts(std::string_view text, GridSpec grid, bool one_based) {
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    auto next = [&]() -> bool {
        while (std::getline(in, raw)) {
            ++line_no;
            raw = trim(raw);
            if (!raw.empty()) return true;
        }
        return false;
    };

    int version = 0, n_points = -1;
    if (!next() || !parse_header(raw, "version", version)) throw PtsParseError(line_no, "expected 'version: <n>'");
    if (version != 1) throw PtsParseError(line_no, "unsupported version " + std::to_string(version));
    if (!next() || !parse_header(raw, "n_points", n_points) || n_points < 0) {
        throw PtsParseError(line_no, "expected 'n_points: <count>'");
    }
    if (!next() || raw != "{") throw PtsParseError(line_no, "expected '{'");

    std::vector<Point2> points;
    points.reserve(static_cast<std::size_t>(n_points));
    bool closed = false;
    while (next()) {
        if (raw == "}") {
            closed = true;
            break;
        }
        std::istringstream fields(raw);
        double x = 0.0, y = 0.0;
        std::string extra;
        if (!(fields >> x >> y) || (fields >> extra)) throw PtsParseError(line_no, "expected 'x y', got '" + raw + "'");
        if (!std::isfinite(x) || !std::isfinite(y)) throw PtsParseError(line_no, "non-finite coordinate");
        if (static_cast<int>(points.size()) == n_points) {
            throw PtsParseError(line_no, "more than n_points = " + std::to_string(n_points) + " coordinate pairs");
        }
        if (one_based) {
            x -= 1.0;
            y -= 1.0;
        }
        points.push_back({x, y});
    }
    if (!closed) throw PtsParseError(line_no, "missing closing '}'");
    if (static_cast<int>(points.size()) != n_points) {
        throw PtsParseError(line_no, "n_points = " + std::to_string(n_points) + " but " +
                                         std::to_string(points.size()) + " pairs present");
    }
    if (next()) throw PtsParseError(line_no, "unexpected content after '}'");
    return LandmarkSet(scheme_for_count(n_points), std::move(points), grid);
}

std::string write_pts(const LandmarkSet& landmarks, bool one_based) {
    std::string out = "version: 1\nn_points: " + std::to_string(landmarks.size()) + "\n{\n";
    const double shift = one_based ? 1.0 : 0.0;
    char buf[96];
    for (const Point2& p : landmarks.points()) {
        std::snprintf(buf, sizeof buf, "%.6f %.6f\n", p.u + shift, p.v + shift);
        out += buf;
    }
    out += "}\n";
    return out;
}

LandmarkSet read_pts_file(const std::string& path, GridSpec grid, bool one_based) {
    const std::string text = slurp(path);
    try {
        return parse_pts(text, grid, one_based);
    } catch (const PtsParseError& e) {
        throw PtsParseError(e.line(), e.detail(), path);
    }
}

void write_pts_file(const std::string& path, const LandmarkSet& landmarks, bool one_based) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << write_pts(landmarks, one_based);
    if (!out) throw IoError(path, "write failed");
}

std::optional<std::string> one_based_warning(const std::vector<LandmarkSet>& dataset) {
    double lowest = INFINITY;
    std::size_t count = 0;
    for (const LandmarkSet& l : dataset) {
        for (const Point2& p : l.points()) {
            lowest = std::min({lowest, p.u, p.v});
            ++count;
        }
    }
    if (count == 0 || lowest < 1.0) return std::nullopt;
    return "every coordinate in " + std::to_string(dataset.size()) +
           " annotation(s) is >= 1; the files may be 1-based (use --one-based)";
}

BoundingBox parse_box(std::string_view text) {
    std::istringstream in{std::string(text)};
    BoundingBox box;
    std::string extra;
    if (!(in >> box.x >> box.y >> box.w >> box.h) || (in >> extra)) {
        throw ValidationError("box file must hold four reals: x y w h");
    }
    if (box.w <= 0.0 || box.h <= 0.0) throw ValidationError("box width and height must be > 0");
    return box;
}

} // namespace bali
