#include "bali/tables.hpp"

#include <sstream>
#include <string>

namespace bali {

namespace {

std::vector<std::string> content_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        lines.push_back(line);
    }
    return lines;
}

} // namespace

FlipPermutation parse_flip_table(std::string_view text) {
    int size = -1;
    std::vector<std::pair<int, int>> pairs;
    for (const std::string& line : content_lines(text)) {
        std::istringstream fields(line);
        std::string head;
        fields >> head;
        if (head == "scheme") continue;
        if (head == "size") {
            fields >> size;
            continue;
        }
        int a = 0, b = 0;
        std::istringstream pair_fields(line);
        if (!(pair_fields >> a >> b)) throw ValidationError("flip table: malformed line '" + line + "'");
        pairs.emplace_back(a, b);
    }
    if (size <= 0) throw ValidationError("flip table: missing size");
    std::vector<int> perm(static_cast<std::size_t>(size), -1);
    for (auto [a, b] : pairs) {
        if (a < 0 || b < 0 || a >= size || b >= size) throw ValidationError("flip table: index out of range");
        if (perm[static_cast<std::size_t>(a)] != -1 || perm[static_cast<std::size_t>(b)] != -1) {
            throw ValidationError("flip table: index listed twice");
        }
        perm[static_cast<std::size_t>(a)] = b;
        perm[static_cast<std::size_t>(b)] = a;
    }
    for (int i = 0; i < size; ++i) {
        if (perm[static_cast<std::size_t>(i)] == -1) perm[static_cast<std::size_t>(i)] = i;
    }
    return FlipPermutation(std::move(perm));
}

EyeTable parse_eye_table(std::string_view text, Scheme scheme) {
    const std::string wanted = scheme_name(scheme);
    bool active = false;
    bool found = false;
    EyeTable table;
    for (const std::string& line : content_lines(text)) {
        std::istringstream fields(line);
        std::string head;
        fields >> head;
        if (head == "scheme") {
            std::string name;
            fields >> name;
            active = name == wanted;
            found = found || active;
            continue;
        }
        if (!active) continue;
        std::vector<int> values;
        for (int v = 0; fields >> v;) values.push_back(v);
        if (head == "outer" && values.size() == 2) {
            table.outer_left = values[0];
            table.outer_right = values[1];
        } else if (head == "left") {
            table.left = values;
        } else if (head == "right") {
            table.right = values;
        } else {
            throw ValidationError("eye table: malformed line '" + line + "'");
        }
    }
    if (!found || table.left.empty() || table.right.empty()) {
        throw ValidationError("no eye table for scheme " + wanted);
    }
    return table;
}

Colormap parse_colormap(std::string_view text) {
    Colormap map{};
    std::size_t count = 0;
    for (const std::string& line : content_lines(text)) {
        std::istringstream fields(line);
        int r = 0, g = 0, b = 0;
        if (!(fields >> r >> g >> b) || count >= map.size()) {
            throw ValidationError("colormap: malformed or extra line '" + line + "'");
        }
        map[count++] = {static_cast<unsigned char>(r), static_cast<unsigned char>(g), static_cast<unsigned char>(b)};
    }
    if (count != map.size()) throw ValidationError("colormap: expected 256 entries");
    return map;
}

FlipPermutation flip_permutation(Scheme scheme) {
    switch (scheme) {
    case Scheme::IBUG68: return parse_flip_table(embedded::flip_ibug68);
    case Scheme::WFLW98: return parse_flip_table(embedded::flip_wflw98);
    case Scheme::AFLW19: return parse_flip_table(embedded::flip_aflw19);
    case Scheme::Custom: break;
    }
    throw ValidationError("no flip table for scheme CUSTOM");
}

bool has_eye_table(Scheme scheme) noexcept { return scheme != Scheme::Custom; }

EyeTable eye_table(Scheme scheme) { return parse_eye_table(embedded::eye_tables, scheme); }

const Colormap& sequential_colormap() {
    static const Colormap map = parse_colormap(embedded::colormap_viridis);
    return map;
}

const Colormap& diverging_colormap() {
    static const Colormap map = parse_colormap(embedded::colormap_coolwarm);
    return map;
}

} // namespace bali
