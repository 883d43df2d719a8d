#include "bali/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>

namespace bali {

const char* to_string(ContainerErrc code) noexcept {
    switch (code) {
    case ContainerErrc::BadMagic: return "bad magic";
    case ContainerErrc::UnsupportedVersion: return "unsupported version";
    case ContainerErrc::UnsupportedDtype: return "unsupported dtype";
    case ContainerErrc::TruncatedHeader: return "truncated header";
    case ContainerErrc::TruncatedPayload: return "truncated payload";
    case ContainerErrc::DimOverflow: return "dim overflow";
    case ContainerErrc::SizeMismatch: return "size mismatch";
    case ContainerErrc::BadSectionTable: return "bad section table";
    }
    return "unknown container error";
}

const TensorSection* TensorFile::find(const std::string& name) const {
    for (const TensorSection& s : sections) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

namespace {

constexpr std::uint32_t kMaxDims = 8;
constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxSections = 1u << 16;
constexpr char kMagic[4] = {'B', 'A', 'L', 'I'};

bool checked_product(const std::vector<std::uint32_t>& dims, std::uint64_t& out) {
    std::uint64_t total = 1;
    for (std::uint32_t d : dims) {
        if (d != 0 && total > std::numeric_limits<std::uint64_t>::max() / d) return false;
        total *= d;
    }
    out = total;
    return true;
}

class Writer {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const char*>(data);
        buf_.append(p, n);
    }
    void u32(std::uint32_t v) {
        for (int k = 0; k < 4; ++k) buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
    }
    void u64(std::uint64_t v) {
        for (int k = 0; k < 8; ++k) buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
    }
    void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
    std::string take() { return std::move(buf_); }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(const std::string& data) : data_(data) {}

    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    void need(std::size_t n, ContainerErrc code, const char* what) const {
        if (remaining() < n) throw ContainerError(code, std::string("file ends inside ") + what);
    }
    std::uint32_t u32(const char* what) {
        need(4, ContainerErrc::TruncatedHeader, what);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, ContainerErrc::TruncatedHeader, what);
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
        pos_ += 8;
        return v;
    }
    std::string str(std::size_t n, const char* what) {
        need(n, ContainerErrc::TruncatedHeader, what);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    float f32_unchecked() {
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
        pos_ += 4;
        return std::bit_cast<float>(v);
    }

private:
    const std::string& data_;
    std::size_t pos_ = 0;
};

std::vector<std::uint32_t> read_dims(Reader& r, const char* what) {
    const std::uint32_t ndim = r.u32(what);
    if (ndim > kMaxDims) {
        throw ContainerError(ContainerErrc::DimOverflow, std::string(what) + " has " + std::to_string(ndim) + " dims");
    }
    std::vector<std::uint32_t> dims(ndim);
    for (auto& d : dims) d = r.u32(what);
    return dims;
}

} // namespace

TensorFile make_tensor_file(std::vector<TensorSection> sections) {
    TensorFile file;
    bool shared = !sections.empty();
    for (const TensorSection& s : sections) {
        if (s.dims.empty() || s.dims.size() != sections.front().dims.size() ||
            !std::equal(s.dims.begin() + 1, s.dims.end(), sections.front().dims.begin() + 1)) {
            shared = false;
        }
    }
    std::uint64_t total = 0;
    for (const TensorSection& s : sections) total += s.data.size();
    if (shared) {
        file.dims = sections.front().dims;
        std::uint64_t lead = 0;
        for (const TensorSection& s : sections) lead += s.dims.front();
        file.dims.front() = static_cast<std::uint32_t>(lead);
    } else {
        file.dims = {static_cast<std::uint32_t>(total)};
    }
    file.sections = std::move(sections);
    return file;
}

std::string encode_tensor_container(const TensorFile& file) {
    if (file.dims.size() > kMaxDims) throw ContainerError(ContainerErrc::DimOverflow, "too many global dims");
    Writer w;
    w.bytes(kMagic, 4);
    w.u32(kContainerVersion);
    w.u32(0);
    w.u32(static_cast<std::uint32_t>(file.dims.size()));
    for (auto d : file.dims) w.u32(d);
    w.u32(static_cast<std::uint32_t>(file.sections.size()));
    std::uint64_t offset = 0;
    for (const TensorSection& s : file.sections) {
        std::uint64_t extent = 0;
        if (!checked_product(s.dims, extent) || extent != s.data.size()) {
            throw ContainerError(ContainerErrc::SizeMismatch, "section '" + s.name + "' dims disagree with its data");
        }
        if (s.name.size() > kMaxNameLength) throw ContainerError(ContainerErrc::BadSectionTable, "section name too long");
        w.u32(static_cast<std::uint32_t>(s.name.size()));
        w.bytes(s.name.data(), s.name.size());
        w.u32(s.kind);
        w.u64(offset);
        w.u32(static_cast<std::uint32_t>(s.dims.size()));
        for (auto d : s.dims) w.u32(d);
        offset += extent;
    }
    std::uint64_t total = 0;
    if (!checked_product(file.dims, total) || total != offset) {
        throw ContainerError(ContainerErrc::SizeMismatch, "global dims disagree with the sections");
    }
    for (const TensorSection& s : file.sections) {
        for (float f : s.data) w.f32(f);
    }
    return w.take();
}

TensorFile decode_tensor_container(const std::string& bytes) {
    Reader r(bytes);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw ContainerError(ContainerErrc::BadMagic, "missing 'BALI' signature");
    }
    r.str(4, "magic");
    const std::uint32_t version = r.u32("header");
    if (version != kContainerVersion) {
        throw ContainerError(ContainerErrc::UnsupportedVersion, "format version " + std::to_string(version));
    }
    const std::uint32_t dtype = r.u32("header");
    if (dtype != 0) throw ContainerError(ContainerErrc::UnsupportedDtype, "dtype code " + std::to_string(dtype));

    TensorFile file;
    file.dims = read_dims(r, "global dims");
    const std::uint32_t count = r.u32("section table");
    if (count > kMaxSections) throw ContainerError(ContainerErrc::BadSectionTable, "implausible section count");

    struct Entry {
        std::uint64_t offset;
        std::uint64_t extent;
    };
    std::vector<Entry> entries;
    std::uint64_t expected_offset = 0;
    for (std::uint32_t k = 0; k < count; ++k) {
        TensorSection s;
        const std::uint32_t name_length = r.u32("section table");
        if (name_length > kMaxNameLength) throw ContainerError(ContainerErrc::BadSectionTable, "section name too long");
        s.name = r.str(name_length, "section table");
        s.kind = r.u32("section table");
        const std::uint64_t offset = r.u64("section table");
        s.dims = read_dims(r, "section dims");
        std::uint64_t extent = 0;
        if (!checked_product(s.dims, extent)) {
            throw ContainerError(ContainerErrc::DimOverflow, "section '" + s.name + "' dims overflow");
        }
        if (offset != expected_offset) {
            throw ContainerError(ContainerErrc::BadSectionTable, "section '" + s.name + "' is not contiguous");
        }
        if (extent > std::numeric_limits<std::uint64_t>::max() - expected_offset) {
            throw ContainerError(ContainerErrc::DimOverflow, "section extents overflow");
        }
        expected_offset += extent;
        entries.push_back({offset, extent});
        file.sections.push_back(std::move(s));
    }

    // A saturated global product can only match the section total when the
    // header dims are genuine.
    std::uint64_t global = 0;
    if (!checked_product(file.dims, global)) global = std::numeric_limits<std::uint64_t>::max();
    if (global != expected_offset) {
        throw ContainerError(ContainerErrc::SizeMismatch, "global dims describe " + std::to_string(global) +
                                                              " elements, sections hold " +
                                                              std::to_string(expected_offset));
    }
    if (expected_offset > r.remaining() / 4) {
        throw ContainerError(ContainerErrc::TruncatedPayload, "payload needs " + std::to_string(expected_offset * 4) +
                                                                  " bytes, " + std::to_string(r.remaining()) +
                                                                  " present");
    }
    if (r.remaining() != expected_offset * 4) {
        throw ContainerError(ContainerErrc::SizeMismatch, std::to_string(r.remaining() - expected_offset * 4) +
                                                              " trailing bytes after the payload");
    }
    for (std::size_t k = 0; k < file.sections.size(); ++k) {
        auto& data = file.sections[k].data;
        data.resize(static_cast<std::size_t>(entries[k].extent));
        for (float& f : data) f = r.f32_unchecked();
    }
    return file;
}

void write_tensor_container(std::ostream& out, const TensorFile& file) {
    const std::string bytes = encode_tensor_container(file);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TensorFile read_tensor_container(std::istream& in) {
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_tensor_container(bytes);
}

void write_tensor_file(const std::string& path, const TensorFile& file) {
    const std::string bytes = encode_tensor_container(file);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path, "write failed");
}

TensorFile read_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (in.bad()) throw IoError(path, "read failed");
    return decode_tensor_container(bytes);
}

namespace {

TensorSection planes_section(const std::string& name, std::uint32_t kind, const std::vector<Plane>& planes,
                             GridSpec grid) {
    TensorSection s;
    s.name = name;
    s.kind = kind;
    s.dims = {static_cast<std::uint32_t>(planes.size()), static_cast<std::uint32_t>(grid.height()),
              static_cast<std::uint32_t>(grid.width())};
    s.data.reserve(planes.size() * grid.cells());
    for (const Plane& p : planes) s.data.insert(s.data.end(), p.values().begin(), p.values().end());
    return s;
}

std::vector<Plane> section_planes(const TensorSection& s) {
    if (s.dims.size() != 3) {
        throw ValidationError("section '" + s.name + "' must be [channels, height, width]");
    }
    const GridSpec grid(static_cast<int>(s.dims[2]), static_cast<int>(s.dims[1]));
    std::vector<Plane> planes;
    planes.reserve(s.dims[0]);
    for (std::uint32_t c = 0; c < s.dims[0]; ++c) {
        auto first = s.data.begin() + static_cast<std::ptrdiff_t>(c * grid.cells());
        planes.emplace_back(grid, std::vector<float>(first, first + static_cast<std::ptrdiff_t>(grid.cells())));
    }
    return planes;
}

const TensorSection& require(const TensorFile& file, const std::string& name) {
    const TensorSection* s = file.find(name);
    if (!s) throw ValidationError("container lacks section '" + name + "'");
    return *s;
}

} // namespace

TensorFile composite_to_tensors(const ContainerContents& c, bool include_support) {
    const GridSpec grid = c.landmarks.grid();
    std::vector<TensorSection> sections;
    sections.push_back(planes_section("landmark_heatmaps", section_kind::kLandmarkHeatmaps, c.landmarks.channels(), grid));
    sections.push_back(
        planes_section("boundary_heatmaps", section_kind::kBoundaryHeatmaps, c.composite.boundary.channels(), grid));
    sections.push_back(planes_section("u_offsets", section_kind::kOffsetU, c.composite.field.u_planes(), grid));
    sections.push_back(planes_section("v_offsets", section_kind::kOffsetV, c.composite.field.v_planes(), grid));
    if (include_support) {
        std::vector<Plane> masks;
        for (const BinaryMap& m : c.composite.field.supports()) {
            Plane p(grid);
            for (std::size_t k = 0; k < m.cells.size(); ++k) p.values()[k] = m.cells[k];
            masks.push_back(std::move(p));
        }
        sections.push_back(planes_section("support", section_kind::kSupport, masks, grid));
    }
    for (std::size_t t = 0; t < c.stage_landmarks.size(); ++t) {
        const std::string prefix = "stage" + std::to_string(t + 1) + "/";
        sections.push_back(planes_section(prefix + "landmark_heatmaps", section_kind::kLandmarkHeatmaps,
                                          c.stage_landmarks[t].channels(), c.stage_landmarks[t].grid()));
        sections.push_back(planes_section(prefix + "boundary_heatmaps", section_kind::kBoundaryHeatmaps,
                                          c.stage_boundaries[t].channels(), c.stage_boundaries[t].grid()));
    }
    return make_tensor_file(std::move(sections));
}

ContainerContents tensors_to_composite(const TensorFile& file) {
    ContainerContents c;
    std::vector<Plane> landmarks = section_planes(require(file, "landmark_heatmaps"));
    std::vector<Plane> boundaries = section_planes(require(file, "boundary_heatmaps"));
    std::vector<Plane> us = section_planes(require(file, "u_offsets"));
    std::vector<Plane> vs = section_planes(require(file, "v_offsets"));
    if (landmarks.empty()) throw ValidationError("container holds no landmark channels");
    if (us.size() != landmarks.size() || vs.size() != landmarks.size()) {
        throw ValidationError("offset and landmark channel counts differ");
    }
    const GridSpec grid = landmarks.front().grid();

    std::vector<BinaryMap> supports;
    if (const TensorSection* s = file.find("support")) {
        for (const Plane& p : section_planes(*s)) {
            BinaryMap m(p.grid());
            for (std::size_t k = 0; k < m.cells.size(); ++k) m.cells[k] = p.values()[k] != 0.0f;
            supports.push_back(std::move(m));
        }
    } else {
        for (std::size_t c_idx = 0; c_idx < us.size(); ++c_idx) {
            BinaryMap m(grid);
            for (std::size_t k = 0; k < m.cells.size(); ++k) {
                m.cells[k] = us[c_idx].values()[k] != 0.0f || vs[c_idx].values()[k] != 0.0f;
            }
            supports.push_back(std::move(m));
        }
    }
    // Encoded squares reach max |offset| in [R, R + 0.5].
    double reach = 0.0;
    for (std::size_t c_idx = 0; c_idx < us.size(); ++c_idx) {
        for (std::size_t k = 0; k < us[c_idx].values().size(); ++k) {
            if (!supports[c_idx].cells[k]) continue;
            reach = std::max({reach, std::abs(double(us[c_idx].values()[k])), std::abs(double(vs[c_idx].values()[k]))});
        }
    }
    const int radius = std::max(1, static_cast<int>(std::floor(reach)));

    c.scheme = scheme_for_count(static_cast<int>(landmarks.size()));
    c.landmarks = HeatmapStack(HeatmapKind::Landmark, grid, std::move(landmarks));
    c.composite.boundary = HeatmapStack(HeatmapKind::Boundary, boundaries.empty() ? grid : boundaries.front().grid(),
                                        std::move(boundaries));
    c.composite.field = BaliField(grid, radius, std::move(us), std::move(vs), std::move(supports));
    for (int t = 1;; ++t) {
        const std::string prefix = "stage" + std::to_string(t) + "/";
        const TensorSection* lm = file.find(prefix + "landmark_heatmaps");
        const TensorSection* bd = file.find(prefix + "boundary_heatmaps");
        if (!lm || !bd) break;
        auto lp = section_planes(*lm);
        auto bp = section_planes(*bd);
        if (lp.empty() || bp.empty()) throw ValidationError("stage section without channels");
        const GridSpec sg = lp.front().grid();
        c.stage_landmarks.emplace_back(HeatmapKind::Landmark, sg, std::move(lp));
        c.stage_boundaries.emplace_back(HeatmapKind::Boundary, sg, std::move(bp));
    }
    return c;
}

} // namespace bali
