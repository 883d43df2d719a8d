#pragma once

// Binary tensor container. All integers and scalars are little-endian.
//
//   char[4]  magic "BALI"
//   u32      format_version (1)
//   u32      dtype (0 = IEEE-754 binary32)
//   u32      ndim
//   u32      dims[ndim]
//   u32      section_count
//   per section:
//     u32    name_length, then name bytes (UTF-8, no terminator)
//     u32    kind tag
//     u64    offset into the payload, in elements
//     u32    ndim, then u32 dims[ndim]
//   f32      payload[product(dims)], row-major
//
// Sections tile the payload. Unknown kind tags are carried through unchanged.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bali/errors.hpp"
#include "bali/field.hpp"
#include "bali/heatmap.hpp"

namespace bali {

inline constexpr std::uint32_t kContainerVersion = 1;

enum class ContainerErrc {
    BadMagic = 1,
    UnsupportedVersion,
    UnsupportedDtype,
    TruncatedHeader,
    TruncatedPayload,
    DimOverflow,
    SizeMismatch,
    BadSectionTable,
};

const char* to_string(ContainerErrc code) noexcept;

class ContainerError : public ValidationError {
public:
    ContainerError(ContainerErrc code, const std::string& detail)
        : ValidationError(std::string(to_string(code)) + ": " + detail), code_(code) {}
    ContainerErrc code() const noexcept { return code_; }

private:
    ContainerErrc code_;
};

namespace section_kind {
inline constexpr std::uint32_t kLandmarkHeatmaps = 1;
inline constexpr std::uint32_t kBoundaryHeatmaps = 2;
inline constexpr std::uint32_t kOffsetU = 3;
inline constexpr std::uint32_t kOffsetV = 4;
inline constexpr std::uint32_t kSupport = 5;
inline constexpr std::uint32_t kMetadata = 6;
} // namespace section_kind

struct TensorSection {
    std::string name;
    std::uint32_t kind = 0;
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    friend bool operator==(const TensorSection&, const TensorSection&) = default;
};

struct TensorFile {
    /// Global dims: [sum of leading dims, trailing...] when every section
    /// shares its trailing dims, otherwise [total element count].
    std::vector<std::uint32_t> dims;
    std::vector<TensorSection> sections;

    const TensorSection* find(const std::string& name) const;

    friend bool operator==(const TensorFile&, const TensorFile&) = default;
};

/// Computes global dims from the sections.
TensorFile make_tensor_file(std::vector<TensorSection> sections);

void write_tensor_container(std::ostream& out, const TensorFile& file);
TensorFile read_tensor_container(std::istream& in);
std::string encode_tensor_container(const TensorFile& file);
TensorFile decode_tensor_container(const std::string& bytes);

void write_tensor_file(const std::string& path, const TensorFile& file);
TensorFile read_tensor_file(const std::string& path);

// Mapping between codec values and named sections.

struct ContainerContents {
    HeatmapStack landmarks;
    BaliComposite composite;
    /// Intermediate stages, in order (may be empty).
    std::vector<HeatmapStack> stage_landmarks;
    std::vector<HeatmapStack> stage_boundaries;
    Scheme scheme = Scheme::Custom;
};

TensorFile composite_to_tensors(const ContainerContents& contents, bool include_support = false);
/// Without a support section, support is taken as the cells with a nonzero offset.
ContainerContents tensors_to_composite(const TensorFile& file);

} // namespace bali
