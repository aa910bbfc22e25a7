#include "segforge/nifti.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace segforge {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

namespace {

// NIfTI-1 header field offsets (348-byte header).
constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kOffDim = 40;       // int16[8]
constexpr std::size_t kOffDatatype = 70;  // int16
constexpr std::size_t kOffPixdim = 76;    // float32[8]
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffMagic = 344;    // char[4]

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;

template <typename T>
T read_le(std::span<const std::uint8_t> b, std::size_t off) {
    T v;
    std::memcpy(&v, b.data() + off, sizeof(T));
    return v;
}

struct Header {
    Index3 dims;
    Vec3 spacing;
    std::int16_t datatype = 0;
    std::size_t data_offset = 0;
    float scl_slope = 0.f;
    float scl_inter = 0.f;
};

Header parse_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize)
        throw TruncatedData("file shorter than the 348-byte NIfTI-1 header");

    std::int32_t sizeof_hdr = read_le<std::int32_t>(bytes, 0);
    char magic[4];
    std::memcpy(magic, bytes.data() + kOffMagic, 4);
    if (sizeof_hdr != 348 || std::memcmp(magic, "n+1\0", 4) != 0)
        throw BadMagic("not a single-file NIfTI-1 image (magic/sizeof_hdr)");

    std::int16_t ndim = read_le<std::int16_t>(bytes, kOffDim);
    if (ndim != 3)
        throw UnsupportedDimension("only 3D images are supported, dim[0]=" + std::to_string(ndim));

    Header h;
    h.dims.x = read_le<std::int16_t>(bytes, kOffDim + 2);
    h.dims.y = read_le<std::int16_t>(bytes, kOffDim + 4);
    h.dims.z = read_le<std::int16_t>(bytes, kOffDim + 6);
    if (h.dims.x < 1 || h.dims.y < 1 || h.dims.z < 1)
        throw UnsupportedDimension("non-positive image dimension");

    h.datatype = read_le<std::int16_t>(bytes, kOffDatatype);
    if (h.datatype != kDtUint8 && h.datatype != kDtInt16 && h.datatype != kDtFloat32)
        throw UnsupportedDatatype("datatype " + std::to_string(h.datatype) +
                                  " (supported: uint8, int16, float32)");

    h.spacing.x = read_le<float>(bytes, kOffPixdim + 4);
    h.spacing.y = read_le<float>(bytes, kOffPixdim + 8);
    h.spacing.z = read_le<float>(bytes, kOffPixdim + 12);
    if (!(h.spacing.x > 0.f) || !(h.spacing.y > 0.f) || !(h.spacing.z > 0.f))
        throw NonPositiveSpacing("pixdim spacing must be positive");

    float vox_offset = read_le<float>(bytes, kOffVoxOffset);
    h.data_offset = vox_offset < static_cast<float>(kHeaderSize)
                        ? kHeaderSize
                        : static_cast<std::size_t>(vox_offset);
    h.scl_slope = read_le<float>(bytes, kOffSclSlope);
    h.scl_inter = read_le<float>(bytes, kOffSclInter);
    return h;
}

std::size_t element_size(std::int16_t dt) {
    return dt == kDtUint8 ? 1 : dt == kDtInt16 ? 2 : 4;
}

void check_payload(const Header& h, std::span<const std::uint8_t> bytes) {
    std::size_t need = h.data_offset + voxel_count(h.dims) * element_size(h.datatype);
    if (bytes.size() < need)
        throw TruncatedData("payload shorter than dims imply (" + std::to_string(bytes.size()) +
                            " bytes, need " + std::to_string(need) + ")");
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

} // namespace

Volume parse_nifti_volume(std::span<const std::uint8_t> bytes) {
    Header h = parse_header(bytes);
    check_payload(h, bytes);

    Volume v;
    v.dims = h.dims;
    v.spacing_mm = h.spacing;
    std::size_t n = voxel_count(h.dims);
    v.voxels.resize(n);

    const std::uint8_t* p = bytes.data() + h.data_offset;
    switch (h.datatype) {
    case kDtUint8:
        for (std::size_t i = 0; i < n; ++i) v.voxels[i] = static_cast<float>(p[i]);
        break;
    case kDtInt16:
        for (std::size_t i = 0; i < n; ++i) {
            std::int16_t s;
            std::memcpy(&s, p + 2 * i, 2);
            v.voxels[i] = static_cast<float>(s);
        }
        break;
    default: // float32
        std::memcpy(v.voxels.data(), p, n * 4);
        break;
    }

    if (h.scl_slope != 0.f && !(h.scl_slope == 1.f && h.scl_inter == 0.f))
        for (float& x : v.voxels) x = h.scl_slope * x + h.scl_inter;

    validate(v);
    return v;
}

Segmentation parse_nifti_segmentation(std::span<const std::uint8_t> bytes) {
    Header h = parse_header(bytes);
    if (h.datatype != kDtUint8)
        throw UnsupportedDatatype("segmentations must be stored as uint8");
    check_payload(h, bytes);

    Segmentation s;
    s.dims = h.dims;
    s.spacing_mm = h.spacing;
    std::size_t n = voxel_count(h.dims);
    s.labels.assign(bytes.data() + h.data_offset, bytes.data() + h.data_offset + n);
    validate(s);
    return s;
}

Volume load_nifti_volume(const std::string& path) {
    auto bytes = read_file(path);
    return parse_nifti_volume(bytes);
}

Segmentation load_nifti_segmentation(const std::string& path) {
    auto bytes = read_file(path);
    return parse_nifti_segmentation(bytes);
}

} // namespace segforge
