#include "segforge/raw_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace segforge {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

namespace {

constexpr char kTag[4] = {'S', 'F', 'R', 'W'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kKindVolume = 0;
constexpr std::uint32_t kKindLabels = 1;
constexpr std::size_t kHeaderSize = 64;

struct RawHeader {
    std::uint32_t kind = 0;
    Index3 dims;
    Vec3 spacing, origin;
    std::uint64_t payload_bytes = 0;
};

void put(std::array<std::uint8_t, kHeaderSize>& h, std::size_t off, const void* src, std::size_t n) {
    std::memcpy(h.data() + off, src, n);
}

std::array<std::uint8_t, kHeaderSize> encode_header(const RawHeader& r) {
    std::array<std::uint8_t, kHeaderSize> h{};
    put(h, 0, kTag, 4);
    put(h, 4, &kVersion, 4);
    put(h, 8, &r.kind, 4);
    std::uint32_t d[3] = {static_cast<std::uint32_t>(r.dims.x), static_cast<std::uint32_t>(r.dims.y),
                          static_cast<std::uint32_t>(r.dims.z)};
    put(h, 12, d, 12);
    float sp[3] = {r.spacing.x, r.spacing.y, r.spacing.z};
    put(h, 24, sp, 12);
    float og[3] = {r.origin.x, r.origin.y, r.origin.z};
    put(h, 36, og, 12);
    put(h, 48, &r.payload_bytes, 8);
    return h;
}

RawHeader decode_header(std::ifstream& f, const std::string& path) {
    std::array<std::uint8_t, kHeaderSize> h{};
    f.read(reinterpret_cast<char*>(h.data()), kHeaderSize);
    if (f.gcount() != static_cast<std::streamsize>(kHeaderSize))
        throw FormatVersionMismatch(path + ": shorter than the raw-format header");
    if (std::memcmp(h.data(), kTag, 4) != 0)
        throw FormatVersionMismatch(path + ": unrecognized format tag");
    std::uint32_t version;
    std::memcpy(&version, h.data() + 4, 4);
    if (version != kVersion)
        throw FormatVersionMismatch(path + ": format version " + std::to_string(version));

    RawHeader r;
    std::memcpy(&r.kind, h.data() + 8, 4);
    std::uint32_t d[3];
    std::memcpy(d, h.data() + 12, 12);
    r.dims = {static_cast<int>(d[0]), static_cast<int>(d[1]), static_cast<int>(d[2])};
    float sp[3], og[3];
    std::memcpy(sp, h.data() + 24, 12);
    std::memcpy(og, h.data() + 36, 12);
    r.spacing = {sp[0], sp[1], sp[2]};
    r.origin = {og[0], og[1], og[2]};
    std::memcpy(&r.payload_bytes, h.data() + 48, 8);
    return r;
}

void write_file(const std::string& path, const std::array<std::uint8_t, kHeaderSize>& header,
                const void* payload, std::size_t payload_bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(header.data()), kHeaderSize);
    f.write(reinterpret_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
    if (!f) throw IoError("short write to " + path);
}

} // namespace

void write_raw(const Volume& v, const std::string& path) {
    validate(v);
    RawHeader r{kKindVolume, v.dims, v.spacing_mm, v.origin_mm, v.voxels.size() * 4};
    write_file(path, encode_header(r), v.voxels.data(), v.voxels.size() * 4);
}

void write_raw(const Segmentation& s, const std::string& path) {
    validate(s);
    RawHeader r{kKindLabels, s.dims, s.spacing_mm, s.origin_mm, s.labels.size()};
    write_file(path, encode_header(r), s.labels.data(), s.labels.size());
}

Volume read_raw_volume(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    RawHeader r = decode_header(f, path);
    if (r.kind != kKindVolume)
        throw FormatVersionMismatch(path + ": not a volume payload");
    std::size_t n = voxel_count(r.dims);
    if (r.payload_bytes != n * 4)
        throw IoError(path + ": payload size disagrees with dims");
    Volume v;
    v.dims = r.dims;
    v.spacing_mm = r.spacing;
    v.origin_mm = r.origin;
    v.voxels.resize(n);
    f.read(reinterpret_cast<char*>(v.voxels.data()), static_cast<std::streamsize>(n * 4));
    if (f.gcount() != static_cast<std::streamsize>(n * 4))
        throw IoError(path + ": truncated payload");
    validate(v);
    return v;
}

Segmentation read_raw_segmentation(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    RawHeader r = decode_header(f, path);
    if (r.kind != kKindLabels)
        throw FormatVersionMismatch(path + ": not a label payload");
    std::size_t n = voxel_count(r.dims);
    if (r.payload_bytes != n)
        throw IoError(path + ": payload size disagrees with dims");
    Segmentation s;
    s.dims = r.dims;
    s.spacing_mm = r.spacing;
    s.origin_mm = r.origin;
    s.labels.resize(n);
    f.read(reinterpret_cast<char*>(s.labels.data()), static_cast<std::streamsize>(n));
    if (f.gcount() != static_cast<std::streamsize>(n))
        throw IoError(path + ": truncated payload");
    validate(s);
    return s;
}

bool raw_is_segmentation(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    RawHeader r = decode_header(f, path);
    return r.kind == kKindLabels;
}

} // namespace segforge
