#ifndef SEGFORGE_RAW_IO_HPP
#define SEGFORGE_RAW_IO_HPP

#include <string>

#include "segforge/volume.hpp"

namespace segforge {

// Internal interchange format (".svol" volumes, ".sseg" segmentations):
// a 64-byte fixed header followed by a little-endian payload.
//
//   offset  field
//   0       char[4]  tag "SFRW"
//   4       u32      version (1)
//   8       u32      value kind: 0 = float32 volume, 1 = uint8 labels
//   12      u32[3]   dims
//   24      f32[3]   spacing_mm
//   36      f32[3]   origin_mm
//   48      u64      payload byte count
//   56      u8[8]    reserved, zero
//
// Round trips are bit-exact, including geometry fields.
void write_raw(const Volume& v, const std::string& path);
void write_raw(const Segmentation& s, const std::string& path);
Volume read_raw_volume(const std::string& path);
Segmentation read_raw_segmentation(const std::string& path);

// Peeks at the header kind field; throws FormatVersionMismatch if not ours.
bool raw_is_segmentation(const std::string& path);

} // namespace segforge

#endif
