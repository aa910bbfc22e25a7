#ifndef SEGFORGE_NIFTI_HPP
#define SEGFORGE_NIFTI_HPP

#include <cstdint>
#include <span>
#include <string>

#include "segforge/volume.hpp"

namespace segforge {

// Uncompressed single-file NIfTI-1 reader. Supported datatypes: uint8, int16,
// float32; dim[0] must be 3. Orientation beyond pixdim spacing is ignored;
// volumes are treated in index space. scl_slope/scl_inter are applied to
// intensities when slope is nonzero, never to label maps.
Volume parse_nifti_volume(std::span<const std::uint8_t> bytes);
Segmentation parse_nifti_segmentation(std::span<const std::uint8_t> bytes);

Volume load_nifti_volume(const std::string& path);
Segmentation load_nifti_segmentation(const std::string& path);

} // namespace segforge

#endif
