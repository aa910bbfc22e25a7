#ifndef SEGFORGE_PHANTOM_HPP
#define SEGFORGE_PHANTOM_HPP

#include <optional>
#include <string>
#include <vector>

#include "segforge/labels.hpp"
#include "segforge/manifest.hpp"
#include "segforge/rng.hpp"
#include "segforge/volume.hpp"

namespace segforge {

// Synthetic body phantom: an air background, a soft-tissue body ellipsoid,
// and K ellipsoidal organs rasterized in declaration order (later organs
// overwrite earlier ones where they overlap). Organ intensities are mean HU
// plus Gaussian noise; the segmentation is exact by construction.
struct OrganSpec {
    int organ_id = 0;
    Vec3 radii_lo_mm, radii_hi_mm; // per-axis semi-axis range
    float mean_hu = 0.f;
    float noise_sigma = 15.f;
};

struct PhantomSpec {
    Index3 dims{64, 64, 64};
    Vec3 spacing_mm{2.5f, 2.5f, 5.0f};
    float air_hu = -1000.f;
    float tissue_hu = 40.f;
    float background_noise_sigma = 15.f;
    float body_margin_frac = 0.05f; // air rim around the body ellipsoid
    std::vector<OrganSpec> organs;
    std::uint64_t seed = 1;
};

// K organs with taxonomy ids 1..K. Mean HUs are spread across the CT window,
// staying clear of the soft-tissue background so organs remain separable by
// intensity at the default noise level.
PhantomSpec default_phantom_spec(int organ_count, Index3 dims = {64, 64, 64},
                                 Vec3 spacing = {2.5f, 2.5f, 5.0f}, std::uint64_t seed = 1);

std::pair<Volume, Segmentation> generate_phantom(const PhantomSpec& spec, Rng& rng);

struct PhantomCase {
    std::string id;
    Volume image;
    Segmentation label;                // stored truth (projected for partial cases)
    std::optional<Segmentation> hidden; // withheld full truth for partial cases
};

struct PhantomData {
    std::vector<PhantomCase> full;
    std::vector<PhantomCase> partial;
};

// n_full complete cases plus n_partial cases whose stored truth is
// project_to_schema(full truth, partial_schema); the full truth is retained
// in `hidden` as the evaluation oracle. Case i derives its own child seed, so
// generation parallelizes without changing results.
PhantomData generate_datasets(const PhantomSpec& spec, int n_full, int n_partial,
                              const LabelSchema& partial_schema, const Taxonomy& tax,
                              std::uint64_t seed, int workers = 1);

// Writes <dir>/{full,partial}/... plus one manifest per collection; returns
// the manifest paths.
std::pair<std::string, std::string> write_phantom_datasets(const PhantomData& data,
                                                           const std::string& dir,
                                                           const std::string& partial_schema_name);

std::string to_json(const PhantomSpec& spec);
PhantomSpec phantom_spec_from_json(const std::string& text);

} // namespace segforge

#endif
