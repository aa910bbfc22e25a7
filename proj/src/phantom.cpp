#include "segforge/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "segforge/parallel.hpp"
#include "segforge/raw_io.hpp"

namespace segforge {

using nlohmann::json;
namespace fs = std::filesystem;

PhantomSpec default_phantom_spec(int organ_count, Index3 dims, Vec3 spacing, std::uint64_t seed) {
    if (organ_count < 1 || organ_count > Taxonomy::default22().size())
        throw InvalidSpec("organ count must lie in [1, taxonomy size]");

    // mean HUs inside the -1000..800 window, kept away from tissue (+40)
    static const float kMeans[10] = {-600.f, -400.f, -200.f, 150.f, 280.f, 420.f, 560.f, 700.f, -750.f, 760.f};

    PhantomSpec spec;
    spec.dims = dims;
    spec.spacing_mm = spacing;
    spec.seed = seed;

    float ext = std::min({dims.x * spacing.x, dims.y * spacing.y, dims.z * spacing.z});
    float r_lo = 0.06f * ext, r_hi = 0.14f * ext;
    for (int i = 0; i < organ_count; ++i) {
        OrganSpec o;
        o.organ_id = i + 1;
        o.radii_lo_mm = {r_lo, r_lo, r_lo};
        o.radii_hi_mm = {r_hi, r_hi, r_hi};
        o.mean_hu = i < 10 ? kMeans[i] : kMeans[i % 10] + 15.f * static_cast<float>(i / 10);
        o.noise_sigma = 15.f;
        spec.organs.push_back(o);
    }
    return spec;
}

namespace {

void check_spec(const PhantomSpec& spec) {
    if (spec.dims.x < 1 || spec.dims.y < 1 || spec.dims.z < 1) throw InvalidSpec("phantom dims must be >= 1");
    if (!(spec.spacing_mm.x > 0.f && spec.spacing_mm.y > 0.f && spec.spacing_mm.z > 0.f))
        throw InvalidSpec("phantom spacing must be positive");
    if (static_cast<int>(spec.organs.size()) > Taxonomy::default22().size())
        throw InvalidSpec("more phantom organs than taxonomy ids");
    for (const auto& o : spec.organs) {
        if (o.organ_id < 1 || o.organ_id > 255) throw InvalidSpec("phantom organ id out of range");
        if (!(o.radii_lo_mm.x > 0.f && o.radii_lo_mm.y > 0.f && o.radii_lo_mm.z > 0.f))
            throw InvalidSpec("phantom organ radii must be positive");
        if (o.radii_hi_mm.x < o.radii_lo_mm.x || o.radii_hi_mm.y < o.radii_lo_mm.y ||
            o.radii_hi_mm.z < o.radii_lo_mm.z)
            throw InvalidSpec("phantom organ radii range inverted");
        if (o.noise_sigma < 0.f) throw InvalidSpec("phantom noise sigma must be >= 0");
    }
}

struct Ellipsoid {
    Vec3 center, radii;
};

// voxel center (i,j,k) -> mm coordinates, origin at the (0,0,0) voxel center
inline Vec3 voxel_mm(Index3, Vec3 spacing, int i, int j, int k) {
    return {i * spacing.x, j * spacing.y, k * spacing.z};
}

inline bool inside(const Ellipsoid& e, Vec3 p) {
    double dx = (p.x - e.center.x) / e.radii.x;
    double dy = (p.y - e.center.y) / e.radii.y;
    double dz = (p.z - e.center.z) / e.radii.z;
    return dx * dx + dy * dy + dz * dz <= 1.0;
}

} // namespace

std::pair<Volume, Segmentation> generate_phantom(const PhantomSpec& spec, Rng& rng) {
    check_spec(spec);

    const Vec3 extent{spec.dims.x * spec.spacing_mm.x, spec.dims.y * spec.spacing_mm.y,
                      spec.dims.z * spec.spacing_mm.z};
    Ellipsoid body;
    body.center = {(spec.dims.x - 1) * spec.spacing_mm.x / 2.f, (spec.dims.y - 1) * spec.spacing_mm.y / 2.f,
                   (spec.dims.z - 1) * spec.spacing_mm.z / 2.f};
    body.radii = {extent.x * (0.5f - spec.body_margin_frac), extent.y * (0.5f - spec.body_margin_frac),
                  extent.z * (0.5f - spec.body_margin_frac)};

    // draw organ geometry first so the stream layout is independent of dims
    std::vector<Ellipsoid> organs;
    for (const auto& o : spec.organs) {
        Ellipsoid e;
        e.radii = {static_cast<float>(rng.uniform(o.radii_lo_mm.x, o.radii_hi_mm.x)),
                   static_cast<float>(rng.uniform(o.radii_lo_mm.y, o.radii_hi_mm.y)),
                   static_cast<float>(rng.uniform(o.radii_lo_mm.z, o.radii_hi_mm.z))};
        // keep the organ inside the body ellipsoid's bounding box
        auto place = [&](float c, float r, float b) {
            float lo = c - b + r, hi = c + b - r;
            if (lo > hi) return c;
            return static_cast<float>(rng.uniform(lo, hi));
        };
        e.center = {place(body.center.x, e.radii.x, body.radii.x),
                    place(body.center.y, e.radii.y, body.radii.y),
                    place(body.center.z, e.radii.z, body.radii.z)};
        organs.push_back(e);
    }

    Volume vol = make_volume(spec.dims, spec.spacing_mm, spec.air_hu);
    Segmentation seg = make_segmentation(spec.dims, spec.spacing_mm, 0);

    std::size_t idx = 0;
    for (int k = 0; k < spec.dims.z; ++k) {
        for (int j = 0; j < spec.dims.y; ++j) {
            for (int i = 0; i < spec.dims.x; ++i, ++idx) {
                Vec3 p = voxel_mm(spec.dims, spec.spacing_mm, i, j, k);
                float mean = spec.air_hu;
                float sigma = 0.f;
                std::uint8_t label = 0;
                if (inside(body, p)) {
                    mean = spec.tissue_hu;
                    sigma = spec.background_noise_sigma;
                }
                // declaration order, later organs overwrite earlier ones
                for (std::size_t g = 0; g < organs.size(); ++g) {
                    if (inside(organs[g], p)) {
                        mean = spec.organs[g].mean_hu;
                        sigma = spec.organs[g].noise_sigma;
                        label = static_cast<std::uint8_t>(spec.organs[g].organ_id);
                    }
                }
                vol.voxels[idx] = sigma > 0.f ? static_cast<float>(rng.normal(mean, sigma)) : mean;
                seg.labels[idx] = label;
            }
        }
    }
    return {std::move(vol), std::move(seg)};
}

PhantomData generate_datasets(const PhantomSpec& spec, int n_full, int n_partial,
                              const LabelSchema& partial_schema, const Taxonomy& tax,
                              std::uint64_t seed, int workers) {
    if (n_full < 0 || n_partial < 0) throw InvalidSpec("case counts must be >= 0");
    check_spec(spec);
    for (int id : partial_schema.covered_ids()) {
        bool known = std::any_of(spec.organs.begin(), spec.organs.end(),
                                 [id](const OrganSpec& o) { return o.organ_id == id; });
        if (!known)
            throw InvalidSpec("partial schema covers organ " + tax.name(id) +
                              " which the phantom spec does not generate");
    }

    PhantomData data;
    data.full.resize(static_cast<std::size_t>(n_full));
    data.partial.resize(static_cast<std::size_t>(n_partial));

    auto gen_case = [&](std::size_t i) {
        bool is_partial = i >= static_cast<std::size_t>(n_full);
        std::size_t ord = is_partial ? i - static_cast<std::size_t>(n_full) : i;
        Rng rng(mix_seed(seed, i));
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s_%03zu", is_partial ? "part" : "full", ord);
        PhantomCase pc;
        pc.id = buf;
        auto [vol, seg] = generate_phantom(spec, rng);
        pc.image = std::move(vol);
        if (is_partial) {
            pc.hidden = seg;
            pc.label = project_to_schema(seg, partial_schema, tax);
            data.partial[ord] = std::move(pc);
        } else {
            pc.label = std::move(seg);
            data.full[ord] = std::move(pc);
        }
    };
    parallel_for(static_cast<std::size_t>(n_full + n_partial), workers, gen_case);
    return data;
}

std::pair<std::string, std::string> write_phantom_datasets(const PhantomData& data,
                                                           const std::string& dir,
                                                           const std::string& partial_schema_name) {
    fs::create_directories(fs::path(dir) / "full");
    fs::create_directories(fs::path(dir) / "partial");

    Manifest full;
    full.dataset = "full";
    full.schema = "xcat22";
    for (const auto& c : data.full) {
        write_raw(c.image, (fs::path(dir) / "full" / (c.id + ".svol")).string());
        write_raw(c.label, (fs::path(dir) / "full" / (c.id + ".sseg")).string());
        full.cases.push_back({c.id, "full/" + c.id + ".svol", "full/" + c.id + ".sseg", std::nullopt});
    }
    std::string full_manifest = (fs::path(dir) / "full_manifest.json").string();
    save_manifest(full, full_manifest);

    Manifest partial;
    partial.dataset = "partial";
    partial.schema = partial_schema_name;
    for (const auto& c : data.partial) {
        write_raw(c.image, (fs::path(dir) / "partial" / (c.id + ".svol")).string());
        write_raw(c.label, (fs::path(dir) / "partial" / (c.id + ".sseg")).string());
        CaseEntry e{c.id, "partial/" + c.id + ".svol", "partial/" + c.id + ".sseg", std::nullopt};
        if (c.hidden) {
            write_raw(*c.hidden, (fs::path(dir) / "partial" / (c.id + ".hidden.sseg")).string());
            e.hidden = "partial/" + c.id + ".hidden.sseg";
        }
        partial.cases.push_back(std::move(e));
    }
    std::string partial_manifest = (fs::path(dir) / "partial_manifest.json").string();
    save_manifest(partial, partial_manifest);
    return {full_manifest, partial_manifest};
}

std::string to_json(const PhantomSpec& spec) {
    json j;
    j["dims"] = {spec.dims.x, spec.dims.y, spec.dims.z};
    j["spacing_mm"] = {spec.spacing_mm.x, spec.spacing_mm.y, spec.spacing_mm.z};
    j["air_hu"] = spec.air_hu;
    j["tissue_hu"] = spec.tissue_hu;
    j["background_noise_sigma"] = spec.background_noise_sigma;
    j["body_margin_frac"] = spec.body_margin_frac;
    j["seed"] = spec.seed;
    j["organs"] = json::array();
    for (const auto& o : spec.organs) {
        j["organs"].push_back({{"organ_id", o.organ_id},
                               {"radii_lo_mm", {o.radii_lo_mm.x, o.radii_lo_mm.y, o.radii_lo_mm.z}},
                               {"radii_hi_mm", {o.radii_hi_mm.x, o.radii_hi_mm.y, o.radii_hi_mm.z}},
                               {"mean_hu", o.mean_hu},
                               {"noise_sigma", o.noise_sigma}});
    }
    return j.dump(2) + "\n";
}

PhantomSpec phantom_spec_from_json(const std::string& text) {
    json j = json::parse(text);
    PhantomSpec spec;
    if (j.contains("dims")) spec.dims = {j["dims"][0], j["dims"][1], j["dims"][2]};
    if (j.contains("spacing_mm"))
        spec.spacing_mm = {j["spacing_mm"][0], j["spacing_mm"][1], j["spacing_mm"][2]};
    spec.air_hu = j.value("air_hu", -1000.f);
    spec.tissue_hu = j.value("tissue_hu", 40.f);
    spec.body_margin_frac = j.value("body_margin_frac", 0.05f);
    spec.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("organs")) {
        for (const auto& e : j["organs"]) {
            OrganSpec o;
            o.organ_id = e.at("organ_id").get<int>();
            o.radii_lo_mm = {e["radii_lo_mm"][0], e["radii_lo_mm"][1], e["radii_lo_mm"][2]};
            o.radii_hi_mm = {e["radii_hi_mm"][0], e["radii_hi_mm"][1], e["radii_hi_mm"][2]};
            o.mean_hu = e.at("mean_hu").get<float>();
            o.noise_sigma = e.value("noise_sigma", 15.f);
            spec.organs.push_back(o);
        }
    }
    check_spec(spec);
    return spec;
}

} // namespace segforge
