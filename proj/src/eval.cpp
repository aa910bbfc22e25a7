#include "segforge/eval.hpp"

#include <algorithm>

namespace segforge {

Mask organ_mask(const Segmentation& s, int organ_id) {
    Mask m;
    m.dims = s.dims;
    m.on.resize(s.labels.size());
    for (std::size_t i = 0; i < s.labels.size(); ++i) m.on[i] = s.labels[i] == organ_id ? 1 : 0;
    return m;
}

Mask group_mask(const Segmentation& s, const std::vector<int>& organ_ids) {
    Mask m;
    m.dims = s.dims;
    m.on.assign(s.labels.size(), 0);
    for (int id : organ_ids)
        for (std::size_t i = 0; i < s.labels.size(); ++i)
            if (s.labels[i] == id) m.on[i] = 1;
    return m;
}

double dsc(const Mask& pred, const Mask& truth) {
    if (!(pred.dims == truth.dims)) throw ShapeMismatch("dsc masks differ in dims");
    std::size_t inter = 0, np = 0, nt = 0;
    for (std::size_t i = 0; i < pred.on.size(); ++i) {
        bool p = pred.on[i] != 0, t = truth.on[i] != 0;
        inter += static_cast<std::size_t>(p && t);
        np += static_cast<std::size_t>(p);
        nt += static_cast<std::size_t>(t);
    }
    if (np + nt == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(np + nt);
}

std::map<int, OrganDice> per_organ_dsc(const Segmentation& pred, const Segmentation& truth,
                                       const std::vector<int>& organs) {
    if (!same_geometry(pred, truth)) throw GeometryMismatch("per_organ_dsc inputs differ in geometry");

    // one pass over each segmentation instead of a mask pair per organ
    int max_id = 0;
    for (int id : organs) max_id = std::max(max_id, id);
    std::vector<std::size_t> inter(static_cast<std::size_t>(max_id) + 1, 0),
        np(static_cast<std::size_t>(max_id) + 1, 0), nt(static_cast<std::size_t>(max_id) + 1, 0);
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        std::uint8_t p = pred.labels[i], t = truth.labels[i];
        if (p <= max_id) {
            ++np[p];
            if (p == t) ++inter[p];
        }
        if (t <= max_id) ++nt[t];
    }

    std::map<int, OrganDice> out;
    for (int id : organs) {
        OrganDice d;
        std::size_t a = inter[static_cast<std::size_t>(id)], pp = np[static_cast<std::size_t>(id)],
                    tt = nt[static_cast<std::size_t>(id)];
        if (pp + tt == 0) {
            d.dsc = 1.0;
            d.both_empty = true;
        } else {
            d.dsc = 2.0 * static_cast<double>(a) / static_cast<double>(pp + tt);
        }
        out[id] = d;
    }
    return out;
}

double mean_foreground_dsc(const Segmentation& pred, const Segmentation& truth,
                           const std::vector<int>& organs) {
    auto scores = per_organ_dsc(pred, truth, organs);
    std::vector<std::size_t> truth_count(256, 0);
    for (std::uint8_t t : truth.labels) ++truth_count[t];
    double sum = 0;
    int n = 0;
    for (const auto& [id, d] : scores) {
        if (truth_count[static_cast<std::size_t>(id)] == 0) continue;
        sum += d.dsc;
        ++n;
    }
    return n > 0 ? sum / n : 1.0;
}

} // namespace segforge
