#ifndef SEGFORGE_REPORT_HPP
#define SEGFORGE_REPORT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace segforge {

// Per-organ, per-dataset, per-experiment DSC table. Rows without stats mark
// declared-but-absent combinations (rendered as "---").
struct DiceReport {
    struct Stats {
        double mean = 0, stdev = 0;
        int n = 0;
        bool operator==(const Stats&) const = default;
    };
    struct Row {
        std::string organ, dataset, experiment;
        std::optional<Stats> stats;
        bool operator==(const Row&) const = default;
    };
    std::vector<Row> rows;
    std::map<std::string, std::string> metadata; // fold, seed, config hash, ...
    bool operator==(const DiceReport&) const = default;
};

// Aggregates per-case scores with an unweighted mean and population std.
DiceReport::Stats aggregate(const std::vector<double>& case_scores);

struct DeltaRow {
    std::string organ, dataset;
    std::optional<double> dsc_a, dsc_b; // absent side flags a one-sided row
    std::optional<double> delta;        // b - a where both present
    bool operator==(const DeltaRow&) const = default;
};

struct DeltaTable {
    std::string label_a, label_b; // e.g. experiment ids or architecture names
    std::vector<DeltaRow> rows;
};

// Per-row delta = b - a, joined on (organ, dataset); one-sided rows are kept
// and flagged by the missing optional.
DeltaTable compare_experiments(const DiceReport& a, const DiceReport& b,
                               const std::string& label_a, const std::string& label_b);

// CSV schema: organ,dataset,experiment,dsc_mean,dsc_std,n with "---" for
// absent cells. Numbers use shortest round-trip formatting, so
// parse(emit(r)) == r. Metadata travels in a ".meta.json" sidecar.
void emit_report_csv(const DiceReport& r, const std::string& path);
DiceReport parse_report_csv(const std::string& path);

// Markdown pivot: organ rows x (experiment, dataset) columns.
void emit_report_markdown(const DiceReport& r, const std::string& path);

// organ,dataset,dsc_<a>,dsc_<b>,delta
void emit_delta_csv(const DeltaTable& t, const std::string& path);

// Side-by-side per-organ comparison of two reports (same experiment style,
// different runs/architectures): organ,dataset,dsc_<label_a>,dsc_<label_b>.
void emit_comparison_csv(const DiceReport& a, const DiceReport& b, const std::string& label_a,
                         const std::string& label_b, const std::string& path);

std::string format_double(double v); // shortest round-trip representation

} // namespace segforge

#endif
