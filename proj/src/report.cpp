#include "segforge/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "segforge/errors.hpp"

namespace segforge {

using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

DiceReport::Stats aggregate(const std::vector<double>& case_scores) {
    if (case_scores.empty()) throw InvalidSpec("cannot aggregate zero case scores");
    DiceReport::Stats s;
    s.n = static_cast<int>(case_scores.size());
    double sum = 0;
    for (double v : case_scores) sum += v;
    s.mean = sum / s.n;
    double var = 0;
    for (double v : case_scores) var += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(var / s.n); // population std
    return s;
}

DeltaTable compare_experiments(const DiceReport& a, const DiceReport& b,
                               const std::string& label_a, const std::string& label_b) {
    DeltaTable t;
    t.label_a = label_a;
    t.label_b = label_b;

    auto key = [](const DiceReport::Row& r) { return r.organ + "\x1f" + r.dataset; };
    std::map<std::string, const DiceReport::Row*> in_b;
    for (const auto& r : b.rows) in_b[key(r)] = &r;

    std::set<std::string> seen;
    for (const auto& ra : a.rows) {
        DeltaRow d;
        d.organ = ra.organ;
        d.dataset = ra.dataset;
        if (ra.stats) d.dsc_a = ra.stats->mean;
        auto it = in_b.find(key(ra));
        if (it != in_b.end() && it->second->stats) d.dsc_b = it->second->stats->mean;
        if (d.dsc_a && d.dsc_b) d.delta = *d.dsc_b - *d.dsc_a;
        seen.insert(key(ra));
        t.rows.push_back(std::move(d));
    }
    for (const auto& rb : b.rows) {
        if (seen.count(key(rb))) continue;
        DeltaRow d;
        d.organ = rb.organ;
        d.dataset = rb.dataset;
        if (rb.stats) d.dsc_b = rb.stats->mean;
        t.rows.push_back(std::move(d));
    }
    return t;
}

namespace {

constexpr const char* kAbsent = "---";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InvalidSpec("bad numeric field '" + s + "' in report CSV");
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    return f;
}

} // namespace

void emit_report_csv(const DiceReport& r, const std::string& path) {
    std::ofstream f = open_out(path);
    f << "organ,dataset,experiment,dsc_mean,dsc_std,n\n";
    for (const auto& row : r.rows) {
        f << row.organ << ',' << row.dataset << ',' << row.experiment << ',';
        if (row.stats)
            f << format_double(row.stats->mean) << ',' << format_double(row.stats->stdev) << ','
              << row.stats->n;
        else
            f << kAbsent << ',' << kAbsent << ',' << kAbsent;
        f << '\n';
    }
    if (!f) throw IoError("short write to " + path);

    if (!r.metadata.empty()) {
        std::ofstream m = open_out(path + ".meta.json");
        m << json(r.metadata).dump(2) << "\n";
        if (!m) throw IoError("short write to " + path + ".meta.json");
    }
}

DiceReport parse_report_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    DiceReport r;
    std::string line;
    if (!std::getline(f, line)) throw InvalidSpec(path + ": empty report CSV");
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 6) throw InvalidSpec(path + ": report rows need 6 columns");
        DiceReport::Row row;
        row.organ = cells[0];
        row.dataset = cells[1];
        row.experiment = cells[2];
        if (cells[3] != kAbsent) {
            DiceReport::Stats s;
            s.mean = parse_double(cells[3]);
            s.stdev = parse_double(cells[4]);
            s.n = static_cast<int>(parse_double(cells[5]));
            row.stats = s;
        }
        r.rows.push_back(std::move(row));
    }
    std::string meta_path = path + ".meta.json";
    if (std::filesystem::exists(meta_path)) {
        std::ifstream m(meta_path);
        json j = json::parse(m);
        for (auto& [k, v] : j.items()) r.metadata[k] = v.get<std::string>();
    }
    return r;
}

void emit_report_markdown(const DiceReport& r, const std::string& path) {
    // pivot: organ rows x (experiment, dataset) columns, first-seen order
    std::vector<std::string> organs;
    std::vector<std::pair<std::string, std::string>> cols;
    std::map<std::string, std::map<std::string, const DiceReport::Row*>> cell;
    for (const auto& row : r.rows) {
        if (std::find(organs.begin(), organs.end(), row.organ) == organs.end())
            organs.push_back(row.organ);
        auto col = std::make_pair(row.experiment, row.dataset);
        if (std::find(cols.begin(), cols.end(), col) == cols.end()) cols.push_back(col);
        cell[row.organ][row.experiment + "\x1f" + row.dataset] = &row;
    }

    std::ofstream f = open_out(path);
    f << "| Organ |";
    for (const auto& [exp, ds] : cols) f << ' ' << exp << " / " << ds << " |";
    f << "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) f << "---|";
    f << "\n";
    for (const auto& organ : organs) {
        f << "| " << organ << " |";
        for (const auto& [exp, ds] : cols) {
            auto it = cell[organ].find(exp + "\x1f" + ds);
            if (it == cell[organ].end() || !it->second->stats) {
                f << ' ' << kAbsent << " |";
            } else {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.3f ± %.3f", it->second->stats->mean,
                              it->second->stats->stdev);
                f << ' ' << buf << " |";
            }
        }
        f << "\n";
    }
    if (!r.metadata.empty()) {
        f << "\n";
        for (const auto& [k, v] : r.metadata) f << "- " << k << ": " << v << "\n";
    }
    if (!f) throw IoError("short write to " + path);
}

void emit_delta_csv(const DeltaTable& t, const std::string& path) {
    std::ofstream f = open_out(path);
    f << "organ,dataset,dsc_" << t.label_a << ",dsc_" << t.label_b << ",delta\n";
    for (const auto& row : t.rows) {
        f << row.organ << ',' << row.dataset << ',';
        f << (row.dsc_a ? format_double(*row.dsc_a) : kAbsent) << ',';
        f << (row.dsc_b ? format_double(*row.dsc_b) : kAbsent) << ',';
        f << (row.delta ? format_double(*row.delta) : kAbsent) << '\n';
    }
    if (!f) throw IoError("short write to " + path);
}

void emit_comparison_csv(const DiceReport& a, const DiceReport& b, const std::string& label_a,
                         const std::string& label_b, const std::string& path) {
    DeltaTable t = compare_experiments(a, b, label_a, label_b);
    std::ofstream f = open_out(path);
    f << "organ,dataset,dsc_" << label_a << ",dsc_" << label_b << "\n";
    for (const auto& row : t.rows) {
        f << row.organ << ',' << row.dataset << ',';
        f << (row.dsc_a ? format_double(*row.dsc_a) : kAbsent) << ',';
        f << (row.dsc_b ? format_double(*row.dsc_b) : kAbsent) << '\n';
    }
    if (!f) throw IoError("short write to " + path);
}

} // namespace segforge
