#pragma once

// CSV and text artifacts. Numbers are printed with %.17g so they round-trip
// exactly; files are staged in memory and committed with temp + rename.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kawahara/errors.hpp"

namespace kawactl {

namespace fs = std::filesystem;

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string num(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);  // no "-0"
    return buf;
}

inline double parse_num(const std::string& s)
{
    const auto t = trim(s);
    if (t == "nan") return std::nan("");
    if (t == "inf") return INFINITY;
    if (t == "-inf") return -INFINITY;
    // strtod rather than stod: subnormals are valid data, not range errors.
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end == t.c_str()) throw kawahara::ValidationError("csv: not a number: '" + t + "'");
    if (end != t.c_str() + t.size()) throw kawahara::ValidationError("csv: trailing characters in '" + t + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Numeric CSV with a mandatory header; `expect` (if non-empty) must match it.
inline CsvTable read_csv(const fs::path& path, const std::vector<std::string>& expect = {})
{
    std::ifstream in(path);
    if (!in) throw kawahara::ValidationError("csv: cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw kawahara::ValidationError("csv: empty file " + path.string());
    t.header = split(line);
    if (!expect.empty() && t.header != expect)
        throw kawahara::ValidationError("csv: unexpected header in " + path.string());
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size())
            throw kawahara::ValidationError("csv: ragged row in " + path.string());
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(parse_num(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Summary rows (k, metric, re, im); k is empty for run-level metrics.
struct SummaryRow {
    std::string k;
    std::string metric;
    double re = 0.0;
    double im = 0.0;
};

inline std::string summary_csv(const std::vector<SummaryRow>& rows)
{
    std::string s = "k,metric,re,im\n";
    for (const auto& r : rows) s += r.k + "," + r.metric + "," + num(r.re) + "," + num(r.im) + "\n";
    return s;
}

inline std::vector<SummaryRow> read_summary(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw kawahara::ValidationError("summary: cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (split(line) != std::vector<std::string>{"k", "metric", "re", "im"})
        throw kawahara::ValidationError("summary: unexpected header in " + path.string());
    std::vector<SummaryRow> out;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto c = split(line);
        if (c.size() != 4) throw kawahara::ValidationError("summary: ragged row in " + path.string());
        out.push_back({c[0], c[1], parse_num(c[2]), parse_num(c[3])});
    }
    return out;
}

/// Files staged in memory, written only by commit().
class ArtifactSet {
public:
    void put(const std::string& name, std::string content) { files_[name] = std::move(content); }
    bool has(const std::string& name) const { return files_.count(name) != 0; }
    const std::string& get(const std::string& name) const { return files_.at(name); }
    const std::map<std::string, std::string>& files() const { return files_; }

    void commit(const fs::path& dir) const
    {
        fs::create_directories(dir);
        for (const auto& [name, content] : files_) {
            const fs::path final_path = dir / name;
            const fs::path tmp = dir / (name + ".tmp");
            {
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                if (!out) throw std::runtime_error("cannot write " + tmp.string());
                out << content;
                if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
            }
            fs::rename(tmp, final_path);
        }
    }

private:
    std::map<std::string, std::string> files_;
};

inline std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw kawahara::ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace kawactl
