#pragma once

// Trace CSV: optional "# key=value" metadata lines, then a header
//   k,t,d_1..d_nd,f_1..f_nf,rS_inf,r_D[,X_<label>..,Y_<label>..]
// and one row per sample, numbers as %.12g, LF line endings.

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fdi/errors.hpp"
#include "fdi/simulator.hpp"

namespace fdi {

[[nodiscard]] inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct TraceCsvOptions {
    bool include_states = false;
    std::vector<std::pair<std::string, std::string>> metadata;
};

[[nodiscard]] inline std::vector<std::string> trace_header(const SimulationTrace& t, bool include_states) {
    std::vector<std::string> h{"k", "t"};
    const std::size_t nd = t.records.empty() ? t.disturbance_labels.size() : static_cast<std::size_t>(t.records[0].d.size());
    const std::size_t nf = t.records.empty() ? t.attack_labels.size() : static_cast<std::size_t>(t.records[0].f.size());
    for (std::size_t i = 0; i < nd; ++i) h.push_back("d_" + std::to_string(i + 1));
    for (std::size_t i = 0; i < nf; ++i) h.push_back("f_" + std::to_string(i + 1));
    h.emplace_back("rS_inf");
    h.emplace_back("r_D");
    if (include_states) {
        for (const auto& l : t.state_labels) h.push_back("X_" + l);
        for (const auto& l : t.measurement_labels) h.push_back("Y_" + l);
    }
    return h;
}

inline void write_trace_csv(std::ostream& out, const SimulationTrace& t, const TraceCsvOptions& opt = {}) {
    out << "# seed=" << t.seed << '\n';
    out << "# scenario_hash=" << t.scenario_hash << '\n';
    out << "# warmup_samples=" << t.warmup_samples << '\n';
    for (const auto& [k, v] : opt.metadata) out << "# " << k << '=' << v << '\n';
    const auto header = trace_header(t, opt.include_states);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    std::string line;
    for (const auto& r : t.records) {
        line = std::to_string(r.k);
        line += ',';
        line += format_number(r.t);
        auto add = [&](const Vector& v) {
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                line += ',';
                line += format_number(v[i]);
            }
        };
        add(r.d);
        add(r.f);
        line += ',';
        line += format_number(r.rs_inf);
        line += ',';
        line += format_number(r.r_d);
        if (opt.include_states) {
            add(r.x);
            add(r.y);
        }
        line += '\n';
        out << line;
    }
}

struct CsvTable {
    std::map<std::string, std::string> metadata;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw std::out_of_range("csv: no column '" + name + "'");
    }

    [[nodiscard]] std::vector<double> values(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

[[nodiscard]] inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!s.empty() && s.back() == ',') cells.emplace_back();
        return cells;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) t.metadata[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw ValidationError("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(t.header.size()) + " cells, found " + std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(c, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != c.size() || c.empty()) {
                throw ValidationError("csv line " + std::to_string(line_no) + ": cannot parse '" + c + "'");
            }
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

// Writes a table in the same number format; metadata lines first.
inline void write_csv(std::ostream& out, const CsvTable& t) {
    for (const auto& [k, v] : t.metadata) out << "# " << k << '=' << v << '\n';
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
    out << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
        out << '\n';
    }
}

} // namespace fdi
