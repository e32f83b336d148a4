#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "srce/binary_io.hpp"
#include "srce/error.hpp"

namespace srce::harness {

using json = nlohmann::json;

struct MseRow {
    std::string estimator;
    double snr_db = 0.0;
    std::size_t pilots = 0;
    std::string modulation;
    double mse = 0.0;
    std::size_t samples = 0;

    bool operator==(const MseRow&) const = default;
};

struct MseReport {
    std::vector<MseRow> rows;
    json metadata = json::object();  // seeds, config, completeness
};

inline const char* kReportColumns = "estimator,snr_db,pilots,modulation,mse,samples";

/// Sorted by (estimator, snr_db); pilots and modulation break remaining ties.
inline void sort_rows(std::vector<MseRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const MseRow& a, const MseRow& b) {
        return std::tie(a.estimator, a.snr_db, a.pilots, a.modulation) <
               std::tie(b.estimator, b.snr_db, b.pilots, b.modulation);
    });
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    auto p = csv;
    p.replace_extension(".json");
    return p;
}

/// CSV with fixed columns (plus mse_db when requested) and a JSON sidecar.
inline void emit_report(const MseReport& report, const std::filesystem::path& path, bool db_column = false) {
    std::vector<MseRow> rows = report.rows;
    sort_rows(rows);
    std::ostringstream out;
    out << kReportColumns << (db_column ? ",mse_db" : "") << "\n";
    for (const auto& r : rows) {
        if (!(r.mse >= 0.0)) throw NumericError("report: negative or NaN mse for " + r.estimator);
        out << r.estimator << ',' << format_double(r.snr_db) << ',' << r.pilots << ',' << r.modulation << ','
            << format_double(r.mse) << ',' << r.samples;
        if (db_column) out << ',' << format_double(10.0 * std::log10(r.mse));
        out << "\n";
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    io::write_text(path.string(), out.str());
    json meta = report.metadata;
    meta["columns"] = json::array({"estimator", "snr_db", "pilots", "modulation", "mse", "samples"});
    if (db_column) meta["columns"].push_back("mse_db");
    meta["rows"] = rows.size();
    io::write_text(sidecar_path(path).string(), meta.dump(2) + "\n");
}

inline MseReport read_report(const std::filesystem::path& path) {
    std::istringstream in(io::read_text(path.string()));
    std::string line;
    if (!std::getline(in, line) || line.rfind(kReportColumns, 0) != 0)
        throw IoError(path.string(), "not an MSE report (unexpected header)");
    MseReport rep;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() < 6) throw IoError(path.string(), "line " + std::to_string(lineno) + ": expected 6 columns");
        try {
            rep.rows.push_back({f[0], std::stod(f[1]), std::stoul(f[2]), f[3], std::stod(f[4]), std::stoul(f[5])});
        } catch (const std::exception&) {
            throw IoError(path.string(), "line " + std::to_string(lineno) + ": malformed number");
        }
    }
    const auto side = sidecar_path(path);
    if (std::filesystem::exists(side)) {
        try {
            rep.metadata = json::parse(io::read_text(side.string()));
        } catch (const json::exception& e) {
            throw IoError(side.string(), std::string("malformed report sidecar: ") + e.what());
        }
    }
    return rep;
}

/// True when the report holds exactly `expected` cells and no
/// (estimator, snr, pilots, modulation) cell twice.
inline bool report_complete(const MseReport& r, std::size_t expected) {
    std::set<std::tuple<std::string, double, std::size_t, std::string>> seen;
    for (const auto& row : r.rows)
        if (!seen.insert({row.estimator, row.snr_db, row.pilots, row.modulation}).second) return false;
    return seen.size() == expected;
}

/// Lookup helper; throws if the cell is absent or ambiguous.
inline const MseRow& find_row(const MseReport& r, const std::string& estimator, double snr_db,
                              std::size_t pilots = 0) {
    const MseRow* hit = nullptr;
    for (const auto& row : r.rows) {
        if (row.estimator != estimator || row.snr_db != snr_db || (pilots != 0 && row.pilots != pilots)) continue;
        if (hit) throw InputError("report: duplicate cell for " + estimator);
        hit = &row;
    }
    if (!hit) throw InputError("report: no cell for " + estimator + " at " + format_double(snr_db) + " dB");
    return *hit;
}

/// Estimator x SNR table of 10 log10(mse) (or linear mse) for terminals.
inline std::string pivot_table(const MseReport& r, bool db) {
    std::set<double> snrs;
    std::set<std::tuple<std::string, std::size_t, std::string>> keys;
    for (const auto& row : r.rows) {
        snrs.insert(row.snr_db);
        keys.insert({row.estimator, row.pilots, row.modulation});
    }
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-24s %6s %6s", "estimator", "pilots", "mod");
    out << buf;
    for (double s : snrs) {
        std::snprintf(buf, sizeof buf, " %10s", (format_double(s) + "dB").c_str());
        out << buf;
    }
    out << "\n";
    for (const auto& [est, pilots, mod] : keys) {
        std::snprintf(buf, sizeof buf, "%-24s %6zu %6s", est.c_str(), pilots, mod.c_str());
        out << buf;
        for (double s : snrs) {
            auto it = std::find_if(r.rows.begin(), r.rows.end(), [&](const MseRow& row) {
                return row.estimator == est && row.pilots == pilots && row.modulation == mod && row.snr_db == s;
            });
            if (it == r.rows.end())
                std::snprintf(buf, sizeof buf, " %10s", "-");
            else
                std::snprintf(buf, sizeof buf, db ? " %10.3f" : " %10.3e", db ? 10.0 * std::log10(it->mse) : it->mse);
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace srce::harness
