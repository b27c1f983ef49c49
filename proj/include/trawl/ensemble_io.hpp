#pragma once

// CSV and binary serialization of path ensembles.
//
// CSV: optional "# key=value" metadata lines, a header row "time,t_0,...,t_m",
// then one row per path "index,y_0,...,y_m". Values use %.17g so they round-trip.
//
// Binary (little-endian): "TRWL1", u64 n_paths, u64 n_times, u64 master_seed,
// u32 hash length, hash bytes, n_times f64 times, n_paths*n_times f64 values.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "trawl/error.hpp"
#include "trawl/pathsim.hpp"

namespace trawl {

static_assert(std::endian::native == std::endian::little, "binary ensemble codec assumes a little-endian host");

inline constexpr char kBinaryMagic[5] = {'T', 'R', 'W', 'L', '1'};

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
void put(std::string& out, const T& v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw FormatError("binary ensemble is truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

inline double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
    }
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace detail

inline std::string ensemble_to_csv(const PathEnsemble& e) {
    std::string out;
    out += "# master_seed=" + std::to_string(e.meta.master_seed) + "\n";
    if (!e.meta.config_hash.empty()) out += "# config_hash=" + e.meta.config_hash + "\n";
    if (!e.meta.process_kind.empty()) out += "# process_kind=" + e.meta.process_kind + "\n";
    if (e.meta.truncation) {
        out += "# n_terms=" + std::to_string(e.meta.truncation->n_terms) + "\n";
        out += "# error_bound=" + detail::format_double(e.meta.truncation->error_bound) + "\n";
    }
    out += "time";
    for (double t : e.times()) out += "," + detail::format_double(t);
    out += "\n";
    for (std::size_t i = 0; i < e.n_paths(); ++i) {
        out += std::to_string(i);
        for (double v : e.row(i)) out += "," + detail::format_double(v);
        out += "\n";
    }
    return out;
}

inline PathEnsemble ensemble_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    PathEnsemble::Meta meta;
    std::optional<std::size_t> n_terms;
    std::optional<double> bound;
    std::vector<double> times;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            const std::string value = line.substr(eq + 1);
            if (key == "master_seed") meta.master_seed = std::stoull(value);
            else if (key == "config_hash") meta.config_hash = value;
            else if (key == "process_kind") meta.process_kind = value;
            else if (key == "n_terms") n_terms = std::stoull(value);
            else if (key == "error_bound") bound = detail::parse_double(value, line_no);
            continue;
        }
        const auto cells = detail::split_csv(line);
        if (!have_header) {
            if (cells.empty() || cells[0] != "time") throw FormatError("CSV ensemble must start with a 'time' header row");
            for (std::size_t j = 1; j < cells.size(); ++j) times.push_back(detail::parse_double(cells[j], line_no));
            if (times.empty()) throw FormatError("CSV ensemble has no time columns");
            have_header = true;
            continue;
        }
        if (cells.size() != times.size() + 1)
            throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(times.size() + 1) +
                              " fields, found " + std::to_string(cells.size()));
        std::vector<double> row;
        for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(detail::parse_double(cells[j], line_no));
        rows.push_back(std::move(row));
    }
    if (!have_header) throw FormatError("CSV ensemble has no header row");
    PathEnsemble e(times, rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), e.row(i).begin());
    if (n_terms) meta.truncation = Truncation{*n_terms, bound.value_or(0.0)};
    e.meta = meta;
    return e;
}

inline std::string ensemble_to_binary(const PathEnsemble& e) {
    std::string out(kBinaryMagic, sizeof kBinaryMagic);
    detail::put<std::uint64_t>(out, e.n_paths());
    detail::put<std::uint64_t>(out, e.n_times());
    detail::put<std::uint64_t>(out, e.meta.master_seed);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(e.meta.config_hash.size()));
    out += e.meta.config_hash;
    for (double t : e.times()) detail::put(out, t);
    for (double v : e.data()) detail::put(out, v);
    return out;
}

inline PathEnsemble ensemble_from_binary(const std::string& bytes) {
    if (bytes.size() < sizeof kBinaryMagic || std::memcmp(bytes.data(), kBinaryMagic, sizeof kBinaryMagic) != 0)
        throw FormatError("bad magic: not a TRWL1 ensemble file");
    std::size_t pos = sizeof kBinaryMagic;
    const auto n_paths = detail::get<std::uint64_t>(bytes, pos);
    const auto n_times = detail::get<std::uint64_t>(bytes, pos);
    const auto seed = detail::get<std::uint64_t>(bytes, pos);
    const auto hash_len = detail::get<std::uint32_t>(bytes, pos);
    if (pos + hash_len > bytes.size()) throw FormatError("binary ensemble is truncated");
    std::string hash = bytes.substr(pos, hash_len);
    pos += hash_len;
    if (n_times == 0 || (bytes.size() - pos) / 8 != n_times * (n_paths + 1) || (bytes.size() - pos) % 8 != 0)
        throw FormatError("binary ensemble size does not match its header");
    std::vector<double> times(n_times);
    for (auto& t : times) t = detail::get<double>(bytes, pos);
    PathEnsemble e(times, n_paths);
    for (std::size_t i = 0; i < n_paths; ++i)
        for (auto& v : e.row(i)) v = detail::get<double>(bytes, pos);
    e.meta.master_seed = seed;
    e.meta.config_hash = std::move(hash);
    return e;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Reads either format, detected from the leading bytes.
inline PathEnsemble read_ensemble(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= 4 && bytes.compare(0, 4, "TRWL") == 0) return ensemble_from_binary(bytes);
    if (path.extension() == ".bin") return ensemble_from_binary(bytes);
    return ensemble_from_csv(bytes);
}

}  // namespace trawl
