#pragma once

/// FrequencyResponse text serialization ('#' metadata header + rows of
/// `f_hz, re_H_m, im_H_m`) with a bit-exact decimal round trip, plus the
/// content hashing used for cache keys.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "borscat/fd_solver.hpp"
#include "borscat/geometry.hpp"

namespace borscat {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace detail {

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Canonical text of a profile (17-digit coordinates + coating), the
/// basis of the geometry hash.
inline std::string geometry_descriptor(const GeneratrixProfile& p) {
    std::ostringstream os;
    for (const auto& pt : p.points)
        os << detail::fmt17(pt.rho) << ',' << detail::fmt17(pt.z) << ','
           << (pt.corner ? 1 : 0) << ';';
    if (p.coating)
        os << "coating:" << detail::fmt17(p.coating->epsilon) << ','
           << detail::fmt17(p.coating->thickness_d);
    return os.str();
}

inline std::string geometry_hash(const GeneratrixProfile& p) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(geometry_descriptor(p))));
    return buf;
}

inline void write_response(std::ostream& os, const FrequencyResponse& r) {
    os << "# borscat frequency response\n"
       << "# geometry_hash: " << r.geometry_hash << '\n'
       << "# h_max: " << detail::fmt17(r.h_max) << '\n'
       << "# n_segments: " << r.n_segments << '\n'
       << "# observation: " << r.observation << '\n'
       << "# incidence: " << r.incidence << '\n'
       << "# convention: " << r.convention << '\n'
       << "# columns: f_hz, re_H_m, im_H_m\n"
       << "# n_points: " << r.grid.size() << '\n';
    for (std::size_t i = 0; i < r.grid.size(); ++i)
        os << detail::fmt17(r.grid[i]) << ", "
           << detail::fmt17(r.values[i].real()) << ", "
           << detail::fmt17(r.values[i].imag()) << '\n';
}

inline FrequencyResponse read_response(std::istream& is) {
    FrequencyResponse r;
    r.convention.clear();
    std::string line;
    auto meta = [&](const std::string& l, const char* key) -> const char* {
        const std::string pat = std::string("# ") + key + ": ";
        return l.rfind(pat, 0) == 0 ? l.c_str() + pat.size() : nullptr;
    };
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (!header)
                throw std::runtime_error("metadata after data rows");
            if (const char* v = meta(line, "geometry_hash")) r.geometry_hash = v;
            else if (const char* v = meta(line, "h_max")) r.h_max = std::stod(v);
            else if (const char* v = meta(line, "n_segments"))
                r.n_segments = std::stoul(v);
            else if (const char* v = meta(line, "observation")) r.observation = v;
            else if (const char* v = meta(line, "incidence")) r.incidence = v;
            else if (const char* v = meta(line, "convention")) r.convention = v;
            continue;
        }
        header = false;
        double f, re, im;
        if (std::sscanf(line.c_str(), "%lf , %lf , %lf", &f, &re, &im) != 3)
            throw std::runtime_error("malformed response row: " + line);
        r.grid.push_back(f);
        r.values.emplace_back(re, im);
    }
    if (r.grid.empty()) throw std::runtime_error("empty response record");
    return r;
}

inline std::string response_to_string(const FrequencyResponse& r) {
    std::ostringstream os;
    write_response(os, r);
    return os.str();
}

} // namespace borscat
