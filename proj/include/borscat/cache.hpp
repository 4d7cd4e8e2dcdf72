#pragma once

/// Disk cache of FrequencyResponse records keyed by a content hash of
/// everything that determines the response (geometry, mesh, incidence,
/// observation, grid, convention) — deliberately NOT the waveform, so
/// one response serves every pulse.  Writes are atomic
/// (write-temp-then-rename); corrupted records are recomputed.

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "borscat/fd_solver.hpp"
#include "borscat/response_io.hpp"

namespace borscat {

inline std::filesystem::path default_cache_root() {
    if (const char* env = std::getenv("BORSCAT_CACHE_DIR"))
        return std::filesystem::path(env);
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"))
        return std::filesystem::path(xdg) / "borscat";
    if (const char* home = std::getenv("HOME"))
        return std::filesystem::path(home) / ".cache" / "borscat";
    return std::filesystem::temp_directory_path() / "borscat-cache";
}

struct CacheKey {
    std::string geometry;     // geometry_descriptor() text
    double h_max = 0.0;
    std::string incidence;    // canonical incidence text
    std::string observation;  // observation descriptor
    std::vector<double> grid; // frequencies, Hz
    std::string convention;

    std::string digest() const {
        std::ostringstream os;
        os << geometry << '|' << detail::fmt17(h_max) << '|' << incidence
           << '|' << observation << '|' << convention << '|';
        for (double f : grid) os << detail::fmt17(f) << ',';
        char buf[24];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(fnv1a(os.str())));
        return buf;
    }
};

class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path root = default_cache_root(),
                           bool enabled = true)
        : root_(std::move(root)), enabled_(enabled) {
        if (enabled_) std::filesystem::create_directories(root_);
    }

    const std::filesystem::path& root() const { return root_; }
    bool enabled() const { return enabled_; }

    std::optional<FrequencyResponse> get(const CacheKey& key) const {
        if (!enabled_) return std::nullopt;
        const auto path = entry_path(key);
        std::ifstream is(path);
        if (!is) return std::nullopt;
        try {
            FrequencyResponse r = read_response(is);
            if (r.grid != key.grid) return std::nullopt;  // hash collision
            return r;
        } catch (const std::exception&) {
            return std::nullopt;  // corrupted record: recompute
        }
    }

    void put(const CacheKey& key, const FrequencyResponse& r) const {
        if (!enabled_) return;
        const auto path = entry_path(key);
        const auto tmp = path.string() + ".tmp." +
                         std::to_string(std::hash<std::string>{}(path.string()) ^
                                        std::size_t(::getpid()));
        {
            std::ofstream os(tmp);
            if (!os) throw std::runtime_error("cannot write cache entry " + tmp);
            write_response(os, r);
        }
        std::filesystem::rename(tmp, path);
    }

    FrequencyResponse get_or_compute(
        const CacheKey& key,
        const std::function<FrequencyResponse()>& compute) const {
        if (auto hit = get(key)) return *hit;
        FrequencyResponse r = compute();
        put(key, r);
        return r;
    }

    struct Stats {
        std::size_t entries = 0;
        std::uintmax_t bytes = 0;
    };

    Stats stats() const {
        Stats s;
        if (!std::filesystem::exists(root_)) return s;
        for (const auto& e : std::filesystem::directory_iterator(root_)) {
            if (e.path().extension() == ".resp") {
                ++s.entries;
                s.bytes += e.file_size();
            }
        }
        return s;
    }

    std::size_t clear() const {
        std::size_t n = 0;
        if (!std::filesystem::exists(root_)) return n;
        for (const auto& e : std::filesystem::directory_iterator(root_)) {
            if (e.path().extension() == ".resp") {
                std::filesystem::remove(e.path());
                ++n;
            }
        }
        return n;
    }

private:
    std::filesystem::path entry_path(const CacheKey& key) const {
        return root_ / (key.digest() + ".resp");
    }

    std::filesystem::path root_;
    bool enabled_ = true;
};

} // namespace borscat
