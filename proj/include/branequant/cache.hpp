#pragma once

#include "branequant/weights.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

namespace branequant {

/// Persistent weight store backed by a line-delimited JSON file. Puts append
/// a whole line under a lock; gets return the record with the highest sample
/// count for a (key, scheme) pair. Corrupt lines are skipped with a warning.
class WeightCache {
  public:
    WeightCache() = default;
    explicit WeightCache(std::filesystem::path path) : path_(std::move(path)) { load(); }

    std::optional<WeightResult> get(const std::string& key, Scheme scheme) const {
        std::lock_guard lk(mu_);
        auto it = best_.find({key, scheme});
        if (it == best_.end()) return std::nullopt;
        return it->second;
    }

    void put(const std::string& key, const WeightResult& r) {
        std::lock_guard lk(mu_);
        auto it = best_.find({key, r.scheme});
        bool better = it == best_.end() || r.samples > it->second.samples;
        if (better) best_[{key, r.scheme}] = r;
        if (path_.empty()) return;
        nlohmann::json j = {{"key", key},          {"scheme", scheme_name(r.scheme)},
                            {"value", r.value},    {"stderr", r.stderr_},
                            {"samples", r.samples}, {"seed", r.seed}};
        std::ofstream os(path_, std::ios::app);
        os << j.dump() << "\n";
        os.flush();
    }

    std::size_t size() const {
        std::lock_guard lk(mu_);
        return best_.size();
    }

    /// FNV-1a of the canonical record set; identifies the snapshot a report
    /// was produced against.
    std::uint64_t snapshot_id() const {
        std::lock_guard lk(mu_);
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&](const std::string& s) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 0x100000001b3ULL;
            }
        };
        for (const auto& [ks, r] : best_) {
            mix(ks.first);
            mix(scheme_name(ks.second));
            mix(std::to_string(r.value));
            mix(std::to_string(r.samples));
        }
        return h;
    }

    const std::filesystem::path& path() const { return path_; }

  private:
    void load() {
        if (path_.empty() || !std::filesystem::exists(path_)) return;
        std::ifstream is(path_);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                WeightResult r;
                auto sch = parse_scheme(j.at("scheme").get<std::string>());
                if (!sch) throw std::invalid_argument("unknown scheme");
                r.scheme = *sch;
                r.value = j.at("value").get<double>();
                r.stderr_ = j.at("stderr").get<double>();
                r.samples = j.at("samples").get<std::int64_t>();
                r.seed = j.at("seed").get<std::uint64_t>();
                std::string key = j.at("key").get<std::string>();
                auto it = best_.find({key, r.scheme});
                if (it == best_.end() || r.samples > it->second.samples)
                    best_[{key, r.scheme}] = r;
            } catch (const std::exception& e) {
                std::cerr << "warning: skipping corrupt cache line " << lineno << " in "
                          << path_.string() << ": " << e.what() << "\n";
            }
        }
    }

    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::map<std::pair<std::string, Scheme>, WeightResult> best_;
};

} // namespace branequant
