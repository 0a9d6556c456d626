#include "logitext/cache.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>

namespace logitext {

std::string stable_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CacheKey CacheKey::make(const std::string& target,
                        const std::vector<NLTC>& constraints,
                        const std::vector<std::pair<std::string, bool>>& bool_context,
                        const std::vector<std::pair<std::string, std::string>>& string_values) {
    CacheKey key;
    key.target = target;

    std::vector<std::pair<std::string, std::string>> clause_ids;
    for (const auto& n : constraints) clause_ids.emplace_back(n.id, n.clause);
    std::sort(clause_ids.begin(), clause_ids.end());
    std::string material;
    for (const auto& [id, clause] : clause_ids) material += id + "\x1f" + clause + "\x1e";
    key.fingerprint = stable_hash(material);

    key.bool_context = bool_context;
    std::sort(key.bool_context.begin(), key.bool_context.end());
    for (const auto& [var, value] : string_values)
        key.string_hashes.emplace_back(var, stable_hash(value));
    std::sort(key.string_hashes.begin(), key.string_hashes.end());
    return key;
}

Json CacheKey::to_json() const {
    Json j = Json::object();
    j["target"] = target;
    j["fingerprint"] = fingerprint;
    Json ctx = Json::array();
    for (const auto& [var, value] : bool_context) ctx.push_back(Json::array({var, value}));
    j["bool_context"] = ctx;
    Json sh = Json::array();
    for (const auto& [var, hash] : string_hashes) sh.push_back(Json::array({var, hash}));
    j["string_hashes"] = sh;
    return j;
}

CacheKey CacheKey::from_json(const Json& j) {
    CacheKey key;
    key.target = j.at("target").get<std::string>();
    key.fingerprint = j.at("fingerprint").get<std::string>();
    for (const auto& pair : j.at("bool_context"))
        key.bool_context.emplace_back(pair[0].get<std::string>(), pair[1].get<bool>());
    for (const auto& pair : j.at("string_hashes"))
        key.string_hashes.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
    return key;
}

std::string CacheKey::canonical() const { return canonical_json(to_json()); }

void SolutionCache::attach_file(const std::string& path) {
    file_path_ = path;
    std::ifstream in(path);
    if (!in) return;  // fresh cache file
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line);
        Entry e;
        e.key = CacheKey::from_json(j.at("key"));
        e.text = j.at("text").get<std::string>();
        e.created_at = j.value("created_at", std::string{});
        std::string canon = e.key.canonical();
        auto it = index_.find(canon);
        if (it != index_.end()) {
            entries_[it->second].text = e.text;  // last writer wins
            continue;
        }
        index_.emplace(canon, entries_.size());
        entries_.push_back(std::move(e));
    }
}

void SolutionCache::store(const CacheKey& key, const std::string& text) {
    std::string canon = key.canonical();
    std::string created_at = std::to_string(std::time(nullptr));
    auto it = index_.find(canon);
    if (it != index_.end()) {
        entries_[it->second].text = text;
    } else {
        index_.emplace(canon, entries_.size());
        entries_.push_back({key, text, created_at});
    }
    if (file_path_) {
        std::ofstream out(*file_path_, std::ios::app);
        Json j = Json::object();
        j["key"] = key.to_json();
        j["text"] = text;
        j["created_at"] = created_at;
        out << canonical_json(j) << "\n";
    }
}

std::optional<std::string> SolutionCache::lookup(const CacheKey& key) const {
    auto it = index_.find(key.canonical());
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].text;
}

std::optional<std::string> SolutionCache::closest_partial_match(const CacheKey& key) const {
    const Entry* best = nullptr;
    int best_agreement = 0;
    for (const auto& entry : entries_) {
        if (entry.key.target != key.target || entry.key.fingerprint != key.fingerprint) continue;
        bool string_conflict = false;
        for (const auto& [var, hash] : entry.key.string_hashes)
            for (const auto& [qvar, qhash] : key.string_hashes)
                if (var == qvar && hash != qhash) string_conflict = true;
        if (string_conflict) continue;
        int agreement = 0;
        for (const auto& [var, value] : entry.key.bool_context)
            for (const auto& [qvar, qvalue] : key.bool_context)
                if (var == qvar && value == qvalue) ++agreement;
        if (agreement > best_agreement) {  // strict: ties keep the earlier entry
            best_agreement = agreement;
            best = &entry;
        }
    }
    if (!best || best_agreement < 1) return std::nullopt;
    return best->text;
}

}  // namespace logitext
