#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logitext/document.hpp"

namespace logitext {

// Identity of one NLSolver query: target variable, constraint-set
// fingerprint, boolean truth context, and hashes of bound string deps.
struct CacheKey {
    std::string target;
    std::string fingerprint;
    std::vector<std::pair<std::string, bool>> bool_context;          // sorted by var
    std::vector<std::pair<std::string, std::string>> string_hashes;  // sorted by var

    static CacheKey make(const std::string& target,
                         const std::vector<NLTC>& constraints,
                         const std::vector<std::pair<std::string, bool>>& bool_context,
                         const std::vector<std::pair<std::string, std::string>>& string_values);

    std::string canonical() const;
    Json to_json() const;
    static CacheKey from_json(const Json& j);
    bool operator==(const CacheKey&) const = default;
};

// Stable content hash (FNV-1a), so cache files survive reloads and platforms.
std::string stable_hash(const std::string& text);

// Append-only persistent memoization of solved NLSolver queries.
class SolutionCache {
public:
    SolutionCache() = default;

    // Loads existing entries (if the file exists) and appends future stores.
    void attach_file(const std::string& path);

    void store(const CacheKey& key, const std::string& text);
    std::optional<std::string> lookup(const CacheKey& key) const;

    // Among entries with the same target and fingerprint whose string-dep
    // hashes do not conflict, returns the text agreeing with the query's
    // boolean context on the most variables (>= 1); ties favor earliest
    // insertion.
    std::optional<std::string> closest_partial_match(const CacheKey& key) const;

    std::size_t size() const { return entries_.size(); }

private:
    struct Entry {
        CacheKey key;
        std::string text;
        std::string created_at;
    };
    std::vector<Entry> entries_;  // insertion order
    std::map<std::string, std::size_t> index_;  // canonical key -> entry
    std::optional<std::string> file_path_;
};

}  // namespace logitext
