#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "logitext/document.hpp"

namespace logitext {

// Structured JSON-lines trace of solver activity: one record per proposal,
// block, nlsolve round, and verify batch.
class TraceLog {
public:
    TraceLog() = default;

    explicit TraceLog(const std::string& path) : file_(std::make_shared<std::ofstream>(path)) {
        if (!*file_) throw std::runtime_error("cannot open trace file '" + path + "'");
    }

    void record(Json event) {
        events_.push_back(event);
        if (file_) *file_ << canonical_json(event) << "\n" << std::flush;
    }

    const std::vector<Json>& events() const { return events_; }

    int count(const std::string& event_name) const {
        int n = 0;
        for (const auto& e : events_)
            if (e.value("event", std::string{}) == event_name) ++n;
        return n;
    }

private:
    std::vector<Json> events_;
    std::shared_ptr<std::ofstream> file_;
};

}  // namespace logitext
