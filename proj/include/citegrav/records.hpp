#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace citegrav {

struct AuthorLink {
    std::string key;
    std::vector<std::size_t> affil_idx;  // indices into CitedRecord::affiliations
};

// Publication with per-author affiliation links (the cited-side byline shape).
struct CitedRecord {
    std::string pub_id;
    int year = 0;
    std::vector<std::string> affiliations;  // raw address lines
    std::vector<AuthorLink> authors;
};

// Publication with a bare address list and the works it cites.
struct CitingRecord {
    std::string pub_id;
    int year = 0;
    std::vector<std::string> addresses;  // may be empty: loaded but unassignable
    std::vector<std::string> cites;      // cited pub_ids, never empty
};

struct IngestStats {
    std::size_t lines_total = 0;  // nonblank lines seen
    std::size_t records_loaded = 0;
    std::size_t lines_skipped = 0;
    std::size_t addresses_total = 0;   // filled by the assignment stage
    std::size_t addresses_parsed = 0;  // ditto
    std::vector<std::string> diagnostics;

    static constexpr std::size_t kMaxDiagnostics = 25;

    void skip(const std::string& source, std::size_t line_no, const std::string& why) {
        ++lines_skipped;
        if (diagnostics.size() < kMaxDiagnostics)
            diagnostics.push_back(source + ":" + std::to_string(line_no) + ": " + why);
    }
};

}  // namespace citegrav
