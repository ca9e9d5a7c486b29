#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace uwiq {

// One row of the manifest: a raw image with its high-quality enhanced
// version and, when one exists, a low-quality enhanced version.
struct ManifestEntry {
    std::string id;
    std::string raw_path;
    std::string hq_path;
    std::optional<std::string> lq_path;
};

struct ValidationIssue {
    std::string id;
    std::string what;
};

struct ValidationReport {
    std::size_t checked = 0;
    std::vector<ValidationIssue> failures;
    bool ok() const { return failures.empty(); }
};

struct SplitSpec {
    std::size_t train_count = 0;  // manifest-order prefix used for training
};

struct SplitResult {
    std::vector<ManifestEntry> train;           // prefix entries with an LQ image
    std::vector<ManifestEntry> test;            // the remaining suffix
    std::vector<std::string> excluded_train_ids;  // prefix entries lacking LQ
};

// Reads a CSV with header `id,raw,hq,lq` (lq may be empty). Paths are
// resolved relative to the manifest's directory. Throws on malformed rows
// and duplicate ids.
std::vector<ManifestEntry> load_manifest(const std::string& path);

// Mechanical checks only: files exist, decode, and dimensions agree within
// an entry. Returns a report instead of aborting on the first failure.
ValidationReport validate_manifest(const std::vector<ManifestEntry>& entries);

// Deterministic prefix/suffix split in manifest order. Prefix entries
// without an LQ image are excluded from training and reported.
SplitResult split(const std::vector<ManifestEntry>& entries, const SplitSpec& spec);

}  // namespace uwiq
