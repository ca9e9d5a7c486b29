#include "uwiq/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "uwiq/image.hpp"

namespace uwiq {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    const fs::path base = fs::path(path).parent_path();

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty manifest: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "id,raw,hq,lq") {
        throw std::runtime_error("manifest header must be `id,raw,hq,lq`, got: " + line);
    }

    std::vector<ManifestEntry> entries;
    std::set<std::string> ids;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> f = split_row(line);
        if (f.size() != 4 || f[0].empty() || f[1].empty() || f[2].empty()) {
            throw std::runtime_error("malformed manifest row at line " +
                                     std::to_string(lineno));
        }
        if (!ids.insert(f[0]).second) {
            throw std::runtime_error("duplicate manifest id: " + f[0]);
        }
        ManifestEntry e;
        e.id = f[0];
        e.raw_path = (base / f[1]).string();
        e.hq_path = (base / f[2]).string();
        if (!f[3].empty()) e.lq_path = (base / f[3]).string();
        entries.push_back(std::move(e));
    }
    return entries;
}

ValidationReport validate_manifest(const std::vector<ManifestEntry>& entries) {
    ValidationReport report;
    for (const ManifestEntry& e : entries) {
        ++report.checked;
        int raw_w = 0, raw_h = 0;
        bool raw_ok = false;
        auto check = [&](const std::string& role, const std::string& p) {
            try {
                const ImageRGB img = load_image(p);
                if (role == "raw") {
                    raw_w = img.width;
                    raw_h = img.height;
                    raw_ok = true;
                } else if (raw_ok && (img.width != raw_w || img.height != raw_h)) {
                    report.failures.push_back(
                        {e.id, role + " dimensions differ from raw: " + p});
                }
            } catch (const std::exception& ex) {
                report.failures.push_back({e.id, role + ": " + ex.what()});
            }
        };
        check("raw", e.raw_path);
        check("hq", e.hq_path);
        if (e.lq_path) check("lq", *e.lq_path);
    }
    return report;
}

SplitResult split(const std::vector<ManifestEntry>& entries, const SplitSpec& spec) {
    if (spec.train_count > entries.size()) {
        throw std::invalid_argument("split: train_count exceeds manifest size");
    }
    SplitResult result;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i < spec.train_count) {
            if (entries[i].lq_path) {
                result.train.push_back(entries[i]);
            } else {
                result.excluded_train_ids.push_back(entries[i].id);
            }
        } else {
            result.test.push_back(entries[i]);
        }
    }
    return result;
}

}  // namespace uwiq
