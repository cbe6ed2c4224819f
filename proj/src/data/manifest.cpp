// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/data/manifest.hpp"

#include <fstream>
#include <set>

#include "json.hpp"
#include "ldm3d/core/error.hpp"

namespace ldm3d {

namespace fs = std::filesystem;
using nlohmann::json;

DatasetManifest read_manifest(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open manifest " + path.string());
    const fs::path base = path.parent_path();
    DatasetManifest m;
    std::string line;
    size_t lineno = 0;
    bool have_header = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object())
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": not a JSON record");
        if (!have_header) {
            if (rec.value("format", "") != "ldm3d-manifest")
                throw DataError(path.string() + ": missing manifest header line");
            const auto res = rec.at("resolution");
            m.height = res.at(0).get<int64_t>();
            m.width = res.at(1).get<int64_t>();
            const std::string split = rec.value("split", "train");
            if (split != "train" && split != "val") throw DataError(path.string() + ": unknown split '" + split + "'");
            m.split = split == "val" ? Split::Val : Split::Train;
            m.depth_bits = rec.value("depth_bits", 16);
            have_header = true;
            continue;
        }
        try {
            ManifestEntry e;
            e.id = rec.at("id").get<std::string>();
            e.rgb_path = rec.at("rgb").get<std::string>();
            e.depth_path = rec.value("depth", std::string());
            e.caption = rec.value("caption", std::string());
            if (e.rgb_path.is_relative()) e.rgb_path = base / e.rgb_path;
            if (!e.depth_path.empty() && e.depth_path.is_relative()) e.depth_path = base / e.depth_path;
            m.entries.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
        }
    }
    if (!have_header) throw DataError("empty manifest " + path.string());
    check_unique_ids(m);
    return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
    check_unique_ids(m);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot write manifest " + path.string());
    const fs::path base = path.parent_path();
    auto rel = [&](const fs::path& p) -> std::string {
        if (p.empty()) return {};
        const fs::path r = p.lexically_relative(base.empty() ? fs::path(".") : base);
        return (!r.empty() && *r.begin() != "..") ? r.generic_string() : p.generic_string();
    };
    os << json{{"format", "ldm3d-manifest"},
               {"version", 1},
               {"resolution", {m.height, m.width}},
               {"split", m.split == Split::Val ? "val" : "train"},
               {"depth_bits", m.depth_bits}}
              .dump()
       << '\n';
    for (const auto& e : m.entries)
        os << json{{"id", e.id}, {"rgb", rel(e.rgb_path)}, {"depth", rel(e.depth_path)}, {"caption", e.caption}}.dump()
           << '\n';
}

void check_unique_ids(const DatasetManifest& m) {
    std::set<std::string> ids;
    for (const auto& e : m.entries)
        if (!ids.insert(e.id).second) throw DataError("duplicate manifest id '" + e.id + "'");
}

RgbdSample load_entry(const DatasetManifest& m, const ManifestEntry& e) {
    if (e.depth_path.empty()) throw DataError("manifest entry '" + e.id + "' has no depth map");
    RgbdSample s = load_rgbd(e.rgb_path, e.depth_path, m.depth_bits);
    s.id = e.id;
    s.caption = e.caption;
    if (m.height && (s.height() != m.height || s.width() != m.width))
        throw DataError("entry '" + e.id + "' is " + std::to_string(s.height()) + "x" + std::to_string(s.width()) +
                        ", manifest declares " + std::to_string(m.height) + "x" + std::to_string(m.width));
    return s;
}

std::vector<RgbdSample> load_all(const DatasetManifest& m) {
    std::vector<RgbdSample> out;
    out.reserve(m.entries.size());
    for (const auto& e : m.entries) out.push_back(load_entry(m, e));
    return out;
}

}  // namespace ldm3d
