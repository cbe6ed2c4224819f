// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ldm3d/data/rgbd.hpp"

namespace ldm3d {

struct ManifestEntry {
    std::string id;
    std::filesystem::path rgb_path;
    std::filesystem::path depth_path;
    std::string caption;
};

enum class Split { Train, Val };

// Line-delimited JSON. The first line is a header record
//   {"format":"ldm3d-manifest","version":1,"resolution":[H,W],"split":"train"}
// and every following line is one entry
//   {"id":...,"rgb":...,"depth":...,"caption":...}
// Relative paths resolve against the manifest's directory.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    int64_t height = 0;
    int64_t width = 0;
    Split split = Split::Train;
    int depth_bits = 16;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
// Paths under the manifest directory are written relative to it.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);

// Throws DataError on duplicate ids.
void check_unique_ids(const DatasetManifest& m);

RgbdSample load_entry(const DatasetManifest& m, const ManifestEntry& e);
// Loads every entry; each must match the manifest resolution.
std::vector<RgbdSample> load_all(const DatasetManifest& m);

}  // namespace ldm3d
