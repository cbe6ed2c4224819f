// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "ldm3d/core/error.hpp"
#include "ldm3d/data/image_io.hpp"
#include "ldm3d/data/manifest.hpp"
#include "ldm3d/data/rgbd.hpp"
#include "support.hpp"

using namespace ldm3d;

namespace {

io::Raster8 gradient8(int w, int h, int c) {
    io::Raster8 r{w, h, c, std::vector<uint8_t>(static_cast<size_t>(w * h * c))};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k) r.at(y, x, k) = static_cast<uint8_t>((x * 7 + y * 13 + k * 50) % 256);
    return r;
}

}  // namespace

TEST_CASE("png 8-bit and 16-bit round-trips are lossless") {
    const auto dir = testing::scratch_dir("png");
    const auto rgb = gradient8(13, 9, 3);
    io::write_png8(dir / "a.png", rgb);
    const auto back = io::read_png8(dir / "a.png");
    CHECK(back.width == 13);
    CHECK(back.height == 9);
    CHECK(back.channels == 3);
    CHECK(back.pixels == rgb.pixels);

    io::Raster16 d{5, 4, 1, {}};
    for (int i = 0; i < 20; ++i) d.pixels.push_back(static_cast<uint16_t>(i * 3271));
    io::write_png16(dir / "d.png", d);
    int bits = 0;
    const auto dback = io::read_png_gray(dir / "d.png", bits);
    CHECK(bits == 16);
    CHECK(dback.pixels == d.pixels);

    CHECK_THROWS_AS(io::read_png8(dir / "missing.png"), DataError);
    std::ofstream(dir / "junk.png") << "not a png";
    CHECK_THROWS_AS(io::read_png8(dir / "junk.png"), DataError);
}

TEST_CASE("pfm round-trip keeps floats exactly") {
    const auto dir = testing::scratch_dir("pfm");
    io::RasterF f{6, 3, 3, {}};
    for (int i = 0; i < 54; ++i) f.pixels.push_back(0.001f * static_cast<float>(i * i) + 1e-7f);
    io::write_pfm(dir / "a.pfm", f);
    const auto back = io::read_pfm(dir / "a.pfm");
    CHECK(back.width == 6);
    CHECK(back.height == 3);
    CHECK(back.channels == 3);
    CHECK(back.pixels == f.pixels);
}

TEST_CASE("jpeg round-trip is close at high quality and lossy at low quality") {
    const auto img = gradient8(32, 24, 3);
    auto mean_err = [&](int q) {
        const auto out = io::jpeg_roundtrip(img, q);
        REQUIRE(out.pixels.size() == img.pixels.size());
        double e = 0;
        for (size_t i = 0; i < img.pixels.size(); ++i) e += std::abs(int(out.pixels[i]) - int(img.pixels[i]));
        return e / static_cast<double>(img.pixels.size());
    };
    const double hi = mean_err(95), lo = mean_err(10);
    CHECK(hi < lo);
    CHECK(lo > 0);
    CHECK(io::jpeg_roundtrip(img, 70).pixels == io::jpeg_roundtrip(img, 70).pixels);
}

TEST_CASE("pixel normalization") {
    io::Raster8 r{2, 1, 3, {0, 128, 255, 255, 0, 1}};
    const Tensor t = rgb_from_raster(r);
    CHECK(t.at(0, 0, 0) == -1.0);
    CHECK(t.at(2, 0, 0) == 1.0);
    CHECK(t.at(1, 0, 0) == doctest::Approx(128.0 / 127.5 - 1.0));
    CHECK(rgb_to_raster(t).pixels == r.pixels);

    io::Raster16 d{3, 1, 1, {0, 32768, 65535}};
    const Tensor dt = depth_from_raster(d, 16);
    CHECK(dt[0] == -1.0);
    CHECK(dt[2] == 1.0);
    CHECK(depth_to_raster(dt, 16).pixels == d.pixels);
    io::Raster16 d8{1, 1, 1, {300}};
    CHECK_THROWS_AS(depth_from_raster(d8, 8), DataError);
}

TEST_CASE("sample validation and channel merging") {
    RgbdSample s = testing::synthetic_rgbd(16, 24, 1);
    CHECK_NOTHROW(validate(s));
    const Tensor m = merge_channels(s);
    CHECK(m.shape() == Shape{4, 16, 24});
    auto [rgb, depth] = split_channels(m);
    CHECK(rgb == s.rgb);
    CHECK(depth == s.depth);

    RgbdSample bad = s;
    bad.depth = Tensor(Shape{1, 16, 16});
    CHECK_THROWS_AS(validate(bad), ContractError);
    bad = testing::synthetic_rgbd(12, 24, 1);
    CHECK_THROWS_AS(validate(bad), ContractError);
    bad = s;
    bad.rgb[0] = 1.5;
    CHECK_THROWS_AS(validate(bad), ContractError);
}

TEST_CASE("rgbd save/load round-trip") {
    const auto dir = testing::scratch_dir("rgbd");
    RgbdSample s = testing::synthetic_rgbd(8, 16, 2);
    save_rgbd(s, dir / "rgb.png", dir / "d.png");
    const auto back = load_rgbd(dir / "rgb.png", dir / "d.png");
    CHECK(max_abs_diff(back.rgb, s.rgb) <= 1.0 / 255 + 1e-12);
    CHECK(max_abs_diff(back.depth, s.depth) <= 1.0 / 65535 + 1e-12);

    // Low-resolution pairs need not tile into the autoencoder's 8x8 blocks.
    RgbdSample small = testing::synthetic_rgbd(4, 6, 3);
    save_rgbd(small, dir / "s.png", dir / "sd.png");
    CHECK(load_rgbd(dir / "s.png", dir / "sd.png").rgb.shape() == Shape{3, 4, 6});
}

TEST_CASE("manifest round-trip with relative paths") {
    const auto dir = testing::scratch_dir("manifest");
    DatasetManifest m;
    m.height = 8;
    m.width = 16;
    m.split = Split::Val;
    for (int i = 0; i < 3; ++i) {
        RgbdSample s = testing::synthetic_rgbd(8, 16, 10 + i);
        const auto rgb = dir / "img" / (s.id + ".png"), d = dir / "img" / (s.id + "_d.png");
        std::filesystem::create_directories(rgb.parent_path());
        save_rgbd(s, rgb, d);
        m.entries.push_back({s.id, rgb, d, s.caption});
    }
    write_manifest(dir / "m.jsonl", m);
    const std::string text = testing::read_bytes(dir / "m.jsonl");
    CHECK(text.find(dir.string()) == std::string::npos);
    CHECK(text.find("\"img/") != std::string::npos);

    const auto back = read_manifest(dir / "m.jsonl");
    CHECK(back.height == 8);
    CHECK(back.width == 16);
    CHECK(back.split == Split::Val);
    REQUIRE(back.entries.size() == 3);
    CHECK(back.entries[1].caption == m.entries[1].caption);
    const auto all = load_all(back);
    CHECK(all.size() == 3);
    CHECK(all[2].id == m.entries[2].id);

    // Moving the whole dataset keeps it loadable.
    const auto moved = testing::scratch_dir("manifest-moved");
    std::filesystem::remove_all(moved);
    std::filesystem::rename(dir, moved);
    CHECK(load_all(read_manifest(moved / "m.jsonl")).size() == 3);
}

TEST_CASE("manifest errors") {
    const auto dir = testing::scratch_dir("manifest-bad");
    CHECK_THROWS_AS(read_manifest(dir / "none.jsonl"), DataError);
    std::ofstream(dir / "nohdr.jsonl") << R"({"id":"a","rgb":"a.png","depth":"b.png","caption":""})" << "\n";
    CHECK_THROWS_AS(read_manifest(dir / "nohdr.jsonl"), DataError);
    std::ofstream(dir / "garbage.jsonl") << "{oops\n";
    CHECK_THROWS_AS(read_manifest(dir / "garbage.jsonl"), DataError);

    DatasetManifest m;
    m.entries = {{"x", "a.png", "b.png", ""}, {"x", "c.png", "d.png", ""}};
    CHECK_THROWS_AS(check_unique_ids(m), DataError);

    // Resolution mismatch against the header.
    RgbdSample s = testing::synthetic_rgbd(8, 8, 3);
    save_rgbd(s, dir / "r.png", dir / "d.png");
    DatasetManifest wrong;
    wrong.height = 16;
    wrong.width = 16;
    wrong.entries = {{"s", dir / "r.png", dir / "d.png", ""}};
    CHECK_THROWS_AS(load_all(wrong), DataError);
}
