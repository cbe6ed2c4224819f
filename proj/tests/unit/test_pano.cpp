// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ldm3d/core/error.hpp"
#include "ldm3d/pano/pano.hpp"
#include "support.hpp"

using namespace ldm3d;
using namespace ldm3d::pano;

namespace {

Panorama periodic_pano(int64_t h) {
    Panorama p;
    const int64_t w = 2 * h;
    p.rgbd.rgb = Tensor(Shape{3, h, w});
    p.rgbd.depth = Tensor(Shape{1, h, w});
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x) {
            const real a = 2 * std::numbers::pi * x / w;
            for (int c = 0; c < 3; ++c) p.rgbd.rgb.at(c, y, x) = 0.5 * std::sin(a + c) * (y + 1) / h;
            p.rgbd.depth.at(0, y, x) = 0.4 * std::cos(a);
        }
    return p;
}

}  // namespace

TEST_CASE("tone mapping") {
    Tensor hdr(Shape{3, 1, 3});
    hdr[0] = 0.25;
    hdr[1] = 0.0;
    hdr[2] = 5.0;
    const Tensor t = tonemap_hdr(hdr, 1.0, 2.2);
    CHECK(t[0] == doctest::Approx(2 * std::pow(0.25, 1 / 2.2) - 1).epsilon(1e-12));
    CHECK(t[0] == doctest::Approx(0.06504).epsilon(1e-3));
    CHECK(t[1] == -1.0);
    CHECK(t[2] == 1.0);
    CHECK(tonemap_hdr(hdr, 2.0, 1.0)[0] == doctest::Approx(0.0));
    hdr[4] = -0.1;
    CHECK_THROWS_AS(tonemap_hdr(hdr, 1.0, 2.2), DataError);
    CHECK_THROWS_AS(tonemap_hdr(Tensor(Shape{3, 1, 1}), 0.0, 2.2), ConfigError);
}

TEST_CASE("roll shifts columns with wraparound") {
    const Panorama p = periodic_pano(8);
    CHECK(roll_shift(16, 0.25) == 4);
    CHECK(roll_shift(16, -0.25) == 12);
    CHECK(roll_shift(16, 1.0) == 0);
    const Panorama r = roll_pano(p, 0.25);
    for (int64_t x = 0; x < 16; ++x) CHECK(r.rgbd.depth.at(0, 3, (x + 4) % 16) == p.rgbd.depth.at(0, 3, x));
    CHECK(roll_pano(p, 1.0).rgbd.rgb == p.rgbd.rgb);
    CHECK(roll_pano(roll_pano(p, 0.25), 0.5).rgbd.rgb == roll_pano(p, 0.75).rgbd.rgb);

    Panorama bad = p;
    bad.rgbd = testing::synthetic_rgbd(8, 8, 1);
    CHECK_THROWS_AS(roll_pano(bad, 0.1), ContractError);
}

TEST_CASE("seam discontinuity") {
    const Panorama p = periodic_pano(8);
    const real s = seam_discontinuity(p);
    CHECK(s < 0.2);
    // A roll moves the seam into the interior and brings in a smooth pair.
    CHECK(seam_discontinuity(roll_pano(p, 0.5)) == doctest::Approx(s).epsilon(1e-9));

    Panorama cut = p;
    for (int64_t y = 0; y < 8; ++y) cut.rgbd.depth.at(0, y, 15) = -0.9;
    CHECK(seam_discontinuity(cut) > s);
}

TEST_CASE("pano caption prefixes") {
    CHECK(make_pano_caption("360 View of a hall", 1) == "360 View of a hall");
    CHECK(make_pano_caption("Panoramic view of a hall", 1) == "Panoramic view of a hall");
    CHECK(make_pano_caption("a hall", 9) == make_pano_caption("a hall", 9));
    CHECK_THROWS_AS(make_pano_caption("", 1), DataError);

    int n360 = 0, npan = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const std::string c = make_pano_caption("room " + std::to_string(i), static_cast<uint64_t>(i));
        if (c.rfind(kPrefix360, 0) == 0) ++n360;
        else if (c.rfind(kPrefixPanoramic, 0) == 0) ++npan;
        else CHECK(c == "room " + std::to_string(i));
    }
    CHECK(std::abs(n360 / double(n) - kPrefix360Prob) < 0.015);
    CHECK(std::abs(npan / double(n) - kPrefixPanoramicProb) < 0.006);
}

TEST_CASE("sampled panoramas are 2:1") {
    ae::AeConfig c;
    c.base_channels = 4;
    ae::KlAutoencoder m(c, 1);
    diffusion::DenoiserConfig dc;
    dc.base_width = 4;
    dc.context_dim = 8;
    dc.attn_resolutions = {1};
    diffusion::UNet unet(dc, 2);
    diffusion::HashTextEncoder enc(8);
    const auto sched = diffusion::make_schedule(20);
    diffusion::SamplerConfig sc;
    sc.steps = 3;
    int traced = 0;
    const auto p = sample_pano("360 view of a kitchen", 2, {m, unet, enc, sched}, sc, 4,
                               [&](int, int, const Tensor& z) {
                                   ++traced;
                                   CHECK(z.shape() == Shape{4, 2, 4});
                               });
    CHECK(traced == 3);
    CHECK(p.height() == 16);
    CHECK(p.width() == 32);
    CHECK(p.wraps_horizontally);
    CHECK_NOTHROW(validate(p));

    dc.in_channels = 8;
    diffusion::UNet eight(dc, 2);
    CHECK_THROWS_AS(sample_pano("x", 2, {m, eight, enc, sched}, sc, 4), ConfigError);
}
