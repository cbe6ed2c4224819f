// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/data/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

// jpeglib.h needs FILE/size_t declared first.
#include <jpeglib.h>
#include <csetjmp>

#include "ldm3d/core/error.hpp"

namespace ldm3d::io {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw DataError(std::string("cannot open ") + (mode[0] == 'r' ? "" : "for writing ") + path.string());
    return f;
}

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    auto* where = static_cast<std::string*>(png_get_error_ptr(png));
    *where = msg;
    png_longjmp(png, 1);
}

void png_warn_fn(png_structp, png_const_charp) {}

// Shared reader: returns rows as bytes after the requested transforms.
struct PngImage {
    png_uint_32 width = 0, height = 0;
    int bit_depth = 0, channels = 0;
    std::vector<uint8_t> bytes;
};

PngImage read_png(const std::filesystem::path& path, bool keep16) {
    auto f = open_file(path, "rb");
    uint8_t sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw DataError("not a PNG file: " + path.string());

    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warn_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) throw DataError("libpng initialization failed");
    PngImage out;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("PNG decode error in " + path.string() + ": " + err);
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (!keep16) png_set_strip_16(png);
    if (keep16 && png_get_bit_depth(png, info) == 16) png_set_swap(png);  // host order (little-endian)
    png_read_update_info(png, info);
    out.width = png_get_image_width(png, info);
    out.height = png_get_image_height(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    out.channels = png_get_channels(png, info);
    const size_t rowbytes = png_get_rowbytes(png, info);
    out.bytes.resize(rowbytes * out.height);
    rows.resize(out.height);
    for (png_uint_32 y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_png(const std::filesystem::path& path, int width, int height, int channels, int bit_depth,
               const uint8_t* data) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto f = open_file(path, "wb");
    std::string err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warn_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) throw DataError("libpng initialization failed");
    std::vector<png_bytep> rows(static_cast<size_t>(height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("PNG encode error for " + path.string() + ": " + err);
    }
    png_init_io(png, f.get());
    const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_RGBA;
    png_set_IHDR(png, info, width, height, bit_depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);
    const size_t rowbytes = static_cast<size_t>(width) * channels * (bit_depth / 8);
    for (int y = 0; y < height; ++y) rows[y] = const_cast<uint8_t*>(data) + y * rowbytes;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

Raster8 read_png8(const std::filesystem::path& path) {
    PngImage p = read_png(path, false);
    Raster8 r;
    r.width = static_cast<int>(p.width);
    r.height = static_cast<int>(p.height);
    r.channels = p.channels;
    r.pixels = std::move(p.bytes);
    return r;
}

Raster16 read_png_gray(const std::filesystem::path& path, int& bit_depth) {
    PngImage p = read_png(path, true);
    if (p.channels != 1)
        throw DataError("expected a single-channel depth raster, " + path.string() + " has " +
                        std::to_string(p.channels) + " channels");
    bit_depth = p.bit_depth;
    Raster16 r;
    r.width = static_cast<int>(p.width);
    r.height = static_cast<int>(p.height);
    r.channels = 1;
    r.pixels.resize(static_cast<size_t>(r.width) * r.height);
    if (p.bit_depth == 16) {
        std::memcpy(r.pixels.data(), p.bytes.data(), r.pixels.size() * sizeof(uint16_t));
    } else {
        for (size_t i = 0; i < r.pixels.size(); ++i) r.pixels[i] = p.bytes[i];
    }
    return r;
}

void write_png8(const std::filesystem::path& path, const Raster8& img) {
    write_png(path, img.width, img.height, img.channels, 8, img.pixels.data());
}

void write_png16(const std::filesystem::path& path, const Raster16& img) {
    write_png(path, img.width, img.height, img.channels, 16, reinterpret_cast<const uint8_t*>(img.pixels.data()));
}

RasterF read_pfm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0;
    double scale = 0;
    is >> magic >> w >> h >> scale;
    is.get();
    if ((magic != "PF" && magic != "Pf") || w <= 0 || h <= 0 || scale == 0.0 || !is)
        throw DataError("malformed PFM header in " + path.string());
    RasterF r;
    r.width = w;
    r.height = h;
    r.channels = magic == "PF" ? 3 : 1;
    r.pixels.resize(static_cast<size_t>(w) * h * r.channels);
    std::vector<float> row(static_cast<size_t>(w) * r.channels);
    const bool big_endian = scale > 0;
    // PFM rows run bottom to top.
    for (int y = h - 1; y >= 0; --y) {
        if (!is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float))))
            throw DataError("truncated PFM data in " + path.string());
        if (big_endian)
            for (auto& v : row) {
                uint32_t u;
                std::memcpy(&u, &v, 4);
                u = __builtin_bswap32(u);
                std::memcpy(&v, &u, 4);
            }
        std::copy(row.begin(), row.end(), r.pixels.begin() + static_cast<ptrdiff_t>(y) * w * r.channels);
    }
    return r;
}

void write_pfm(const std::filesystem::path& path, const RasterF& img) {
    if (img.channels != 1 && img.channels != 3) throw ContractError("PFM holds 1 or 3 channels");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write " + path.string());
    os << (img.channels == 3 ? "PF" : "Pf") << '\n' << img.width << ' ' << img.height << "\n-1.0\n";
    const size_t rowlen = static_cast<size_t>(img.width) * img.channels;
    for (int y = img.height - 1; y >= 0; --y)
        os.write(reinterpret_cast<const char*>(img.pixels.data() + y * rowlen),
                 static_cast<std::streamsize>(rowlen * sizeof(float)));
}

namespace {

struct JpegErr {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* e = reinterpret_cast<JpegErr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, e->message);
    std::longjmp(e->jump, 1);
}

}  // namespace

Raster8 jpeg_roundtrip(const Raster8& img, int quality) {
    if (img.channels != 3) throw ContractError("jpeg_roundtrip expects an RGB raster");
    if (quality < 1 || quality > 100) throw ContractError("JPEG quality must be in [1, 100]");

    unsigned char* buf = nullptr;
    unsigned long len = 0;
    {
        jpeg_compress_struct c{};
        JpegErr err{};
        c.err = jpeg_std_error(&err.mgr);
        err.mgr.error_exit = jpeg_error_exit;
        if (setjmp(err.jump)) {
            jpeg_destroy_compress(&c);
            std::free(buf);
            throw DataError(std::string("JPEG encode failed: ") + err.message);
        }
        jpeg_create_compress(&c);
        jpeg_mem_dest(&c, &buf, &len);
        c.image_width = static_cast<JDIMENSION>(img.width);
        c.image_height = static_cast<JDIMENSION>(img.height);
        c.input_components = 3;
        c.in_color_space = JCS_RGB;
        jpeg_set_defaults(&c);
        jpeg_set_quality(&c, quality, TRUE);
        jpeg_start_compress(&c, TRUE);
        while (c.next_scanline < c.image_height) {
            JSAMPROW row = const_cast<JSAMPROW>(img.pixels.data() + static_cast<size_t>(c.next_scanline) * img.width * 3);
            jpeg_write_scanlines(&c, &row, 1);
        }
        jpeg_finish_compress(&c);
        jpeg_destroy_compress(&c);
    }

    Raster8 out;
    jpeg_decompress_struct d{};
    JpegErr err{};
    d.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&d);
        std::free(buf);
        throw DataError(std::string("JPEG decode failed: ") + err.message);
    }
    jpeg_create_decompress(&d);
    jpeg_mem_src(&d, buf, len);
    jpeg_read_header(&d, TRUE);
    d.out_color_space = JCS_RGB;
    jpeg_start_decompress(&d);
    out.width = static_cast<int>(d.output_width);
    out.height = static_cast<int>(d.output_height);
    out.channels = 3;
    out.pixels.resize(static_cast<size_t>(out.width) * out.height * 3);
    while (d.output_scanline < d.output_height) {
        JSAMPROW row = out.pixels.data() + static_cast<size_t>(d.output_scanline) * out.width * 3;
        jpeg_read_scanlines(&d, &row, 1);
    }
    jpeg_finish_decompress(&d);
    jpeg_destroy_decompress(&d);
    std::free(buf);
    return out;
}

}  // namespace ldm3d::io
