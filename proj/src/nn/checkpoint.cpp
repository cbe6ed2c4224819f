// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "ldm3d/core/error.hpp"

namespace ldm3d::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'L', 'D', 'M', '3', 'D', 'C', 'K', 'P'};

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::filesystem::path& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("truncated checkpoint: " + path.string());
    return v;
}

std::string get_bytes(std::istream& is, uint64_t n, const std::filesystem::path& path) {
    if (n > (uint64_t{1} << 32)) throw DataError("corrupt checkpoint field length: " + path.string());
    std::string s(n, '\0');
    if (n && !is.read(s.data(), static_cast<std::streamsize>(n))) throw DataError("truncated checkpoint: " + path.string());
    return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write checkpoint: " + path.string());
    os.write(kMagic, sizeof(kMagic));
    put<uint32_t>(os, kCheckpointVersion);
    const nlohmann::json header{{"kind", ckpt.kind}, {"step", ckpt.step}, {"config", ckpt.config}};
    const std::string hs = header.dump();
    put<uint64_t>(os, hs.size());
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    put<uint64_t>(os, ckpt.tensors.size());
    for (const auto& [name, t] : ckpt.tensors) {
        put<uint32_t>(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<uint32_t>(os, static_cast<uint32_t>(t.rank()));
        for (auto d : t.shape()) put<int64_t>(os, d);
        os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(real)));
    }
    if (!os) throw DataError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path.string());
    char magic[8];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a checkpoint file: " + path.string());
    const auto version = get<uint32_t>(is, path);
    if (version != kCheckpointVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(version) + " in " + path.string());

    Checkpoint ckpt;
    const auto header = nlohmann::json::parse(get_bytes(is, get<uint64_t>(is, path), path), nullptr, false);
    if (header.is_discarded() || !header.is_object()) throw DataError("corrupt checkpoint header: " + path.string());
    ckpt.kind = header.value("kind", "");
    ckpt.step = header.value("step", int64_t{0});
    ckpt.config = header.value("config", nlohmann::json::object());

    const auto count = get<uint64_t>(is, path);
    for (uint64_t i = 0; i < count; ++i) {
        std::string name = get_bytes(is, get<uint32_t>(is, path), path);
        const auto rank = get<uint32_t>(is, path);
        if (rank > 8) throw DataError("corrupt tensor rank in " + path.string());
        Shape shape(rank);
        for (auto& d : shape) {
            d = get<int64_t>(is, path);
            if (d < 0) throw DataError("corrupt tensor shape in " + path.string());
        }
        Tensor t(shape);
        if (!is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(real))))
            throw DataError("truncated tensor '" + name + "' in " + path.string());
        ckpt.tensors.emplace(std::move(name), std::move(t));
    }
    return ckpt;
}

void store_params(Checkpoint& ckpt, const NamedParams& params, const std::string& prefix) {
    for (const auto& [name, p] : params) ckpt.tensors[prefix + name] = p.value();
}

void restore_params(const Checkpoint& ckpt, NamedParams& params, const std::string& prefix) {
    for (auto& [name, p] : params) {
        auto it = ckpt.tensors.find(prefix + name);
        if (it == ckpt.tensors.end()) throw DataError("checkpoint is missing parameter " + prefix + name);
        if (it->second.shape() != p.shape())
            throw DataError("parameter " + prefix + name + " has shape " + shape_str(it->second.shape()) +
                            ", model expects " + shape_str(p.shape()));
        p.mutable_value() = it->second;
    }
}

}  // namespace ldm3d::nn
