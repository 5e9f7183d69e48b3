// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Flat binary tensor exchange format:
//   bytes 0..11  three little-endian uint32: channels, height, width
//   bytes 12..   channels*height*width little-endian IEEE-754 float64

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "idstyle/error.hpp"
#include "idstyle/latent.hpp"

namespace idstyle {

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline std::vector<unsigned char> encode_tensor(const Latent& z) {
    std::vector<unsigned char> out;
    out.reserve(12 + 8 * z.size());
    detail::put_u32(out, static_cast<std::uint32_t>(z.dims().channels));
    detail::put_u32(out, static_cast<std::uint32_t>(z.dims().height));
    detail::put_u32(out, static_cast<std::uint32_t>(z.dims().width));
    for (double v : z.data()) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu));
    }
    return out;
}

inline Latent decode_tensor(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 12) {
        throw Error(ErrorKind::Format, "tensor", "header truncated at offset " + std::to_string(bytes.size()));
    }
    const LatentDims dims{static_cast<int>(detail::get_u32(bytes.data())),
                          static_cast<int>(detail::get_u32(bytes.data() + 4)),
                          static_cast<int>(detail::get_u32(bytes.data() + 8))};
    if (!dims.valid()) throw Error(ErrorKind::Format, "tensor", "invalid dims in header at offset 0");
    const std::size_t expected = 12 + 8 * dims.size();
    if (bytes.size() != expected) {
        throw Error(ErrorKind::Format, "tensor",
                    "payload size mismatch: expected " + std::to_string(expected) + " bytes, got " +
                        std::to_string(bytes.size()));
    }
    std::vector<double> data(dims.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::uint64_t bits = 0;
        const unsigned char* p = bytes.data() + 12 + 8 * i;
        for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(p[k]) << (8 * k);
        data[i] = std::bit_cast<double>(bits);
    }
    return Latent(dims, std::move(data));
}

inline void write_tensor_file(const std::filesystem::path& path, const Latent& z) {
    const auto bytes = encode_tensor(z);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "tensor", "cannot open '" + path.string() + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorKind::Io, "tensor", "write failed for '" + path.string() + "'");
}

inline Latent read_tensor_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "tensor", "cannot open '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_tensor(bytes);
}

}  // namespace idstyle
