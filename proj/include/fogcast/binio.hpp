/* Copyright 2026 The Fogcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef FOGCAST_BINIO_HPP
#define FOGCAST_BINIO_HPP

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "fogcast/common.hpp"

namespace fogcast {

// Little-endian binary stream helpers. All container formats use these, so
// files are byte-identical across hosts of either endianness.
namespace binio {

inline bool host_is_little_endian() {
    const uint16_t probe = 1;
    uint8_t b;
    std::memcpy(&b, &probe, 1);
    return b == 1;
}

template <typename T>
inline void write_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if (!host_is_little_endian()) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
            std::swap(buf[i], buf[sizeof(T) - 1 - i]);
        }
    }
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
inline T read_le(std::istream& is, const char* what) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) throw FormatError(std::string("truncated file while reading ") + what);
    if (!host_is_little_endian()) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
            std::swap(buf[i], buf[sizeof(T) - 1 - i]);
        }
    }
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

inline void write_string16(std::ostream& os, const std::string& s) {
    if (s.size() > 0xFFFF) throw FormatError("string too long for u16 length prefix");
    write_le<uint16_t>(os, static_cast<uint16_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string16(std::istream& is, const char* what) {
    const uint16_t len = read_le<uint16_t>(is, what);
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is) throw FormatError(std::string("truncated file while reading ") + what);
    return s;
}

inline void write_magic(std::ostream& os, const char magic[4]) {
    os.write(magic, 4);
}

inline void expect_magic(std::istream& is, const char magic[4], const char* format_name) {
    char buf[4] = {0, 0, 0, 0};
    is.read(buf, 4);
    if (!is || std::memcmp(buf, magic, 4) != 0) {
        throw FormatError(std::string("not a ") + format_name +
                          " file (bad magic)");
    }
}

inline void expect_version(std::istream& is, uint16_t expected, const char* format_name) {
    const uint16_t v = read_le<uint16_t>(is, "format version");
    if (v != expected) {
        throw FormatError(std::string(format_name) + ": unsupported format version " +
                          std::to_string(v) + " (expected " +
                          std::to_string(expected) + ")");
    }
}

}  // namespace binio
}  // namespace fogcast

#endif  // FOGCAST_BINIO_HPP
