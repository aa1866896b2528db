#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace poi {

/// FNV-1a 64-bit. Used for fixture request keys and run-manifest digests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes);

/// Digest of a file's raw bytes, as 16 lowercase hex chars. Throws IoError.
std::string digest_file(const std::string& path);

}  // namespace poi
