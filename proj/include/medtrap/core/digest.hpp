/// @file digest.hpp
/// @brief SHA-256 content digests used for cache keys and run manifests.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace medtrap {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Digest of a file's bytes. Throws std::runtime_error if unreadable.
std::string file_digest(const std::filesystem::path& path);

/// Digest over every regular file under `dir` (sorted relative path + bytes).
std::string directory_digest(const std::filesystem::path& dir);

/// 64-bit FNV-1a, used to derive per-item RNG streams.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace medtrap
