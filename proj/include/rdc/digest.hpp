#pragma once

#include "rdc/model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace rdc {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path& path);

/// SHA-256 over the raw bytes of u then v. Equal iff the fields are bit-identical.
template <typename T>
std::string field_checksum(const BasicSimState<T>& state);

}  // namespace rdc
