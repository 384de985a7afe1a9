#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace semcomm {

// Whole-file binary I/O; failures raise IoError naming the path.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace semcomm
