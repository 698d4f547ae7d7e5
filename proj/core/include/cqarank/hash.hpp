#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace cqarank {

/// Incremental 64-bit FNV-1a. Used for content hashes of artifacts and
/// vocabularies; not a cryptographic hash.
class Fnv1a {
 public:
  Fnv1a& update(std::span<const std::byte> bytes);
  Fnv1a& update(std::string_view text);
  Fnv1a& update_u64(std::uint64_t value);
  Fnv1a& update_f64(double value);

  std::uint64_t digest() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);
std::string hash_bytes(std::string_view bytes);
std::string hash_file(const std::filesystem::path& path);

}  // namespace cqarank
