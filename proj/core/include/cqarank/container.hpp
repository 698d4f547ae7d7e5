#pragma once

// Binary artifact container shared by topic models, topic indexes, MLP
// weights and neighborhood caches.
//
// Layout (all integers little-endian, floats IEEE-754 binary64 little-endian):
//
//   magic        8 bytes   "CQARANK\0"
//   version      u32       kContainerVersion
//   kind         u32       ArtifactKind
//   sections     u32       number of sections that follow
//   per section:
//     name_len   u16, name bytes (ASCII)
//     dtype      u8        1 = f64, 2 = i32, 3 = i64, 4 = utf8 text
//     count      u64       number of elements (bytes for text)
//     payload    count * element size
//
// Section order is preserved, so writing the same content twice yields
// byte-identical files.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cqarank {

inline constexpr std::uint32_t kContainerVersion = 1;

enum class ArtifactKind : std::uint32_t {
  kTopicModel = 1,
  kTopicIndex = 2,
  kMlp = 3,
  kNeighborhoods = 4,
};

enum class SectionType : std::uint8_t { kF64 = 1, kI32 = 2, kI64 = 3, kText = 4 };

class ContainerWriter {
 public:
  explicit ContainerWriter(ArtifactKind kind) : kind_(kind) {}

  void add_f64(std::string_view name, std::span<const double> values);
  void add_i32(std::string_view name, std::span<const std::int32_t> values);
  void add_i64(std::string_view name, std::span<const std::int64_t> values);
  void add_text(std::string_view name, std::string_view text);

  std::string bytes() const;

  /// Writes to a sibling temp file and renames over `path`.
  void write_atomic(const std::filesystem::path& path) const;

 private:
  struct Section {
    std::string name;
    SectionType type;
    std::uint64_t count;
    std::string payload;
  };
  void add_section(std::string_view name, SectionType type, std::uint64_t count, std::string payload);

  ArtifactKind kind_;
  std::vector<Section> sections_;
};

class ContainerReader {
 public:
  static ContainerReader from_bytes(std::string bytes, ArtifactKind expected);
  static ContainerReader from_file(const std::filesystem::path& path, ArtifactKind expected);

  bool has(std::string_view name) const;
  std::vector<double> f64(std::string_view name) const;
  std::vector<std::int32_t> i32(std::string_view name) const;
  std::vector<std::int64_t> i64(std::string_view name) const;
  std::string text(std::string_view name) const;

 private:
  struct Section {
    SectionType type;
    std::uint64_t count;
    std::string payload;
  };
  const Section& get(std::string_view name, SectionType type) const;

  std::map<std::string, Section, std::less<>> sections_;
};

/// Write `contents` to `path` through a temp file + rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace cqarank
