#include "cqarank/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "cqarank/error.hpp"

namespace cqarank {
namespace {

constexpr char kMagic[8] = {'C', 'Q', 'A', 'R', 'A', 'N', 'K', '\0'};

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(std::string_view in, std::size_t& pos, int bytes) {
  if (pos + static_cast<std::size_t>(bytes) > in.size()) {
    throw DataError("artifact container truncated at byte " + std::to_string(pos));
  }
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += static_cast<std::size_t>(bytes);
  return v;
}

std::size_t element_size(SectionType type) {
  switch (type) {
    case SectionType::kF64: return 8;
    case SectionType::kI32: return 4;
    case SectionType::kI64: return 8;
    case SectionType::kText: return 1;
  }
  throw DataError("unknown container section type");
}

const char* kind_name(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::kTopicModel: return "topic model";
    case ArtifactKind::kTopicIndex: return "topic index";
    case ArtifactKind::kMlp: return "regressor";
    case ArtifactKind::kNeighborhoods: return "neighborhood cache";
  }
  return "unknown";
}

}  // namespace

void ContainerWriter::add_section(std::string_view name, SectionType type, std::uint64_t count,
                                  std::string payload) {
  sections_.push_back(Section{std::string(name), type, count, std::move(payload)});
}

void ContainerWriter::add_f64(std::string_view name, std::span<const double> values) {
  std::string payload;
  payload.reserve(values.size() * 8);
  for (double v : values) put_le(payload, std::bit_cast<std::uint64_t>(v), 8);
  add_section(name, SectionType::kF64, values.size(), std::move(payload));
}

void ContainerWriter::add_i32(std::string_view name, std::span<const std::int32_t> values) {
  std::string payload;
  payload.reserve(values.size() * 4);
  for (std::int32_t v : values) put_le(payload, static_cast<std::uint32_t>(v), 4);
  add_section(name, SectionType::kI32, values.size(), std::move(payload));
}

void ContainerWriter::add_i64(std::string_view name, std::span<const std::int64_t> values) {
  std::string payload;
  payload.reserve(values.size() * 8);
  for (std::int64_t v : values) put_le(payload, static_cast<std::uint64_t>(v), 8);
  add_section(name, SectionType::kI64, values.size(), std::move(payload));
}

void ContainerWriter::add_text(std::string_view name, std::string_view text) {
  add_section(name, SectionType::kText, text.size(), std::string(text));
}

std::string ContainerWriter::bytes() const {
  std::string out(kMagic, sizeof(kMagic));
  put_le(out, kContainerVersion, 4);
  put_le(out, static_cast<std::uint32_t>(kind_), 4);
  put_le(out, sections_.size(), 4);
  for (const Section& s : sections_) {
    put_le(out, s.name.size(), 2);
    out += s.name;
    put_le(out, static_cast<std::uint8_t>(s.type), 1);
    put_le(out, s.count, 8);
    out += s.payload;
  }
  return out;
}

void ContainerWriter::write_atomic(const std::filesystem::path& path) const {
  write_file_atomic(path, bytes());
}

ContainerReader ContainerReader::from_bytes(std::string bytes, ArtifactKind expected) {
  std::string_view in(bytes);
  if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a cqarank artifact (bad magic)");
  }
  std::size_t pos = sizeof(kMagic);
  const auto version = get_le(in, pos, 4);
  if (version != kContainerVersion) {
    throw DataError("unsupported artifact container version " + std::to_string(version));
  }
  const auto kind = static_cast<ArtifactKind>(get_le(in, pos, 4));
  if (kind != expected) {
    throw DataError(std::string("artifact holds a ") + kind_name(kind) + ", expected a " +
                    kind_name(expected));
  }
  const auto n = get_le(in, pos, 4);
  ContainerReader reader;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto name_len = get_le(in, pos, 2);
    if (pos + name_len > in.size()) throw DataError("artifact container truncated in section name");
    std::string name(in.substr(pos, name_len));
    pos += name_len;
    const auto type = static_cast<SectionType>(get_le(in, pos, 1));
    const auto count = get_le(in, pos, 8);
    const std::size_t size = count * element_size(type);
    if (pos + size > in.size()) throw DataError("artifact container truncated in section " + name);
    reader.sections_[name] = Section{type, count, std::string(in.substr(pos, size))};
    pos += size;
  }
  if (pos != in.size()) throw DataError("trailing bytes after artifact container");
  return reader;
}

ContainerReader ContainerReader::from_file(const std::filesystem::path& path, ArtifactKind expected) {
  return from_bytes(read_file(path), expected);
}

bool ContainerReader::has(std::string_view name) const { return sections_.find(name) != sections_.end(); }

const ContainerReader::Section& ContainerReader::get(std::string_view name, SectionType type) const {
  auto it = sections_.find(name);
  if (it == sections_.end()) throw DataError("artifact is missing section '" + std::string(name) + "'");
  if (it->second.type != type) throw DataError("artifact section '" + std::string(name) + "' has wrong type");
  return it->second;
}

std::vector<double> ContainerReader::f64(std::string_view name) const {
  const Section& s = get(name, SectionType::kF64);
  std::vector<double> out(s.count);
  std::size_t pos = 0;
  for (auto& v : out) v = std::bit_cast<double>(get_le(s.payload, pos, 8));
  return out;
}

std::vector<std::int32_t> ContainerReader::i32(std::string_view name) const {
  const Section& s = get(name, SectionType::kI32);
  std::vector<std::int32_t> out(s.count);
  std::size_t pos = 0;
  for (auto& v : out) v = static_cast<std::int32_t>(static_cast<std::uint32_t>(get_le(s.payload, pos, 4)));
  return out;
}

std::vector<std::int64_t> ContainerReader::i64(std::string_view name) const {
  const Section& s = get(name, SectionType::kI64);
  std::vector<std::int64_t> out(s.count);
  std::size_t pos = 0;
  for (auto& v : out) v = static_cast<std::int64_t>(get_le(s.payload, pos, 8));
  return out;
}

std::string ContainerReader::text(std::string_view name) const {
  return get(name, SectionType::kText).payload;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cqarank
