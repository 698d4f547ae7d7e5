#include "cqarank/hash.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "cqarank/error.hpp"

namespace cqarank {

Fnv1a& Fnv1a::update(std::span<const std::byte> bytes) {
  for (std::byte b : bytes) {
    state_ ^= static_cast<std::uint64_t>(b);
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

Fnv1a& Fnv1a::update(std::string_view text) {
  return update(std::as_bytes(std::span(text.data(), text.size())));
}

Fnv1a& Fnv1a::update_u64(std::uint64_t value) {
  std::byte buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::byte>((value >> (8 * i)) & 0xff);
  return update(std::span<const std::byte>(buf, 8));
}

Fnv1a& Fnv1a::update_f64(double value) {
  return update_u64(std::bit_cast<std::uint64_t>(value));
}

std::string Fnv1a::hex() const { return to_hex(state_); }

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string hash_bytes(std::string_view bytes) { return Fnv1a{}.update(bytes).hex(); }

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for hashing");
  Fnv1a h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const auto n = static_cast<std::size_t>(in.gcount());
    if (n > 0) h.update(std::string_view(buf, n));
  }
  return h.hex();
}

}  // namespace cqarank
