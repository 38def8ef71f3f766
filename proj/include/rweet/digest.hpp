#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>

namespace rweet {

// Stable 64-bit FNV-1a content digest used as a cache key. Every field is
// length-prefixed so ("ab","c") and ("a","bc") hash differently.
class Digest {
 public:
  Digest& add(std::string_view s) {
    add_raw(std::to_string(s.size()));
    add_raw(":");
    add_raw(s);
    return *this;
  }

  Digest& add_int(std::int64_t v) { return add(std::string_view(std::to_string(v))); }

  Digest& add_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return add(std::string_view(buf));
  }

  Digest& add_flag(bool v) { return add(std::string_view(v ? "1" : "0")); }

  Digest& add_all(std::span<const std::string> items) {
    add_int(static_cast<std::int64_t>(items.size()));
    for (const auto& s : items) add(std::string_view(s));
    return *this;
  }

  std::uint64_t value() const { return state_; }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(state_));
    return buf;
  }

 private:
  void add_raw(std::string_view s) {
    for (unsigned char c : s) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
  }

  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace rweet
