#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace fraccal::detail {

inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a_bytes(const void* p, std::size_t n, std::uint64_t h = 14695981039346656037ull) {
  return fnv1a(std::string_view(static_cast<const char*>(p), n), h);
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace fraccal::detail
