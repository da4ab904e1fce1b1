#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "nerharness/errors.hpp"

namespace nerh {

using json = nlohmann::json;

// Canonical rendering used for every artifact that must be byte-stable:
// object keys sorted (nlohmann's default std::map backing), floating-point
// numbers fixed to six decimals, integers verbatim. Two runs that agree on
// the in-memory value agree on the bytes.
inline void canonical_dump_to(const json& v, std::string& out) {
  switch (v.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        canonical_dump_to(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ',';
        first = false;
        canonical_dump_to(e, out);
      }
      out += ']';
      break;
    }
    case json::value_t::string:
      out += v.dump();
      break;
    case json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case json::value_t::number_float: {
      double x = v.get<double>();
      if (!std::isfinite(x)) throw DomainError("non-finite number in canonical JSON");
      if (x == 0.0) x = 0.0;  // collapse -0
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6f", x);
      out += buf;
      break;
    }
    case json::value_t::null:
      out += "null";
      break;
    default:
      throw DomainError("unsupported value in canonical JSON");
  }
}

inline std::string canonical_dump(const json& v) {
  std::string out;
  canonical_dump_to(v, out);
  return out;
}

// FNV-1a, used to fingerprint datasets inside run configs and model metadata.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fingerprint_hex(std::string_view s) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(s);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace nerh
