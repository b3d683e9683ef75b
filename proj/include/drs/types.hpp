#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace drs {

struct Resolution {
  int width = 0;
  int height = 0;

  std::int64_t pixels() const noexcept {
    return static_cast<std::int64_t>(width) * height;
  }

  // Ordered by pixel count, then width; "lower resolution" means smaller here.
  friend auto operator<=>(const Resolution& a, const Resolution& b) noexcept {
    if (auto c = a.pixels() <=> b.pixels(); c != 0) return c;
    if (auto c = a.width <=> b.width; c != 0) return c;
    return a.height <=> b.height;
  }
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// "WxH" form, e.g. "1920x1080".
std::string to_string(const Resolution& r);

/// Parses "WxH" (also accepts 'X'). Throws Error(ParseError) on malformed input.
Resolution parse_resolution(const std::string& text);

}  // namespace drs
