#include "drs/types.hpp"

#include <charconv>

#include "drs/error.hpp"

namespace drs {

std::string to_string(const Resolution& r) {
  return std::to_string(r.width) + "x" + std::to_string(r.height);
}

Resolution parse_resolution(const std::string& text) {
  const auto sep = text.find_first_of("xX");
  if (sep == std::string::npos) {
    throw Error(ErrorCode::ParseError, "resolution '" + text + "' is not of the form WxH");
  }
  Resolution r;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [p1, e1] = std::from_chars(begin, begin + sep, r.width);
  auto [p2, e2] = std::from_chars(begin + sep + 1, end, r.height);
  if (e1 != std::errc{} || e2 != std::errc{} || p1 != begin + sep || p2 != end || r.width <= 0 ||
      r.height <= 0) {
    throw Error(ErrorCode::ParseError, "resolution '" + text + "' is not of the form WxH");
  }
  return r;
}

}  // namespace drs
