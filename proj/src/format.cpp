#include "astcost/format.hpp"

#include <array>
#include <charconv>

namespace astcost {

std::string format_double(double value) {
  std::array<char, 32> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

}  // namespace astcost
