#pragma once

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "varhardy/grid.hpp"

namespace varhardy::detail {

struct PresetKey {
  std::string text;
  std::string head;
  std::vector<std::string> args;
};

inline PresetKey split_preset(const std::string& text) {
  PresetKey key{text, text, {}};
  const auto colon = text.find(':');
  if (colon == std::string::npos) return key;
  key.head = text.substr(0, colon);
  std::string rest = text.substr(colon + 1);
  std::size_t start = 0;
  while (true) {
    const auto comma = rest.find(',', start);
    key.args.push_back(rest.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return key;
}

inline double parse_number(const PresetKey& key, std::size_t which) {
  if (which >= key.args.size()) throw PresetError("preset '" + key.text + "': missing numeric argument");
  const std::string& s = key.args[which];
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) throw PresetError("preset '" + key.text + "': bad number '" + s + "'");
  return v;
}

}  // namespace varhardy::detail
