#pragma once

#include <string>
#include <utility>
#include <vector>

namespace varhardy {

/// Structured outcome of a probe: named quantities plus an overall verdict.
struct Report {
  std::string name;
  bool pass = true;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::string> notes;

  void set(const std::string& key, double v) {
    for (auto& kv : values) {
      if (kv.first == key) {
        kv.second = v;
        return;
      }
    }
    values.emplace_back(key, v);
  }

  double get(const std::string& key) const {
    for (const auto& kv : values)
      if (kv.first == key) return kv.second;
    return 0.0;
  }

  bool has(const std::string& key) const {
    for (const auto& kv : values)
      if (kv.first == key) return true;
    return false;
  }

  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      notes.push_back(why);
    }
  }
};

}  // namespace varhardy
