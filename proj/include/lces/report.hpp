#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace lces {

/// Outcome of an analysis run: what was checked and what went wrong.
struct Report {
  std::string name;
  std::vector<std::string> notes;
  std::vector<std::string> failures;
  std::size_t checked = 0;
  bool truncated = false;

  bool ok() const { return failures.empty(); }
  void fail(std::string message) { failures.push_back(std::move(message)); }
  void merge(const Report& other);

  std::string text() const;
  std::string json() const;
};

}  // namespace lces
