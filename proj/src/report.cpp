#include "lces/report.hpp"

#include <sstream>

#include "json.hpp"

namespace lces {

void Report::merge(const Report& other) {
  checked += other.checked;
  truncated = truncated || other.truncated;
  notes.insert(notes.end(), other.notes.begin(), other.notes.end());
  failures.insert(failures.end(), other.failures.begin(), other.failures.end());
}

std::string Report::text() const {
  std::ostringstream os;
  os << name << ": " << (ok() ? "ok" : "FAILED") << " (" << checked << " checked";
  if (!failures.empty()) os << ", " << failures.size() << " failures";
  if (truncated) os << ", truncated";
  os << ")\n";
  for (const auto& n : notes) os << "  note: " << n << '\n';
  for (const auto& f : failures) os << "  fail: " << f << '\n';
  return os.str();
}

std::string Report::json() const {
  nlohmann::json j;
  j["name"] = name;
  j["ok"] = ok();
  j["checked"] = checked;
  j["truncated"] = truncated;
  j["notes"] = notes;
  j["failures"] = failures;
  return j.dump();
}

}  // namespace lces
