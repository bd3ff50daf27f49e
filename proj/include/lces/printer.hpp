#pragma once

#include <string>

#include "lces/syntax.hpp"

namespace lces {

struct PrintOptions {
  bool unicode = false;  // λ, ∥, ↓, ↑; not re-parseable
};

std::string print(const Type& t, const PrintOptions& opts = {});
std::string print(const Effect& e);
/// Bound variables are printed from their surface hints, suffixed with a
/// number when the hint would clash with a free or enclosing name.
std::string print(const Term& t, const PrintOptions& opts = {});
std::string print(const Sum& s, const PrintOptions& opts = {});
std::string print(const RefSubst& v, const PrintOptions& opts = {});

/// `s` shortened to at most `width` characters with a trailing ellipsis.
std::string truncate(const std::string& s, std::size_t width);

}  // namespace lces
