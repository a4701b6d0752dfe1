#include "skewerg/divergence.hpp"

#include <algorithm>
#include <cmath>

namespace skewerg {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string_view to_string(Trend t) {
  switch (t) {
    case Trend::convergent: return "convergent";
    case Trend::divergent: return "divergent";
    case Trend::undecided: return "undecided";
  }
  return "undecided";
}

TrendDecision DivergenceRule::decide(std::span<const double> values) const {
  const auto n = values.size();
  if (n == 0) return {Trend::undecided, "empty trace"};
  const double last = values[n - 1];
  if (!std::isfinite(last) || last > divergence_cap) {
    return {Trend::divergent, "value exceeds divergence cap"};
  }
  if (n >= 3) {
    const double scale = std::max(std::abs(last), absolute_floor);
    const bool agree = std::abs(values[n - 2] - last) <= relative_agreement * scale &&
                       std::abs(values[n - 3] - last) <= relative_agreement * scale;
    if (agree) return {Trend::convergent, "last three levels agree"};
  }
  const auto w = static_cast<std::size_t>(window);
  if (n < w + 1) return {Trend::undecided, "too few levels"};

  std::vector<double> inc(w);
  for (std::size_t i = 0; i < w; ++i) inc[i] = values[n - w + i] - values[n - w + i - 1];
  if (std::is_sorted(inc.begin(), inc.end()) && inc.back() > 0.0) {
    return {Trend::divergent, "increments non-decreasing"};
  }
  if (inc.front() > 0.0 && inc.back() >= decay_ratio * inc.front()) {
    return {Trend::divergent, "increments do not decay"};
  }
  return {Trend::undecided, "neither rule triggered"};
}

}  // namespace skewerg
