#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skewerg {

/// Three-valued answer to a numerically decided question.
enum class Verdict { yes, no, inconclusive };

std::string_view to_string(Verdict v);

enum class Trend { convergent, divergent, undecided };

std::string_view to_string(Trend t);

/// Deterministic convergence/divergence decision on a sequence of truncated
/// values s_k, one per refinement level.
///
///  - convergent: the last three values agree within relative 1e-4
///    (absolute floor 1e-12);
///  - divergent: the last value exceeds 1e8, or the last five increments
///    are non-decreasing, or the last increment is at least 0.75 times the
///    increment four levels earlier (the increments do not decay);
///  - undecided otherwise, or with fewer than six levels.
struct TrendDecision {
  Trend trend = Trend::undecided;
  std::string reason;
};

struct DivergenceRule {
  double relative_agreement = 1e-4;
  double absolute_floor = 1e-12;
  double divergence_cap = 1e8;
  int window = 5;
  double decay_ratio = 0.75;

  TrendDecision decide(std::span<const double> values) const;
};

/// Levels k evaluated by the density-cutoff and log-integral traces.
inline constexpr int kFirstLevel = 4;
inline constexpr int kLastLevel = 20;

}  // namespace skewerg
