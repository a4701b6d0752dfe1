#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace skewerg {

struct VerificationRow {
  std::string id;
  std::string reference;  // which worked example or identity is checked
  std::string expected;
  std::string observed;
  bool pass = false;
};

/// Runs every built-in check of the worked examples and identities with its
/// stated tolerance. Failures (including thrown errors) become rows.
std::vector<VerificationRow> verify_paper(std::uint64_t seed = 0);

}  // namespace skewerg
