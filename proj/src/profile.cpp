#include "repgame/profile.hpp"

#include <algorithm>

namespace repgame {

const char* to_string(EraseRegime r) {
  switch (r) {
    case EraseRegime::keep:
      return "keep";
    case EraseRegime::indifferent:
      return "indifferent";
    case EraseRegime::erase:
      return "erase";
  }
  return "keep";
}

const char* to_string(SolveBranch b) {
  switch (b) {
    case SolveBranch::minmax:
      return "minmax";
    case SolveBranch::anchored:
      return "anchored";
    case SolveBranch::boundary_hit:
      return "boundary_hit";
    case SolveBranch::pure_anchor:
      return "pure_anchor";
  }
  return "minmax";
}

double EquilibriumProfile::erase_prob_at(int k) const {
  if (regime.empty()) return 0.0;
  const int idx = std::min(k, static_cast<int>(regime.size()) - 1);
  switch (regime[idx]) {
    case EraseRegime::keep:
      return 0.0;
    case EraseRegime::erase:
      return 1.0;
    case EraseRegime::indifferent:
      return idx == t0 ? erase_mix : 1.0;
  }
  return 0.0;
}

}  // namespace repgame
