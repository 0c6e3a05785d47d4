#pragma once

// Text formats for jump models.
//
//   statemin 1
//   absorbing {0}
//   jump -1: override 1 -> 2; 2*x + 2 from 2
//   jump +2: 0.5*ff(x,2)
//   2S -> 3S @ 1.5
//   burst @ 0.8 with {1: 0.5, 2: 0.25}
//
// Rates are sums/products of numbers, x powers (x^1.5, x^-1), falling
// factorials ff(x,n), polynomial quotients ratio(p ; q) and gamma-function
// ratios gammaratio(xi).  Reactions nS -> mS @ k carry mass-action
// propensity k*ff(x,n) and jump m-n; reactions with equal net jump merge by
// summation.  '#' starts a comment.  A jump declared with an unbounded
// range (jump 1..inf: ...) is rejected: the theory requires a finite jump
// set.

#include "ctmctail/model.hpp"

#include <string>

namespace ctmc {

struct ModelSource {
  std::string text;
  std::string origin = "<inline>"; // file path or inline tag
};

// Parses the full statement grammar; duplicate jump declarations merge by
// term-wise summation.  The returned model is validated.
JumpModel parse_model(const ModelSource &src);

// Same grammar entry point named for reaction-network inputs (.rxn files);
// reaction statements are the intended content but every statement kind is
// admitted, so mixed files stay parseable.
JumpModel parse_reactions(const ModelSource &src);

// Canonical text rendering; parse(pretty_print(m)) == m.
std::string pretty_print(const JumpModel &model);

} // namespace ctmc
