#pragma once

#include <string>
#include <vector>

#include "prochern/geom.hpp"

namespace prochern::biv {

using geom::ConstructibleFunction;
using geom::FiberSquare;
using geom::ModelPtr;
using geom::MorphPtr;
using rings::GClass;
using rings::Int;

// A constructible function on the source of a morphism, carried together with
// that morphism.  The fiber weight over target stratum t is
// w(t) = sum_{s -> t} fn(s) * chi(F_s).
//
// The local Euler condition that singles out bivariant functions is
// topological and not decidable from class data, so any function with
// declared fiber data is accepted here.  Likewise properness is not modeled:
// every morphism is treated as pushforward-admissible.
class BivariantFn {
public:
  BivariantFn(MorphPtr over, ConstructibleFunction fn);
  static BivariantFn unit(MorphPtr over); // 1_f

  const MorphPtr& over() const { return over_; }
  const ConstructibleFunction& fn() const { return fn_; }
  const std::vector<Int>& weights() const { return weights_; }
  bool constant_weight() const { return constant_; }

private:
  MorphPtr over_;
  ConstructibleFunction fn_;
  std::vector<Int> weights_;
  bool constant_ = true;
};

struct EquippedMorphism {
  MorphPtr morphism;
  BivariantFn cls; // cls.over() == morphism
  EquippedMorphism(MorphPtr m, BivariantFn c);
  static EquippedMorphism unit(MorphPtr m) {
    return EquippedMorphism(m, BivariantFn::unit(m));
  }
};

// alpha over f: X -> Y, beta over g: Y -> Z; result alpha . f^* beta over g o f.
BivariantFn biv_product(const BivariantFn& alpha, const BivariantFn& beta);

// alpha over the composite g o f; result over g with fn pushed along f.
BivariantFn biv_pushforward(const MorphPtr& f, const MorphPtr& g,
                            const BivariantFn& alpha);

// alpha over square.f; result over square.f_prime, fn(s,t) = alpha.fn(s).
BivariantFn biv_pullback(const FiberSquare& square, const BivariantFn& alpha);

// The common fiber weight; DomainError (naming two differing strata) when the
// weight is not globally constant.
Int chi_f(const BivariantFn& alpha);

struct CheckReport {
  bool pass = true;
  std::string witness; // first failing locus, empty when pass
};

// Function-level shadow of the bivariant projection formula on a base-change
// square: b * pi^*(f_* y) == f'_*((f'^* b) * (pi'^* y)) stratum by stratum on
// X'.  `b` is a bivariant class over square.pi, `y` a function on the source
// of square.f.
CheckReport check_projection_formula(const FiberSquare& square,
                                     const BivariantFn& b,
                                     const ConstructibleFunction& y);

// Per-step bivariant classes along a tower; step_classes[k] sits over the
// k-th structure morphism.
struct BivClassSystem {
  std::vector<BivariantFn> step_classes;
};

struct SystemReport {
  bool pass = true;
  std::vector<std::string> failures;
};

// Verifies that each class sits over the matching tower step and that the
// cocycle law b_{mu nu} . b_{la mu} = b_{la nu} holds for all triples with
// nu - la <= depth.
SystemReport check_system(const std::vector<MorphPtr>& tower_steps,
                          const BivClassSystem& sys, int depth);

} // namespace prochern::biv
