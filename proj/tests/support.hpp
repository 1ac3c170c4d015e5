#pragma once

// Shared fixtures and independent oracles for the test suites.  Oracles here
// must stay independent of the implementation paths they check: they compute
// the expected values by direct enumeration over level sets, explicit
// products, or brute-force evaluation.

#include <map>
#include <vector>

#include "prochern/arcspace.hpp"
#include "prochern/bivariant.hpp"
#include "prochern/dsl.hpp"
#include "prochern/geom.hpp"
#include "prochern/prosys.hpp"
#include "prochern/randgen.hpp"
#include "prochern/rings.hpp"
#include "prochern/rng.hpp"

namespace testsupport {

using prochern::Rng;
using prochern::geom::ConstructibleFunction;
using prochern::geom::ConstructibleSet;
using prochern::geom::ModelPtr;
using prochern::geom::MorphismModel;
using prochern::geom::MorphPtr;
using prochern::geom::Stratum;
using prochern::geom::VarietyModel;
using prochern::prosys::ProFunction;
using prochern::prosys::Tower;
using prochern::prosys::TowerPtr;
using prochern::rings::AtomTable;
using prochern::rings::AtomTablePtr;
using prochern::rings::GClass;
using prochern::rings::Int;
using prochern::rings::Monomial;
using prochern::rings::Rat;

inline AtomTablePtr table_L() { return AtomTable::make({}); }

inline AtomTablePtr table_LE() {
  return AtomTable::make({{"E", Int(0)}});
}

inline GClass cls_L(const AtomTablePtr& t, int exp = 1) {
  return GClass::of_monomial(t, Monomial::make({{"L", exp}}));
}

// The projective-line model: a point plus an affine cell.
inline ModelPtr p1_model(const AtomTablePtr& t) {
  return VarietyModel::make("P1", t,
                            {{"pt", GClass::unit(t)}, {"cell", cls_L(t)}});
}

inline ModelPtr point_model(const AtomTablePtr& t, const char* name = "Pt") {
  return VarietyModel::make(name, t, {{"o", GClass::unit(t)}});
}

// Coarse model of the projective space of dimension d: a point stratum plus
// one stratum for the complement (class L + ... + L^d), so chi is d + 1.
inline ModelPtr pn_model(const AtomTablePtr& t, int d) {
  std::vector<Stratum> strata;
  strata.push_back({"c0", GClass::unit(t)});
  if (d >= 1) {
    GClass rest = GClass::zero(t);
    for (int j = 1; j <= d; ++j) rest = rest + cls_L(t, j);
    strata.push_back({"rest", rest});
  }
  return VarietyModel::make("P" + std::to_string(d), t, std::move(strata));
}

// Tower whose step k attaches the cell model of P^{k-1}; the fiber Euler
// number of step k is k, so the level-n denominator is (n-1)!.
inline TowerPtr pn_fiber_tower(const AtomTablePtr& t) {
  return Tower::product_seq(point_model(t, "B"),
                            [t](int k) { return pn_model(t, k - 1); });
}

// --- independent oracles -----------------------------------------------------

// Level-set route for chi: sum over realized values n of n * chi(level set).
inline Int oracle_chi_levelset(const ConstructibleFunction& fn) {
  Int total = 0;
  for (const auto& [value, set] : fn.level_sets()) {
    if (value == 0) continue;
    Int chi_set = 0;
    for (size_t i = 0; i < set.members().size(); ++i)
      if (set.contains(i)) chi_set += fn.parent()->chi_of(i);
    total += value * chi_set;
  }
  return total;
}

// Level-set route for gamma.
inline GClass oracle_gamma_levelset(const ConstructibleFunction& fn) {
  GClass total = GClass::zero(fn.parent()->table());
  for (const auto& [value, set] : fn.level_sets()) {
    if (value == 0) continue;
    GClass cls_set = GClass::zero(fn.parent()->table());
    for (size_t i = 0; i < set.members().size(); ++i)
      if (set.contains(i)) cls_set = cls_set + fn.parent()->strata()[i].cls;
    total = total + cls_set.scale(value);
  }
  return total;
}

// Direct evaluation of sum m_k / p^(k-1+w) by explicit numerator/denominator
// bookkeeping (no shared code with phi_w).
inline Rat oracle_phi(const std::vector<std::pair<int, Int>>& terms, const Int& p,
                      int w) {
  Rat total(0);
  for (const auto& [level, value] : terms) {
    const long long e = level - 1 + w;
    Int num = value, den = 1;
    if (e >= 0)
      for (long long i = 0; i < e; ++i) den *= p;
    else
      for (long long i = 0; i < -e; ++i) num *= p;
    total = total + Rat(num, den);
  }
  return total;
}

// Greedy factorial-number-system digits of x in (0,1):
// x ~ sum_{n>=1} c_n/(n+1)! with 0 <= c_n <= n.
inline std::vector<Int> greedy_factorial_digits(const Rat& x, int count) {
  std::vector<Int> digits;
  Rat rest = x;
  Int fact = 1; // (n+1)!
  for (int n = 1; n <= count; ++n) {
    fact *= n + 1;
    // c = floor(rest * (n+1)!)
    const Int scaled_num = rest.num() * fact;
    Int c = scaled_num / rest.den();
    if (c < 0) c = 0;
    if (c > n) c = n;
    digits.push_back(c);
    rest = rest - Rat(c, fact);
  }
  return digits;
}

// Random strict morphism chain f: X3 -> X2 -> X1 reusing the library's
// generators with a fixed limit profile.
inline prochern::gen::ModelLimits small_limits() {
  prochern::gen::ModelLimits lim;
  lim.max_strata = 4;
  lim.max_terms = 2;
  lim.max_degree = 2;
  lim.coeff_lo = -3;
  lim.coeff_hi = 3;
  return lim;
}

} // namespace testsupport
