#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prochern/rings.hpp"

namespace prochern::geom {

using rings::AtomTablePtr;
using rings::GClass;
using rings::Int;
using rings::LocClass;
using rings::Rat;

class VarietyModel;
using ModelPtr = std::shared_ptr<const VarietyModel>;
class MorphismModel;
using MorphPtr = std::shared_ptr<const MorphismModel>;

struct Stratum {
  std::string id;
  GClass cls;
};

// A finite stratified variety model: the only geometry it keeps is the class
// (hence the Euler number) of each stratum.
class VarietyModel {
public:
  static ModelPtr make(std::string name, AtomTablePtr table,
                       std::vector<Stratum> strata);

  const std::string& name() const { return name_; }
  const AtomTablePtr& table() const { return table_; }
  const std::vector<Stratum>& strata() const { return strata_; }
  size_t size() const { return strata_.size(); }

  size_t index_of(const std::string& id) const; // DomainError when unknown
  std::optional<size_t> find(const std::string& id) const;

  Int chi_of(size_t stratum) const;
  Int chi() const;      // sum of stratum Euler numbers
  GClass gamma() const; // sum of stratum classes

private:
  VarietyModel(std::string name, AtomTablePtr table, std::vector<Stratum> strata)
      : name_(std::move(name)), table_(std::move(table)), strata_(std::move(strata)) {}
  std::string name_;
  AtomTablePtr table_;
  std::vector<Stratum> strata_;
};

bool model_equal(const ModelPtr& a, const ModelPtr& b);
void require_same_model(const ModelPtr& a, const ModelPtr& b, const char* what);

// Subset of the strata of one model.
class ConstructibleSet {
public:
  ConstructibleSet() = default;
  ConstructibleSet(ModelPtr parent, std::vector<bool> members);
  static ConstructibleSet empty(ModelPtr parent);
  static ConstructibleSet whole(ModelPtr parent);
  static ConstructibleSet of_ids(ModelPtr parent,
                                 const std::vector<std::string>& ids);

  const ModelPtr& parent() const { return parent_; }
  const std::vector<bool>& members() const { return members_; }
  bool contains(size_t i) const { return members_[i]; }
  bool is_empty() const;
  std::vector<std::string> ids() const;

  ConstructibleSet unite(const ConstructibleSet& other) const;
  ConstructibleSet intersect(const ConstructibleSet& other) const;
  ConstructibleSet difference(const ConstructibleSet& other) const;
  ConstructibleSet symmdiff(const ConstructibleSet& other) const;
  ConstructibleSet complement() const;

  friend bool operator==(const ConstructibleSet& a, const ConstructibleSet& b);

private:
  ModelPtr parent_;
  std::vector<bool> members_;
};

// Integer-valued function constant on strata.
class ConstructibleFunction {
public:
  ConstructibleFunction() = default;
  ConstructibleFunction(ModelPtr parent, std::vector<Int> values);
  static ConstructibleFunction constant(ModelPtr parent, Int value);
  static ConstructibleFunction indicator(const ConstructibleSet& set);
  static ConstructibleFunction zero(ModelPtr parent) {
    return constant(std::move(parent), 0);
  }

  const ModelPtr& parent() const { return parent_; }
  const std::vector<Int>& values() const { return values_; }
  const Int& at(size_t i) const { return values_[i]; }
  bool is_zero() const;

  // Nonempty level sets keyed by the (nonzero or zero) value taken there.
  std::map<Int, ConstructibleSet> level_sets() const;

  friend bool operator==(const ConstructibleFunction& a,
                         const ConstructibleFunction& b);
  friend bool operator!=(const ConstructibleFunction& a,
                         const ConstructibleFunction& b) {
    return !(a == b);
  }

private:
  ModelPtr parent_;
  std::vector<Int> values_;
};

// Morphism between models: total stratum map plus, per source stratum, the
// class of the fiber over any point of the image stratum.  In strict mode the
// factorization cls(s) = cls(f(s)) * F_s is checked at construction.
class MorphismModel {
public:
  static MorphPtr make(ModelPtr source, ModelPtr target,
                       std::vector<size_t> stratum_map,
                       std::vector<GClass> fiber, bool strict);
  // Skips the strictness check while keeping shape validation; this is the
  // entry point for mutation harnesses that need ill-formed fiber data.
  static MorphPtr make_unverified(ModelPtr source, ModelPtr target,
                                  std::vector<size_t> stratum_map,
                                  std::vector<GClass> fiber, bool strict);
  static MorphPtr identity(ModelPtr model);

  const ModelPtr& source() const { return source_; }
  const ModelPtr& target() const { return target_; }
  const std::vector<size_t>& stratum_map() const { return map_; }
  const std::vector<GClass>& fiber() const { return fiber_; }
  bool strict() const { return strict_; }

  size_t map_of(size_t s) const { return map_[s]; }
  bool surjective() const;
  // Fiber Euler number over a point of target stratum t.
  Int fchi(size_t t) const;
  std::vector<Int> fchi_all() const;
  // The common fchi value when it is the same over every target stratum.
  std::optional<Int> constant_fchi() const;
  // The common fiber class when every source stratum carries the same one.
  std::optional<GClass> single_fiber_class() const;
  // True when the strict factorization holds for every stratum.
  bool strictness_holds() const;

private:
  MorphismModel(ModelPtr source, ModelPtr target, std::vector<size_t> map,
                std::vector<GClass> fiber, bool strict)
      : source_(std::move(source)), target_(std::move(target)),
        map_(std::move(map)), fiber_(std::move(fiber)), strict_(strict) {}
  ModelPtr source_;
  ModelPtr target_;
  std::vector<size_t> map_;
  std::vector<GClass> fiber_;
  bool strict_;
};

bool morphism_equal(const MorphPtr& a, const MorphPtr& b);

// --- measures of sets and functions -----------------------------------------

Int chi_of_set(const ConstructibleSet& w);
GClass gamma_of_set(const ConstructibleSet& w);
Int chi_of_fn(const ConstructibleFunction& a);
GClass gamma_of_fn(const ConstructibleFunction& a);

// Weight functions for the integral forms; returning nullopt means the weight
// is undefined at that value, which is an error when the value is realized.
using ChiWeight = std::function<std::optional<Rat>(const Int&)>;
using GammaWeight = std::function<std::optional<LocClass>(const Int&)>;

Rat integrate_chi(const ConstructibleFunction& a, const ChiWeight& f);
LocClass integrate_gamma(const ConstructibleFunction& a, const GammaWeight& f);

// --- functorial operations ----------------------------------------------------

ConstructibleFunction pushforward(const MorphismModel& f,
                                  const ConstructibleFunction& a);
ConstructibleFunction pullback(const MorphismModel& f,
                               const ConstructibleFunction& b);

ConstructibleFunction fn_add(const ConstructibleFunction& a,
                             const ConstructibleFunction& b);
ConstructibleFunction fn_mul(const ConstructibleFunction& a,
                             const ConstructibleFunction& b);
ConstructibleFunction fn_scale(const ConstructibleFunction& a, const Int& c);

// Product model: strata are pairs in row-major order (x strata outer, y
// strata inner) with ids joined by a dot.
ModelPtr cross_model(const ModelPtr& x, const ModelPtr& y);
// Product function on a model built by cross_model(x, y).
ConstructibleFunction cross_fn(const ModelPtr& product,
                               const ConstructibleFunction& a,
                               const ConstructibleFunction& b);
ConstructibleFunction cross_fn(const ConstructibleFunction& a,
                               const ConstructibleFunction& b);

MorphPtr compose(const MorphPtr& g, const MorphPtr& f); // g after f

struct FiberSquare {
  MorphPtr f;        // Y -> X
  MorphPtr pi;       // X' -> X
  ModelPtr corner;   // Y' = Y x_X X'
  MorphPtr pi_prime; // Y' -> Y
  MorphPtr f_prime;  // Y' -> X'
  // Corner stratum i is the pair (pairs[i].first in Y, pairs[i].second in X').
  std::vector<std::pair<size_t, size_t>> pairs;
};

// Base change square; requires pi strict.
FiberSquare fiber_product(const MorphPtr& f, const MorphPtr& pi);

} // namespace prochern::geom
