#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "prochern/bivariant.hpp"
#include "prochern/geom.hpp"

namespace prochern::prosys {

using geom::ChiWeight;
using geom::ConstructibleFunction;
using geom::ConstructibleSet;
using geom::GammaWeight;
using geom::ModelPtr;
using geom::MorphPtr;
using rings::GClass;
using rings::Int;
using rings::LocClass;
using rings::Rat;

class Tower;
using TowerPtr = std::shared_ptr<const Tower>;

// N-indexed projective system of variety models.  Levels are realized lazily
// and cached; the cache is write-once per level and safe under concurrent
// readers, so realizing a level twice yields the identical model.
class Tower {
public:
  enum class Kind { Product, Bundle, Arc, Steps, Rule };

  // X, X^2, X^3, ... with the projections dropping the last factor.
  static TowerPtr product(ModelPtr x);
  // Product tower with a varying factor: step k attaches factor_at(k), so
  // level n is x1 x factor(1) x ... x factor(n-1).  Factors must be nonempty.
  static TowerPtr product_seq(ModelPtr x1, std::function<ModelPtr(int)> factor_at);
  // Iterated fiber bundle over x0; step k multiplies classes by the k-th
  // fiber class.  Without `periodic` the tower is finite with
  // fibers.size() + 1 levels.
  static TowerPtr bundle(ModelPtr x0, std::vector<GClass> fibers, bool periodic);
  // Bundle tower with one fiber class per step, produced by a rule
  // (step index from base); infinite and aperiodic.
  static TowerPtr bundle_rule(ModelPtr x0, std::function<GClass(int)> fiber_at);
  // Explicit finite tower; steps[k] maps level base+k+1 onto level base+k.
  static TowerPtr from_steps(std::vector<MorphPtr> steps, int base = 1);
  // Arbitrary infinite tower driven by a step rule.  `surjective_promise`
  // asserts that every step (including unrealized ones) is stratum-surjective.
  static TowerPtr from_rule(ModelPtr base_model, int base,
                            std::function<MorphPtr(int, const ModelPtr&)> rule,
                            bool surjective_promise);
  // Arc-space tower of a (user-asserted smooth) d-dimensional model.
  static TowerPtr arc(ModelPtr x, int d);

  Kind kind() const { return kind_; }
  int base() const { return base_; }
  std::optional<int> top() const { return top_; } // last level when finite
  bool finite() const { return top_.has_value(); }
  std::optional<int> arc_dim() const { return arc_dim_; }
  // Period of the step description, when the generator repeats.
  std::optional<int> period() const { return period_; }

  ModelPtr model(int level) const;
  // Structure morphism model(level+1) -> model(level).
  MorphPtr step(int level) const;
  bool step_surjective(int level) const;
  // True when the generator guarantees surjectivity of every step.
  bool all_steps_surjective() const { return surjective_promise_; }

  // Realized steps from the base up to (excluding) `level`.
  std::vector<MorphPtr> steps_up_to(int level) const;

private:
  Tower() = default;
  void check_level(int level) const;

  Kind kind_ = Kind::Rule;
  int base_ = 1;
  std::optional<int> top_;
  std::optional<int> period_;
  std::optional<int> arc_dim_;
  bool surjective_promise_ = false;
  std::function<MorphPtr(int, const ModelPtr&)> rule_;

  mutable std::mutex mu_;
  mutable std::vector<ModelPtr> models_;
  mutable std::vector<MorphPtr> steps_;
};

// Representative-at-a-level element of the inductive limit F^pro(X_inf).
struct ProFunction {
  TowerPtr tower;
  int level = 1;
  ConstructibleFunction fn;

  ProFunction() = default;
  ProFunction(TowerPtr t, int lv, ConstructibleFunction f);
};

// pi_level^{-1}(set), represented by the constructible set at its level.
struct CylinderSet {
  TowerPtr tower;
  int level = 1;
  ConstructibleSet set;

  CylinderSet() = default;
  CylinderSet(TowerPtr t, int lv, ConstructibleSet s);
};

// Point of the projective limit, realized as a compatible stream of stratum
// ids from the base level up.
class ProPoint {
public:
  static ProPoint make(TowerPtr tower, std::vector<std::string> ids);
  const TowerPtr& tower() const { return tower_; }
  // Stratum index at `level`; LevelError when the stream is too short.
  size_t at_level(int level) const;

private:
  TowerPtr tower_;
  std::vector<size_t> idx_; // from base level
};

// --- lifting and limit arithmetic --------------------------------------------

ProFunction lift(const ProFunction& pf, int m);
CylinderSet lift_cyl(const CylinderSet& c, int m);
ProFunction pro_add(const ProFunction& a, const ProFunction& b);

struct EqVerdict {
  bool equal = false;
  bool definitive = false;
  int checked_to = 0; // highest level examined
};

// Equality in the inductive limit.  Definitive when representatives agree at
// some realized level, when the tower is finite, or when every remaining step
// is known to be stratum-surjective; otherwise verified-to-horizon.
EqVerdict pro_eq(const ProFunction& a, const ProFunction& b, int horizon = 8);

Int eval(const ProFunction& pf, const ProPoint& x);

ProFunction procharacteristic(TowerPtr tower);

// chi(alpha_n) / (chi_0 chi_1 ... chi_{n-1}) at the representative level,
// every step weighted by its constant fiber Euler number.  Nonzero shift w
// divides by chi^w and requires a constant-fiber tower.
Rat chi_pro(const ProFunction& pf, int w = 0);

// Gamma(alpha_n) / ([F_0][F_1]...[F_{n-1}]): steps must be strict with a
// single fiber class each.
LocClass gamma_pro(const ProFunction& pf, int w = 0);

// Per-step projective system of integers / classes, aligned with the tower
// steps from the base; periodic systems repeat their value list.
struct StepInts {
  std::vector<Int> values;
  bool periodic = false;
  const Int& at(int index) const; // index from 0
};

struct StepClasses {
  std::vector<GClass> values;
  bool periodic = false;
  const GClass& at(int index) const;
};

// The tower's own fiber data as step systems.
StepInts fiber_chi_system(const Tower& tower, int count);
StepClasses fiber_class_system(const Tower& tower, int count);

struct StabilityVerdict {
  bool stable = false;
  bool definitive = false;
  int checked_to = 0;
  std::optional<int> witness_level; // first level where the law fails
};

StabilityVerdict is_chi_stable(const ProFunction& pf, const StepInts& p,
                               int horizon = 8);
StabilityVerdict is_gamma_stable(const ProFunction& pf, const StepClasses& f,
                                 int horizon = 8);

// chi(alpha_n) / (p_1 ... p_{n-1}) and Gamma(alpha_n) / ([F_1] ... [F_{n-1}])
// against a prescribed projective system; StabilityError when the stability
// check fails within the horizon.
Rat stable_chi_pro(const ProFunction& pf, const StepInts& p, int horizon = 8);
LocClass stable_gamma_pro(const ProFunction& pf, const StepClasses& f,
                          int horizon = 8);

// --- cylinder algebra ----------------------------------------------------------

CylinderSet cyl_union(const CylinderSet& a, const CylinderSet& b);
CylinderSet cyl_intersect(const CylinderSet& a, const CylinderSet& b);
CylinderSet cyl_diff(const CylinderSet& a, const CylinderSet& b);
CylinderSet cyl_symmdiff(const CylinderSet& a, const CylinderSet& b);
EqVerdict cyl_eq(const CylinderSet& a, const CylinderSet& b, int horizon = 8);

// Level sets of the representative as cylinder sets at its level; the value 0
// is excluded.
std::map<Int, CylinderSet> level_sets(const ProFunction& pf);

Rat integrate_chi_pro(const ProFunction& pf, const StepInts& p,
                      const ChiWeight& f, int horizon = 8);
LocClass integrate_gamma_pro(const ProFunction& pf, const StepClasses& fc,
                             const GammaWeight& f, int horizon = 8);

// Formal sum of proconstructible functions: either a finite term list or a
// rule producing the n-th term (1-based; nullopt once exhausted).
struct SeriesProFunction {
  std::vector<ProFunction> terms;
  std::function<std::optional<ProFunction>(int)> rule;

  static SeriesProFunction of(std::vector<ProFunction> list) {
    SeriesProFunction s;
    s.terms = std::move(list);
    return s;
  }
  static SeriesProFunction generated(
      std::function<std::optional<ProFunction>(int)> rule) {
    SeriesProFunction s;
    s.rule = std::move(rule);
    return s;
  }
  std::optional<ProFunction> term(int n) const; // 1-based
};

// Partial sums S_1..S_N of chi_pro over the terms, exact.
std::vector<Rat> chi_pro_partial_sums(const SeriesProFunction& s, int count);

// --- equipped systems (bivariant-class towers) ---------------------------------

biv::BivClassSystem unit_system(const TowerPtr& tower, int depth);

// Lift along b-twisted bonding maps: step k sends beta to cls_k * pi_k^* beta.
ProFunction lift_equipped(const ProFunction& pf, const biv::BivClassSystem& sys,
                          int m);

// chi(alpha_n) / (chi_f(b_0) ... chi_f(b_{n-1})) over an equipped tower.
Rat chi_pro_equipped(const ProFunction& pf, const biv::BivClassSystem& sys);

// --- promorphisms ---------------------------------------------------------------

// Level-preserving promorphism: for each target level n a morphism
// f_n: source.model(xi(n)) -> target.model(n), xi order-preserving.
//
// There is no operation rescaling a chi_pro value from one tower's
// denominators to another's.  Such a map would have to act on reduced
// rationals, where it depends on the chosen representative and is therefore
// not well-defined.  Cross-tower comparisons are supported only through
// fiber-square promorphisms, whose matching fiber data make the denominators
// agree level by level.
class ProMorphism {
public:
  ProMorphism(TowerPtr source, TowerPtr target, std::function<int(int)> xi,
              std::function<MorphPtr(int)> map_rule, bool fiber_square);

  const TowerPtr& source() const { return source_; }
  const TowerPtr& target() const { return target_; }
  int xi(int n) const { return xi_(n); }
  bool fiber_square() const { return fiber_square_; }
  MorphPtr map_at(int n) const; // cached

private:
  struct Cache {
    std::mutex mu;
    std::map<int, MorphPtr> maps;
  };
  TowerPtr source_;
  TowerPtr target_;
  std::function<int(int)> xi_;
  std::function<MorphPtr(int)> rule_;
  bool fiber_square_;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

ProFunction pro_pushforward(const ProMorphism& phi, const ProFunction& pf);

struct NaturalityItem {
  int level = 0;
  std::string name;
  bool pass = true;
  std::string witness;
};

struct NaturalityReport {
  bool pass = true;
  std::vector<NaturalityItem> items;
};

// Validates the squares as fiber squares, checks pushforward-lift commutation
// on random test functions, and checks the chi_pro square, all exactly.
NaturalityReport check_naturality(const ProMorphism& phi, int depth,
                                  std::uint64_t seed);

// Source tower over f.source() obtained by iterated base change of `target`
// along f, together with the fiber-square promorphism into `target`.
// f must land in target.model(target.base()).
std::pair<TowerPtr, ProMorphism> induced_tower(const MorphPtr& f,
                                               const TowerPtr& target);

} // namespace prochern::prosys
