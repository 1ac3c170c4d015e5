#include "prochern/prosys.hpp"

#include <algorithm>
#include <numeric>

#include "prochern/rng.hpp"

namespace prochern::prosys {

using geom::ConstructibleFunction;
using geom::ConstructibleSet;
using geom::MorphismModel;
using geom::Stratum;
using geom::VarietyModel;
using geom::model_equal;
using geom::morphism_equal;
using geom::pullback;
using geom::pushforward;

// --- Tower ---------------------------------------------------------------------

void Tower::check_level(int level) const {
  if (level < base_)
    throw LevelError("level " + std::to_string(level) + " below tower base " +
                     std::to_string(base_));
  if (top_ && level > *top_)
    throw LevelError("finite tower has no level " + std::to_string(level) +
                     " (top is " + std::to_string(*top_) + ")");
}

ModelPtr Tower::model(int level) const {
  check_level(level);
  std::lock_guard lk(mu_);
  while (static_cast<int>(models_.size()) <= level - base_) {
    const int cur = base_ + static_cast<int>(models_.size()) - 1;
    MorphPtr st = rule_(cur, models_.back());
    steps_.push_back(st);
    models_.push_back(st->source());
  }
  return models_[static_cast<size_t>(level - base_)];
}

MorphPtr Tower::step(int level) const {
  check_level(level);
  check_level(level + 1);
  model(level + 1);
  std::lock_guard lk(mu_);
  return steps_[static_cast<size_t>(level - base_)];
}

bool Tower::step_surjective(int level) const {
  if (surjective_promise_) return true;
  return step(level)->surjective();
}

std::vector<MorphPtr> Tower::steps_up_to(int level) const {
  std::vector<MorphPtr> out;
  for (int k = base_; k < level; ++k) out.push_back(step(k));
  return out;
}

namespace {

MorphPtr product_step(const ModelPtr& at, const ModelPtr& factor) {
  if (factor->size() == 0)
    throw DomainError("product tower factor model has no strata");
  ModelPtr next = geom::cross_model(at, factor);
  std::vector<size_t> map(next->size());
  std::vector<GClass> fiber;
  fiber.reserve(next->size());
  for (size_t i = 0; i < at->size(); ++i)
    for (size_t j = 0; j < factor->size(); ++j) {
      map[i * factor->size() + j] = i;
      fiber.push_back(factor->strata()[j].cls);
    }
  return MorphismModel::make(next, at, std::move(map), std::move(fiber),
                             /*strict=*/true);
}

} // namespace

TowerPtr Tower::product(ModelPtr x) {
  auto t = std::shared_ptr<Tower>(new Tower());
  t->kind_ = Kind::Product;
  t->base_ = 1;
  t->period_ = 1;
  t->surjective_promise_ = true;
  ModelPtr factor = x;
  t->rule_ = [factor](int, const ModelPtr& at) { return product_step(at, factor); };
  t->models_.push_back(std::move(x));
  return t;
}

TowerPtr Tower::product_seq(ModelPtr x1, std::function<ModelPtr(int)> factor_at) {
  auto t = std::shared_ptr<Tower>(new Tower());
  t->kind_ = Kind::Product;
  t->base_ = 1;
  t->surjective_promise_ = true;
  t->rule_ = [factor_at = std::move(factor_at)](int level, const ModelPtr& at) {
    return product_step(at, factor_at(level));
  };
  t->models_.push_back(std::move(x1));
  return t;
}

namespace {

MorphPtr bundle_step(const ModelPtr& at, const GClass& f, const std::string& name) {
  if (f.is_zero()) throw DomainError("zero fiber class in bundle tower");
  std::vector<Stratum> strata;
  strata.reserve(at->size());
  for (const auto& s : at->strata()) strata.push_back({s.id, s.cls * f});
  ModelPtr next = VarietyModel::make(name, at->table(), std::move(strata));
  std::vector<size_t> map(next->size());
  std::iota(map.begin(), map.end(), size_t{0});
  std::vector<GClass> fiber(next->size(), f);
  return MorphismModel::make(std::move(next), at, std::move(map),
                             std::move(fiber), /*strict=*/true);
}

} // namespace

TowerPtr Tower::bundle(ModelPtr x0, std::vector<GClass> fibers, bool periodic) {
  if (periodic && fibers.empty())
    throw DomainError("periodic bundle tower needs at least one fiber class");
  for (const auto& f : fibers) {
    if (f.is_zero()) throw DomainError("zero fiber class in bundle tower");
    rings::require_same_table(f.table(), x0->table(), "bundle tower");
  }
  auto t = std::shared_ptr<Tower>(new Tower());
  t->kind_ = Kind::Bundle;
  t->base_ = 1;
  t->surjective_promise_ = true;
  if (periodic)
    t->period_ = static_cast<int>(fibers.size());
  else
    t->top_ = 1 + static_cast<int>(fibers.size());
  const std::string name = x0->name();
  t->rule_ = [fibers, periodic, name](int level, const ModelPtr& at) {
    const size_t idx = static_cast<size_t>(level - 1);
    const GClass& f = periodic ? fibers[idx % fibers.size()] : fibers[idx];
    return bundle_step(at, f, name + "_" + std::to_string(level + 1));
  };
  t->models_.push_back(std::move(x0));
  return t;
}

TowerPtr Tower::bundle_rule(ModelPtr x0, std::function<GClass(int)> fiber_at) {
  auto t = std::shared_ptr<Tower>(new Tower());
  t->kind_ = Kind::Bundle;
  t->base_ = 1;
  t->surjective_promise_ = true;
  const std::string name = x0->name();
  t->rule_ = [fiber_at = std::move(fiber_at), name](int level, const ModelPtr& at) {
    return bundle_step(at, fiber_at(level), name + "_" + std::to_string(level + 1));
  };
  t->models_.push_back(std::move(x0));
  return t;
}

TowerPtr Tower::from_steps(std::vector<MorphPtr> steps, int base) {
  if (steps.empty()) throw DomainError("explicit tower needs at least one step");
  for (size_t k = 0; k + 1 < steps.size(); ++k)
    if (!model_equal(steps[k + 1]->target(), steps[k]->source()))
      throw MismatchError("explicit tower steps do not chain at step " +
                          std::to_string(k));
  auto t = std::shared_ptr<Tower>(new Tower());
  t->kind_ = Kind::Steps;
  t->base_ = base;
  t->top_ = base + static_cast<int>(steps.size());
  t->surjective_promise_ = std::all_of(
      steps.begin(), steps.end(), [](const MorphPtr& s) { return s->surjective(); });
  t->models_.push_back(steps.front()->target());
  t->rule_ = [steps, base](int level, const ModelPtr&) {
    return steps[static_cast<size_t>(level - base)];
  };
  return t;
}

TowerPtr Tower::from_rule(ModelPtr base_model, int base,
                          std::function<MorphPtr(int, const ModelPtr&)> rule,
                          bool surjective_promise) {
  auto t = std::shared_ptr<Tower>(new Tower());
  t->kind_ = Kind::Rule;
  t->base_ = base;
  t->surjective_promise_ = surjective_promise;
  t->rule_ = std::move(rule);
  t->models_.push_back(std::move(base_model));
  return t;
}

TowerPtr Tower::arc(ModelPtr x, int d) {
  if (d <= 0) throw DomainError("arc tower needs dimension d >= 1");
  const GClass ld = GClass::of_monomial(
      x->table(), rings::Monomial::make({{"L", d}}), 1);
  auto t = std::shared_ptr<Tower>(new Tower());
  t->kind_ = Kind::Arc;
  t->base_ = 0;
  t->period_ = 1;
  t->arc_dim_ = d;
  t->surjective_promise_ = true;
  const std::string name = x->name();
  t->rule_ = [ld, name](int level, const ModelPtr& at) {
    return bundle_step(at, ld, name + "_jet" + std::to_string(level + 1));
  };
  t->models_.push_back(std::move(x));
  return t;
}

// --- ProFunction / CylinderSet / ProPoint -----------------------------------------

ProFunction::ProFunction(TowerPtr t, int lv, ConstructibleFunction f)
    : tower(std::move(t)), level(lv), fn(std::move(f)) {
  geom::require_same_model(fn.parent(), tower->model(level), "pro function");
}

CylinderSet::CylinderSet(TowerPtr t, int lv, ConstructibleSet s)
    : tower(std::move(t)), level(lv), set(std::move(s)) {
  geom::require_same_model(set.parent(), tower->model(level), "cylinder set");
}

ProPoint ProPoint::make(TowerPtr tower, std::vector<std::string> ids) {
  ProPoint p;
  p.tower_ = tower;
  const int base = tower->base();
  for (size_t i = 0; i < ids.size(); ++i)
    p.idx_.push_back(tower->model(base + static_cast<int>(i))->index_of(ids[i]));
  for (size_t i = 0; i + 1 < p.idx_.size(); ++i) {
    MorphPtr st = tower->step(base + static_cast<int>(i));
    if (st->map_of(p.idx_[i + 1]) != p.idx_[i])
      throw DomainError("incompatible point stream at level " +
                        std::to_string(base + static_cast<int>(i) + 1));
  }
  return p;
}

size_t ProPoint::at_level(int level) const {
  const int i = level - tower_->base();
  if (i < 0 || static_cast<size_t>(i) >= idx_.size())
    throw LevelError("point stream not realized to level " + std::to_string(level));
  return idx_[static_cast<size_t>(i)];
}

// --- lifting -----------------------------------------------------------------------

ProFunction lift(const ProFunction& pf, int m) {
  if (m < pf.level)
    throw LevelError("cannot lift below the current level");
  ConstructibleFunction fn = pf.fn;
  for (int k = pf.level; k < m; ++k) fn = pullback(*pf.tower->step(k), fn);
  return ProFunction(pf.tower, m, std::move(fn));
}

CylinderSet lift_cyl(const CylinderSet& c, int m) {
  if (m < c.level)
    throw LevelError("cannot lift below the current level");
  ConstructibleSet set = c.set;
  for (int k = c.level; k < m; ++k) {
    MorphPtr st = c.tower->step(k);
    std::vector<bool> members(st->source()->size());
    for (size_t s = 0; s < members.size(); ++s)
      members[s] = set.contains(st->map_of(s));
    set = ConstructibleSet(st->source(), std::move(members));
  }
  return CylinderSet(c.tower, m, std::move(set));
}

namespace {

void require_same_tower(const TowerPtr& a, const TowerPtr& b, const char* what) {
  if (a != b) throw MismatchError(std::string("tower mismatch in ") + what);
}

} // namespace

ProFunction pro_add(const ProFunction& a, const ProFunction& b) {
  require_same_tower(a.tower, b.tower, "pro_add");
  const int m = std::max(a.level, b.level);
  return ProFunction(a.tower, m, geom::fn_add(lift(a, m).fn, lift(b, m).fn));
}

EqVerdict pro_eq(const ProFunction& a, const ProFunction& b, int horizon) {
  require_same_tower(a.tower, b.tower, "pro_eq");
  const TowerPtr& t = a.tower;
  const int m0 = std::max(a.level, b.level);
  int m_end = m0 + std::max(horizon, 0);
  if (t->finite()) m_end = std::min(m_end, *t->top());

  ProFunction la = lift(a, m0);
  ProFunction lb = lift(b, m0);
  for (int m = m0;;) {
    if (la.fn == lb.fn) return {true, true, m};
    // Surjective steps keep distinct representatives distinct forever.
    if (t->all_steps_surjective()) return {false, true, m};
    if (m >= m_end) break;
    ++m;
    la = lift(la, m);
    lb = lift(lb, m);
  }
  const bool frozen = t->finite() && m_end == *t->top();
  return {false, frozen, m_end};
}

Int eval(const ProFunction& pf, const ProPoint& x) {
  require_same_tower(pf.tower, x.tower(), "eval");
  return pf.fn.at(x.at_level(pf.level));
}

ProFunction procharacteristic(TowerPtr tower) {
  const int base = tower->base();
  auto fn = ConstructibleFunction::constant(tower->model(base), 1);
  return ProFunction(std::move(tower), base, std::move(fn));
}

// --- chi_pro / gamma_pro -------------------------------------------------------------

namespace {

Int step_chi(const Tower& t, int k) {
  MorphPtr st = t.step(k);
  auto c = st->constant_fchi();
  if (!c)
    throw DomainError("non-constant fiber Euler weight at step " +
                      std::to_string(k));
  return *c;
}

// The single chi value of a constant-fiber tower, inspected over the realized
// range [base, upto]; at least one step is realized.
Int common_step_chi(const Tower& t, int upto) {
  const int last = std::max(upto, t.base() + 1);
  Int c = step_chi(t, t.base());
  for (int k = t.base() + 1; k < last; ++k)
    if (step_chi(t, k) != c)
      throw DomainError("shift w needs a constant-fiber tower");
  return c;
}

GClass step_class(const Tower& t, int k) {
  MorphPtr st = t.step(k);
  if (!st->strict() || !st->strictness_holds())
    throw StrictnessError("step " + std::to_string(k) +
                          " is not strict (piecewise-trivial)");
  auto f = st->single_fiber_class();
  if (!f)
    throw DomainError("multiple distinct fiber classes in step " +
                      std::to_string(k));
  return *f;
}

GClass common_step_class(const Tower& t, int upto) {
  const int last = std::max(upto, t.base() + 1);
  GClass c = step_class(t, t.base());
  for (int k = t.base() + 1; k < last; ++k)
    if (step_class(t, k) != c)
      throw DomainError("shift w needs a single-fiber tower");
  return c;
}

} // namespace

Rat chi_pro(const ProFunction& pf, int w) {
  const Int num = geom::chi_of_fn(pf.fn);
  Int den = 1;
  for (int k = pf.tower->base(); k < pf.level; ++k) {
    const Int c = step_chi(*pf.tower, k);
    if (c == 0)
      throw ZeroMultiplierError("zero fiber Euler number at step " +
                                std::to_string(k));
    den *= c;
  }
  Rat out(num, den);
  if (w != 0) {
    const Int c = common_step_chi(*pf.tower, pf.level);
    if (c == 0) throw ZeroMultiplierError("zero fiber Euler number");
    out = out * rings::int_pow(c, -static_cast<long long>(w));
  }
  return out;
}

LocClass gamma_pro(const ProFunction& pf, int w) {
  const GClass num = geom::gamma_of_fn(pf.fn);
  std::vector<std::pair<GClass, unsigned>> den;
  for (int k = pf.tower->base(); k < pf.level; ++k)
    den.emplace_back(step_class(*pf.tower, k), 1);
  LocClass out = LocClass::make(num, std::move(den));
  if (w != 0) {
    const GClass c = common_step_class(*pf.tower, pf.level);
    out = out.shift_by(c, w);
  }
  return out;
}

// --- step systems ---------------------------------------------------------------------

const Int& StepInts::at(int index) const {
  if (index < 0) throw DomainError("negative step index");
  if (periodic) {
    if (values.empty()) throw DomainError("empty periodic system");
    return values[static_cast<size_t>(index) % values.size()];
  }
  if (static_cast<size_t>(index) >= values.size())
    throw DomainError("projective system shorter than required");
  return values[static_cast<size_t>(index)];
}

const GClass& StepClasses::at(int index) const {
  if (index < 0) throw DomainError("negative step index");
  if (periodic) {
    if (values.empty()) throw DomainError("empty periodic system");
    return values[static_cast<size_t>(index) % values.size()];
  }
  if (static_cast<size_t>(index) >= values.size())
    throw DomainError("projective system shorter than required");
  return values[static_cast<size_t>(index)];
}

StepInts fiber_chi_system(const Tower& tower, int count) {
  StepInts out;
  for (int k = tower.base(); k < tower.base() + count; ++k)
    out.values.push_back(step_chi(tower, k));
  return out;
}

StepClasses fiber_class_system(const Tower& tower, int count) {
  StepClasses out;
  for (int k = tower.base(); k < tower.base() + count; ++k)
    out.values.push_back(step_class(tower, k));
  return out;
}

// --- stability -------------------------------------------------------------------------

namespace {

long long lcm_ll(long long a, long long b) { return a / std::gcd(a, b) * b; }

// Effective number of levels to examine above the representative, and whether
// a clean pass is definitive.
std::pair<int, bool> stability_span(const Tower& t, bool system_periodic,
                                    size_t system_len, int level, int horizon) {
  if (t.finite()) {
    const int span = *t.top() - level;
    return {span, true};
  }
  if (t.period() && system_periodic && system_len > 0) {
    const long long span =
        lcm_ll(*t.period(), static_cast<long long>(system_len));
    return {static_cast<int>(std::min<long long>(span, 64)), true};
  }
  return {std::max(horizon, 0), false};
}

} // namespace

StabilityVerdict is_chi_stable(const ProFunction& pf, const StepInts& p,
                               int horizon) {
  const Int chi0 = geom::chi_of_fn(pf.fn);
  const auto [span, definitive] = stability_span(
      *pf.tower, p.periodic, p.values.size(), pf.level, horizon);
  const int base = pf.tower->base();
  ProFunction cur = pf;
  Int factor = 1;
  for (int m = pf.level + 1; m <= pf.level + span; ++m) {
    const Int& pk = p.at(m - 1 - base);
    if (pk == 0)
      throw ZeroMultiplierError("zero entry in the projective system of integers");
    factor *= pk;
    cur = lift(cur, m);
    if (geom::chi_of_fn(cur.fn) != factor * chi0)
      return {false, true, m, m};
  }
  return {true, definitive, pf.level + span, std::nullopt};
}

StabilityVerdict is_gamma_stable(const ProFunction& pf, const StepClasses& f,
                                 int horizon) {
  const GClass gamma0 = geom::gamma_of_fn(pf.fn);
  const auto [span, definitive] = stability_span(
      *pf.tower, f.periodic, f.values.size(), pf.level, horizon);
  const int base = pf.tower->base();
  ProFunction cur = pf;
  GClass factor = GClass::unit(gamma0.table());
  for (int m = pf.level + 1; m <= pf.level + span; ++m) {
    const GClass& fk = f.at(m - 1 - base);
    if (fk.is_zero())
      throw DomainError("zero class in the projective system of classes");
    factor = factor * fk;
    cur = lift(cur, m);
    if (geom::gamma_of_fn(cur.fn) != factor * gamma0)
      return {false, true, m, m};
  }
  return {true, definitive, pf.level + span, std::nullopt};
}

namespace {

Int stable_chi_den(const ProFunction& pf, const StepInts& p) {
  Int den = 1;
  for (int k = pf.tower->base(); k < pf.level; ++k) {
    const Int& pk = p.at(k - pf.tower->base());
    if (pk == 0)
      throw ZeroMultiplierError("zero entry in the projective system of integers");
    den *= pk;
  }
  return den;
}

std::vector<std::pair<GClass, unsigned>> stable_gamma_den(const ProFunction& pf,
                                                          const StepClasses& f) {
  std::vector<std::pair<GClass, unsigned>> den;
  for (int k = pf.tower->base(); k < pf.level; ++k)
    den.emplace_back(f.at(k - pf.tower->base()), 1);
  return den;
}

} // namespace

Rat stable_chi_pro(const ProFunction& pf, const StepInts& p, int horizon) {
  const auto verdict = is_chi_stable(pf, p, horizon);
  if (!verdict.stable)
    throw StabilityError("function is not chi-stable (witness level " +
                         std::to_string(*verdict.witness_level) + ")");
  return Rat(geom::chi_of_fn(pf.fn), stable_chi_den(pf, p));
}

LocClass stable_gamma_pro(const ProFunction& pf, const StepClasses& f,
                          int horizon) {
  const auto verdict = is_gamma_stable(pf, f, horizon);
  if (!verdict.stable)
    throw StabilityError("function is not gamma-stable (witness level " +
                         std::to_string(*verdict.witness_level) + ")");
  return LocClass::make(geom::gamma_of_fn(pf.fn), stable_gamma_den(pf, f));
}

// --- cylinder algebra ----------------------------------------------------------------

namespace {

std::pair<CylinderSet, CylinderSet> to_common_level(const CylinderSet& a,
                                                    const CylinderSet& b,
                                                    const char* what) {
  require_same_tower(a.tower, b.tower, what);
  const int m = std::max(a.level, b.level);
  return {lift_cyl(a, m), lift_cyl(b, m)};
}

} // namespace

CylinderSet cyl_union(const CylinderSet& a, const CylinderSet& b) {
  auto [la, lb] = to_common_level(a, b, "cyl_union");
  return CylinderSet(la.tower, la.level, la.set.unite(lb.set));
}

CylinderSet cyl_intersect(const CylinderSet& a, const CylinderSet& b) {
  auto [la, lb] = to_common_level(a, b, "cyl_intersect");
  return CylinderSet(la.tower, la.level, la.set.intersect(lb.set));
}

CylinderSet cyl_diff(const CylinderSet& a, const CylinderSet& b) {
  auto [la, lb] = to_common_level(a, b, "cyl_diff");
  return CylinderSet(la.tower, la.level, la.set.difference(lb.set));
}

CylinderSet cyl_symmdiff(const CylinderSet& a, const CylinderSet& b) {
  auto [la, lb] = to_common_level(a, b, "cyl_symmdiff");
  return CylinderSet(la.tower, la.level, la.set.symmdiff(lb.set));
}

EqVerdict cyl_eq(const CylinderSet& a, const CylinderSet& b, int horizon) {
  require_same_tower(a.tower, b.tower, "cyl_eq");
  const auto ia = ProFunction(a.tower, a.level,
                              ConstructibleFunction::indicator(a.set));
  const auto ib = ProFunction(b.tower, b.level,
                              ConstructibleFunction::indicator(b.set));
  return pro_eq(ia, ib, horizon);
}

std::map<Int, CylinderSet> level_sets(const ProFunction& pf) {
  std::map<Int, CylinderSet> out;
  for (auto& [value, set] : pf.fn.level_sets()) {
    if (value == 0) continue;
    out.emplace(value, CylinderSet(pf.tower, pf.level, std::move(set)));
  }
  return out;
}

Rat integrate_chi_pro(const ProFunction& pf, const StepInts& p,
                      const ChiWeight& f, int horizon) {
  const auto verdict = is_chi_stable(pf, p, horizon);
  if (!verdict.stable)
    throw StabilityError("integrand is not chi-stable (witness level " +
                         std::to_string(*verdict.witness_level) + ")");
  const Int den = stable_chi_den(pf, p);
  Rat total(0);
  for (const auto& [value, cyl] : level_sets(pf)) {
    auto weight = f(value);
    if (!weight)
      throw DomainError("weight function undefined at realized value " +
                        value.str());
    total = total + *weight * Rat(geom::chi_of_set(cyl.set), den);
  }
  return total;
}

LocClass integrate_gamma_pro(const ProFunction& pf, const StepClasses& fc,
                             const GammaWeight& f, int horizon) {
  const auto verdict = is_gamma_stable(pf, fc, horizon);
  if (!verdict.stable)
    throw StabilityError("integrand is not gamma-stable (witness level " +
                         std::to_string(*verdict.witness_level) + ")");
  const auto den = stable_gamma_den(pf, fc);
  LocClass total = LocClass::make(GClass::zero(pf.fn.parent()->table()));
  for (const auto& [value, cyl] : level_sets(pf)) {
    auto weight = f(value);
    if (!weight)
      throw DomainError("weight function undefined at realized value " +
                        value.str());
    total = rings::loc_add(
        total,
        rings::loc_mul(*weight, LocClass::make(geom::gamma_of_set(cyl.set), den)));
  }
  return total;
}

std::optional<ProFunction> SeriesProFunction::term(int n) const {
  if (n < 1) return std::nullopt;
  if (rule) return rule(n);
  if (static_cast<size_t>(n) <= terms.size())
    return terms[static_cast<size_t>(n) - 1];
  return std::nullopt;
}

std::vector<Rat> chi_pro_partial_sums(const SeriesProFunction& s, int count) {
  std::vector<Rat> out;
  Rat acc(0);
  for (int j = 1; j <= count; ++j) {
    if (auto term = s.term(j)) acc = acc + chi_pro(*term);
    out.push_back(acc);
  }
  return out;
}

// --- equipped systems ---------------------------------------------------------------

biv::BivClassSystem unit_system(const TowerPtr& tower, int depth) {
  biv::BivClassSystem sys;
  for (int k = tower->base(); k < tower->base() + depth; ++k)
    sys.step_classes.push_back(biv::BivariantFn::unit(tower->step(k)));
  return sys;
}

namespace {

const biv::BivariantFn& system_class_at(const biv::BivClassSystem& sys,
                                        const Tower& tower, int k) {
  const size_t idx = static_cast<size_t>(k - tower.base());
  if (idx >= sys.step_classes.size())
    throw DomainError("bivariant class system shorter than required");
  const auto& cls = sys.step_classes[idx];
  if (!morphism_equal(cls.over(), tower.step(k)))
    throw MismatchError("system class at step " + std::to_string(k) +
                        " is not over the tower step");
  return cls;
}

} // namespace

ProFunction lift_equipped(const ProFunction& pf, const biv::BivClassSystem& sys,
                          int m) {
  if (m < pf.level)
    throw LevelError("cannot lift below the current level");
  ConstructibleFunction fn = pf.fn;
  for (int k = pf.level; k < m; ++k) {
    const auto& cls = system_class_at(sys, *pf.tower, k);
    fn = geom::fn_mul(cls.fn(), pullback(*pf.tower->step(k), fn));
  }
  return ProFunction(pf.tower, m, std::move(fn));
}

Rat chi_pro_equipped(const ProFunction& pf, const biv::BivClassSystem& sys) {
  const Int num = geom::chi_of_fn(pf.fn);
  Int den = 1;
  for (int k = pf.tower->base(); k < pf.level; ++k) {
    const Int c = biv::chi_f(system_class_at(sys, *pf.tower, k));
    if (c == 0)
      throw ZeroMultiplierError("zero fiber weight at step " + std::to_string(k));
    den *= c;
  }
  return Rat(num, den);
}

// --- promorphisms ---------------------------------------------------------------------

ProMorphism::ProMorphism(TowerPtr source, TowerPtr target,
                         std::function<int(int)> xi,
                         std::function<MorphPtr(int)> map_rule, bool fiber_square)
    : source_(std::move(source)), target_(std::move(target)), xi_(std::move(xi)),
      rule_(std::move(map_rule)), fiber_square_(fiber_square) {}

MorphPtr ProMorphism::map_at(int n) const {
  {
    std::lock_guard lk(cache_->mu);
    auto it = cache_->maps.find(n);
    if (it != cache_->maps.end()) return it->second;
  }
  MorphPtr f = rule_(n);
  if (!model_equal(f->source(), source_->model(xi_(n))) ||
      !model_equal(f->target(), target_->model(n)))
    throw MismatchError("promorphism level map has wrong endpoints at level " +
                        std::to_string(n));
  std::lock_guard lk(cache_->mu);
  cache_->maps.emplace(n, f);
  return f;
}

ProFunction pro_pushforward(const ProMorphism& phi, const ProFunction& pf) {
  require_same_tower(pf.tower, phi.source(), "pro_pushforward");
  int n = phi.target()->base();
  while (phi.xi(n) < pf.level) {
    if (phi.target()->finite() && n >= *phi.target()->top())
      throw LevelError("promorphism does not reach the representative level");
    ++n;
  }
  auto lifted = lift(pf, phi.xi(n));
  return ProFunction(phi.target(), n, pushforward(*phi.map_at(n), lifted.fn));
}

namespace {

// Composite of the source steps covering [lo, hi): model(hi) -> model(lo).
MorphPtr composite_step(const Tower& t, int lo, int hi) {
  if (hi <= lo)
    throw DomainError("promorphism level map xi must be strictly increasing");
  MorphPtr acc = t.step(hi - 1);
  for (int k = hi - 2; k >= lo; --k) acc = geom::compose(t.step(k), acc);
  return acc;
}

ConstructibleFunction random_fn(const ModelPtr& model, Rng& rng) {
  std::vector<Int> values(model->size());
  for (auto& v : values) v = rng.range(-4, 4);
  return ConstructibleFunction(model, std::move(values));
}

} // namespace

NaturalityReport check_naturality(const ProMorphism& phi, int depth,
                                  std::uint64_t seed) {
  NaturalityReport report;
  Rng rng(seed);
  const TowerPtr& src = phi.source();
  const TowerPtr& tgt = phi.target();
  const int base = tgt->base();

  for (int n = base; n < base + depth; ++n) {
    NaturalityItem square{n, "square-structure", true, ""};
    NaturalityItem change{n, "base-change", true, ""};
    NaturalityItem chipro{n, "chi-pro", true, ""};
    try {
      MorphPtr f_lo = phi.map_at(n);
      MorphPtr f_hi = phi.map_at(n + 1);
      MorphPtr rho = tgt->step(n);
      MorphPtr sigma = composite_step(*src, phi.xi(n), phi.xi(n + 1));

      // Commutation of the stratum maps plus, for fiber-square promorphisms,
      // strictness of sigma and the pullback condition on fiber data.
      for (size_t y = 0; y < sigma->source()->size() && square.pass; ++y) {
        const size_t s = sigma->map_of(y);
        const size_t t = f_hi->map_of(y);
        if (rho->map_of(t) != f_lo->map_of(s)) {
          square.pass = false;
          square.witness = "stratum " + sigma->source()->strata()[y].id +
                           ": square does not commute";
          break;
        }
        if (phi.fiber_square()) {
          if (sigma->fiber()[y] != rho->fiber()[t]) {
            square.pass = false;
            square.witness = "stratum " + sigma->source()->strata()[y].id +
                             ": fiber class differs from the base step";
            break;
          }
          if (f_hi->fiber()[y] != f_lo->fiber()[s]) {
            square.pass = false;
            square.witness = "stratum " + sigma->source()->strata()[y].id +
                             ": map fiber differs from the level below";
            break;
          }
          const GClass expect =
              sigma->target()->strata()[s].cls * sigma->fiber()[y];
          if (sigma->source()->strata()[y].cls != expect) {
            square.pass = false;
            square.witness = "stratum " + sigma->source()->strata()[y].id +
                             ": strict factorization fails";
            break;
          }
        }
      }
      if (square.pass && phi.fiber_square()) {
        // The pairing (sigma, f_hi) must hit each matching pair exactly once.
        std::map<std::pair<size_t, size_t>, int> seen;
        for (size_t y = 0; y < sigma->source()->size(); ++y)
          seen[{sigma->map_of(y), f_hi->map_of(y)}]++;
        for (size_t s = 0; s < sigma->target()->size() && square.pass; ++s)
          for (size_t t = 0; t < rho->source()->size() && square.pass; ++t) {
            if (f_lo->map_of(s) != rho->map_of(t)) continue;
            auto it = seen.find({s, t});
            if (it == seen.end() || it->second != 1) {
              square.pass = false;
              square.witness = "pair (" + sigma->target()->strata()[s].id +
                               ", " + rho->source()->strata()[t].id +
                               ") is not covered exactly once";
            }
          }
      }

      // Pushforward-then-lift against lift-then-pushforward.
      for (int trial = 0; trial < 3 && change.pass; ++trial) {
        const auto beta = random_fn(sigma->target(), rng);
        const auto lhs = pushforward(*f_hi, pullback(*sigma, beta));
        const auto rhs = pullback(*rho, pushforward(*f_lo, beta));
        if (lhs != rhs) {
          change.pass = false;
          change.witness = "pushforward does not commute with lifting";
        }
      }

      // chi_pro must agree before and after pushing along the promorphism.
      for (int trial = 0; trial < 2 && chipro.pass; ++trial) {
        const auto beta = random_fn(sigma->target(), rng);
        const ProFunction pf(src, phi.xi(n), beta);
        const Rat lhs = chi_pro(pf);
        const Rat rhs = chi_pro(pro_pushforward(phi, pf));
        if (lhs != rhs) {
          chipro.pass = false;
          chipro.witness = "chi_pro square fails: " + lhs.str() +
                           " != " + rhs.str();
        }
      }
    } catch (const Error& e) {
      square.pass = false;
      square.witness = e.what();
    }
    for (auto* item : {&square, &change, &chipro}) {
      if (!item->pass) report.pass = false;
      report.items.push_back(*item);
    }
  }
  return report;
}

std::pair<TowerPtr, ProMorphism> induced_tower(const MorphPtr& f,
                                               const TowerPtr& target) {
  if (!model_equal(f->target(), target->model(target->base())))
    throw MismatchError("induced tower: morphism does not land in the base model");

  struct State {
    std::mutex mu;
    std::vector<MorphPtr> f_maps;
  };
  auto st = std::make_shared<State>();
  st->f_maps.push_back(f);
  const int base = target->base();

  auto rule = [st, target, base](int level, const ModelPtr& at) -> MorphPtr {
    std::lock_guard lk(st->mu);
    const size_t i = static_cast<size_t>(level - base);
    if (i + 1 != st->f_maps.size() ||
        !model_equal(st->f_maps[i]->source(), at))
      throw LevelError("induced tower realized out of order");
    auto sq = geom::fiber_product(st->f_maps[i], target->step(level));
    st->f_maps.push_back(sq.f_prime);
    return sq.pi_prime;
  };

  // Levels past a finite target do not exist; realizing them throws inside
  // target->step, so no extra ceiling is needed here.
  TowerPtr source = Tower::from_rule(f->source(), base, std::move(rule),
                                     target->all_steps_surjective());
  auto map_rule = [st, source, base](int n) -> MorphPtr {
    source->model(n);
    std::lock_guard lk(st->mu);
    return st->f_maps[static_cast<size_t>(n - base)];
  };
  ProMorphism phi(source, target, [](int n) { return n; }, std::move(map_rule),
                  /*fiber_square=*/true);
  return {source, std::move(phi)};
}

} // namespace prochern::prosys
