#include "prochern/geom.hpp"

#include <algorithm>

namespace prochern::geom {

using rings::require_same_table;

// --- VarietyModel -------------------------------------------------------------

ModelPtr VarietyModel::make(std::string name, AtomTablePtr table,
                            std::vector<Stratum> strata) {
  std::vector<const std::string*> ids;
  ids.reserve(strata.size());
  for (const auto& s : strata) {
    if (s.id.empty()) throw DomainError("empty stratum id");
    if (s.cls.is_zero())
      throw DomainError("zero class on stratum " + s.id + " in " + name);
    require_same_table(table, s.cls.table(), "variety model");
    ids.push_back(&s.id);
  }
  std::sort(ids.begin(), ids.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (size_t i = 1; i < ids.size(); ++i)
    if (*ids[i] == *ids[i - 1])
      throw DomainError("duplicate stratum id: " + *ids[i] + " in " + name);
  return ModelPtr(
      new VarietyModel(std::move(name), std::move(table), std::move(strata)));
}

size_t VarietyModel::index_of(const std::string& id) const {
  auto i = find(id);
  if (!i) throw DomainError("unknown stratum " + id + " in " + name_);
  return *i;
}

std::optional<size_t> VarietyModel::find(const std::string& id) const {
  for (size_t i = 0; i < strata_.size(); ++i)
    if (strata_[i].id == id) return i;
  return std::nullopt;
}

Int VarietyModel::chi_of(size_t stratum) const {
  return rings::chi_hom(strata_[stratum].cls);
}

Int VarietyModel::chi() const {
  Int total = 0;
  for (size_t i = 0; i < strata_.size(); ++i) total += chi_of(i);
  return total;
}

GClass VarietyModel::gamma() const {
  GClass total = GClass::zero(table_);
  for (const auto& s : strata_) total = total + s.cls;
  return total;
}

bool model_equal(const ModelPtr& a, const ModelPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->size() != b->size()) return false;
  if (!rings::same_table(a->table(), b->table())) return false;
  for (size_t i = 0; i < a->size(); ++i) {
    if (a->strata()[i].id != b->strata()[i].id) return false;
    if (a->strata()[i].cls != b->strata()[i].cls) return false;
  }
  return true;
}

void require_same_model(const ModelPtr& a, const ModelPtr& b, const char* what) {
  if (!model_equal(a, b))
    throw MismatchError(std::string("parent model mismatch in ") + what);
}

// --- ConstructibleSet -----------------------------------------------------------

ConstructibleSet::ConstructibleSet(ModelPtr parent, std::vector<bool> members)
    : parent_(std::move(parent)), members_(std::move(members)) {
  if (members_.size() != parent_->size())
    throw DomainError("member list does not cover the parent strata");
}

ConstructibleSet ConstructibleSet::empty(ModelPtr parent) {
  std::vector<bool> m(parent->size(), false);
  return ConstructibleSet(std::move(parent), std::move(m));
}

ConstructibleSet ConstructibleSet::whole(ModelPtr parent) {
  std::vector<bool> m(parent->size(), true);
  return ConstructibleSet(std::move(parent), std::move(m));
}

ConstructibleSet ConstructibleSet::of_ids(ModelPtr parent,
                                          const std::vector<std::string>& ids) {
  std::vector<bool> m(parent->size(), false);
  for (const auto& id : ids) m[parent->index_of(id)] = true;
  return ConstructibleSet(std::move(parent), std::move(m));
}

bool ConstructibleSet::is_empty() const {
  return std::none_of(members_.begin(), members_.end(), [](bool b) { return b; });
}

std::vector<std::string> ConstructibleSet::ids() const {
  std::vector<std::string> out;
  for (size_t i = 0; i < members_.size(); ++i)
    if (members_[i]) out.push_back(parent_->strata()[i].id);
  return out;
}

namespace {

ConstructibleSet zip_sets(const ConstructibleSet& a, const ConstructibleSet& b,
                          bool (*op)(bool, bool), const char* what) {
  require_same_model(a.parent(), b.parent(), what);
  std::vector<bool> m(a.members().size());
  for (size_t i = 0; i < m.size(); ++i) m[i] = op(a.members()[i], b.members()[i]);
  return ConstructibleSet(a.parent(), std::move(m));
}

} // namespace

ConstructibleSet ConstructibleSet::unite(const ConstructibleSet& o) const {
  return zip_sets(*this, o, [](bool x, bool y) { return x || y; }, "set union");
}
ConstructibleSet ConstructibleSet::intersect(const ConstructibleSet& o) const {
  return zip_sets(*this, o, [](bool x, bool y) { return x && y; }, "set intersection");
}
ConstructibleSet ConstructibleSet::difference(const ConstructibleSet& o) const {
  return zip_sets(*this, o, [](bool x, bool y) { return x && !y; }, "set difference");
}
ConstructibleSet ConstructibleSet::symmdiff(const ConstructibleSet& o) const {
  return zip_sets(*this, o, [](bool x, bool y) { return x != y; }, "symmetric difference");
}
ConstructibleSet ConstructibleSet::complement() const {
  std::vector<bool> m(members_.size());
  for (size_t i = 0; i < m.size(); ++i) m[i] = !members_[i];
  return ConstructibleSet(parent_, std::move(m));
}

bool operator==(const ConstructibleSet& a, const ConstructibleSet& b) {
  require_same_model(a.parent(), b.parent(), "set equality");
  return a.members_ == b.members_;
}

// --- ConstructibleFunction -------------------------------------------------------

ConstructibleFunction::ConstructibleFunction(ModelPtr parent,
                                             std::vector<Int> values)
    : parent_(std::move(parent)), values_(std::move(values)) {
  if (values_.size() != parent_->size())
    throw DomainError("function is not total on the parent strata");
}

ConstructibleFunction ConstructibleFunction::constant(ModelPtr parent, Int value) {
  std::vector<Int> v(parent->size(), value);
  return ConstructibleFunction(std::move(parent), std::move(v));
}

ConstructibleFunction ConstructibleFunction::indicator(const ConstructibleSet& set) {
  std::vector<Int> v(set.parent()->size(), Int(0));
  for (size_t i = 0; i < v.size(); ++i)
    if (set.contains(i)) v[i] = 1;
  return ConstructibleFunction(set.parent(), std::move(v));
}

bool ConstructibleFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](const Int& v) { return v == 0; });
}

std::map<Int, ConstructibleSet> ConstructibleFunction::level_sets() const {
  std::map<Int, std::vector<bool>> raw;
  for (size_t i = 0; i < values_.size(); ++i) {
    auto it = raw.find(values_[i]);
    if (it == raw.end())
      it = raw.emplace(values_[i], std::vector<bool>(values_.size(), false)).first;
    it->second[i] = true;
  }
  std::map<Int, ConstructibleSet> out;
  for (auto& [v, m] : raw) out.emplace(v, ConstructibleSet(parent_, std::move(m)));
  return out;
}

bool operator==(const ConstructibleFunction& a, const ConstructibleFunction& b) {
  require_same_model(a.parent(), b.parent(), "function equality");
  return a.values_ == b.values_;
}

// --- MorphismModel ---------------------------------------------------------------

namespace {

void validate_shape(const ModelPtr& source, const ModelPtr& target,
                    const std::vector<size_t>& map,
                    const std::vector<GClass>& fiber) {
  if (map.size() != source->size())
    throw DomainError("stratum map is not total on the source");
  if (fiber.size() != source->size())
    throw DomainError("fiber data is not total on the source");
  require_same_table(source->table(), target->table(), "morphism model");
  for (size_t s = 0; s < map.size(); ++s) {
    if (map[s] >= target->size())
      throw DomainError("stratum map image out of range");
    if (fiber[s].is_zero())
      throw DomainError("zero fiber class on stratum " + source->strata()[s].id);
    require_same_table(fiber[s].table(), source->table(), "morphism fiber");
  }
}

} // namespace

MorphPtr MorphismModel::make(ModelPtr source, ModelPtr target,
                             std::vector<size_t> stratum_map,
                             std::vector<GClass> fiber, bool strict) {
  validate_shape(source, target, stratum_map, fiber);
  MorphPtr m(new MorphismModel(std::move(source), std::move(target),
                               std::move(stratum_map), std::move(fiber), strict));
  if (strict && !m->strictness_holds())
    throw StrictnessError("strict mode: cls(s) != cls(f(s)) * F_s somewhere");
  return m;
}

MorphPtr MorphismModel::make_unverified(ModelPtr source, ModelPtr target,
                                        std::vector<size_t> stratum_map,
                                        std::vector<GClass> fiber, bool strict) {
  validate_shape(source, target, stratum_map, fiber);
  return MorphPtr(new MorphismModel(std::move(source), std::move(target),
                                    std::move(stratum_map), std::move(fiber),
                                    strict));
}

MorphPtr MorphismModel::identity(ModelPtr model) {
  std::vector<size_t> map(model->size());
  std::vector<GClass> fiber(model->size(), GClass::unit(model->table()));
  for (size_t i = 0; i < map.size(); ++i) map[i] = i;
  ModelPtr copy = model;
  return make(std::move(model), std::move(copy), std::move(map), std::move(fiber),
              /*strict=*/true);
}

bool MorphismModel::surjective() const {
  std::vector<bool> hit(target_->size(), false);
  for (size_t t : map_) hit[t] = true;
  return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

Int MorphismModel::fchi(size_t t) const {
  Int total = 0;
  for (size_t s = 0; s < map_.size(); ++s)
    if (map_[s] == t) total += rings::chi_hom(fiber_[s]);
  return total;
}

std::vector<Int> MorphismModel::fchi_all() const {
  std::vector<Int> out(target_->size(), Int(0));
  for (size_t s = 0; s < map_.size(); ++s)
    out[map_[s]] += rings::chi_hom(fiber_[s]);
  return out;
}

std::optional<Int> MorphismModel::constant_fchi() const {
  if (target_->size() == 0) return Int(0);
  auto all = fchi_all();
  for (const auto& v : all)
    if (v != all[0]) return std::nullopt;
  return all[0];
}

std::optional<GClass> MorphismModel::single_fiber_class() const {
  if (fiber_.empty()) return std::nullopt;
  for (const auto& f : fiber_)
    if (f != fiber_[0]) return std::nullopt;
  return fiber_[0];
}

bool MorphismModel::strictness_holds() const {
  for (size_t s = 0; s < map_.size(); ++s) {
    const GClass expect = target_->strata()[map_[s]].cls * fiber_[s];
    if (source_->strata()[s].cls != expect) return false;
  }
  return true;
}

bool morphism_equal(const MorphPtr& a, const MorphPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (!model_equal(a->source(), b->source())) return false;
  if (!model_equal(a->target(), b->target())) return false;
  if (a->stratum_map() != b->stratum_map()) return false;
  for (size_t s = 0; s < a->fiber().size(); ++s)
    if (a->fiber()[s] != b->fiber()[s]) return false;
  return true;
}

// --- measures ---------------------------------------------------------------------

Int chi_of_set(const ConstructibleSet& w) {
  Int total = 0;
  for (size_t i = 0; i < w.members().size(); ++i)
    if (w.contains(i)) total += w.parent()->chi_of(i);
  return total;
}

GClass gamma_of_set(const ConstructibleSet& w) {
  GClass total = GClass::zero(w.parent()->table());
  for (size_t i = 0; i < w.members().size(); ++i)
    if (w.contains(i)) total = total + w.parent()->strata()[i].cls;
  return total;
}

Int chi_of_fn(const ConstructibleFunction& a) {
  Int total = 0;
  for (size_t i = 0; i < a.values().size(); ++i)
    total += a.at(i) * a.parent()->chi_of(i);
  return total;
}

GClass gamma_of_fn(const ConstructibleFunction& a) {
  GClass total = GClass::zero(a.parent()->table());
  for (size_t i = 0; i < a.values().size(); ++i)
    total = total + a.parent()->strata()[i].cls.scale(a.at(i));
  return total;
}

Rat integrate_chi(const ConstructibleFunction& a, const ChiWeight& f) {
  Rat total(0);
  for (const auto& [value, set] : a.level_sets()) {
    auto w = f(value);
    if (!w)
      throw DomainError("weight function undefined at realized value " +
                        value.str());
    total = total + *w * Rat(chi_of_set(set));
  }
  return total;
}

LocClass integrate_gamma(const ConstructibleFunction& a, const GammaWeight& f) {
  LocClass total = LocClass::make(GClass::zero(a.parent()->table()));
  for (const auto& [value, set] : a.level_sets()) {
    auto w = f(value);
    if (!w)
      throw DomainError("weight function undefined at realized value " +
                        value.str());
    total = rings::loc_add(
        total, rings::loc_mul(*w, LocClass::make(gamma_of_set(set))));
  }
  return total;
}

// --- functorial operations -----------------------------------------------------

ConstructibleFunction pushforward(const MorphismModel& f,
                                  const ConstructibleFunction& a) {
  require_same_model(a.parent(), f.source(), "pushforward");
  std::vector<Int> out(f.target()->size(), Int(0));
  for (size_t s = 0; s < f.stratum_map().size(); ++s)
    out[f.map_of(s)] += a.at(s) * rings::chi_hom(f.fiber()[s]);
  return ConstructibleFunction(f.target(), std::move(out));
}

ConstructibleFunction pullback(const MorphismModel& f,
                               const ConstructibleFunction& b) {
  require_same_model(b.parent(), f.target(), "pullback");
  std::vector<Int> out(f.source()->size());
  for (size_t s = 0; s < out.size(); ++s) out[s] = b.at(f.map_of(s));
  return ConstructibleFunction(f.source(), std::move(out));
}

ConstructibleFunction fn_add(const ConstructibleFunction& a,
                             const ConstructibleFunction& b) {
  require_same_model(a.parent(), b.parent(), "fn_add");
  std::vector<Int> out(a.values().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
  return ConstructibleFunction(a.parent(), std::move(out));
}

ConstructibleFunction fn_mul(const ConstructibleFunction& a,
                             const ConstructibleFunction& b) {
  require_same_model(a.parent(), b.parent(), "fn_mul");
  std::vector<Int> out(a.values().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
  return ConstructibleFunction(a.parent(), std::move(out));
}

ConstructibleFunction fn_scale(const ConstructibleFunction& a, const Int& c) {
  std::vector<Int> out(a.values().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * c;
  return ConstructibleFunction(a.parent(), std::move(out));
}

ModelPtr cross_model(const ModelPtr& x, const ModelPtr& y) {
  require_same_table(x->table(), y->table(), "cross_model");
  std::vector<Stratum> strata;
  strata.reserve(x->size() * y->size());
  for (const auto& s : x->strata())
    for (const auto& t : y->strata())
      strata.push_back({s.id + "." + t.id, s.cls * t.cls});
  return VarietyModel::make(x->name() + "x" + y->name(), x->table(),
                            std::move(strata));
}

ConstructibleFunction cross_fn(const ModelPtr& product,
                               const ConstructibleFunction& a,
                               const ConstructibleFunction& b) {
  const size_t rows = a.values().size(), cols = b.values().size();
  if (product->size() != rows * cols)
    throw MismatchError("product model does not match the factor sizes");
  std::vector<Int> out(rows * cols);
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) out[i * cols + j] = a.at(i) * b.at(j);
  return ConstructibleFunction(product, std::move(out));
}

ConstructibleFunction cross_fn(const ConstructibleFunction& a,
                               const ConstructibleFunction& b) {
  return cross_fn(cross_model(a.parent(), b.parent()), a, b);
}

MorphPtr compose(const MorphPtr& g, const MorphPtr& f) {
  if (!model_equal(f->target(), g->source()))
    throw MismatchError("compose: endpoints do not match");
  std::vector<size_t> map(f->stratum_map().size());
  std::vector<GClass> fiber;
  fiber.reserve(map.size());
  for (size_t s = 0; s < map.size(); ++s) {
    const size_t mid = f->map_of(s);
    map[s] = g->map_of(mid);
    fiber.push_back(f->fiber()[s] * g->fiber()[mid]);
  }
  const bool strict = f->strict() && g->strict();
  return MorphismModel::make(f->source(), g->target(), std::move(map),
                             std::move(fiber), strict);
}

FiberSquare fiber_product(const MorphPtr& f, const MorphPtr& pi) {
  if (!model_equal(f->target(), pi->target()))
    throw MismatchError("fiber_product: base models do not match");
  if (!pi->strict() || !pi->strictness_holds())
    throw StrictnessError("fiber_product requires a strict pi");

  std::vector<Stratum> strata;
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t s = 0; s < f->source()->size(); ++s)
    for (size_t t = 0; t < pi->source()->size(); ++t)
      if (f->map_of(s) == pi->map_of(t)) {
        strata.push_back({f->source()->strata()[s].id + "." +
                              pi->source()->strata()[t].id,
                          f->source()->strata()[s].cls * pi->fiber()[t]});
        pairs.emplace_back(s, t);
      }
  ModelPtr corner = VarietyModel::make(
      f->source()->name() + "x_" + pi->source()->name(), f->source()->table(),
      std::move(strata));

  std::vector<size_t> map_pi_prime(pairs.size()), map_f_prime(pairs.size());
  std::vector<GClass> fib_pi_prime, fib_f_prime;
  fib_pi_prime.reserve(pairs.size());
  fib_f_prime.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    map_pi_prime[i] = pairs[i].first;
    map_f_prime[i] = pairs[i].second;
    fib_pi_prime.push_back(pi->fiber()[pairs[i].second]);
    fib_f_prime.push_back(f->fiber()[pairs[i].first]);
  }
  MorphPtr pi_prime =
      MorphismModel::make(corner, f->source(), std::move(map_pi_prime),
                          std::move(fib_pi_prime), /*strict=*/true);
  const bool f_strict = f->strict() && f->strictness_holds();
  MorphPtr f_prime =
      MorphismModel::make(corner, pi->source(), std::move(map_f_prime),
                          std::move(fib_f_prime), f_strict);
  return FiberSquare{f, pi, corner, std::move(pi_prime), std::move(f_prime),
                     std::move(pairs)};
}

} // namespace prochern::geom
