#include "prochern/randgen.hpp"

namespace prochern::gen {

using geom::MorphismModel;
using geom::Stratum;
using geom::VarietyModel;
using rings::AtomTable;
using rings::Int;
using rings::Monomial;

AtomTablePtr random_table(Rng& rng, const ModelLimits& lim) {
  static const char* names[] = {"A", "B", "C", "D", "E", "M"};
  std::vector<AtomTable::Entry> entries;
  const int extras = static_cast<int>(rng.range(0, lim.max_extra_atoms));
  for (int i = 0; i < extras; ++i)
    entries.push_back({names[i], Int(rng.range(-3, 3))});
  return AtomTable::make(std::move(entries));
}

GClass random_class(Rng& rng, const AtomTablePtr& table, const ModelLimits& lim,
                    bool nonzero) {
  for (;;) {
    GClass out = GClass::zero(table);
    const int terms = static_cast<int>(rng.range(1, lim.max_terms));
    for (int t = 0; t < terms; ++t) {
      std::vector<std::pair<std::string, int>> factors;
      const int deg = static_cast<int>(rng.range(0, lim.max_degree));
      for (int i = 0; i < deg; ++i) {
        const auto& entry =
            table->entries()[static_cast<size_t>(rng.range(
                0, static_cast<long long>(table->entries().size()) - 1))];
        factors.emplace_back(entry.symbol, 1);
      }
      Int coeff = rng.range(lim.coeff_lo, lim.coeff_hi);
      if (coeff == 0) coeff = 1;
      out = out + GClass::of_monomial(table, Monomial::make(std::move(factors)),
                                      coeff);
    }
    if (!nonzero || !out.is_zero()) return out;
  }
}

ModelPtr random_model(Rng& rng, const AtomTablePtr& table, const ModelLimits& lim) {
  const int strata = static_cast<int>(rng.range(1, lim.max_strata));
  std::vector<Stratum> out;
  for (int i = 0; i < strata; ++i)
    out.push_back({"s" + std::to_string(i), random_class(rng, table, lim)});
  return VarietyModel::make("X" + std::to_string(rng.range(0, 999)), table,
                            std::move(out));
}

ConstructibleFunction random_fn(Rng& rng, const ModelPtr& model, long long lo,
                                long long hi) {
  std::vector<Int> values(model->size());
  for (auto& v : values) v = rng.range(lo, hi);
  return ConstructibleFunction(model, std::move(values));
}

MorphPtr random_morphism_onto(Rng& rng, const ModelPtr& target, bool strict,
                              const ModelLimits& lim) {
  std::vector<Stratum> strata;
  std::vector<size_t> map;
  std::vector<GClass> fiber;
  for (size_t t = 0; t < target->size(); ++t) {
    const int count = static_cast<int>(rng.range(1, 3));
    for (int i = 0; i < count; ++i) {
      const GClass f = random_class(rng, target->table(), lim);
      const GClass cls =
          strict ? target->strata()[t].cls * f : random_class(rng, target->table(), lim);
      strata.push_back({target->strata()[t].id + "p" + std::to_string(i), cls});
      map.push_back(t);
      fiber.push_back(f);
    }
  }
  ModelPtr source = VarietyModel::make(target->name() + "src", target->table(),
                                       std::move(strata));
  return MorphismModel::make(std::move(source), target, std::move(map),
                             std::move(fiber), strict);
}

FiberSquare random_square(Rng& rng, const AtomTablePtr& table,
                          const ModelLimits& lim) {
  const ModelPtr base = random_model(rng, table, lim);
  const MorphPtr pi = random_morphism_onto(rng, base, /*strict=*/true, lim);
  const MorphPtr f = random_morphism_onto(rng, base, /*strict=*/true, lim);
  return geom::fiber_product(f, pi);
}

} // namespace prochern::gen
