#include <json.hpp>

#include "prochern/dsl.hpp"
#include "prochern/randgen.hpp"
#include "prochern/rng.hpp"

namespace prochern::dsl {

namespace {

constexpr const char* kVersion = "0.1.0";

using geom::ConstructibleFunction;
using prosys::ProFunction;

// --- target resolution -----------------------------------------------------------

const CylinderSet& resolve_cyl_decl(const Document& doc, const std::string& name) {
  const auto* c = doc.find_cyl(name);
  if (!c) throw DomainError("unknown cylinder '" + name + "'");
  return c->cyl;
}

CylinderSet resolve_cyl(const Document& doc, const CylExpr& e) {
  if (e.kind == CylExpr::Kind::Named) return resolve_cyl_decl(doc, e.name);
  const auto* t = doc.find_tower(e.tower);
  if (!t) throw DomainError("unknown tower '" + e.tower + "'");
  const auto model = t->tower->model(e.level);
  auto set = e.all ? geom::ConstructibleSet::whole(model)
                   : geom::ConstructibleSet::of_ids(model, e.strata);
  return CylinderSet(t->tower, e.level, std::move(set));
}

ProFunction resolve_pro(const Document& doc, const FnExpr& e) {
  switch (e.kind) {
    case FnExpr::Kind::Named: {
      const auto* p = doc.find_profn(e.name);
      if (!p) throw DomainError("unknown profn '" + e.name + "'");
      return p->fn;
    }
    case FnExpr::Kind::OneOf: {
      const auto* t = doc.find_tower(e.name);
      if (!t) throw DomainError("'" + e.name + "' is not a tower");
      return prosys::procharacteristic(t->tower);
    }
    case FnExpr::Kind::Indicator: {
      const auto& cyl = resolve_cyl_decl(doc, e.name);
      return ProFunction(cyl.tower, cyl.level,
                         ConstructibleFunction::indicator(cyl.set));
    }
  }
  throw DomainError("unresolvable function expression");
}

// Plain constructible function for the chi/gamma queries.
ConstructibleFunction resolve_plain(const Document& doc, const FnExpr& e) {
  if (e.kind == FnExpr::Kind::OneOf) {
    if (const auto* v = doc.find_variety(e.name))
      return ConstructibleFunction::constant(v->model, 1);
  }
  return resolve_pro(doc, e).fn;
}

geom::ChiWeight make_weight(const WeightSpec& w) {
  switch (w.kind) {
    case WeightSpec::Kind::Identity:
      return [](const rings::Int& n) { return std::optional<rings::Rat>(rings::Rat(n)); };
    case WeightSpec::Kind::Square:
      return [](const rings::Int& n) {
        return std::optional<rings::Rat>(rings::Rat(n * n));
      };
    case WeightSpec::Kind::Const: {
      const rings::Rat c = w.constant;
      return [c](const rings::Int&) { return std::optional<rings::Rat>(c); };
    }
    case WeightSpec::Kind::Table: {
      const auto table = w.table;
      return [table](const rings::Int& n) -> std::optional<rings::Rat> {
        for (const auto& [k, v] : table)
          if (k == n) return v;
        return std::nullopt;
      };
    }
  }
  return {};
}

geom::GammaWeight make_class_weight(const ClassWeightSpec& w,
                                    const rings::AtomTablePtr& table) {
  switch (w.kind) {
    case ClassWeightSpec::Kind::Identity:
      return [table](const rings::Int& n) {
        return std::optional<rings::LocClass>(
            rings::LocClass::make(rings::GClass::constant(table, n)));
      };
    case ClassWeightSpec::Kind::Const: {
      const rings::GClass c = *w.constant;
      return [c](const rings::Int&) {
        return std::optional<rings::LocClass>(rings::LocClass::make(c));
      };
    }
    case ClassWeightSpec::Kind::Table: {
      const auto tab = w.table;
      return [tab](const rings::Int& n) -> std::optional<rings::LocClass> {
        for (const auto& [k, v] : tab)
          if (k == n) return rings::LocClass::make(v);
        return std::nullopt;
      };
    }
  }
  return {};
}

prosys::StepInts resolve_p(const IntSystemSpec& spec, const ProFunction& pf,
                           int horizon) {
  if (!spec.fibers) return {spec.values, spec.periodic};
  const auto& t = *pf.tower;
  if (t.period()) {
    auto sys = prosys::fiber_chi_system(t, *t.period());
    sys.periodic = true;
    return sys;
  }
  const int count = (t.finite() ? *t.top() : pf.level + horizon) - t.base();
  return prosys::fiber_chi_system(t, count);
}

prosys::StepClasses resolve_classes(const ClassSystemSpec& spec,
                                    const ProFunction& pf, int horizon) {
  if (!spec.fibers) return {spec.values, spec.periodic};
  const auto& t = *pf.tower;
  if (t.period()) {
    auto sys = prosys::fiber_class_system(t, *t.period());
    sys.periodic = true;
    return sys;
  }
  const int count = (t.finite() ? *t.top() : pf.level + horizon) - t.base();
  return prosys::fiber_class_system(t, count);
}

// --- queries ---------------------------------------------------------------------

std::string eval_query(const Document& doc, const Query& q,
                       const EvalOptions& options) {
  switch (q.kind) {
    case Query::Kind::Chi:
      return geom::chi_of_fn(resolve_plain(doc, q.fn)).str();
    case Query::Kind::Gamma:
      return geom::gamma_of_fn(resolve_plain(doc, q.fn)).str();
    case Query::Kind::ChiPro:
      return prosys::chi_pro(resolve_pro(doc, q.fn), q.w).str();
    case Query::Kind::GammaPro:
      return prosys::gamma_pro(resolve_pro(doc, q.fn), q.w).str();
    case Query::Kind::Measure:
      return arcs::motivic_measure(resolve_cyl(doc, q.cyl)).str();
    case Query::Kind::IntegrateChi: {
      const ProFunction pf = resolve_pro(doc, q.fn);
      const auto p = resolve_p(q.p, pf, options.horizon);
      return prosys::integrate_chi_pro(pf, p, make_weight(q.weight),
                                       options.horizon)
          .str();
    }
    case Query::Kind::IntegrateGamma: {
      const ProFunction pf = resolve_pro(doc, q.fn);
      const auto fc = resolve_classes(q.classes, pf, options.horizon);
      return prosys::integrate_gamma_pro(
                 pf, fc, make_class_weight(q.class_weight, doc.table),
                 options.horizon)
          .str();
    }
  }
  throw DomainError("unresolvable query");
}

// --- checks ----------------------------------------------------------------------

Report::CheckResult run_projection_formula(const Document& doc, const Check& c,
                                           const EvalOptions& options) {
  Report::CheckResult out{check_name(c), true, ""};
  const int count = c.depth.value_or(options.depth);
  Rng rng(c.seed.value_or(options.seed));
  gen::ModelLimits lim;
  lim.max_strata = 4;
  for (int i = 0; i < count; ++i) {
    const auto square = gen::random_square(rng, doc.table, lim);
    const biv::BivariantFn b(square.pi, gen::random_fn(rng, square.pi->source()));
    const auto y = gen::random_fn(rng, square.f->source());
    const auto rep = biv::check_projection_formula(square, b, y);
    if (!rep.pass) {
      out.pass = false;
      out.witness = "square " + std::to_string(i) + ": " + rep.witness;
      break;
    }
  }
  return out;
}

Report::CheckResult run_naturality(const Document& doc, const Check& c,
                                   const EvalOptions& options) {
  Report::CheckResult out{check_name(c), true, ""};
  const auto* m = doc.find_morphism(c.morph);
  const auto* t = doc.find_tower(c.tower);
  if (!m || !t) throw DomainError("naturality check references unknown names");
  auto [source, phi] = prosys::induced_tower(m->morphism, t->tower);
  const auto rep = prosys::check_naturality(phi, c.depth.value_or(options.depth),
                                            c.seed.value_or(options.seed));
  if (!rep.pass) {
    out.pass = false;
    for (const auto& item : rep.items)
      if (!item.pass) {
        out.witness = "level " + std::to_string(item.level) + ": " + item.name +
                      ": " + item.witness;
        break;
      }
  }
  return out;
}

Report::CheckResult run_system(const Document& doc, const Check& c,
                               const EvalOptions& options) {
  Report::CheckResult out{check_name(c), true, ""};
  const auto* t = doc.find_tower(c.tower);
  if (!t) throw DomainError("system check references unknown tower");
  const int depth = c.depth.value_or(options.depth);
  const auto sys = prosys::unit_system(t->tower, depth);
  const auto steps = t->tower->steps_up_to(t->tower->base() + depth);
  const auto rep = biv::check_system(steps, sys, depth);
  if (!rep.pass) {
    out.pass = false;
    out.witness = rep.failures.empty() ? "cocycle law fails" : rep.failures.front();
  }
  return out;
}

Report::CheckResult run_diagrams(const Document& doc, const Check& c,
                                 const EvalOptions& options) {
  Report::CheckResult out{check_name(c), true, ""};
  const auto* t = doc.find_tower(c.tower);
  if (!t) throw DomainError("diagrams check references unknown tower");
  const auto tower = t->tower;
  const int depth = c.depth.value_or(options.depth);
  Rng rng(c.seed.value_or(options.seed));
  const int base = tower->base();

  // Probe once whether the gamma side is defined on this tower.
  bool gamma_defined = true;
  try {
    prosys::gamma_pro(prosys::lift(prosys::procharacteristic(tower), base + 1));
  } catch (const Error&) {
    gamma_defined = false;
  }

  auto fail = [&](const std::string& what) {
    out.pass = false;
    out.witness = what;
  };

  for (int trial = 0; trial < 3 * depth && out.pass; ++trial) {
    const int level = base + static_cast<int>(rng.range(0, 1));
    const int m = level + static_cast<int>(rng.range(1, std::max(1, depth)));
    const ProFunction pf(tower, level, gen::random_fn(rng, tower->model(level)));
    const ProFunction lifted = prosys::lift(pf, m);
    if (prosys::chi_pro(pf) != prosys::chi_pro(lifted)) {
      fail("chi_pro not lift-invariant at level " + std::to_string(m));
      break;
    }
    if (gamma_defined &&
        !rings::loc_eq(prosys::gamma_pro(pf), prosys::gamma_pro(lifted))) {
      fail("gamma_pro not lift-invariant at level " + std::to_string(m));
      break;
    }
    const ProFunction pf2(tower, level, gen::random_fn(rng, tower->model(level)));
    if (prosys::chi_pro(prosys::pro_add(pf, pf2)) !=
        prosys::chi_pro(pf) + prosys::chi_pro(pf2)) {
      fail("chi_pro not additive at level " + std::to_string(level));
      break;
    }
    // eval respects lifting along a random compatible point.
    std::vector<std::string> ids;
    size_t idx = static_cast<size_t>(
        rng.range(0, static_cast<long long>(tower->model(base)->size()) - 1));
    ids.push_back(tower->model(base)->strata()[idx].id);
    bool ok = true;
    for (int k = base; k < m; ++k) {
      const auto st = tower->step(k);
      std::vector<size_t> pre;
      for (size_t s = 0; s < st->source()->size(); ++s)
        if (st->map_of(s) == idx) pre.push_back(s);
      if (pre.empty()) {
        ok = false;
        break;
      }
      idx = pre[static_cast<size_t>(
          rng.range(0, static_cast<long long>(pre.size()) - 1))];
      ids.push_back(st->source()->strata()[idx].id);
    }
    if (ok) {
      const auto point = prosys::ProPoint::make(tower, ids);
      if (prosys::eval(pf, point) != prosys::eval(lifted, point)) {
        fail("eval does not respect lifting at level " + std::to_string(m));
        break;
      }
    }
  }
  return out;
}

Report::CheckResult run_stability(const Document& doc, const Check& c,
                                  const EvalOptions& options) {
  Report::CheckResult out{check_name(c), true, ""};
  const auto* p = doc.find_profn(c.profn);
  if (!p) throw DomainError("stability check references unknown profn");
  const int horizon = c.horizon.value_or(options.horizon);
  prosys::StabilityVerdict verdict;
  if (c.kind == Check::Kind::StabilityChi)
    verdict = prosys::is_chi_stable(p->fn, resolve_p(c.p, p->fn, horizon), horizon);
  else
    verdict = prosys::is_gamma_stable(
        p->fn, resolve_classes(c.classes, p->fn, horizon), horizon);
  out.pass = verdict.stable;
  if (!verdict.stable)
    out.witness = "fails at level " + std::to_string(*verdict.witness_level);
  else if (!verdict.definitive)
    out.witness = "verified to level " + std::to_string(verdict.checked_to);
  return out;
}

Report::CheckResult run_check(const Document& doc, const Check& c,
                              const EvalOptions& options) {
  switch (c.kind) {
    case Check::Kind::ProjectionFormula:
      return run_projection_formula(doc, c, options);
    case Check::Kind::Naturality: return run_naturality(doc, c, options);
    case Check::Kind::System: return run_system(doc, c, options);
    case Check::Kind::Diagrams: return run_diagrams(doc, c, options);
    case Check::Kind::StabilityChi:
    case Check::Kind::StabilityGamma: return run_stability(doc, c, options);
  }
  throw DomainError("unresolvable check");
}

} // namespace

bool Report::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

Report evaluate(const Document& doc, const EvalOptions& options) {
  Report report;
  report.seed = options.seed;
  report.version = kVersion;
  for (const auto& [kind, idx] : doc.order) {
    if (kind == Document::DeclKind::Query && !options.checks_only) {
      const Query& q = doc.queries[idx];
      const std::string name = query_name(q);
      try {
        report.queries.push_back({name, eval_query(doc, q, options)});
      } catch (const Error& e) {
        throw EvalError(name, e.what());
      }
    } else if (kind == Document::DeclKind::Check) {
      const Check& c = doc.checks[idx];
      try {
        report.checks.push_back(run_check(doc, c, options));
      } catch (const Error& e) {
        throw EvalError(check_name(c), e.what());
      }
    }
  }
  return report;
}

std::string render_text(const Report& report) {
  std::string out;
  out += "# prochern " + report.version + "\n";
  out += "# seed " + std::to_string(report.seed) + "\n";
  for (const auto& q : report.queries)
    out += "query " + q.name + " = " + q.value + "\n";
  for (const auto& c : report.checks) {
    out += "check " + c.name + ": " + (c.pass ? "pass" : "fail");
    if (!c.witness.empty()) out += " (" + c.witness + ")";
    out += "\n";
  }
  return out;
}

std::string render_json(const Report& report) {
  nlohmann::json j;
  j["queries"] = nlohmann::json::array();
  for (const auto& q : report.queries)
    j["queries"].push_back({{"name", q.name}, {"value", q.value}});
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json jc = {{"name", c.name}, {"status", c.pass ? "pass" : "fail"}};
    if (!c.witness.empty()) jc["witness"] = c.witness;
    j["checks"].push_back(jc);
  }
  j["seed"] = report.seed;
  j["versions"] = {{"prochern", report.version}};
  return j.dump(2) + "\n";
}

} // namespace prochern::dsl
