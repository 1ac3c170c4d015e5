#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "prochern/arcspace.hpp"
#include "prochern/prosys.hpp"

namespace prochern::dsl {

using geom::ModelPtr;
using geom::MorphPtr;
using prosys::CylinderSet;
using prosys::ProFunction;
using prosys::TowerPtr;
using rings::AtomTablePtr;
using rings::GClass;
using rings::Int;
using rings::LocClass;
using rings::Rat;

struct SourceLoc {
  int line = 0;
  int col = 0;
};

// Parse/resolution failure with the first offending location.
class ParseError : public Error {
public:
  ParseError(SourceLoc loc, const std::string& message)
      : Error(message), loc_(loc) {}
  SourceLoc loc() const { return loc_; }

private:
  SourceLoc loc_;
};

// Evaluation failure, tagged with the declaration being evaluated.
class EvalError : public Error {
public:
  EvalError(std::string decl, const std::string& message)
      : Error(message), decl_(std::move(decl)) {}
  const std::string& decl() const { return decl_; }

private:
  std::string decl_;
};

// --- resolved document -----------------------------------------------------------

struct AtomDecl {
  std::string name;
  Int euler;
};

struct VarietyDecl {
  std::string name;
  ModelPtr model;
};

struct MorphismDecl {
  std::string name;
  std::string source, target;
  MorphPtr morphism;
  bool strict = false;
};

struct TowerDecl {
  enum class Kind { Product, Bundle, Arcs, Steps };
  std::string name;
  Kind kind = Kind::Product;
  std::string variety;             // product/bundle/arcs argument
  std::vector<GClass> fibers;      // bundle
  bool periodic = false;           // bundle
  int dim = 1;                     // arcs
  std::vector<std::string> morphs; // steps
  TowerPtr tower;
};

struct ProfnDecl {
  std::string name;
  std::string tower;
  int level = 1;
  std::vector<std::pair<std::string, Int>> values; // nonzero entries
  ProFunction fn;
};

struct CylDecl {
  std::string name;
  std::string tower;
  int level = 1;
  bool all = false;
  std::vector<std::string> strata;
  CylinderSet cyl;
};

struct FnExpr {
  enum class Kind { Named, OneOf, Indicator };
  Kind kind = Kind::Named;
  std::string name; // profn name / tower-or-variety name / cyl name
};

struct CylExpr {
  enum class Kind { Named, Inline };
  Kind kind = Kind::Named;
  std::string name;  // named form
  std::string tower; // inline form
  int level = 0;
  bool all = false;
  std::vector<std::string> strata;
};

struct WeightSpec {
  enum class Kind { Identity, Square, Const, Table };
  Kind kind = Kind::Identity;
  Rat constant;
  std::vector<std::pair<Int, Rat>> table;
};

struct ClassWeightSpec {
  enum class Kind { Identity, Const, Table };
  Kind kind = Kind::Identity;
  std::optional<GClass> constant;
  std::vector<std::pair<Int, GClass>> table;
};

struct IntSystemSpec {
  bool fibers = true; // use the tower's own fiber Euler numbers
  std::vector<Int> values;
  bool periodic = false;
};

struct ClassSystemSpec {
  bool fibers = true;
  std::vector<GClass> values;
  bool periodic = false;
};

struct Query {
  enum class Kind { Chi, Gamma, ChiPro, GammaPro, Measure, IntegrateChi, IntegrateGamma };
  Kind kind = Kind::Chi;
  FnExpr fn;
  CylExpr cyl;
  int w = 0;
  WeightSpec weight;
  ClassWeightSpec class_weight;
  IntSystemSpec p;
  ClassSystemSpec classes;
};

struct Check {
  enum class Kind {
    ProjectionFormula,
    Naturality,
    System,
    Diagrams,
    StabilityChi,
    StabilityGamma
  };
  Kind kind = Kind::ProjectionFormula;
  std::string morph; // naturality
  std::string tower; // naturality/system/diagrams
  std::string profn; // stability
  IntSystemSpec p;
  ClassSystemSpec classes;
  std::optional<int> depth;
  std::optional<int> horizon;
  std::optional<std::uint64_t> seed;
};

struct Document {
  AtomTablePtr table;
  std::vector<AtomDecl> atoms; // as declared
  std::vector<VarietyDecl> varieties;
  std::vector<MorphismDecl> morphisms;
  std::vector<TowerDecl> towers;
  std::vector<ProfnDecl> profns;
  std::vector<CylDecl> cyls;
  std::vector<Query> queries;
  std::vector<Check> checks;
  // Declaration order across all kinds, for rendering: (kind tag, index).
  enum class DeclKind { Atom, Variety, Morphism, Tower, Profn, Cyl, Query, Check };
  std::vector<std::pair<DeclKind, size_t>> order;

  const VarietyDecl* find_variety(const std::string& name) const;
  const MorphismDecl* find_morphism(const std::string& name) const;
  const TowerDecl* find_tower(const std::string& name) const;
  const ProfnDecl* find_profn(const std::string& name) const;
  const CylDecl* find_cyl(const std::string& name) const;
};

bool document_equal(const Document& a, const Document& b);

Document parse(std::string_view text);
std::string render(const Document& doc);

// Canonical names used for queries/checks in reports.
std::string query_name(const Query& q);
std::string check_name(const Check& c);

// Round-trip entry points for the canonical value renderings.
GClass parse_gclass(std::string_view text, const AtomTablePtr& table);
Rat parse_rat(std::string_view text);
LocClass parse_locclass(std::string_view text, const AtomTablePtr& table);

// --- evaluation ---------------------------------------------------------------------

struct EvalOptions {
  std::uint64_t seed = 0;
  int depth = 4;
  int horizon = 8;
  bool checks_only = false;
};

struct Report {
  struct QueryResult {
    std::string name;
    std::string value;
  };
  struct CheckResult {
    std::string name;
    bool pass = false;
    std::string witness;
  };
  std::vector<QueryResult> queries;
  std::vector<CheckResult> checks;
  std::uint64_t seed = 0;
  std::string version;

  bool all_pass() const;
};

Report evaluate(const Document& doc, const EvalOptions& options = {});

std::string render_text(const Report& report);
std::string render_json(const Report& report);

} // namespace prochern::dsl
