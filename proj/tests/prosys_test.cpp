#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thread>

#include "support.hpp"

using namespace prochern;
using namespace prochern::prosys;
using geom::ConstructibleFunction;
using geom::ConstructibleSet;
using geom::ModelPtr;
using geom::MorphismModel;
using geom::VarietyModel;
using rings::GClass;
using rings::Int;
using rings::Rat;
using testsupport::cls_L;
using testsupport::p1_model;
using testsupport::pn_fiber_tower;
using testsupport::point_model;
using testsupport::table_L;

namespace {

// Two-point tower whose limit keeps a single point: X1 = {a, b}, X_n = {a}
// above it, with the inclusion a -> a.  Not stratum-surjective.
TowerPtr two_point_tower(const rings::AtomTablePtr& t) {
  auto x1 = VarietyModel::make("X1", t,
                               {{"a", GClass::unit(t)}, {"b", GClass::unit(t)}});
  auto x2 = VarietyModel::make("X2", t, {{"a", GClass::unit(t)}});
  auto step = MorphismModel::make(x2, x1, {0}, {GClass::unit(t)}, true);
  return Tower::from_steps({step});
}

ProFunction zero_at(const TowerPtr& t, int level) {
  return ProFunction(t, level, ConstructibleFunction::zero(t->model(level)));
}

} // namespace

TEST_CASE("towers realize lazily and deterministically") {
  auto t = table_L();
  auto p1 = p1_model(t);
  const auto tower = Tower::product(p1);
  CHECK(tower->base() == 1);
  CHECK(tower->model(3)->size() == 8);
  CHECK(tower->model(3) == tower->model(3)); // cached pointer identity
  CHECK(tower->step(1)->surjective());
  CHECK(tower->all_steps_surjective());
  CHECK_THROWS_AS(tower->model(0), LevelError);

  const auto fin = Tower::bundle(p1, {cls_L(t)}, false);
  CHECK(fin->finite());
  CHECK(*fin->top() == 2);
  CHECK_THROWS_AS(fin->model(3), LevelError);
}

TEST_CASE("tower cache is write-once under concurrent readers") {
  auto t = table_L();
  const auto tower = Tower::product(p1_model(t));
  std::vector<ModelPtr> seen(8);
  {
    std::vector<std::thread> workers;
    for (int w = 0; w < 8; ++w)
      workers.emplace_back([&, w] { seen[static_cast<size_t>(w)] = tower->model(5); });
    for (auto& th : workers) th.join();
  }
  for (const auto& m : seen) CHECK(m == seen[0]);
  CHECK(seen[0]->size() == 32);
}

TEST_CASE("lifting") {
  auto t = table_L();
  auto p1 = p1_model(t);
  const auto tower = Tower::product(p1);

  SUBCASE("lift by zero steps is the identity") {
    const auto one = procharacteristic(tower);
    const auto same = lift(one, 1);
    CHECK(same.level == 1);
    CHECK(same.fn == one.fn);
    CHECK_THROWS_AS(lift(same, 0), LevelError);
  }
  SUBCASE("the unit lifts to the unit on the product tower") {
    const auto one = procharacteristic(tower);
    const auto lifted = lift(one, 2);
    CHECK(lifted.fn == ConstructibleFunction::constant(tower->model(2), 1));
  }
  SUBCASE("arc cylinder lift multiplies gamma by L^d") {
    const auto arc = Tower::arc(p1, 1);
    const CylinderSet c(arc, 1, ConstructibleSet::of_ids(arc->model(1), {"cell"}));
    const auto lifted = lift_cyl(c, 2);
    CHECK(geom::gamma_of_set(lifted.set) == geom::gamma_of_set(c.set) * cls_L(t));
  }
}

TEST_CASE("pro_add and pro_eq") {
  auto t = table_L();
  auto p1 = p1_model(t);
  const auto tower = Tower::product(p1);

  SUBCASE("adding zero") {
    const auto one = procharacteristic(tower);
    const auto sum = pro_add(one, zero_at(tower, 1));
    CHECK(pro_eq(sum, one).equal);
  }
  SUBCASE("a class equals its own lift") {
    const auto one = procharacteristic(tower);
    const auto lifted = lift(one, 3);
    const auto v = pro_eq(one, lifted);
    CHECK(v.equal);
    CHECK(v.definitive);
  }
  SUBCASE("surjective towers decide inequality at the common level") {
    const auto one = procharacteristic(tower);
    const ProFunction two(tower, 1,
                          ConstructibleFunction::constant(tower->model(1), 2));
    const auto v = pro_eq(one, two);
    CHECK_FALSE(v.equal);
    CHECK(v.definitive);
  }
  SUBCASE("two-point tower: [p 1_b] = 0 in the limit") {
    const auto tp = two_point_tower(t);
    const ProFunction alpha1(
        tp, 1, ConstructibleFunction(tp->model(1), {Int(0), Int(5)}));
    CHECK_FALSE(alpha1.fn.is_zero());
    const auto v = pro_eq(alpha1, zero_at(tp, 1));
    CHECK(v.equal); // the level-2 pullback kills it
    CHECK(v.definitive);
    CHECK(v.checked_to == 2);
  }
  SUBCASE("tower mismatch") {
    const auto other = Tower::product(p1);
    CHECK_THROWS_AS(pro_add(procharacteristic(tower), procharacteristic(other)),
                    MismatchError);
  }
  SUBCASE("surjective towers give the same verdict at every horizon") {
    Rng rng(97);
    for (int i = 0; i < 40; ++i) {
      const ProFunction a(tower, 1, gen::random_fn(rng, tower->model(1)));
      const ProFunction b(tower, 1, gen::random_fn(rng, tower->model(1)));
      const auto v0 = pro_eq(a, b, 0);
      const auto v5 = pro_eq(a, b, 5);
      CHECK(v0.equal == v5.equal);
      CHECK(v0.definitive);
      CHECK(v5.definitive);
    }
  }
  SUBCASE("non-surjective infinite towers report to the horizon") {
    // Tower of two-point models where b is never hit.
    auto x1 = VarietyModel::make(
        "Y", t, {{"a", GClass::unit(t)}, {"b", GClass::unit(t)}});
    auto rule = [t](int, const ModelPtr& at) {
      auto next = VarietyModel::make(
          "Y", t, {{"a", GClass::unit(t)}, {"b", GClass::unit(t)}});
      return MorphismModel::make(next, at, {0, 0},
                                 {GClass::unit(t), GClass::unit(t)}, false);
    };
    const auto ns = Tower::from_rule(x1, 1, rule, false);
    const ProFunction ind_b(ns, 1,
                            ConstructibleFunction(ns->model(1), {Int(0), Int(1)}));
    const auto v = pro_eq(ind_b, zero_at(ns, 1), 5);
    CHECK(v.equal); // pullback hits only a, so the lift vanishes
    const ProFunction ind_a(ns, 1,
                            ConstructibleFunction(ns->model(1), {Int(1), Int(0)}));
    const auto w = pro_eq(ind_a, zero_at(ns, 1), 5);
    CHECK_FALSE(w.equal);
    CHECK_FALSE(w.definitive); // verified to the horizon only
    CHECK(w.checked_to == 6);
  }
}

TEST_CASE("evaluation at propoints") {
  auto t = table_L();
  auto p1 = p1_model(t);
  const auto tower = Tower::product(p1);

  SUBCASE("constants evaluate to their value") {
    const auto point = ProPoint::make(tower, {"pt", "pt.cell", "pt.cell.pt"});
    CHECK(eval(procharacteristic(tower), point) == 1);
  }
  SUBCASE("evaluation respects lifting") {
    const auto point = ProPoint::make(tower, {"cell", "cell.pt", "cell.pt.pt"});
    const ProFunction alpha(tower, 1,
                            ConstructibleFunction(p1, {Int(4), Int(-7)}));
    CHECK(eval(alpha, point) == -7);
    CHECK(eval(lift(alpha, 3), point) == -7);
  }
  SUBCASE("incompatible streams are rejected") {
    CHECK_THROWS_AS(ProPoint::make(tower, {"pt", "cell.cell"}), DomainError);
  }
  SUBCASE("the two-point tower evaluates to zero at the unique point") {
    const auto tp = two_point_tower(t);
    const auto point = ProPoint::make(tp, {"a", "a"});
    const ProFunction alpha1(
        tp, 1, ConstructibleFunction(tp->model(1), {Int(0), Int(5)}));
    // the class of alpha1 is zero in the limit, and indeed its lift vanishes
    CHECK(eval(lift(alpha1, 2), point) == 0);
  }
}

TEST_CASE("chi_pro") {
  auto t = table_L();
  auto p1 = p1_model(t);

  SUBCASE("product tower of a chi=2 model") {
    const auto tower = Tower::product(p1);
    const auto one3 = lift(procharacteristic(tower), 3);
    CHECK(chi_pro(one3) == Rat(2)); // chi(X)^3 / chi(X)^2
    CHECK(chi_pro(procharacteristic(tower)) == Rat(p1->chi()));
  }
  SUBCASE("projective-space fiber tower gives inverse factorials") {
    const auto tower = pn_fiber_tower(t);
    for (int n = 1; n <= 6; ++n) {
      // a chi=1 term at level n: indicator of the all-zero-cells stratum
      const auto model = tower->model(n);
      std::vector<Int> values(model->size(), Int(0));
      values[0] = 1;
      REQUIRE(model->chi_of(0) == 1);
      const ProFunction pf(tower, n, ConstructibleFunction(model, values));
      // oracle: explicit product of the declared fiber Euler numbers
      Int denom = 1;
      for (int k = 1; k < n; ++k) denom *= k;
      CHECK(chi_pro(pf) == Rat(Int(1), denom));
    }
  }
  SUBCASE("zero function") {
    const auto tower = Tower::product(p1);
    CHECK(chi_pro(zero_at(tower, 4)) == Rat(0));
  }
  SUBCASE("zero fiber Euler number is rejected") {
    auto te = rings::AtomTable::make({{"E", Int(-1)}});
    auto x = VarietyModel::make(
        "Z", te, {{"plus", GClass::unit(te)}, {"minus", GClass::atom(te, "E")}});
    REQUIRE(x->chi() == 0);
    const auto tower = Tower::product(x);
    CHECK_THROWS_AS(chi_pro(lift(procharacteristic(tower), 2)),
                    ZeroMultiplierError);
  }
  SUBCASE("shift law on constant-fiber towers") {
    const auto tower = Tower::product(p1);
    const auto pf = lift(procharacteristic(tower), 2);
    CHECK(chi_pro(pf, 1) == chi_pro(pf) * Rat(Int(1), Int(2)));
    CHECK(chi_pro(pf, -2) == chi_pro(pf) * Rat(4));
  }
}

TEST_CASE("gamma_pro") {
  auto t = table_L();
  auto p1 = p1_model(t);

  SUBCASE("strict bundle tower gives the base class") {
    const GClass w = GClass::unit(t) + cls_L(t) + cls_L(t, 2);
    const auto tower = Tower::bundle(p1, {w}, true);
    for (int k = 1; k <= 4; ++k) {
      const auto lifted = lift(procharacteristic(tower), k);
      CHECK(rings::loc_eq(gamma_pro(lifted),
                          rings::LocClass::make(p1->gamma())));
    }
  }
  SUBCASE("zero function") {
    const auto tower = Tower::bundle(p1, {cls_L(t)}, true);
    CHECK(gamma_pro(zero_at(tower, 2)).is_zero());
  }
  SUBCASE("arc towers divide by L^{nd}") {
    const auto arc = Tower::arc(p1, 2);
    const auto pf = lift(procharacteristic(arc), 3);
    const auto value = gamma_pro(pf);
    // oracle: Gamma(level-3 fn) over L^{3*2} by direct construction
    const auto expect = rings::LocClass::make(
        geom::gamma_of_fn(pf.fn), {{cls_L(t, 2), 3u}});
    CHECK(rings::loc_eq(value, expect));
    CHECK(rings::loc_eq(value, rings::LocClass::make(p1->gamma())));
  }
  SUBCASE("multiple fiber classes in one step are rejected") {
    const auto tower = Tower::product(p1); // step fibers: 1 and L
    CHECK_THROWS_AS(gamma_pro(lift(procharacteristic(tower), 2)), DomainError);
  }
  SUBCASE("non-strict steps are rejected") {
    auto x = p1_model(t);
    auto rule = [t, x](int, const ModelPtr& at) {
      return MorphismModel::make(x, at, {0, 0}, {GClass::unit(t), cls_L(t)},
                                 false);
    };
    const auto tower = Tower::from_rule(x, 1, rule, false);
    CHECK_THROWS_AS(gamma_pro(lift(procharacteristic(tower), 2)),
                    StrictnessError);
  }
  SUBCASE("shift law with a single fiber class") {
    const GClass w = GClass::unit(t) + cls_L(t);
    const auto tower = Tower::bundle(p1, {w}, true);
    const auto pf = lift(procharacteristic(tower), 2);
    CHECK(rings::loc_eq(
        gamma_pro(pf, 1),
        rings::loc_mul(gamma_pro(pf),
                       rings::LocClass::make(GClass::unit(t), {{w, 1}}))));
  }
}

TEST_CASE("well-definedness under lifting") {
  Rng rng(41);
  auto t = table_L();
  auto p1 = p1_model(t);
  const auto product = Tower::product(p1);
  const GClass w = GClass::unit(t) + cls_L(t);
  const auto bundle = Tower::bundle(p1, {w, cls_L(t)}, true);
  const auto arc = Tower::arc(p1, 1);

  for (int i = 0; i < 200; ++i) {
    const TowerPtr tower = (i % 3 == 0) ? product : (i % 3 == 1) ? bundle : arc;
    const int base = tower->base();
    const int level = base + static_cast<int>(rng.range(0, 1));
    const int m = level + static_cast<int>(rng.range(1, 3));
    const ProFunction pf(tower, level, gen::random_fn(rng, tower->model(level)));
    CHECK(chi_pro(lift(pf, m)) == chi_pro(pf));
    if (tower != product)
      CHECK(rings::loc_eq(gamma_pro(lift(pf, m)), gamma_pro(pf)));
    // additivity of both measures
    const ProFunction pg(tower, level, gen::random_fn(rng, tower->model(level)));
    CHECK(chi_pro(pro_add(pf, pg)) == chi_pro(pf) + chi_pro(pg));
    if (tower != product)
      CHECK(rings::loc_eq(gamma_pro(pro_add(pf, pg)),
                          rings::loc_add(gamma_pro(pf), gamma_pro(pg))));
  }
}

TEST_CASE("stability") {
  auto t = table_L();
  auto p1 = p1_model(t);

  SUBCASE("towers with constant fiber weights are stable for their own fibers") {
    const auto tower = Tower::product(p1);
    Rng rng(43);
    const ProFunction pf(tower, 1, gen::random_fn(rng, p1));
    const StepInts p{{Int(2)}, true}; // chi of the factor each step
    const auto v = is_chi_stable(pf, p, 8);
    CHECK(v.stable);
    CHECK(v.definitive); // periodic tower, periodic system
  }
  SUBCASE("mismatched p yields an unstable witness") {
    const auto tower = Tower::product(p1);
    const auto pf = procharacteristic(tower);
    const StepInts p{{Int(3)}, true};
    const auto v = is_chi_stable(pf, p, 8);
    CHECK_FALSE(v.stable);
    CHECK(v.definitive);
    CHECK(*v.witness_level == 2);
  }
  SUBCASE("the zero function is stable for every p") {
    const auto tower = Tower::product(p1);
    const StepInts p{{Int(7), Int(-5)}, true};
    CHECK(is_chi_stable(zero_at(tower, 1), p, 8).stable);
  }
  SUBCASE("zero p is rejected") {
    const auto tower = Tower::product(p1);
    const StepInts p{{Int(0)}, true};
    CHECK_THROWS_AS(is_chi_stable(procharacteristic(tower), p, 4),
                    ZeroMultiplierError);
  }
  SUBCASE("strict bundle towers are gamma-stable for their fiber classes") {
    const GClass w = GClass::unit(t) + cls_L(t);
    const auto tower = Tower::bundle(p1, {w}, true);
    Rng rng(47);
    const ProFunction pf(tower, 1, gen::random_fn(rng, p1));
    const StepClasses fc{{w}, true};
    const auto v = is_gamma_stable(pf, fc, 8);
    CHECK(v.stable);
    CHECK(v.definitive);
    CHECK(is_gamma_stable(zero_at(tower, 1), fc, 8).stable);
  }
  SUBCASE("corrupted class system yields a witness") {
    const GClass w = GClass::unit(t) + cls_L(t);
    const auto tower = Tower::bundle(p1, {w}, true);
    const StepClasses fc{{cls_L(t)}, true};
    const auto v = is_gamma_stable(procharacteristic(tower), fc, 8);
    CHECK_FALSE(v.stable);
    CHECK(v.witness_level.has_value());
  }
}

TEST_CASE("stable measures") {
  auto t = table_L();
  auto p1 = p1_model(t);

  SUBCASE("tower fiber data reproduces chi_pro and gamma_pro") {
    const GClass w = GClass::unit(t) + cls_L(t);
    const auto tower = Tower::bundle(p1, {w}, true);
    Rng rng(53);
    for (int i = 0; i < 30; ++i) {
      const int level = 1 + static_cast<int>(rng.range(0, 2));
      const ProFunction pf(tower, level,
                           gen::random_fn(rng, tower->model(level)));
      const StepInts p{{Int(2)}, true}; // chi(w) = 2
      const StepClasses fc{{w}, true};
      CHECK(stable_chi_pro(pf, p, 6) == chi_pro(pf));
      CHECK(rings::loc_eq(stable_gamma_pro(pf, fc, 6), gamma_pro(pf)));
    }
  }
  SUBCASE("projective-space tower value") {
    const auto tower = pn_fiber_tower(t);
    const int n = 5;
    const auto model = tower->model(n);
    std::vector<Int> values(model->size(), Int(0));
    values[0] = 1;
    const ProFunction pf(tower, n, ConstructibleFunction(model, values));
    StepInts p;
    for (int k = 1; k <= n + 3; ++k) p.values.push_back(Int(k));
    CHECK(stable_chi_pro(pf, p, 3) == Rat(Int(1), Int(24))); // 1/(n-1)!
  }
  SUBCASE("unstable input is rejected") {
    const auto tower = Tower::product(p1);
    const StepInts p{{Int(3)}, true};
    CHECK_THROWS_AS(stable_chi_pro(procharacteristic(tower), p, 4),
                    StabilityError);
  }
  SUBCASE("zero maps to zero") {
    const auto tower = Tower::product(p1);
    const StepInts p{{Int(2)}, true};
    CHECK(stable_chi_pro(zero_at(tower, 2), p, 4) == Rat(0));
  }
}

TEST_CASE("cylinder algebra") {
  auto t = table_L();
  auto p1 = p1_model(t);
  const auto tower = Tower::product(p1);

  SUBCASE("symmetric difference with itself is empty") {
    const CylinderSet a(tower, 1, ConstructibleSet::of_ids(p1, {"pt"}));
    CHECK(cyl_symmdiff(a, a).set.is_empty());
  }
  SUBCASE("the two-cylinder level-set decomposition") {
    const CylinderSet w1(tower, 1, ConstructibleSet::of_ids(p1, {"pt"}));
    const CylinderSet w2(
        tower, 2,
        ConstructibleSet::of_ids(tower->model(2), {"pt.pt", "cell.pt"}));
    const auto ind = [](const CylinderSet& c) {
      return ProFunction(c.tower, c.level,
                         ConstructibleFunction::indicator(c.set));
    };
    const auto alpha = pro_add(ind(w1), ind(w2));
    const auto levels = level_sets(alpha);
    REQUIRE(levels.size() == 2);
    CHECK(cyl_eq(levels.at(Int(1)), cyl_symmdiff(w1, w2)).equal);
    CHECK(cyl_eq(levels.at(Int(2)), cyl_intersect(w1, w2)).equal);
  }
  SUBCASE("lifting operands first does not change the class") {
    Rng rng(59);
    for (int i = 0; i < 50; ++i) {
      auto random_cyl = [&](int level) {
        const auto model = tower->model(level);
        std::vector<bool> members(model->size());
        for (size_t j = 0; j < members.size(); ++j) members[j] = rng.chance(50);
        return CylinderSet(tower, level, ConstructibleSet(model, members));
      };
      const auto a = random_cyl(1 + static_cast<int>(rng.range(0, 1)));
      const auto b = random_cyl(1 + static_cast<int>(rng.range(0, 1)));
      const auto direct = cyl_intersect(a, b);
      const auto later = cyl_intersect(lift_cyl(a, 3), lift_cyl(b, 3));
      CHECK(cyl_eq(direct, later).equal);
      CHECK(cyl_eq(cyl_symmdiff(a, b),
                   cyl_symmdiff(lift_cyl(b, 3), lift_cyl(a, 3)))
                .equal);
      // brute-force preimage oracle: equality of the lifted member sets
      const int m = std::max(a.level, b.level);
      const bool by_preimage = lift_cyl(a, m).set == lift_cyl(b, m).set;
      CHECK(cyl_eq(a, b).equal == by_preimage);
    }
  }
  SUBCASE("level sets of constants") {
    const auto one = procharacteristic(tower);
    const auto levels = level_sets(one);
    REQUIRE(levels.size() == 1);
    CHECK(levels.at(Int(1)).set == ConstructibleSet::whole(p1));
    CHECK(level_sets(zero_at(tower, 1)).empty());
  }
}

TEST_CASE("pro-level integration") {
  auto t = table_L();
  auto p1 = p1_model(t);

  SUBCASE("identity weight reduces to the stable measure") {
    const auto tower = Tower::product(p1);
    Rng rng(61);
    const StepInts p{{Int(2)}, true};
    for (int i = 0; i < 30; ++i) {
      const int level = 1 + static_cast<int>(rng.range(0, 1));
      const ProFunction pf(tower, level,
                           gen::random_fn(rng, tower->model(level)));
      const auto f = [](const Int& n) { return std::optional<Rat>(Rat(n)); };
      CHECK(integrate_chi_pro(pf, p, f, 6) == stable_chi_pro(pf, p, 6));
    }
  }
  SUBCASE("arc-tower indicator against the gamma measure") {
    const auto arc = Tower::arc(p1, 1);
    const CylinderSet c(arc, 1,
                        ConstructibleSet::of_ids(arc->model(1), {"cell"}));
    const ProFunction ind(arc, 1, ConstructibleFunction::indicator(c.set));
    const StepClasses fc{{cls_L(t)}, true};
    const auto f = [&](const Int& n) -> std::optional<rings::LocClass> {
      if (n == 1) return rings::LocClass::make(GClass::unit(t));
      return std::nullopt;
    };
    const auto lhs = integrate_gamma_pro(ind, fc, f, 6);
    const auto rhs = stable_gamma_pro(ind, fc, 6);
    CHECK(rings::loc_eq(lhs, rhs));
  }
  SUBCASE("zero weight") {
    const auto tower = Tower::product(p1);
    const StepInts p{{Int(2)}, true};
    const auto f = [](const Int&) { return std::optional<Rat>(Rat(0)); };
    CHECK(integrate_chi_pro(procharacteristic(tower), p, f, 6) == Rat(0));
  }
  SUBCASE("weight undefined at a realized value") {
    const auto tower = Tower::product(p1);
    const StepInts p{{Int(2)}, true};
    const auto f = [](const Int&) -> std::optional<Rat> { return std::nullopt; };
    CHECK_THROWS_AS(integrate_chi_pro(procharacteristic(tower), p, f, 6),
                    DomainError);
  }
  SUBCASE("unstable integrand") {
    const auto tower = Tower::product(p1);
    const StepInts p{{Int(5)}, true};
    const auto f = [](const Int& n) { return std::optional<Rat>(Rat(n)); };
    CHECK_THROWS_AS(integrate_chi_pro(procharacteristic(tower), p, f, 6),
                    StabilityError);
  }
}

TEST_CASE("partial sums of series") {
  auto t = table_L();

  SUBCASE("single term") {
    const auto tower = Tower::product(p1_model(t));
    SeriesProFunction s;
    s.terms.push_back(procharacteristic(tower));
    const auto sums = chi_pro_partial_sums(s, 3);
    REQUIRE(sums.size() == 3);
    CHECK(sums[0] == Rat(2));
    CHECK(sums[2] == Rat(2));
  }
  SUBCASE("greedy factorial series for 2/3") {
    const auto tower = pn_fiber_tower(t);
    const Rat target(Int(2), Int(3));
    const auto digits = testsupport::greedy_factorial_digits(target, 8);
    SeriesProFunction s;
    for (int n = 1; n <= 8; ++n) {
      // digit c_n becomes a term with chi = c_n at level n + 2
      const int level = n + 2;
      const auto model = tower->model(level);
      std::vector<Int> values(model->size(), Int(0));
      values[0] = digits[static_cast<size_t>(n) - 1];
      s.terms.push_back(
          ProFunction(tower, level, ConstructibleFunction(model, values)));
    }
    const auto sums = chi_pro_partial_sums(s, 8);
    Int fact = 1; // (N+1)!
    for (int n = 1; n <= 8; ++n) {
      fact *= n + 1;
      const Rat err = (sums[static_cast<size_t>(n) - 1] - target).abs();
      const Rat bound(Int(1), fact);
      CHECK((err < bound || err == bound));
    }
    CHECK(sums[7] == target); // 2/3 = 1/2! + 1/3! exactly
  }
  SUBCASE("all-zero series") {
    const auto tower = Tower::product(p1_model(t));
    SeriesProFunction s;
    s.terms.push_back(zero_at(tower, 1));
    s.terms.push_back(zero_at(tower, 2));
    for (const auto& v : chi_pro_partial_sums(s, 4)) CHECK(v == Rat(0));
  }
  SUBCASE("rule-generated series matches its explicit listing") {
    const auto tower = Tower::product(p1_model(t));
    auto nth = [tower](int n) -> std::optional<ProFunction> {
      if (n > 5) return std::nullopt;
      return lift(procharacteristic(tower), n);
    };
    const auto generated = SeriesProFunction::generated(nth);
    SeriesProFunction listed;
    for (int n = 1; n <= 5; ++n) listed.terms.push_back(*nth(n));
    CHECK(chi_pro_partial_sums(generated, 7) == chi_pro_partial_sums(listed, 7));
    CHECK(chi_pro_partial_sums(generated, 7).back() == Rat(10)); // 5 * chi(X)
  }
}

TEST_CASE("equipped systems") {
  auto t = table_L();
  auto p1 = p1_model(t);
  const auto tower = Tower::product(p1);

  SUBCASE("unit system reproduces chi_pro") {
    const auto sys = unit_system(tower, 5);
    Rng rng(67);
    for (int i = 0; i < 20; ++i) {
      const int level = 1 + static_cast<int>(rng.range(0, 2));
      const ProFunction pf(tower, level,
                           gen::random_fn(rng, tower->model(level)));
      CHECK(chi_pro_equipped(pf, sys) == chi_pro(pf));
      CHECK(lift_equipped(pf, sys, level + 1).fn == lift(pf, level + 1).fn);
    }
  }
  SUBCASE("twisted lifting keeps chi_pro_equipped invariant") {
    biv::BivClassSystem sys;
    for (int k = 1; k <= 5; ++k)
      sys.step_classes.push_back(biv::BivariantFn(
          tower->step(k),
          ConstructibleFunction::constant(tower->model(k + 1), 3)));
    Rng rng(71);
    for (int i = 0; i < 20; ++i) {
      const ProFunction pf(tower, 1, gen::random_fn(rng, p1));
      const auto lifted = lift_equipped(pf, sys, 3);
      CHECK(chi_pro_equipped(lifted, sys) == chi_pro_equipped(pf, sys));
    }
  }
  SUBCASE("zero weight is rejected") {
    biv::BivClassSystem sys;
    sys.step_classes.push_back(biv::BivariantFn(
        tower->step(1), ConstructibleFunction::zero(tower->model(2))));
    Rng rng(3);
    const ProFunction pf(tower, 2, gen::random_fn(rng, tower->model(2)));
    CHECK_THROWS_AS(chi_pro_equipped(pf, sys), ZeroMultiplierError);
  }
}

TEST_CASE("promorphisms and naturality") {
  auto t = table_L();
  auto p1 = p1_model(t);
  Rng rng(73);
  auto lim = testsupport::small_limits();

  SUBCASE("identity promorphism passes") {
    const auto tower = Tower::product(p1);
    auto [src, phi] = induced_tower(MorphismModel::identity(p1), tower);
    const auto rep = check_naturality(phi, 3, 5);
    CHECK(rep.pass);
  }
  SUBCASE("induced promorphisms from random strict squares pass to depth 4") {
    for (int i = 0; i < 10; ++i) {
      const auto f = gen::random_morphism_onto(rng, p1, true, lim);
      const auto tower = Tower::product(p1);
      auto [src, phi] = induced_tower(f, tower);
      const auto rep = check_naturality(phi, 4, rng.next());
      CHECK(rep.pass);
    }
  }
  SUBCASE("pushforward is compatible with chi_pro") {
    const auto f = gen::random_morphism_onto(rng, p1, true, lim);
    const auto tower = Tower::product(p1);
    auto [src, phi] = induced_tower(f, tower);
    const ProFunction pf(src, 1, gen::random_fn(rng, src->model(1)));
    CHECK(chi_pro(pro_pushforward(phi, pf)) == chi_pro(pf));
  }
  SUBCASE("corrupted squares fail with a located level") {
    const auto f = gen::random_morphism_onto(rng, p1, true, lim);
    const auto tower = Tower::product(p1);
    auto [src, phi] = induced_tower(f, tower);
    // realize, rebuild explicit towers, then corrupt one fiber datum
    const int depth = 4;
    std::vector<geom::MorphPtr> src_steps, tgt_steps, maps;
    for (int n = 1; n <= depth + 1; ++n) maps.push_back(phi.map_at(n));
    for (int n = 1; n <= depth; ++n) {
      src_steps.push_back(src->step(n));
      tgt_steps.push_back(tower->step(n));
    }
    const int bad_index = 1; // corrupts the step from level 3 down to level 2
    auto fibers = src_steps[bad_index]->fiber();
    fibers[0] = fibers[0] + GClass::unit(t);
    src_steps[bad_index] = MorphismModel::make_unverified(
        src_steps[bad_index]->source(), src_steps[bad_index]->target(),
        src_steps[bad_index]->stratum_map(), fibers, true);
    const auto bad_src = Tower::from_steps(src_steps);
    const auto bad_tgt = Tower::from_steps(tgt_steps);
    ProMorphism bad_phi(
        bad_src, bad_tgt, [](int n) { return n; },
        [maps](int n) { return maps[static_cast<size_t>(n - 1)]; },
        /*fiber_square=*/true);
    const auto rep = check_naturality(bad_phi, depth - 1, 9);
    CHECK_FALSE(rep.pass);
    bool located = false;
    for (const auto& item : rep.items)
      if (!item.pass && item.level == 2) located = true;
    CHECK(located);
  }
}
