#include "prochern/bivariant.hpp"

namespace prochern::biv {

using geom::model_equal;
using geom::morphism_equal;
using geom::pullback;
using geom::pushforward;

BivariantFn::BivariantFn(MorphPtr over, ConstructibleFunction fn)
    : over_(std::move(over)), fn_(std::move(fn)) {
  geom::require_same_model(fn_.parent(), over_->source(), "bivariant class");
  weights_.assign(over_->target()->size(), Int(0));
  for (size_t s = 0; s < over_->stratum_map().size(); ++s)
    weights_[over_->map_of(s)] += fn_.at(s) * rings::chi_hom(over_->fiber()[s]);
  for (const auto& w : weights_)
    if (w != weights_.front()) {
      constant_ = false;
      break;
    }
  if (weights_.empty()) constant_ = true;
}

BivariantFn BivariantFn::unit(MorphPtr over) {
  auto fn = ConstructibleFunction::constant(over->source(), 1);
  return BivariantFn(std::move(over), std::move(fn));
}

EquippedMorphism::EquippedMorphism(MorphPtr m, BivariantFn c)
    : morphism(std::move(m)), cls(std::move(c)) {
  if (!morphism_equal(cls.over(), morphism))
    throw MismatchError("equipped class does not sit over its morphism");
}

BivariantFn biv_product(const BivariantFn& alpha, const BivariantFn& beta) {
  const MorphPtr& f = alpha.over();
  const MorphPtr& g = beta.over();
  if (!model_equal(f->target(), g->source()))
    throw MismatchError("bivariant product: endpoints do not compose");
  auto fn = geom::fn_mul(alpha.fn(), pullback(*f, beta.fn()));
  return BivariantFn(geom::compose(g, f), std::move(fn));
}

BivariantFn biv_pushforward(const MorphPtr& f, const MorphPtr& g,
                            const BivariantFn& alpha) {
  if (!morphism_equal(alpha.over(), geom::compose(g, f)))
    throw MismatchError("bivariant pushforward: class is not over g o f");
  return BivariantFn(g, pushforward(*f, alpha.fn()));
}

BivariantFn biv_pullback(const FiberSquare& square, const BivariantFn& alpha) {
  if (!morphism_equal(alpha.over(), square.f))
    throw MismatchError("bivariant pullback: class is not over the square's f");
  return BivariantFn(square.f_prime, pullback(*square.pi_prime, alpha.fn()));
}

Int chi_f(const BivariantFn& alpha) {
  if (!alpha.constant_weight()) {
    const auto& w = alpha.weights();
    size_t other = 0;
    for (size_t t = 1; t < w.size(); ++t)
      if (w[t] != w[0]) {
        other = t;
        break;
      }
    const auto& strata = alpha.over()->target()->strata();
    throw DomainError("fiber weight not globally constant: " + strata[0].id +
                      " has " + w[0].str() + ", " + strata[other].id + " has " +
                      w[other].str());
  }
  return alpha.weights().empty() ? Int(0) : alpha.weights().front();
}

CheckReport check_projection_formula(const FiberSquare& square,
                                     const BivariantFn& b,
                                     const ConstructibleFunction& y) {
  if (!morphism_equal(b.over(), square.pi))
    throw MismatchError("projection formula: class is not over the square's pi");
  geom::require_same_model(y.parent(), square.f->source(), "projection formula");

  const auto lhs = geom::fn_mul(
      b.fn(), pullback(*square.pi, pushforward(*square.f, y)));
  const auto pulled_b = pullback(*square.f_prime, b.fn());
  const auto pulled_y = pullback(*square.pi_prime, y);
  const auto rhs =
      pushforward(*square.f_prime, geom::fn_mul(pulled_b, pulled_y));

  CheckReport report;
  for (size_t t = 0; t < lhs.values().size(); ++t)
    if (lhs.at(t) != rhs.at(t)) {
      report.pass = false;
      report.witness = "stratum " + square.pi->source()->strata()[t].id + ": " +
                       lhs.at(t).str() + " != " + rhs.at(t).str();
      return report;
    }
  return report;
}

namespace {

// b_{la, la+k} as the left fold of the step classes.
BivariantFn fold_steps(const BivClassSystem& sys, size_t la, size_t nu) {
  BivariantFn acc = sys.step_classes[nu - 1];
  for (size_t k = nu - 1; k > la; --k)
    acc = biv_product(acc, sys.step_classes[k - 1]);
  return acc;
}

} // namespace

SystemReport check_system(const std::vector<MorphPtr>& tower_steps,
                          const BivClassSystem& sys, int depth) {
  SystemReport report;
  const size_t n =
      std::min({tower_steps.size(), sys.step_classes.size(),
                static_cast<size_t>(depth < 0 ? 0 : depth)});
  if (sys.step_classes.size() < n) {
    report.pass = false;
    report.failures.push_back("system shorter than requested depth");
    return report;
  }
  for (size_t k = 0; k < n; ++k)
    if (!morphism_equal(sys.step_classes[k].over(), tower_steps[k])) {
      report.pass = false;
      report.failures.push_back("step " + std::to_string(k) +
                                ": class is not over the tower step");
    }
  if (!report.pass) return report;

  for (size_t la = 0; la + 2 <= n; ++la)
    for (size_t mu = la + 1; mu + 1 <= n; ++mu)
      for (size_t nu = mu + 1; nu <= n; ++nu) {
        const BivariantFn whole = fold_steps(sys, la, nu);
        const BivariantFn split =
            biv_product(fold_steps(sys, mu, nu), fold_steps(sys, la, mu));
        if (!(whole.fn() == split.fn()) ||
            !morphism_equal(whole.over(), split.over())) {
          report.pass = false;
          report.failures.push_back(
              "cocycle law fails on (" + std::to_string(la) + ", " +
              std::to_string(mu) + ", " + std::to_string(nu) + ")");
        }
      }
  return report;
}

} // namespace prochern::biv
