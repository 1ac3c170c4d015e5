#pragma once

#include "prochern/geom.hpp"
#include "prochern/rng.hpp"

namespace prochern::gen {

using geom::ConstructibleFunction;
using geom::FiberSquare;
using geom::ModelPtr;
using geom::MorphPtr;
using rings::AtomTablePtr;
using rings::GClass;

struct ModelLimits {
  int max_extra_atoms = 3; // besides L
  int max_strata = 8;
  int max_degree = 2;
  int max_terms = 3;
  long long coeff_lo = -9;
  long long coeff_hi = 9;
};

AtomTablePtr random_table(Rng& rng, const ModelLimits& lim = {});
GClass random_class(Rng& rng, const AtomTablePtr& table,
                    const ModelLimits& lim = {}, bool nonzero = true);
ModelPtr random_model(Rng& rng, const AtomTablePtr& table,
                      const ModelLimits& lim = {});
ConstructibleFunction random_fn(Rng& rng, const ModelPtr& model,
                                long long lo = -5, long long hi = 5);

// Morphism onto `target` with a freshly built source; 1..3 source strata per
// target stratum, so the stratum map is surjective.  In strict mode source
// classes are manufactured as cls(t) * F.
MorphPtr random_morphism_onto(Rng& rng, const ModelPtr& target, bool strict,
                              const ModelLimits& lim = {});

// Strict base-change square over a random base model.
FiberSquare random_square(Rng& rng, const AtomTablePtr& table,
                          const ModelLimits& lim = {});

} // namespace prochern::gen
