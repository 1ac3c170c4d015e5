#pragma once

#include "prochern/prosys.hpp"

namespace prochern::arcs {

using geom::ModelPtr;
using prosys::CylinderSet;
using prosys::TowerPtr;
using rings::LocClass;

// Arc-space tower of a d-dimensional model; smoothness of the base is a user
// assertion, singular bases are unsupported input.  Level n carries the
// strata of X with classes scaled by L^{nd}; every step is strict with fiber
// L^d (so fiber Euler number 1) and stratum-surjective.  Indexing starts at
// level 0, where the model is X itself.
TowerPtr arc_tower(ModelPtr x, int d);

bool is_arc_tower(const prosys::Tower& tower);

// Gamma(C_n) / L^{nd} for a level-n cylinder set, in the model localized at L.
LocClass motivic_measure(const CylinderSet& c);

// Every cylinder on an arc tower of a smooth model realizes the stable-set
// bundle condition by construction; kept for API symmetry.
bool is_stable_set(const CylinderSet& c);

} // namespace prochern::arcs
