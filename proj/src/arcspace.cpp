#include "prochern/arcspace.hpp"

namespace prochern::arcs {

using rings::GClass;

TowerPtr arc_tower(ModelPtr x, int d) { return prosys::Tower::arc(std::move(x), d); }

bool is_arc_tower(const prosys::Tower& tower) {
  return tower.kind() == prosys::Tower::Kind::Arc;
}

LocClass motivic_measure(const CylinderSet& c) {
  if (!is_arc_tower(*c.tower))
    throw MismatchError("motivic_measure needs a cylinder on an arc tower");
  const int d = *c.tower->arc_dim();
  const GClass num = geom::gamma_of_set(c.set);
  const unsigned exp = static_cast<unsigned>(c.level * d);
  if (exp == 0) return LocClass::make(num);
  const GClass l = GClass::atom(num.table(), "L");
  return LocClass::make(num, {{l, exp}});
}

bool is_stable_set(const CylinderSet& c) {
  if (!is_arc_tower(*c.tower))
    throw MismatchError("is_stable_set needs a cylinder on an arc tower");
  return true;
}

} // namespace prochern::arcs
