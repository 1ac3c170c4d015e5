#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prochern/arcspace.hpp"
#include "prochern/dsl.hpp"

namespace py = pybind11;
using namespace prochern;

namespace {

// Thin value wrappers: exact integers and rationals cross the boundary as
// strings, python-side helpers turn them into int / Fraction.

struct PyTable {
  rings::AtomTablePtr p;
};
struct PyClass {
  rings::GClass v;
};
struct PyModel {
  geom::ModelPtr p;
};
struct PyMorphism {
  geom::MorphPtr p;
};
struct PyFn {
  geom::ConstructibleFunction v;
};
struct PyTower {
  prosys::TowerPtr p;
};
struct PyProFn {
  prosys::ProFunction v;
};
struct PyCyl {
  prosys::CylinderSet v;
};

rings::Int to_int(long long v) { return rings::Int(v); }

geom::ConstructibleFunction fn_from_dict(
    const geom::ModelPtr& model, const std::map<std::string, long long>& values) {
  std::vector<rings::Int> out(model->size(), rings::Int(0));
  for (const auto& [id, v] : values) out[model->index_of(id)] = to_int(v);
  return geom::ConstructibleFunction(model, std::move(out));
}

prosys::StepInts p_system(const std::optional<std::vector<long long>>& values,
                          bool periodic, const prosys::ProFunction& pf,
                          int horizon) {
  if (!values) {
    const auto& t = *pf.tower;
    if (t.period()) {
      auto sys = prosys::fiber_chi_system(t, *t.period());
      sys.periodic = true;
      return sys;
    }
    const int count = (t.finite() ? *t.top() : pf.level + horizon) - t.base();
    return prosys::fiber_chi_system(t, count);
  }
  prosys::StepInts out;
  for (long long v : *values) out.values.push_back(to_int(v));
  out.periodic = periodic;
  return out;
}

} // namespace

PYBIND11_MODULE(_prochern, m) {
  m.doc() = "Exact calculus of constructible functions on towers of "
            "stratified variety models";

  py::register_exception<Error>(m, "ProchernError");

  py::class_<PyTable>(m, "AtomTable")
      .def(py::init([](const std::vector<std::pair<std::string, long long>>& entries) {
        std::vector<rings::AtomTable::Entry> raw;
        for (const auto& [name, euler] : entries) raw.push_back({name, to_int(euler)});
        return PyTable{rings::AtomTable::make(std::move(raw))};
      }), py::arg("entries") = std::vector<std::pair<std::string, long long>>{})
      .def("contains", [](const PyTable& t, const std::string& s) {
        return t.p->contains(s);
      })
      .def("euler", [](const PyTable& t, const std::string& s) {
        return t.p->euler(s).str();
      });

  py::class_<PyClass>(m, "GClass")
      .def("__add__", [](const PyClass& a, const PyClass& b) { return PyClass{a.v + b.v}; })
      .def("__sub__", [](const PyClass& a, const PyClass& b) { return PyClass{a.v - b.v}; })
      .def("__mul__", [](const PyClass& a, const PyClass& b) { return PyClass{a.v * b.v}; })
      .def("__neg__", [](const PyClass& a) { return PyClass{-a.v}; })
      .def("__eq__", [](const PyClass& a, const PyClass& b) { return a.v == b.v; })
      .def("__pow__", [](const PyClass& a, unsigned e) { return PyClass{a.v.pow(e)}; })
      .def("__str__", [](const PyClass& a) { return a.v.str(); })
      .def("__repr__", [](const PyClass& a) { return "GClass(" + a.v.str() + ")"; })
      .def("is_zero", [](const PyClass& a) { return a.v.is_zero(); })
      .def("chi", [](const PyClass& a) { return rings::chi_hom(a.v).str(); });

  m.def("parse_class", [](const PyTable& t, const std::string& text) {
    return PyClass{dsl::parse_gclass(text, t.p)};
  });

  py::class_<PyModel>(m, "VarietyModel")
      .def("name", [](const PyModel& x) { return x.p->name(); })
      .def("strata", [](const PyModel& x) {
        std::vector<std::string> out;
        for (const auto& s : x.p->strata()) out.push_back(s.id);
        return out;
      })
      .def("stratum_class", [](const PyModel& x, const std::string& id) {
        return PyClass{x.p->strata()[x.p->index_of(id)].cls};
      })
      .def("chi", [](const PyModel& x) { return x.p->chi().str(); })
      .def("gamma", [](const PyModel& x) { return PyClass{x.p->gamma()}; });

  m.def("make_variety",
        [](const PyTable& t, const std::string& name,
           const std::vector<std::pair<std::string, PyClass>>& strata) {
          std::vector<geom::Stratum> raw;
          for (const auto& [id, cls] : strata) raw.push_back({id, cls.v});
          return PyModel{geom::VarietyModel::make(name, t.p, std::move(raw))};
        });
  m.def("cross_model", [](const PyModel& a, const PyModel& b) {
    return PyModel{geom::cross_model(a.p, b.p)};
  });

  py::class_<PyFn>(m, "ConstructibleFunction")
      .def("__eq__", [](const PyFn& a, const PyFn& b) { return a.v == b.v; })
      .def("chi", [](const PyFn& a) { return geom::chi_of_fn(a.v).str(); })
      .def("gamma", [](const PyFn& a) { return PyClass{geom::gamma_of_fn(a.v)}; })
      .def("value", [](const PyFn& a, const std::string& id) {
        return a.v.at(a.v.parent()->index_of(id)).str();
      });

  m.def("make_fn", [](const PyModel& x, const std::map<std::string, long long>& values) {
    return PyFn{fn_from_dict(x.p, values)};
  });
  m.def("constant_fn", [](const PyModel& x, long long c) {
    return PyFn{geom::ConstructibleFunction::constant(x.p, to_int(c))};
  });

  py::class_<PyMorphism>(m, "MorphismModel")
      .def("strict", [](const PyMorphism& f) { return f.p->strict(); })
      .def("surjective", [](const PyMorphism& f) { return f.p->surjective(); });

  m.def("make_morphism",
        [](const PyModel& src, const PyModel& dst,
           const std::vector<std::tuple<std::string, std::string, PyClass>>& entries,
           bool strict) {
          std::vector<size_t> map(src.p->size());
          std::vector<rings::GClass> fiber(src.p->size(),
                                           rings::GClass::unit(src.p->table()));
          std::vector<bool> seen(src.p->size(), false);
          for (const auto& [s, t, f] : entries) {
            const size_t si = src.p->index_of(s);
            if (seen[si]) throw DomainError("stratum '" + s + "' mapped twice");
            seen[si] = true;
            map[si] = dst.p->index_of(t);
            fiber[si] = f.v;
          }
          for (size_t s = 0; s < seen.size(); ++s)
            if (!seen[s])
              throw DomainError("stratum '" + src.p->strata()[s].id +
                                "' has no map entry");
          return PyMorphism{geom::MorphismModel::make(src.p, dst.p, std::move(map),
                                                      std::move(fiber), strict)};
        },
        py::arg("source"), py::arg("target"), py::arg("entries"),
        py::arg("strict") = false);
  m.def("identity_morphism", [](const PyModel& x) {
    return PyMorphism{geom::MorphismModel::identity(x.p)};
  });
  m.def("pushforward", [](const PyMorphism& f, const PyFn& a) {
    return PyFn{geom::pushforward(*f.p, a.v)};
  });
  m.def("pullback", [](const PyMorphism& f, const PyFn& b) {
    return PyFn{geom::pullback(*f.p, b.v)};
  });

  py::class_<PyTower>(m, "Tower")
      .def("base", [](const PyTower& t) { return t.p->base(); })
      .def("strata_at", [](const PyTower& t, int level) {
        std::vector<std::string> out;
        for (const auto& s : t.p->model(level)->strata()) out.push_back(s.id);
        return out;
      });

  m.def("product_tower", [](const PyModel& x) {
    return PyTower{prosys::Tower::product(x.p)};
  });
  m.def("bundle_tower",
        [](const PyModel& x, const std::vector<PyClass>& fibers, bool periodic) {
          std::vector<rings::GClass> raw;
          for (const auto& f : fibers) raw.push_back(f.v);
          return PyTower{prosys::Tower::bundle(x.p, std::move(raw), periodic)};
        },
        py::arg("x"), py::arg("fibers"), py::arg("periodic") = true);
  m.def("arc_tower", [](const PyModel& x, int dim) {
    return PyTower{arcs::arc_tower(x.p, dim)};
  });
  m.def("steps_tower", [](const std::vector<PyMorphism>& steps) {
    std::vector<geom::MorphPtr> raw;
    for (const auto& s : steps) raw.push_back(s.p);
    return PyTower{prosys::Tower::from_steps(std::move(raw))};
  });

  py::class_<PyProFn>(m, "ProFunction")
      .def("level", [](const PyProFn& f) { return f.v.level; })
      .def("chi", [](const PyProFn& f) { return geom::chi_of_fn(f.v.fn).str(); });

  m.def("profn",
        [](const PyTower& t, int level, const std::map<std::string, long long>& values) {
          return PyProFn{prosys::ProFunction(t.p, level,
                                             fn_from_dict(t.p->model(level), values))};
        });
  m.def("procharacteristic", [](const PyTower& t) {
    return PyProFn{prosys::procharacteristic(t.p)};
  });
  m.def("lift", [](const PyProFn& f, int m) { return PyProFn{prosys::lift(f.v, m)}; });
  m.def("pro_add", [](const PyProFn& a, const PyProFn& b) {
    return PyProFn{prosys::pro_add(a.v, b.v)};
  });
  m.def("pro_eq",
        [](const PyProFn& a, const PyProFn& b, int horizon) {
          const auto v = prosys::pro_eq(a.v, b.v, horizon);
          return py::make_tuple(v.equal, v.definitive, v.checked_to);
        },
        py::arg("a"), py::arg("b"), py::arg("horizon") = 8);
  m.def("chi_pro",
        [](const PyProFn& f, int w) { return prosys::chi_pro(f.v, w).str(); },
        py::arg("f"), py::arg("w") = 0);
  m.def("gamma_pro",
        [](const PyProFn& f, int w) { return prosys::gamma_pro(f.v, w).str(); },
        py::arg("f"), py::arg("w") = 0);
  m.def("is_chi_stable",
        [](const PyProFn& f, const std::optional<std::vector<long long>>& p,
           bool periodic, int horizon) {
          const auto v =
              prosys::is_chi_stable(f.v, p_system(p, periodic, f.v, horizon), horizon);
          return py::make_tuple(v.stable, v.definitive, v.checked_to);
        },
        py::arg("f"), py::arg("p") = std::nullopt, py::arg("periodic") = false,
        py::arg("horizon") = 8);
  m.def("stable_chi_pro",
        [](const PyProFn& f, const std::optional<std::vector<long long>>& p,
           bool periodic, int horizon) {
          return prosys::stable_chi_pro(f.v, p_system(p, periodic, f.v, horizon),
                                        horizon)
              .str();
        },
        py::arg("f"), py::arg("p") = std::nullopt, py::arg("periodic") = false,
        py::arg("horizon") = 8);

  py::class_<PyCyl>(m, "CylinderSet")
      .def("level", [](const PyCyl& c) { return c.v.level; });

  m.def("cylinder",
        [](const PyTower& t, int level,
           const std::optional<std::vector<std::string>>& ids) {
          const auto model = t.p->model(level);
          auto set = ids ? geom::ConstructibleSet::of_ids(model, *ids)
                         : geom::ConstructibleSet::whole(model);
          return PyCyl{prosys::CylinderSet(t.p, level, std::move(set))};
        },
        py::arg("tower"), py::arg("level"), py::arg("ids") = std::nullopt);
  m.def("lift_cylinder", [](const PyCyl& c, int m) {
    return PyCyl{prosys::lift_cyl(c.v, m)};
  });
  m.def("cyl_intersect", [](const PyCyl& a, const PyCyl& b) {
    return PyCyl{prosys::cyl_intersect(a.v, b.v)};
  });
  m.def("cyl_symmdiff", [](const PyCyl& a, const PyCyl& b) {
    return PyCyl{prosys::cyl_symmdiff(a.v, b.v)};
  });
  m.def("cyl_eq",
        [](const PyCyl& a, const PyCyl& b, int horizon) {
          const auto v = prosys::cyl_eq(a.v, b.v, horizon);
          return py::make_tuple(v.equal, v.definitive, v.checked_to);
        },
        py::arg("a"), py::arg("b"), py::arg("horizon") = 8);
  m.def("indicator", [](const PyCyl& c) {
    return PyProFn{prosys::ProFunction(
        c.v.tower, c.v.level, geom::ConstructibleFunction::indicator(c.v.set))};
  });
  m.def("motivic_measure", [](const PyCyl& c) {
    return arcs::motivic_measure(c.v).str();
  });
  m.def("is_stable_set", [](const PyCyl& c) { return arcs::is_stable_set(c.v); });

  // --- document surface -------------------------------------------------------

  m.def("format_document", [](const std::string& text) {
    try {
      return dsl::render(dsl::parse(text));
    } catch (const dsl::ParseError& e) {
      throw Error(std::to_string(e.loc().line) + ":" +
                  std::to_string(e.loc().col) + ": " + e.what());
    }
  });
  m.def("evaluate_document",
        [](const std::string& text, std::uint64_t seed, int depth, int horizon,
           bool checks_only, bool json) {
          dsl::EvalOptions options;
          options.seed = seed;
          options.depth = depth;
          options.horizon = horizon;
          options.checks_only = checks_only;
          try {
            const auto report = dsl::evaluate(dsl::parse(text), options);
            return py::make_tuple(
                json ? dsl::render_json(report) : dsl::render_text(report),
                report.all_pass());
          } catch (const dsl::ParseError& e) {
            throw Error(std::to_string(e.loc().line) + ":" +
                        std::to_string(e.loc().col) + ": " + e.what());
          } catch (const dsl::EvalError& e) {
            throw Error("in '" + e.decl() + "': " + e.what());
          }
        },
        py::arg("text"), py::arg("seed") = 0, py::arg("depth") = 4,
        py::arg("horizon") = 8, py::arg("checks_only") = false,
        py::arg("json") = false);

  m.attr("__version__") = "0.1.0";
}
