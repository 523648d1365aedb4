#include "chiralmag/config.hpp"

#include "chiralmag/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace chiralmag {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, field + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) fail(where + "." + it.key(), "unknown field");
  }
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<int>();
}

Vec3 vec3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) fail(field, "expected an array of 3 numbers");
  return {number(j[0], field + "[0]"), number(j[1], field + "[1]"), number(j[2], field + "[2]")};
}

Index3 index3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) fail(field, "expected an array of 3 integers");
  return {integer(j[0], field + "[0]"), integer(j[1], field + "[1]"), integer(j[2], field + "[2]")};
}

Mat3 mat3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) fail(field, "expected a 3x3 array");
  Mat3 A;
  for (int r = 0; r < 3; ++r) A.row(r) = vec3(j[static_cast<std::size_t>(r)], field + "[" + std::to_string(r) + "]").transpose();
  return A;
}

FaceSet faces(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of face names");
  FaceSet s;
  for (const auto& e : j) {
    if (!e.is_string()) fail(field, "face names are strings");
    const auto f = parse_face(e.get<std::string>());
    if (!f) fail(field, "unknown face '" + e.get<std::string>() + "' (use x-, x+, y-, y+, z-, z+)");
    s.set(static_cast<std::size_t>(*f));
  }
  return s;
}

PolynomialLoad load(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected a list of coefficient vectors [c0, c1, ...]");
  PolynomialLoad l;
  for (std::size_t k = 0; k < j.size(); ++k) l.coeffs.push_back(vec3(j[k], field + "[" + std::to_string(k) + "]"));
  return l;
}

AffineMap affine(const json& j, const std::string& field) {
  only_keys(j, field, {"A", "b"});
  AffineMap m;
  if (j.contains("A")) m.A = mat3(j["A"], field + ".A");
  if (j.contains("b")) m.b = vec3(j["b"], field + ".b");
  return m;
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "syntax error at " + line_col(text, e.byte) + ": " + e.what());
  }
  RunConfig c;
  c.text = text;
  only_keys(j, "config", {"grid", "material", "boundary", "initial", "loads", "eulerian", "energy", "optimizer",
                          "partition", "stability", "seed", "vtk"});

  if (j.contains("grid")) {
    const json& g = j["grid"];
    only_keys(g, "grid", {"lo", "hi", "cells", "dirichlet_faces", "neumann_faces"});
    if (g.contains("lo")) c.box.lo = vec3(g["lo"], "grid.lo");
    if (g.contains("hi")) c.box.hi = vec3(g["hi"], "grid.hi");
    if (g.contains("cells")) c.cells = index3(g["cells"], "grid.cells");
    if (g.contains("dirichlet_faces")) c.dirichlet = faces(g["dirichlet_faces"], "grid.dirichlet_faces");
    if (g.contains("neumann_faces")) c.neumann = faces(g["neumann_faces"], "grid.neumann_faces");
  }
  if (j.contains("material")) {
    const json& m = j["material"];
    only_keys(m, "material", {"a", "p", "s", "b", "alpha", "mu0", "kappa"});
    auto get = [&](const char* k, double& out) {
      if (m.contains(k)) out = number(m[k], std::string("material.") + k);
    };
    get("a", c.material.a);
    get("p", c.material.p);
    get("s", c.material.s);
    get("b", c.material.b);
    get("alpha", c.material.alpha);
    get("mu0", c.material.mu0);
    get("kappa", c.material.kappa);
  }
  if (j.contains("boundary")) {
    const json& b = j["boundary"];
    only_keys(b, "boundary", {"type", "A", "b", "faces"});
    const std::string type = b.value("type", "identity");
    if (type == "identity") {
      c.boundary_identity = true;
    } else if (type == "affine") {
      c.boundary_identity = false;
      json base = json::object();
      if (b.contains("A")) base["A"] = b["A"];
      if (b.contains("b")) base["b"] = b["b"];
      c.boundary.fallback = affine(base, "boundary");
      if (b.contains("faces")) {
        const json& fj = b["faces"];
        if (!fj.is_object()) fail("boundary.faces", "expected an object keyed by face name");
        for (auto it = fj.begin(); it != fj.end(); ++it) {
          const auto f = parse_face(it.key());
          if (!f) fail("boundary.faces." + it.key(), "unknown face");
          c.boundary.per_face[static_cast<std::size_t>(*f)] = affine(it.value(), "boundary.faces." + it.key());
        }
      }
    } else {
      fail("boundary.type", "expected 'identity' or 'affine'");
    }
  }
  if (j.contains("initial")) {
    const json& i = j["initial"];
    only_keys(i, "initial", {"type", "direction", "omega", "amplitude", "fixture"});
    if (i.contains("type")) {
      if (!i["type"].is_string()) fail("initial.type", "expected a string");
      c.initial.type = i["type"].get<std::string>();
    }
    if (i.contains("direction")) c.initial.direction = vec3(i["direction"], "initial.direction");
    if (i.contains("omega")) c.initial.omega = number(i["omega"], "initial.omega");
    if (i.contains("amplitude")) c.initial.amplitude = number(i["amplitude"], "initial.amplitude");
    if (i.contains("fixture")) {
      if (!i["fixture"].is_string()) fail("initial.fixture", "expected a string");
      c.initial.fixture = i["fixture"].get<std::string>();
    }
    const std::set<std::string> kinds{"uniform", "helix", "random", "fixture"};
    if (!kinds.count(c.initial.type)) fail("initial.type", "expected uniform, helix, random or fixture");
    if (c.initial.type == "uniform" && !(c.initial.direction.norm() > 0.0)) fail("initial.direction", "must be nonzero");
  }
  if (j.contains("loads")) {
    const json& l = j["loads"];
    only_keys(l, "loads", {"f", "g", "h"});
    if (l.contains("f")) c.loads.f = load(l["f"], "loads.f");
    if (l.contains("g")) c.loads.g = load(l["g"], "loads.g");
    if (l.contains("h")) c.loads.h = load(l["h"], "loads.h");
  }
  if (j.contains("eulerian")) {
    const json& e = j["eulerian"];
    only_keys(e, "eulerian", {"voxels", "padding"});
    if (e.contains("voxels")) c.voxels = index3(e["voxels"], "eulerian.voxels");
    if (e.contains("padding")) c.padding = number(e["padding"], "eulerian.padding");
    if (!(c.padding >= 2.0)) fail("eulerian.padding", "must be >= 2");
  }
  if (j.contains("energy")) {
    const json& e = j["energy"];
    only_keys(e, "energy", {"magnetostatics", "regularizer"});
    if (e.contains("magnetostatics")) {
      if (!e["magnetostatics"].is_boolean()) fail("energy.magnetostatics", "expected true or false");
      c.energy.magnetostatics = e["magnetostatics"].get<bool>();
    }
    if (e.contains("regularizer")) {
      if (!e["regularizer"].is_boolean()) fail("energy.regularizer", "expected true or false");
      c.energy.regularizer = e["regularizer"].get<bool>();
    }
  }
  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    only_keys(o, "optimizer", {"max_outer_iters", "grad_tol", "armijo_c1", "backtrack", "step_cap_y", "step_cap_mu",
                               "huber_eps_d", "huber_eps_tv", "det_floor", "max_backtracks"});
    OptimizerConfig& oc = c.optimizer;
    if (o.contains("max_outer_iters")) oc.max_outer_iters = integer(o["max_outer_iters"], "optimizer.max_outer_iters");
    if (o.contains("max_backtracks")) oc.max_backtracks = integer(o["max_backtracks"], "optimizer.max_backtracks");
    auto get = [&](const char* k, double& out) {
      if (o.contains(k)) out = number(o[k], std::string("optimizer.") + k);
    };
    get("grad_tol", oc.grad_tol);
    get("armijo_c1", oc.armijo_c1);
    get("backtrack", oc.backtrack);
    get("step_cap_y", oc.step_cap_y);
    get("step_cap_mu", oc.step_cap_mu);
    get("huber_eps_d", oc.huber_eps_d);
    get("huber_eps_tv", oc.huber_eps_tv);
    get("det_floor", oc.det_floor);
  }
  if (j.contains("partition")) {
    const json& p = j["partition"];
    only_keys(p, "partition", {"steps", "T", "times"});
    if (p.contains("times")) {
      if (!p["times"].is_array()) fail("partition.times", "expected an array");
      c.partition.times.clear();
      for (std::size_t k = 0; k < p["times"].size(); ++k) {
        c.partition.times.push_back(number(p["times"][k], "partition.times[" + std::to_string(k) + "]"));
      }
    } else {
      const int steps = p.contains("steps") ? integer(p["steps"], "partition.steps") : 8;
      const double T = p.contains("T") ? number(p["T"], "partition.T") : 1.0;
      if (steps < 1) fail("partition.steps", "must be >= 1");
      if (!(T > 0.0)) fail("partition.T", "must be > 0");
      c.partition = Partition::uniform(T, steps);
    }
    try {
      c.partition.validate();
    } catch (const Error& e) {
      fail("partition", e.what());
    }
  }
  if (j.contains("stability")) {
    const json& s = j["stability"];
    only_keys(s, "stability", {"samples_per_amplitude", "rotations", "tolerance"});
    if (s.contains("samples_per_amplitude")) c.stability.samples_per_amplitude = integer(s["samples_per_amplitude"], "stability.samples_per_amplitude");
    if (s.contains("rotations")) c.stability.rotations = integer(s["rotations"], "stability.rotations");
    if (s.contains("tolerance")) c.stability.tolerance = number(s["tolerance"], "stability.tolerance");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) fail("seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("vtk")) {
    if (!j["vtk"].is_boolean()) fail("vtk", "expected true or false");
    c.write_vtk = j["vtk"].get<bool>();
  }

  // Semantic checks reuse the library validators, reported against the config.
  try {
    c.material.validate();
  } catch (const Error& e) {
    fail("material", e.what());
  }
  try {
    Grid(c.box, c.cells, c.dirichlet, c.neumann);
  } catch (const Error& e) {
    fail("grid", e.what());
  }
  try {
    c.optimizer.validate();
  } catch (const Error& e) {
    fail("optimizer", e.what());
  }
  for (int d = 0; d < 3; ++d) {
    if (c.voxels[static_cast<std::size_t>(d)] < 8) fail("eulerian.voxels", "every axis needs at least 8 voxels");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Grid make_grid(const RunConfig& c) { return Grid(c.box, c.cells, c.dirichlet, c.neumann); }

State initial_state(const RunConfig& c) {
  if (c.initial.type == "fixture") {
    FixtureOptions fo;
    fo.cells = c.cells;
    fo.omega = c.initial.omega;
    fo.seed = c.seed;
    fo.amplitude = c.initial.amplitude;
    return build_fixture(c.initial.fixture, fo);
  }
  const Grid grid = make_grid(c);
  State q;
  if (c.initial.type == "uniform") {
    q = identity_state(grid, c.initial.direction);
  } else if (c.initial.type == "helix") {
    q = helix_state(grid, c.initial.omega);
  } else {
    q = random_smooth_state(grid, c.seed, c.initial.amplitude, true);
  }
  if (c.boundary_identity) {
    for (int n : grid.dirichlet_nodes()) q.y.nodes[static_cast<std::size_t>(n)] = grid.node_position(n);
  } else {
    // An affine datum deforms the whole body so the start stays admissible.
    for (int n = 0; n < grid.node_count(); ++n) {
      q.y.nodes[static_cast<std::size_t>(n)] = c.boundary.fallback(q.y.nodes[static_cast<std::size_t>(n)]);
    }
    apply_boundary(grid, c.boundary, q.y);
  }
  if (!(min_quadrature_determinant(grid, q.y) > 0.0)) {
    throw Error(ErrorCode::NonPositiveDeterminant, "initial state violates det grad y > 0 after applying the boundary datum");
  }
  return q;
}

EulerianGrid make_eulerian(const RunConfig& c, const State& q) {
  return EulerianGrid::enclosing(q.y.nodes, c.voxels, c.padding);
}

Problem make_problem(const RunConfig& c, const StrayField* stray) {
  Problem p;
  p.material = c.material;
  p.loads = c.loads;
  p.options = c.energy;
  p.stray = c.energy.magnetostatics ? stray : nullptr;
  return p;
}

} // namespace chiralmag
