#include "wannierlab/model.hpp"

#include <cmath>
#include <map>

#include <json.hpp>

#include "wannierlab/linalg.hpp"

namespace wannierlab {

int TightBindingModel::decay_radius() const {
  int r = 0;
  for (const auto& h : hoppings)
    r = std::max({r, std::abs(h.cell[0]), std::abs(h.cell[1])});
  return r;
}

void TightBindingModel::validate() const {
  if (dim != 1 && dim != 2) throw Error("model", "dimension must be 1 or 2");
  if (sites.empty()) throw Error("model", "at least one basis site required");
  for (const auto& h : hoppings) {
    if (h.from < 0 || h.from >= num_sites() || h.to < 0 || h.to >= num_sites())
      throw Error("model", "hopping refers to a site outside the basis");
    if (dim == 1 && h.cell[1] != 0)
      throw Error("model", "1d model with a transverse cell offset");
  }
}

namespace {

using HopKey = std::tuple<int, int, int, int>;  // (row site, col site, g1, g2)

// canonical matrix elements H0(a,gamma;b,0), closure applied
std::map<HopKey, cxd> canonical_elements(const TightBindingModel& m, double tol) {
  std::map<HopKey, cxd> el;
  auto put = [&](int a, int b, int g1, int g2, cxd t, const Hopping& src) {
    HopKey key{a, b, g1, g2};
    auto it = el.find(key);
    if (it == el.end()) {
      el.emplace(key, t);
    } else if (std::abs(it->second - t) > tol) {
      throw Error("model",
                  "conflicting conjugate entry for hopping " + std::to_string(src.from) +
                      "->" + std::to_string(src.to) + " cell (" + std::to_string(src.cell[0]) +
                      "," + std::to_string(src.cell[1]) + ")");
    }
  };
  for (const auto& h : m.hoppings) {
    put(h.to, h.from, h.cell[0], h.cell[1], h.t, h);
    put(h.from, h.to, -h.cell[0], -h.cell[1], std::conj(h.t), h);
  }
  return el;
}

}  // namespace

std::vector<Hopping> hermitian_closure(const TightBindingModel& model, double tol) {
  auto el = canonical_elements(model, tol);
  std::vector<Hopping> out;
  out.reserve(el.size());
  for (const auto& [key, t] : el) {
    auto [a, b, g1, g2] = key;
    out.push_back(Hopping{b, a, {g1, g2}, t});  // from=b, to=a, H0(a,gamma;b,0)=t
  }
  return out;
}

BlochSampler build_bloch(const TightBindingModel& model, const Tolerances& tol) {
  model.validate();
  const int d = model.num_sites();
  auto el = canonical_elements(model, tol.herm);
  std::vector<std::tuple<int, int, double, double, cxd>> terms;
  terms.reserve(el.size());
  for (const auto& [key, t] : el) {
    auto [a, b, g1, g2] = key;
    terms.emplace_back(a, b, double(g1), double(g2), t);
  }
  const int dim = model.dim;
  BlochSampler s(dim, d, [terms, d](KVec k) {
    Mat h = Mat::Zero(d, d);
    for (const auto& [a, b, g1, g2, t] : terms)
      h(a, b) += t * std::exp(cxd(0, 2 * kPi * (k[0] * g1 + k[1] * g2)));
    return h;
  });
  // a cheap Hermiticity probe at a generic k; closure makes this structural
  KVec kprobe{0.1234375, model.dim == 2 ? 0.3671875 : 0.0};
  Mat h = s(kprobe);
  if ((h - h.adjoint()).norm() > tol.herm)
    throw Error("model", "sampled h(k) is not Hermitian after closure");
  return s;
}

CsState check_cs(BlochSampler& h, const KGrid& grid, const Tolerances& tol) {
  double worst = 0;
  for (int i = 0; i <= grid.n1; ++i) {
    int jmax = grid.dim == 2 ? grid.n2 : 0;
    for (int j = 0; j <= jmax; ++j) {
      KVec k = grid.node(i, j);
      KVec mk{-k[0], -k[1]};
      worst = std::max(worst, (h(k).transpose() - h(mk)).norm());
    }
  }
  CsState st = worst <= tol.cs ? CsState::holds : CsState::fails;
  h.set_cs(st);
  return st;
}

TightBindingModel preset_chain(double t) {
  TightBindingModel m;
  m.dim = 1;
  m.name = "chain";
  m.sites = {{0.0, 0.0}};
  m.hoppings = {{0, 0, {1, 0}, t}};
  return m;
}

TightBindingModel preset_ssh(double v, double w) {
  // h(k) = [[0, v + w e^{-2pi i k}], [v + w e^{2pi i k}, 0]]
  TightBindingModel m;
  m.dim = 1;
  m.name = "ssh";
  m.sites = {{0.0, 0.0}, {0.5, 0.0}};
  m.hoppings = {{0, 1, {0, 0}, v}, {0, 1, {1, 0}, w}};
  return m;
}

TightBindingModel preset_rice_mele(double v, double w, double u) {
  TightBindingModel m = preset_ssh(v, w);
  m.name = "rice-mele";
  m.hoppings.push_back({0, 0, {0, 0}, u});
  m.hoppings.push_back({1, 1, {0, 0}, -u});
  return m;
}

TightBindingModel preset_ssh2d(double v, double w) {
  // sites 0,1: SSH along x; sites 2,3: SSH along y; no inter-chain terms
  TightBindingModel m;
  m.dim = 2;
  m.name = "ssh2d";
  m.sites = {{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.0}, {0.0, 0.5}};
  m.hoppings = {{0, 1, {0, 0}, v}, {0, 1, {1, 0}, w},
                {2, 3, {0, 0}, v}, {2, 3, {0, 1}, w}};
  return m;
}

TightBindingModel preset_trs2d(double v, double w, double coupling) {
  TightBindingModel m = preset_ssh2d(v, w);
  m.name = "trs2d";
  // real on-site-offdiagonal and nearest-cell couplings between the chains
  m.hoppings.push_back({0, 2, {0, 0}, coupling});
  m.hoppings.push_back({1, 3, {0, 0}, coupling});
  m.hoppings.push_back({0, 3, {1, 1}, 0.5 * coupling});
  return m;
}

TightBindingModel preset_haldane(double t1, double t2, double phi, double mass) {
  // honeycomb in lattice coordinates; NNN phases with opposite chirality on
  // the two sublattices
  TightBindingModel m;
  m.dim = 2;
  m.name = "haldane";
  m.sites = {{1.0 / 3, 1.0 / 3}, {2.0 / 3, 2.0 / 3}};
  m.hoppings = {{0, 1, {0, 0}, t1}, {0, 1, {-1, 0}, t1}, {0, 1, {0, -1}, t1}};
  cxd tp = t2 * std::exp(cxd(0, phi));
  for (auto g : {std::array<int, 2>{1, 0}, {-1, 1}, {0, -1}}) {
    m.hoppings.push_back({0, 0, g, tp});
    m.hoppings.push_back({1, 1, {-g[0], -g[1]}, tp});
  }
  m.hoppings.push_back({0, 0, {0, 0}, mass});
  m.hoppings.push_back({1, 1, {0, 0}, -mass});
  return m;
}

TightBindingModel preset_by_name(const std::string& name,
                                 const std::vector<std::pair<std::string, double>>& params) {
  auto get = [&](const std::string& key, double dflt) {
    for (const auto& [k, v] : params)
      if (k == key) return v;
    return dflt;
  };
  if (name == "chain") return preset_chain(get("t", 1.0));
  if (name == "ssh") return preset_ssh(get("v", 1.0), get("w", 2.0));
  if (name == "rice-mele")
    return preset_rice_mele(get("v", 1.0), get("w", 2.0), get("u", 0.5));
  if (name == "ssh2d") return preset_ssh2d(get("v", 1.0), get("w", 2.0));
  if (name == "trs2d")
    return preset_trs2d(get("v", 1.0), get("w", 2.0), get("coupling", 0.4));
  if (name == "haldane-topological")
    return preset_haldane(get("t1", 1.0), get("t2", 0.15), get("phi", kPi / 2), get("m", 0.0));
  if (name == "haldane-trivial")
    return preset_haldane(get("t1", 1.0), get("t2", 0.15), 0.0, get("m", 0.5));
  throw Error("model", "unknown preset '" + name + "'");
}

TightBindingModel model_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TightBindingModel m;
  m.dim = j.at("dimension").get<int>();
  for (const auto& s : j.at("sites")) {
    std::array<double, 2> p{0, 0};
    for (size_t i = 0; i < s.size() && i < 2; ++i) p[i] = s[i].get<double>();
    m.sites.push_back(p);
  }
  for (const auto& h : j.at("hoppings")) {
    Hopping hp;
    hp.from = h.at("from").get<int>();
    hp.to = h.at("to").get<int>();
    const auto& c = h.at("cell");
    for (size_t i = 0; i < c.size() && i < 2; ++i) hp.cell[i] = c[i].get<int>();
    hp.t = cxd(h.value("re", 0.0), h.value("im", 0.0));
    m.hoppings.push_back(hp);
  }
  if (j.contains("name")) m.name = j["name"].get<std::string>();
  m.validate();
  return m;
}

std::string model_to_json(const TightBindingModel& m) {
  nlohmann::json j;
  j["dimension"] = m.dim;
  j["name"] = m.name;
  for (const auto& s : m.sites) {
    if (m.dim == 1)
      j["sites"].push_back({s[0]});
    else
      j["sites"].push_back({s[0], s[1]});
  }
  j["hoppings"] = nlohmann::json::array();
  for (const auto& h : m.hoppings) {
    nlohmann::json e;
    e["from"] = h.from;
    e["to"] = h.to;
    e["cell"] = m.dim == 1 ? nlohmann::json{h.cell[0]} : nlohmann::json{h.cell[0], h.cell[1]};
    e["re"] = h.t.real();
    e["im"] = h.t.imag();
    j["hoppings"].push_back(e);
  }
  return j.dump(2);
}

}  // namespace wannierlab
