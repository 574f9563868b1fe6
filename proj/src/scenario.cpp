#include "pdifs/scenario.hpp"

#include <fstream>
#include <set>

#include "pdifs/errors.hpp"

namespace pdifs {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ScenarioError("scenario: " + key + ": " + what);
}

const json& expect(const json& j, const std::string& key,
                   const std::string& label = "") {
  if (!j.contains(key)) fail(label.empty() ? key : label, "missing");
  return j.at(key);
}

double as_number(const json& j, const std::string& key) {
  if (!j.is_number()) fail(key, "expected a number");
  return j.get<double>();
}

std::int64_t as_integer(const json& j, const std::string& key) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    fail(key, "expected an integer");
  return j.get<std::int64_t>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& key,
                          Eigen::Index expect_len = -1) {
  if (!j.is_array()) fail(key, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) =
        as_number(j[i], key + "[" + std::to_string(i) + "]");
  if (expect_len >= 0 && v.size() != expect_len)
    fail(key, "expected length " + std::to_string(expect_len));
  return v;
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& key,
                          Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    fail(key, "expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string rk = key + "[" + std::to_string(r) + "]";
    Eigen::VectorXd row = as_vector(j[static_cast<std::size_t>(r)], rk, cols);
    m.row(r) = row.transpose();
  }
  return m;
}

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.contains(it.key()))
      fail(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

WeightFunction parse_weights(const json& j, const std::string& key, int dim,
                             int count) {
  if (!j.is_object()) fail(key, "expected an object");
  const std::string kind = expect(j, "kind", key + ".kind").get<std::string>();
  try {
    if (kind == "constant") {
      check_keys(j, key, {"kind", "probs"});
      Eigen::VectorXd p =
          as_vector(expect(j, "probs", key + ".probs"), key + ".probs", count);
      return WeightFunction::constant(std::move(p));
    }
    if (kind == "clamped_affine_pair") {
      check_keys(j, key, {"kind", "a", "b", "lo", "hi"});
      if (count != 2) fail(key, "clamped_affine_pair requires exactly 2 maps");
      return WeightFunction::clamped_affine_pair(
          as_vector(expect(j, "a", key + ".a"), key + ".a", dim),
          as_number(expect(j, "b", key + ".b"), key + ".b"),
          as_number(expect(j, "lo", key + ".lo"), key + ".lo"),
          as_number(expect(j, "hi", key + ".hi"), key + ".hi"));
    }
    if (kind == "softmax_affine") {
      check_keys(j, key, {"kind", "a", "b"});
      return WeightFunction::softmax_affine(
          as_matrix(expect(j, "a", key + ".a"), key + ".a", count, dim),
          as_vector(expect(j, "b", key + ".b"), key + ".b", count));
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const Error& e) {
    fail(key, e.what());
  }
  fail(key + ".kind", "expected constant, clamped_affine_pair or softmax_affine");
}

}  // namespace

Scenario Scenario::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ScenarioError("scenario: " + path.string() + ": " + e.what());
  }
  return from_json(std::move(doc));
}

Scenario Scenario::from_json(json doc) {
  if (doc.is_object() && doc.contains("scenario") && doc.contains("artifact"))
    doc = doc.at("scenario");  // run manifest wrapper
  if (!doc.is_object()) fail("(root)", "expected an object");

  check_keys(doc, "",
             {"note", "seed", "dim", "system", "x0", "y0", "steps", "replicas",
              "burn_in", "pairs", "region", "beta"});

  Scenario s;
  s.resolved_ = std::move(doc);
  json& j = s.resolved_;

  const std::int64_t seed = as_integer(expect(j, "seed"), "seed");
  if (seed < 0) fail("seed", "expected a nonnegative integer");
  const int dim = static_cast<int>(as_integer(expect(j, "dim"), "dim"));
  if (dim < 1) fail("dim", "expected >= 1");

  // Defaults, materialized so the manifest echoes the full configuration.
  if (!j.contains("x0")) j["x0"] = std::vector<double>(static_cast<std::size_t>(dim), 0.0);
  if (!j.contains("y0")) j["y0"] = std::vector<double>(static_cast<std::size_t>(dim), 0.0);
  if (!j.contains("steps")) j["steps"] = 40;
  if (!j.contains("replicas")) j["replicas"] = 10000;
  if (!j.contains("burn_in")) j["burn_in"] = 1000;
  if (!j.contains("pairs")) j["pairs"] = 1000;
  if (!j.contains("beta")) j["beta"] = 0.95;
  if (!j.contains("region")) {
    j["region"] = {{"lo", std::vector<double>(static_cast<std::size_t>(dim), -5.0)},
                   {"hi", std::vector<double>(static_cast<std::size_t>(dim), 5.0)}};
  }
  if (!j.contains("note")) j["note"] = "";

  as_vector(j.at("x0"), "x0", dim);
  as_vector(j.at("y0"), "y0", dim);
  if (as_integer(j.at("steps"), "steps") < 0) fail("steps", "expected >= 0");
  if (as_integer(j.at("replicas"), "replicas") < 1)
    fail("replicas", "expected >= 1");
  if (as_integer(j.at("burn_in"), "burn_in") < 0)
    fail("burn_in", "expected >= 0");
  if (as_integer(j.at("pairs"), "pairs") < 1) fail("pairs", "expected >= 1");
  const double beta = as_number(j.at("beta"), "beta");
  if (!(beta > 0.0 && beta < 1.0)) fail("beta", "expected in (0, 1)");
  const json& region = j.at("region");
  if (!region.is_object()) fail("region", "expected an object");
  check_keys(region, "region", {"lo", "hi"});
  const Eigen::VectorXd lo = as_vector(expect(region, "lo"), "region.lo", dim);
  const Eigen::VectorXd hi = as_vector(expect(region, "hi"), "region.hi", dim);
  if (((hi - lo).array() <= 0.0).any())
    fail("region", "box must have positive extent");

  // Validates the system block eagerly so malformed scenarios are rejected
  // before any run starts.
  s.build_system();
  return s;
}

std::uint64_t Scenario::seed() const {
  return resolved_.at("seed").get<std::uint64_t>();
}
int Scenario::dim() const { return resolved_.at("dim").get<int>(); }

bool Scenario::is_mixture() const {
  return expect(resolved_, "system").value("kind", "") == "mixture_affine";
}

StatePoint Scenario::x0() const { return as_vector(resolved_.at("x0"), "x0"); }
StatePoint Scenario::y0() const { return as_vector(resolved_.at("y0"), "y0"); }
int Scenario::steps() const { return resolved_.at("steps").get<int>(); }
int Scenario::replicas() const { return resolved_.at("replicas").get<int>(); }
int Scenario::burn_in() const { return resolved_.at("burn_in").get<int>(); }
int Scenario::pairs() const { return resolved_.at("pairs").get<int>(); }
double Scenario::beta() const { return resolved_.at("beta").get<double>(); }

Region Scenario::region() const {
  Region r;
  r.lo = as_vector(resolved_.at("region").at("lo"), "region.lo");
  r.hi = as_vector(resolved_.at("region").at("hi"), "region.hi");
  return r;
}

PlaceDependentSystem Scenario::build_system() const {
  const json& sys = expect(resolved_, "system");
  if (!sys.is_object()) fail("system", "expected an object");
  const std::string kind = expect(sys, "kind").get<std::string>();
  const int d = dim();
  if (kind == "finite_affine") {
    check_keys(sys, "system", {"kind", "maps", "weights"});
    const json& maps_json = expect(sys, "maps", "system.maps");
    if (!maps_json.is_array() || maps_json.empty())
      fail("system.maps", "expected a nonempty array");
    std::vector<AffineMap> maps;
    for (std::size_t i = 0; i < maps_json.size(); ++i) {
      const std::string mk = "system.maps[" + std::to_string(i) + "]";
      const json& mj = maps_json[i];
      if (!mj.is_object()) fail(mk, "expected an object");
      check_keys(mj, mk, {"M", "Q"});
      try {
        maps.push_back(AffineMap::make(
            as_matrix(expect(mj, "M", mk + ".M"), mk + ".M", d, d),
            as_vector(expect(mj, "Q", mk + ".Q"), mk + ".Q", d)));
      } catch (const ScenarioError&) {
        throw;
      } catch (const Error& e) {
        fail(mk, e.what());
      }
    }
    WeightFunction w =
        parse_weights(expect(sys, "weights", "system.weights"),
                      "system.weights", d, static_cast<int>(maps.size()));
    try {
      return PlaceDependentSystem::make(d, std::move(maps), std::move(w));
    } catch (const Error& e) {
      fail("system", e.what());
    }
  }
  if (kind == "mixture_affine") return to_system(build_kernel());
  fail("system.kind", "expected finite_affine or mixture_affine");
}

MixtureAffineKernel Scenario::build_kernel() const {
  const json& sys = expect(resolved_, "system");
  if (expect(sys, "kind").get<std::string>() != "mixture_affine")
    fail("system.kind", "subcommand requires a mixture_affine system");
  check_keys(sys, "system", {"kind", "components", "weights"});
  const int d = dim();
  const json& comps_json = expect(sys, "components", "system.components");
  if (!comps_json.is_array() || comps_json.empty())
    fail("system.components", "expected a nonempty array");
  std::vector<MixtureAffineKernel::ComponentSpec> comps;
  for (std::size_t i = 0; i < comps_json.size(); ++i) {
    const std::string ck = "system.components[" + std::to_string(i) + "]";
    const json& cj = comps_json[i];
    if (!cj.is_object()) fail(ck, "expected an object");
    check_keys(cj, ck, {"atoms"});
    const json& atoms_json = expect(cj, "atoms", ck + ".atoms");
    if (!atoms_json.is_array() || atoms_json.empty())
      fail(ck + ".atoms", "expected a nonempty array");
    MixtureAffineKernel::ComponentSpec spec;
    for (std::size_t a = 0; a < atoms_json.size(); ++a) {
      const std::string ak = ck + ".atoms[" + std::to_string(a) + "]";
      const json& aj = atoms_json[a];
      if (!aj.is_object()) fail(ak, "expected an object");
      check_keys(aj, ak, {"M", "Q", "w"});
      try {
        spec.emplace_back(
            AffineMap::make(
                as_matrix(expect(aj, "M", ak + ".M"), ak + ".M", d, d),
                as_vector(expect(aj, "Q", ak + ".Q"), ak + ".Q", d)),
            as_number(expect(aj, "w", ak + ".w"), ak + ".w"));
      } catch (const ScenarioError&) {
        throw;
      } catch (const Error& e) {
        fail(ak, e.what());
      }
    }
    comps.push_back(std::move(spec));
  }
  WeightFunction w =
      parse_weights(expect(sys, "weights", "system.weights"), "system.weights",
                    d, static_cast<int>(comps.size()));
  try {
    return MixtureAffineKernel::make(d, comps, std::move(w));
  } catch (const Error& e) {
    fail("system", e.what());
  }
}

void Scenario::set_field(const std::string& key, const nlohmann::json& value) {
  resolved_[key] = value;
}

void apply_override(nlohmann::json& doc, const std::string& path,
                    const std::string& value_text) {
  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::exception&) {
    value = value_text;  // plain string
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot - start);
    if (part.empty()) throw ScenarioError("scenario: override: empty key in " + path);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace pdifs
