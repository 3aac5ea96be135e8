#include "supcar/model_json.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace supcar {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw std::invalid_argument("model JSON: " + path + ": " + msg);
}

// nlohmann reports the 1-based byte offset; turn it into line/column.
[[noreturn]] void bad_parse(const std::string& text, std::size_t byte,
                            const char* what) {
  std::size_t line = 1, col = 1;
  const std::size_t stop = byte > 0 ? byte - 1 : 0;
  for (std::size_t i = 0; i < stop && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  std::ostringstream os;
  os << "model JSON: parse error at line " << line << ", column " << col
     << ": " << what;
  throw std::invalid_argument(os.str());
}

const json& member(const json& o, const std::string& path, const char* key) {
  auto it = o.find(key);
  if (it == o.end()) bad(path, std::string("missing key \"") + key + "\"");
  return *it;
}

void require_keys(const json& o, const std::string& path,
                  std::initializer_list<const char*> allowed) {
  if (!o.is_object()) bad(path, "expected an object");
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) bad(path + "." + it.key(), "unknown key");
  }
}

double num(const json& o, const std::string& path, const char* key) {
  const json& v = member(o, path, key);
  if (!v.is_number()) bad(path + "." + key, "expected a number");
  return v.get<double>();
}

std::string str(const json& o, const std::string& path, const char* key) {
  const json& v = member(o, path, key);
  if (!v.is_string()) bad(path + "." + key, "expected a string");
  return v.get<std::string>();
}

// [[x, mass], ...]
std::vector<std::pair<double, double>> pair_list(const json& v,
                                                 const std::string& path) {
  if (!v.is_array() || v.empty()) bad(path, "expected a nonempty array");
  std::vector<std::pair<double, double>> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
        !e[1].is_number())
      bad(path, "expected [value, mass] pairs");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

Measure1D measure(const json& o, const std::string& path) {
  if (!o.is_object()) bad(path, "expected an object");
  const std::string kind = str(o, path, "kind");
  if (kind == "dirac") {
    require_keys(o, path, {"kind", "x"});
    return DiracM{num(o, path, "x")};
  }
  if (kind == "gamma") {
    require_keys(o, path, {"kind", "shape", "rate"});
    return GammaM{num(o, path, "shape"), num(o, path, "rate")};
  }
  if (kind == "beta") {
    require_keys(o, path, {"kind", "b0", "b1"});
    return BetaM{num(o, path, "b0"), num(o, path, "b1")};
  }
  if (kind == "uniform") {
    require_keys(o, path, {"kind", "lo", "hi"});
    return UniformM{num(o, path, "lo"), num(o, path, "hi")};
  }
  if (kind == "discrete") {
    require_keys(o, path, {"kind", "atoms"});
    return DiscreteM{pair_list(member(o, path, "atoms"), path + ".atoms")};
  }
  if (kind == "sin2") {
    require_keys(o, path, {"kind"});
    return Sin2M{};
  }
  if (kind == "density")
    bad(path, "kind \"density\" is construction-API only (a callable density "
              "cannot round-trip through JSON)");
  bad(path + ".kind", "unknown measure kind \"" + kind + "\"");
}

JumpLaw jump_law(const json& o, const std::string& path) {
  if (!o.is_object()) bad(path, "expected an object");
  const std::string kind = str(o, path, "kind");
  if (kind == "normal") {
    require_keys(o, path, {"kind", "mean", "sd"});
    return NormalLaw{num(o, path, "mean"), num(o, path, "sd")};
  }
  if (kind == "exponential") {
    require_keys(o, path, {"kind", "rate"});
    return ExponentialLaw{num(o, path, "rate")};
  }
  if (kind == "two_point") {
    require_keys(o, path, {"kind", "x1", "p", "x2"});
    return TwoPointLaw{num(o, path, "x1"), num(o, path, "p"),
                       num(o, path, "x2")};
  }
  bad(path + ".kind", "unknown jump law \"" + kind + "\"");
}

JumpSpec jump_spec(const json& o, const std::string& path) {
  if (!o.is_object()) bad(path, "expected an object");
  const std::string kind = str(o, path, "kind");
  if (kind == "none") {
    require_keys(o, path, {"kind"});
    return NoJumps{};
  }
  if (kind == "compound_poisson") {
    require_keys(o, path, {"kind", "rate", "law"});
    return CompoundPoisson{num(o, path, "rate"),
                           jump_law(member(o, path, "law"), path + ".law")};
  }
  if (kind == "gamma_subordinator") {
    require_keys(o, path, {"kind", "shape", "rate"});
    return GammaSubordinator{num(o, path, "shape"), num(o, path, "rate")};
  }
  if (kind == "discrete") {
    require_keys(o, path, {"kind", "atoms"});
    return DiscreteJumps{pair_list(member(o, path, "atoms"), path + ".atoms")};
  }
  if (kind == "density")
    bad(path, "kind \"density\" is construction-API only (a callable density "
              "cannot round-trip through JSON)");
  bad(path + ".kind", "unknown jump kind \"" + kind + "\"");
}

std::vector<std::pair<ParamPoint, double>> joint_atoms(
    const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) bad(path, "expected a nonempty array");
  std::vector<std::pair<ParamPoint, double>> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_array() ||
        e[0].size() != 2 || !e[0][0].is_number() || !e[0][1].is_number() ||
        !e[1].is_number())
      bad(path, "expected [[v1, v2], mass] entries");
    out.push_back({ParamPoint{e[0][0].get<double>(), e[0][1].get<double>()},
                   e[1].get<double>()});
  }
  return out;
}

MixingSpec mixing(const json& o) {
  const std::string path = "mixing";
  if (!o.is_object()) bad(path, "expected an object");
  const std::string type = str(o, path, "type");
  if (type == "I") {
    require_keys(o, path, {"type", "rho"});
    return MixingSpec::type1(measure(member(o, path, "rho"), path + ".rho"));
  }
  if (type == "II") {
    if (o.contains("atoms")) {
      require_keys(o, path, {"type", "atoms"});
      return MixingSpec::type2_joint(
          joint_atoms(member(o, path, "atoms"), path + ".atoms"));
    }
    require_keys(o, path, {"type", "lambda", "theta"});
    return MixingSpec::type2(
        measure(member(o, path, "lambda"), path + ".lambda"),
        measure(member(o, path, "theta"), path + ".theta"));
  }
  if (type == "III") {
    if (o.contains("atoms")) {
      require_keys(o, path, {"type", "atoms"});
      return MixingSpec::type3_joint(
          joint_atoms(member(o, path, "atoms"), path + ".atoms"));
    }
    require_keys(o, path, {"type", "r", "psi"});
    return MixingSpec::type3(measure(member(o, path, "r"), path + ".r"),
                             measure(member(o, path, "psi"), path + ".psi"));
  }
  bad(path + ".type", "expected \"I\", \"II\" or \"III\"");
}

json measure_json(const Measure1D& m, const std::string& path) {
  return std::visit(
      [&path](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiracM>) {
          return {{"kind", "dirac"}, {"x", v.x}};
        } else if constexpr (std::is_same_v<T, GammaM>) {
          return {{"kind", "gamma"}, {"shape", v.shape}, {"rate", v.rate}};
        } else if constexpr (std::is_same_v<T, BetaM>) {
          return {{"kind", "beta"}, {"b0", v.b0}, {"b1", v.b1}};
        } else if constexpr (std::is_same_v<T, UniformM>) {
          return {{"kind", "uniform"}, {"lo", v.lo}, {"hi", v.hi}};
        } else if constexpr (std::is_same_v<T, DiscreteM>) {
          json atoms = json::array();
          for (const auto& [x, mass] : v.atoms)
            atoms.push_back(json::array({x, mass}));
          return {{"kind", "discrete"}, {"atoms", atoms}};
        } else if constexpr (std::is_same_v<T, Sin2M>) {
          return {{"kind", "sin2"}};
        } else {
          bad(path, "density measures cannot be serialized");
        }
      },
      m);
}

json jump_json(const JumpSpec& j) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NoJumps>) {
          return {{"kind", "none"}};
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          json law = std::visit(
              [](const auto& l) -> json {
                using L = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<L, NormalLaw>) {
                  return {{"kind", "normal"}, {"mean", l.mean}, {"sd", l.sd}};
                } else if constexpr (std::is_same_v<L, ExponentialLaw>) {
                  return {{"kind", "exponential"}, {"rate", l.rate}};
                } else {
                  return {{"kind", "two_point"},
                          {"x1", l.x1},
                          {"p", l.p},
                          {"x2", l.x2}};
                }
              },
              v.law);
          return {{"kind", "compound_poisson"}, {"rate", v.rate}, {"law", law}};
        } else if constexpr (std::is_same_v<T, GammaSubordinator>) {
          return {{"kind", "gamma_subordinator"},
                  {"shape", v.shape},
                  {"rate", v.rate}};
        } else if constexpr (std::is_same_v<T, DiscreteJumps>) {
          json atoms = json::array();
          for (const auto& [x, mass] : v.atoms)
            atoms.push_back(json::array({x, mass}));
          return {{"kind", "discrete"}, {"atoms", atoms}};
        } else {
          bad("levy.jump", "density-form measures cannot be serialized");
        }
      },
      j);
}

}  // namespace

ProcessSpec model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad_parse(text, e.byte, e.what());
  }
  if (!doc.is_object()) bad("$", "expected a top-level object");
  require_keys(doc, "$", {"levy", "mixing"});
  const json& lv = member(doc, "$", "levy");
  require_keys(lv, "levy", {"gamma", "sigma2", "jump"});
  LevyTriplet levy = LevyTriplet::make(
      num(lv, "levy", "gamma"), num(lv, "levy", "sigma2"),
      jump_spec(member(lv, "levy", "jump"), "levy.jump"));
  MixingSpec mix = mixing(member(doc, "$", "mixing"));
  return ProcessSpec::make(std::move(levy), std::move(mix),
                           /*unchecked=*/true);
}

ProcessSpec model_from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

std::string model_to_json(const ProcessSpec& spec) {
  json mix;
  if (spec.mixing.joint) {
    json atoms = json::array();
    for (const auto& [pt, mass] : spec.mixing.joint_atoms)
      atoms.push_back(json::array({json::array({pt.v1, pt.v2}), mass}));
    mix = {{"type", type_name(spec.tag)}, {"atoms", atoms}};
  } else if (spec.tag == TypeTag::I) {
    mix = {{"type", "I"},
           {"rho", measure_json(spec.mixing.law1, "mixing.rho")}};
  } else if (spec.tag == TypeTag::II) {
    mix = {{"type", "II"},
           {"lambda", measure_json(spec.mixing.law1, "mixing.lambda")},
           {"theta", measure_json(spec.mixing.law2, "mixing.theta")}};
  } else {
    mix = {{"type", "III"},
           {"r", measure_json(spec.mixing.law1, "mixing.r")},
           {"psi", measure_json(spec.mixing.law2, "mixing.psi")}};
  }
  json doc = {{"levy",
               {{"gamma", spec.levy.gamma},
                {"sigma2", spec.levy.sigma2},
                {"jump", jump_json(spec.levy.jump)}}},
              {"mixing", mix}};
  return doc.dump(2) + "\n";
}

}  // namespace supcar
