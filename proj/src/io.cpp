#include "crossplit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crossplit/errors.hpp"

namespace crossplit {
namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); }

double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) bad(std::string("expected number field '") + key + "'");
  return j.at(key).get<double>();
}

// Long name or its one-letter alias.
double number(const Json& j, const char* key, const char* alias) {
  return j.contains(alias) && !j.contains(key) ? number(j, alias) : number(j, key);
}

void dump(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        dump(it.value(), indent, depth + 1, out);
      }
      out += nl;
      out += close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) {
          out += ",";
          out += nl;
        }
        out += pad;
        dump(j[i], indent, depth + 1, out);
      }
      out += nl;
      out += close + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace

PotentialSpec potential_from_json(const Json& j, const PotentialSpec* v1, const PotentialSpec* v2) {
  if (j.is_number()) return PotentialSpec::constant(j.get<double>());
  if (!j.is_object()) bad("potential must be an object or a number");
  if (j.contains("const")) return PotentialSpec::constant(number(j, "const"));
  if (!j.contains("family") || !j.at("family").is_string()) bad("potential needs a 'family'");
  const auto family = j.at("family").get<std::string>();
  if (family == "shifted_harmonic")
    return PotentialSpec::shifted_harmonic(number(j, "center", "c"), number(j, "curvature", "w"),
                                           number(j, "offset", "d"));
  if (family == "polynomial") {
    if (!j.contains("coeffs") || !j.at("coeffs").is_array() || j.at("coeffs").empty())
      bad("polynomial needs a non-empty 'coeffs' array");
    std::vector<double> c;
    for (const auto& v : j.at("coeffs")) {
      if (!v.is_number()) bad("polynomial coefficients must be numbers");
      c.push_back(v.get<double>());
    }
    return PotentialSpec::polynomial(std::move(c));
  }
  if (family == "mirror") {
    if (!j.contains("of")) bad("mirror needs 'of'");
    const auto& of = j.at("of");
    if (of.is_string()) {
      const auto name = of.get<std::string>();
      if (name == "v1" && v1) return PotentialSpec::mirror(*v1);
      if (name == "v2" && v2) return PotentialSpec::mirror(*v2);
      bad("mirror 'of' must name an already defined potential");
    }
    return PotentialSpec::mirror(potential_from_json(of, v1, v2));
  }
  bad("unknown potential family '" + family + "'");
}

Json potential_to_json(const PotentialSpec& p) {
  Json base;
  if (const auto* h = std::get_if<PotentialSpec::ShiftedHarmonic>(&p.base())) {
    base = {{"family", "shifted_harmonic"},
            {"center", h->center},
            {"curvature", h->curvature},
            {"offset", h->offset}};
  } else {
    base = {{"family", "polynomial"}, {"coeffs", std::get<PotentialSpec::Polynomial>(p.base()).coeffs}};
  }
  if (!p.is_mirrored()) return base;
  return {{"family", "mirror"}, {"of", base}};
}

CrossingModel model_from_json(const Json& j) {
  if (!j.is_object()) bad("model must be a JSON object");
  for (const char* k : {"v1", "v2", "window"})
    if (!j.contains(k)) bad(std::string("model is missing '") + k + "'");
  const PotentialSpec v1 = potential_from_json(j.at("v1"));
  const PotentialSpec v2 = potential_from_json(j.at("v2"), &v1);
  CouplingSpec coupling;
  if (j.contains("coupling")) {
    const auto& c = j.at("coupling");
    if (c.contains("r0")) coupling.r0 = potential_from_json(c.at("r0"));
    if (c.contains("r1")) coupling.r1 = potential_from_json(c.at("r1"));
  }
  if (j.contains("r0")) coupling.r0 = potential_from_json(j.at("r0"));
  if (j.contains("r1")) coupling.r1 = potential_from_json(j.at("r1"));
  const auto& w = j.at("window");
  EnergyWindow window{};
  if (w.is_array() && w.size() == 2 && w[0].is_number() && w[1].is_number()) {
    window = {w[0].get<double>(), w[1].get<double>()};
  } else if (w.is_object()) {
    window = {number(w, "lo"), number(w, "hi")};
  } else {
    bad("window must be {\"lo\":..,\"hi\":..} or [lo, hi]");
  }
  const bool symmetric = j.value("symmetric", false);
  return CrossingModel(v1, v2, coupling, window, symmetric);
}

Json model_to_json(const CrossingModel& m) {
  return {{"v1", potential_to_json(m.v1())},
          {"v2", potential_to_json(m.v2())},
          {"coupling", {{"r0", potential_to_json(m.r0())}, {"r1", potential_to_json(m.r1())}}},
          {"window", {{"lo", m.window().lo}, {"hi", m.window().hi}}},
          {"symmetric", m.symmetric()}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    bad("cannot parse '" + path + "': " + e.what());
  }
}

CrossingModel load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump(j, indent, 0, out);
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  out << text;
}

}  // namespace crossplit
