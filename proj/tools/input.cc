#include "input.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pcol/errors.h"

namespace pcol::cli {
namespace {

using nlohmann::json;

[[noreturn]] void SchemaError(const std::string& what) {
  throw Error(ErrorCode::kInvalidInput, "input schema: " + what);
}

double Number(const json& j, const std::string& where) {
  if (!j.is_number()) SchemaError(where + " must be a number");
  return j.get<double>();
}

Vec3 Vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) SchemaError(where + " must be an array of 3 numbers");
  return Vec3(Number(j[0], where), Number(j[1], where), Number(j[2], where));
}

ObjectState Object(const json& j, const std::string& where) {
  if (!j.is_object()) SchemaError(where + " must be an object");
  for (const char* key : {"position_m", "velocity_mps", "covariance_m2", "radius_m"}) {
    if (!j.contains(key)) SchemaError(where + " is missing '" + key + "'");
  }
  ObjectState s;
  s.position = Vector(j["position_m"], where + ".position_m");
  s.velocity = Vector(j["velocity_mps"], where + ".velocity_mps");
  const json& c = j["covariance_m2"];
  if (!c.is_array() || c.size() != 3) SchemaError(where + ".covariance_m2 must be 3x3");
  for (int r = 0; r < 3; ++r) {
    s.covariance.row(r) = Vector(c[r], where + ".covariance_m2").transpose();
  }
  s.radius = Number(j["radius_m"], where + ".radius_m");
  ValidateObjectState(s);
  return s;
}

}  // namespace

ConjunctionInput ParseConjunctionInput(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    SchemaError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema", "") != kInputSchema) {
    SchemaError(std::string("expected \"schema\": \"") + kInputSchema + "\"");
  }
  const json& objects = doc.contains("objects") ? doc["objects"] : json();
  if (!objects.is_array() || objects.size() != 2) SchemaError("'objects' must hold two entries");
  ConjunctionInput in;
  for (int i = 0; i < 2; ++i) {
    const std::string where = "objects[" + std::to_string(i) + "]";
    in.objects[i] = Object(objects[i], where);
    const json& label = objects[i].contains("label") ? objects[i]["label"] : json("");
    if (!label.is_string()) SchemaError(where + ".label must be a string");
    in.labels[i] = label.get<std::string>();
  }
  return in;
}

ConjunctionInput ReadConjunctionInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConjunctionInput(text.str());
}

}  // namespace pcol::cli
