#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>

#include "conserva/systems.hpp"

namespace conserva {

struct ParseError : std::runtime_error {
  ParseError(const std::string& field, const std::string& message)
      : std::runtime_error("field '" + field + "': " + message), field(field) {}
  std::string field;
};

// On-disk description of a dynamical system. Exactly one payload is present,
// matching `kind`.
struct SystemFile {
  enum class Kind { replicator, lotka_volterra };
  Kind kind = Kind::replicator;
  std::optional<ReplicatorSystem> replicator;
  std::optional<LotkaVolterraSystem> lv;
  std::optional<Vector> equilibrium_hint;
  std::vector<std::string> labels;

  int state_dimension() const {
    return kind == Kind::replicator ? replicator->strategies() : lv->species();
  }
};

// Throws ParseError with a field path on malformed input; JSON syntax errors
// surface with the parser's byte position under the pseudo-field "(syntax)".
SystemFile parse_system_json(const std::string& text);
SystemFile load_system_file(const std::string& path);

nlohmann::json system_to_json(const SystemFile& file);

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json vector_to_json(const Vector& v);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);
Vector vector_from_json(const nlohmann::json& j, const std::string& field);

// Accepts either a bare array-of-arrays or an object {"matrix": ...}.
Matrix certificate_matrix_from_json(const std::string& text);

}  // namespace conserva
