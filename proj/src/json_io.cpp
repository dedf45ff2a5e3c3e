#include "conserva/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace conserva {

using nlohmann::json;

namespace {

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("(syntax)", e.what());
  }
}

double number_at(const json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(field, "value must be finite");
  return v;
}

}  // namespace

nlohmann::json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ParseError(field, "expected a nonempty array of rows");
  const size_t rows = j.size();
  size_t cols = 0;
  if (!j[0].is_array() || j[0].empty())
    throw ParseError(field, "expected rows to be nonempty arrays");
  cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ParseError(field, "rows must all have the same length");
    for (size_t k = 0; k < cols; ++k) {
      std::ostringstream where;
      where << field << "[" << i << "][" << k << "]";
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          number_at(j[i][k], where.str());
    }
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ParseError(field, "expected a nonempty numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    std::ostringstream where;
    where << field << "[" << i << "]";
    v(static_cast<Eigen::Index>(i)) = number_at(j[i], where.str());
  }
  return v;
}

SystemFile parse_system_json(const std::string& text) {
  const json j = parse_text(text);
  if (!j.is_object()) throw ParseError("(root)", "expected a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ParseError("kind", "expected \"replicator\" or \"lotka_volterra\"");

  SystemFile out;
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "replicator")
    out.kind = SystemFile::Kind::replicator;
  else if (kind == "lotka_volterra")
    out.kind = SystemFile::Kind::lotka_volterra;
  else
    throw ParseError("kind", "unknown kind '" + kind + "'");

  if (out.kind == SystemFile::Kind::replicator) {
    if (!j.contains("payoff")) throw ParseError("payoff", "required for kind \"replicator\"");
    if (j.contains("interaction") || j.contains("r"))
      throw ParseError("interaction", "not allowed for kind \"replicator\"");
    Matrix payoff = matrix_from_json(j["payoff"], "payoff");
    if (payoff.rows() != payoff.cols()) throw ParseError("payoff", "matrix must be square");
    if (payoff.rows() < 2) throw ParseError("payoff", "need at least two strategies");
    out.replicator.emplace(std::move(payoff));
  } else {
    if (!j.contains("interaction"))
      throw ParseError("interaction", "required for kind \"lotka_volterra\"");
    if (!j.contains("r")) throw ParseError("r", "required for kind \"lotka_volterra\"");
    if (j.contains("payoff")) throw ParseError("payoff", "not allowed for kind \"lotka_volterra\"");
    Matrix interaction = matrix_from_json(j["interaction"], "interaction");
    Vector r = vector_from_json(j["r"], "r");
    if (interaction.rows() != interaction.cols())
      throw ParseError("interaction", "matrix must be square");
    if (r.size() != interaction.rows())
      throw ParseError("r", "length must match the interaction matrix");
    out.lv.emplace(std::move(interaction), std::move(r));
  }

  if (j.contains("equilibrium")) {
    Vector hint = vector_from_json(j["equilibrium"], "equilibrium");
    const Eigen::Index expected = out.kind == SystemFile::Kind::replicator
                                      ? out.replicator->strategies()
                                      : out.lv->species();
    if (hint.size() != expected)
      throw ParseError("equilibrium", "hint has the wrong dimension");
    out.equilibrium_hint = std::move(hint);
  }

  if (j.contains("labels")) {
    if (!j["labels"].is_array()) throw ParseError("labels", "expected an array of strings");
    for (const auto& item : j["labels"]) {
      if (!item.is_string()) throw ParseError("labels", "expected an array of strings");
      out.labels.push_back(item.get<std::string>());
    }
    if (static_cast<int>(out.labels.size()) != out.state_dimension())
      throw ParseError("labels", "need one label per state component");
  }
  return out;
}

SystemFile load_system_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("(file)", "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_system_json(buffer.str());
}

nlohmann::json system_to_json(const SystemFile& file) {
  json j;
  if (file.kind == SystemFile::Kind::replicator) {
    j["kind"] = "replicator";
    j["payoff"] = matrix_to_json(file.replicator->payoff());
  } else {
    j["kind"] = "lotka_volterra";
    j["interaction"] = matrix_to_json(file.lv->interaction());
    j["r"] = vector_to_json(file.lv->growth());
  }
  if (file.equilibrium_hint) j["equilibrium"] = vector_to_json(*file.equilibrium_hint);
  if (!file.labels.empty()) j["labels"] = file.labels;
  return j;
}

Matrix certificate_matrix_from_json(const std::string& text) {
  const json j = parse_text(text);
  const json* payload = &j;
  if (j.is_object()) {
    if (!j.contains("matrix"))
      throw ParseError("matrix", "certificate object needs a \"matrix\" field");
    payload = &j["matrix"];
  }
  Matrix m = matrix_from_json(*payload, "matrix");
  if (m.rows() != m.cols()) throw ParseError("matrix", "certificate must be square");
  return m;
}

}  // namespace conserva
