#pragma once

// Matrix and instance files.
//
//   matrix:   {"dim": d, "matrix": [[[re, im], ...d entries], ...d rows]}
//   instance: {"label": "...", "hamiltonian": matrix, "state": matrix,
//              "estimator": matrix}      (label and estimator optional)

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "skewbound/linalg.hpp"
#include "skewbound/random.hpp"

namespace skewbound {

using Json = nlohmann::ordered_json;

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  Json out;
  out["dim"] = m.rows();
  out["matrix"] = std::move(rows);
  return out;
}

inline Matrix matrix_from_json(const Json& j, const std::string& what = "matrix") {
  auto fail = [&](const std::string& msg) { throw Error(ErrorCode::Parse, what + ": " + msg); };
  if (!j.is_object()) fail("expected an object");
  if (!j.contains("dim") || !j["dim"].is_number_integer()) fail("missing integer field \"dim\"");
  const auto dim = j["dim"].get<long long>();
  if (dim < 1) fail("dim must be positive");
  if (!j.contains("matrix") || !j["matrix"].is_array()) fail("missing array field \"matrix\"");
  const Json& rows = j["matrix"];
  if (static_cast<long long>(rows.size()) != dim) fail("expected " + std::to_string(dim) + " rows");
  Matrix m(dim, dim);
  for (long long r = 0; r < dim; ++r) {
    const Json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<long long>(row.size()) != dim)
      fail("row " + std::to_string(r) + " must have " + std::to_string(dim) + " entries");
    for (long long c = 0; c < dim; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        fail("entry (" + std::to_string(r) + "," + std::to_string(c) + ") must be [re, im]");
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

inline Json instance_to_json(const Instance& inst) {
  Json out;
  out["label"] = inst.label;
  out["hamiltonian"] = matrix_to_json(inst.hamiltonian.matrix());
  out["state"] = matrix_to_json(inst.state.matrix());
  if (inst.estimator) out["estimator"] = matrix_to_json(inst.estimator->matrix());
  return out;
}

/// Validates shapes, Hermiticity and the density-matrix conditions.
inline Instance instance_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "instance must be a JSON object");
  for (const char* key : {"hamiltonian", "state"})
    if (!j.contains(key)) throw Error(ErrorCode::Parse, std::string("missing \"") + key + "\"");
  HermitianOperator h(matrix_from_json(j["hamiltonian"], "hamiltonian"));
  DensityMatrix rho(matrix_from_json(j["state"], "state"));
  require_same_dim(h, rho.op(), "instance");
  std::optional<HermitianOperator> t;
  if (j.contains("estimator") && !j["estimator"].is_null()) {
    t = HermitianOperator(matrix_from_json(j["estimator"], "estimator"));
    require_same_dim(*t, rho.op(), "instance estimator");
  }
  std::string label;
  if (j.contains("label")) {
    if (!j["label"].is_string()) throw Error(ErrorCode::Parse, "label must be a string");
    label = j["label"].get<std::string>();
  }
  return {std::move(label), std::move(h), std::move(rho), std::move(t)};
}

inline Json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, what + ": " + e.what());
  }
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_from_json(parse_json_text(buf.str(), path));
}

}  // namespace skewbound
