#pragma once

// JSON problem schema. Function shapes are encoded as
//   {"shape": "zero", "dim": n}
//   {"shape": "indicator_point", "point": [...]}
//   {"shape": "indicator_affine", "A": [[...]], "b": [...]}
//   {"shape": "quadratic", "P": [[...]], "q": [...]}
//   {"shape": "l1", "weight": w, "dim": n}
//   {"shape": "indicator_box", "lo": [...], "hi": [...]}
//   {"shape": "separable_sum", "parts": [{"f": {...}, "len": d}, ...]}
// and operators as
//   {"kind": "subdifferential", "function": {...}}   (or a bare shape object)
//   {"kind": "monotone_linear", "M": [[...]]}.

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xdrs/edr.hpp"
#include "xdrs/errors.hpp"
#include "xdrs/functions.hpp"
#include "xdrs/methods.hpp"
#include "xdrs/numerics.hpp"

namespace xdrs {

using Json = nlohmann::json;

inline Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("vector entries must be numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw ConfigError("expected a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw ConfigError("matrix rows must be arrays");
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ConfigError("matrix rows must have equal length");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number())
        throw ConfigError("matrix entries must be numbers");
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

inline Json to_json(const Vector& v) {
  Json j = Json::array();
  for (double x : v) j.push_back(x);
  return j;
}

inline Json to_json(const Matrix& m) {
  Json j = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(row);
  }
  return j;
}

inline const Json& require_field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end())
    throw ConfigError(std::string("missing field: ") + name);
  return *it;
}

inline ConvexFunction function_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("function must be an object");
  const std::string shape = require_field(j, "shape").get<std::string>();
  try {
    if (shape == "zero")
      return ConvexFunction::zero(j.value("dim", 0));
    if (shape == "indicator_point")
      return ConvexFunction::indicator_point(
          vector_from_json(require_field(j, "point")));
    if (shape == "indicator_affine")
      return ConvexFunction::indicator_affine(
          matrix_from_json(require_field(j, "A")),
          vector_from_json(require_field(j, "b")));
    if (shape == "quadratic")
      return ConvexFunction::quadratic(
          matrix_from_json(require_field(j, "P")),
          vector_from_json(require_field(j, "q")));
    if (shape == "l1")
      return ConvexFunction::l1(require_field(j, "weight").get<double>(),
                                j.value("dim", 0));
    if (shape == "indicator_box")
      return ConvexFunction::indicator_box(
          vector_from_json(require_field(j, "lo")),
          vector_from_json(require_field(j, "hi")));
    if (shape == "separable_sum") {
      std::vector<std::pair<ConvexFunction, std::size_t>> parts;
      for (const Json& pj : require_field(j, "parts"))
        parts.emplace_back(function_from_json(require_field(pj, "f")),
                           require_field(pj, "len").get<std::size_t>());
      return ConvexFunction::separable_sum(std::move(parts));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid function: ") + e.what());
  } catch (const DimMismatch& e) {
    throw ConfigError(std::string("invalid function: ") + e.what());
  }
  throw ConfigError("unknown shape: " + shape);
}

inline Json to_json(const ConvexFunction& f) {
  using namespace shapes;
  return std::visit(
      [&](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Zero>)
          return Json{{"shape", "zero"}, {"dim", s.dim}};
        else if constexpr (std::is_same_v<T, IndicatorPoint>)
          return Json{{"shape", "indicator_point"}, {"point", to_json(s.point)}};
        else if constexpr (std::is_same_v<T, IndicatorAffine>)
          return Json{{"shape", "indicator_affine"},
                      {"A", to_json(s.a)},
                      {"b", to_json(s.b)}};
        else if constexpr (std::is_same_v<T, Quadratic>)
          return Json{{"shape", "quadratic"},
                      {"P", to_json(s.p)},
                      {"q", to_json(s.q)}};
        else if constexpr (std::is_same_v<T, L1>)
          return Json{{"shape", "l1"}, {"weight", s.weight}, {"dim", s.dim}};
        else if constexpr (std::is_same_v<T, IndicatorBox>)
          return Json{{"shape", "indicator_box"},
                      {"lo", to_json(s.lo)},
                      {"hi", to_json(s.hi)}};
        else {
          Json parts = Json::array();
          for (const auto& term : s.terms)
            parts.push_back(Json{{"f", to_json(term.f)}, {"len", term.len}});
          return Json{{"shape", "separable_sum"}, {"parts", std::move(parts)}};
        }
      },
      f.shape());
}

inline OperatorSpec operator_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("operator must be an object");
  if (j.contains("shape"))  // bare function means its subdifferential
    return OperatorSpec::subdifferential(function_from_json(j));
  const std::string kind = require_field(j, "kind").get<std::string>();
  if (kind == "subdifferential")
    return OperatorSpec::subdifferential(
        function_from_json(require_field(j, "function")));
  if (kind == "monotone_linear") {
    try {
      return OperatorSpec::monotone_linear(
          matrix_from_json(require_field(j, "M")));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid operator: ") + e.what());
    }
  }
  throw ConfigError("unknown operator kind: " + kind);
}

inline Json to_json(const OperatorSpec& op) {
  if (op.is_subdifferential())
    return Json{{"kind", "subdifferential"},
                {"function", to_json(op.function())}};
  return Json{{"kind", "monotone_linear"}, {"M", to_json(op.linear())}};
}

inline SplitParams split_params_from_json(const Json& j) {
  try {
    return SplitParams(require_field(j, "alpha").get<double>(),
                       require_field(j, "beta").get<double>(),
                       require_field(j, "theta").get<double>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid params: ") + e.what());
  }
}

// Grid axis: either an explicit list [v0, v1, ...] or
// {"start": a, "step": h, "count": n}.
inline std::vector<double> grid_axis_from_json(const Json& j) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const Json& v : j) out.push_back(v.get<double>());
  } else if (j.is_object()) {
    const double start = require_field(j, "start").get<double>();
    const double step = require_field(j, "step").get<double>();
    const std::size_t count = require_field(j, "count").get<std::size_t>();
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(start + step * static_cast<double>(i));
  } else {
    throw ConfigError("grid axis must be a list or {start, step, count}");
  }
  if (out.empty()) throw ConfigError("grid axis is empty");
  return out;
}

}  // namespace xdrs
