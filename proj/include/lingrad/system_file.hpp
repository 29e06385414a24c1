#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lingrad/core.hpp"
#include "lingrad/errors.hpp"
#include "lingrad/expr.hpp"
#include "lingrad/linear_form.hpp"
#include "lingrad/sampling.hpp"

namespace lingrad {

/// Flat key = value system definition. Keys:
///   dim         dimension n, 1..9 (required)
///   name        label carried into outputs (optional)
///   param.<p>   numeric parameter binding, usable in every expression
///   V           the conserved/dissipated function (required, exprlang)
///   V2, V3, ... extra tracked functions
///   f1..fn      raw vector field components
///   L11..Lnn    structure matrix entries (state dependent, exprlang)
///   class       antisymmetric | negative-semidefinite | negative-definite
///               | auto (default: auto, classified over the sample box)
///   box         "lo,hi" sample box for construction/classification
///               (default -2,2)
/// With L given the system is taken as written; with f given and L absent
/// the linear-gradient form is constructed from f and V. One of the two
/// must be present. '#' starts a comment.

namespace detail {

struct KeyValue {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& text, std::size_t line,
                           const std::string& key) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || trim(end) != "") {
    throw SyntaxError("system file: '" + key + "' needs a number, got '" +
                          text + "'",
                      line, 1);
  }
  return v;
}

}  // namespace detail

inline LinearGradientSystem parse_system_definition(
    const std::string& text, const std::string& default_name = "user-system") {
  std::map<std::string, detail::KeyValue> kv;
  {
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      const std::size_t hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      const std::string line = detail::trim(raw);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw SyntaxError("system file: expected 'key = value'", lineno, 1);
      }
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty() || value.empty()) {
        throw SyntaxError("system file: empty key or value", lineno, 1);
      }
      if (kv.count(key)) {
        throw SyntaxError("system file: duplicate key '" + key + "'", lineno,
                          1);
      }
      kv[key] = detail::KeyValue{value, lineno, false};
    }
  }

  auto take = [&kv](const std::string& key) -> detail::KeyValue* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  };

  const detail::KeyValue* dim_kv = take("dim");
  if (!dim_kv) {
    throw InvalidArgumentError("system file: missing required key 'dim'");
  }
  const double dim_val =
      detail::parse_number(dim_kv->value, dim_kv->line, "dim");
  const int n = static_cast<int>(dim_val);
  if (dim_val != n || n < 1 || n > 9) {
    throw SyntaxError("system file: dim must be an integer in 1..9",
                      dim_kv->line, 1);
  }

  std::string name = default_name;
  if (const auto* name_kv = take("name")) name = name_kv->value;

  Params params;
  std::vector<std::string> param_names;
  for (auto& [key, entry] : kv) {
    if (key.rfind("param.", 0) == 0) {
      const std::string pname = key.substr(6);
      params[pname] = detail::parse_number(entry.value, entry.line, key);
      param_names.push_back(pname);
      entry.used = true;
    }
  }

  auto parse_expr = [&](const detail::KeyValue& entry, const std::string& key) {
    try {
      return expr::parse(entry.value, n, param_names);
    } catch (const SyntaxError& e) {
      throw SyntaxError("system file: in '" + key + "': " + e.what(),
                        entry.line, 1);
    }
  };

  const detail::KeyValue* v_kv = take("V");
  if (!v_kv) {
    throw InvalidArgumentError("system file: missing required key 'V'");
  }
  ScalarField V = expr::to_scalar_field(parse_expr(*v_kv, "V"), params);

  std::vector<ScalarField> extra_V;
  for (int j = 2; j <= 9; ++j) {
    const std::string key = "V" + std::to_string(j);
    const detail::KeyValue* entry = take(key);
    if (!entry) break;
    extra_V.push_back(expr::to_scalar_field(parse_expr(*entry, key), params));
  }

  double box_lo = -2.0, box_hi = 2.0;
  if (const auto* box_kv = take("box")) {
    const std::size_t comma = box_kv->value.find(',');
    if (comma == std::string::npos) {
      throw SyntaxError("system file: box must be 'lo,hi'", box_kv->line, 1);
    }
    box_lo = detail::parse_number(box_kv->value.substr(0, comma), box_kv->line,
                                  "box");
    box_hi = detail::parse_number(box_kv->value.substr(comma + 1),
                                  box_kv->line, "box");
    if (!(box_lo < box_hi)) {
      throw SyntaxError("system file: box needs lo < hi", box_kv->line, 1);
    }
  }

  std::string class_str = "auto";
  if (const auto* class_kv = take("class")) class_str = class_kv->value;
  StructureClass declared = StructureClass::Unclassified;
  bool class_auto = false;
  if (class_str == "auto") {
    class_auto = true;
  } else if (class_str == "antisymmetric") {
    declared = StructureClass::Antisymmetric;
  } else if (class_str == "negative-semidefinite") {
    declared = StructureClass::NegativeSemidefinite;
  } else if (class_str == "negative-definite") {
    declared = StructureClass::NegativeDefinite;
  } else {
    throw InvalidArgumentError("system file: unknown class '" + class_str +
                               "'");
  }

  // f components and L entries are each all-or-none
  bool has_f = false, has_L = false;
  for (const auto& [key, entry] : kv) {
    if (key.size() == 2 && key[0] == 'f' && key[1] >= '1' && key[1] <= '9') {
      has_f = true;
    }
    if (key.size() == 3 && key[0] == 'L' && key[1] >= '1' && key[1] <= '9' &&
        key[2] >= '1' && key[2] <= '9') {
      has_L = true;
    }
  }

  std::vector<expr::Expression> f_exprs;
  if (has_f) {
    for (int i = 1; i <= n; ++i) {
      const std::string key = "f" + std::to_string(i);
      const detail::KeyValue* entry = take(key);
      if (!entry) {
        throw InvalidArgumentError("system file: missing component '" + key +
                                   "'");
      }
      f_exprs.push_back(parse_expr(*entry, key));
    }
  }

  std::vector<expr::Expression> l_exprs;
  if (has_L) {
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        const std::string key = "L" + std::to_string(i) + std::to_string(j);
        const detail::KeyValue* entry = take(key);
        if (!entry) {
          throw InvalidArgumentError("system file: missing entry '" + key +
                                     "'");
        }
        l_exprs.push_back(parse_expr(*entry, key));
      }
    }
  }

  for (const auto& [key, entry] : kv) {
    if (!entry.used) {
      throw SyntaxError("system file: unknown key '" + key + "'", entry.line,
                        1);
    }
  }

  if (!has_L && f_exprs.empty()) {
    throw InvalidArgumentError(
        "system file: need either f1..fn or L11..Lnn");
  }

  std::optional<VectorField> raw_f;
  if (!f_exprs.empty()) raw_f = expr::to_vector_field(f_exprs, params);

  const std::vector<StateVector> cloud = halton_box(n, 200, box_lo, box_hi);

  LinearGradientSystem sys;
  if (has_L) {
    auto values = std::make_shared<std::vector<expr::Expression>>(
        std::move(l_exprs));
    StructureMatrixField L;
    L.dimension = n;
    L.value = [values, params, n](const StateVector& x) {
      Matrix m(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          m(i, j) = expr::evaluate((*values)[static_cast<std::size_t>(i * n + j)],
                                   x, params);
        }
      }
      return m;
    };
    L.declared_class =
        class_auto ? classify_field(L, cloud) : declared;
    sys.dimension = n;
    sys.L = std::move(L);
    sys.V = std::move(V);
    sys.raw_f = std::move(raw_f);
  } else {
    sys = build_linear_gradient_system(*raw_f, V, 1e-12, cloud);
    if (!class_auto) sys.L.declared_class = declared;
  }
  sys.name = name;
  sys.parameters = params;
  sys.extra_V = std::move(extra_V);
  return sys;
}

inline LinearGradientSystem load_system_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open system file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read of '" + path + "' failed");
  std::string stem = path;
  const std::size_t slash = stem.find_last_of("/\\");
  if (slash != std::string::npos) stem.erase(0, slash + 1);
  const std::size_t dot = stem.find_last_of('.');
  if (dot != std::string::npos && dot > 0) stem.erase(dot);
  return parse_system_definition(buf.str(), stem);
}

}  // namespace lingrad
