#include "phientropy/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace phientropy {

namespace {

Json rows_of(const RMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

RMatrix parse_rows(const Json& rows, int d, const char* field) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != d)
    throw InvalidInput(fmt::format("matrix field '{}' must hold {} rows", field, d));
  RMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    const Json& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      throw InvalidInput(fmt::format("matrix field '{}' row {} must hold {} numbers", field, i, d));
    for (int k = 0; k < d; ++k) {
      if (!row[k].is_number()) throw InvalidInput(fmt::format("matrix field '{}' has a non-number", field));
      m(i, k) = row[k].get<double>();
    }
  }
  return m;
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw InvalidInput(fmt::format("missing field '{}'", name));
  return j.at(name);
}

}  // namespace

Json matrix_to_json(const CMatrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("matrix JSON needs a square matrix");
  Json j;
  j["d"] = m.rows();
  j["re"] = rows_of(m.real());
  if (m.imag().cwiseAbs().maxCoeff() != 0.0) j["im"] = rows_of(m.imag());
  return j;
}

Json matrix_to_json(const HermitianMatrix& m) { return matrix_to_json(m.matrix()); }

CMatrix dense_matrix_from_json(const Json& j) {
  const Json& dj = field(j, "d");
  if (!dj.is_number_integer() || dj.get<long long>() < 1)
    throw InvalidInput("matrix field 'd' must be a positive integer");
  const int d = dj.get<int>();
  const RMatrix re = parse_rows(field(j, "re"), d, "re");
  const RMatrix im = j.contains("im") ? parse_rows(j.at("im"), d, "im") : RMatrix::Zero(d, d);
  CMatrix m(d, d);
  m.real() = re;
  m.imag() = im;
  return m;
}

HermitianMatrix matrix_from_json(const Json& j) { return HermitianMatrix(dense_matrix_from_json(j)); }

Json operator_to_json(const MatrixOperator& t) { return matrix_to_json(t.rep()); }

Json phi_to_json(const PhiFunction& phi) {
  Json j;
  switch (phi.kind()) {
    case PhiFunction::Kind::Entropy:
      j["kind"] = "entropy";
      break;
    case PhiFunction::Kind::Power:
      j["kind"] = "power";
      j["q"] = phi.exponent();
      break;
    case PhiFunction::Kind::Affine:
      j["kind"] = "affine";
      j["slope"] = phi.slope();
      j["intercept"] = phi.intercept();
      break;
  }
  return j;
}

PhiFunction phi_from_json(const Json& j) {
  if (j.is_string()) return PhiFunction::parse(j.get<std::string>());
  const Json& kind = field(j, "kind");
  if (!kind.is_string()) throw InvalidInput("phi field 'kind' must be a string");
  const std::string k = kind.get<std::string>();
  auto number = [&](const char* name) {
    const Json& v = field(j, name);
    if (!v.is_number()) throw InvalidInput(fmt::format("phi field '{}' must be a number", name));
    return v.get<double>();
  };
  if (k == "entropy") return PhiFunction::entropy();
  if (k == "power") {
    const double q = number("q");
    return (q > 1.0 && q <= 2.0) || q == 1.0 ? PhiFunction::power(q) : PhiFunction::unchecked_power(q);
  }
  if (k == "affine") return PhiFunction::affine(number("slope"), number("intercept"));
  throw InvalidInput(fmt::format("unknown phi kind '{}'", k));
}

ProductModel model_from_json(const Json& j, bool psd) {
  const Json& fj = field(j, "factors");
  if (!fj.is_array() || fj.empty()) throw InvalidInput("model field 'factors' must be a nonempty array");
  std::vector<Factor> factors;
  for (const Json& f : fj) {
    if (!f.is_array() || f.empty()) throw InvalidInput("each factor must be a nonempty array");
    Factor factor;
    for (const Json& o : f) {
      const Json& label = field(o, "label");
      const Json& p = field(o, "p");
      if (!label.is_string() || !p.is_number()) throw InvalidInput("factor outcomes need a string label and numeric p");
      factor.push_back({label.get<std::string>(), p.get<double>()});
    }
    factors.push_back(std::move(factor));
  }
  const Json& dj = field(j, "d");
  if (!dj.is_number_integer() || dj.get<long long>() < 1) throw InvalidInput("model field 'd' must be a positive integer");
  const int d = dj.get<int>();
  const Json& map = field(j, "map");
  const Json& kind = field(map, "kind");
  if (!kind.is_string() || kind.get<std::string>() != "table")
    throw InvalidInput("model field 'map.kind' must be \"table\"");
  std::vector<std::pair<std::vector<std::string>, HermitianMatrix>> entries;
  for (const Json& e : field(map, "entries")) {
    std::vector<std::string> labels;
    for (const Json& l : field(e, "x")) {
      if (!l.is_string()) throw InvalidInput("model entry labels must be strings");
      labels.push_back(l.get<std::string>());
    }
    entries.emplace_back(std::move(labels), matrix_from_json(field(e, "matrix")));
  }
  return ProductModel::from_table(std::move(factors), d, entries, psd);
}

Json model_to_json(const ProductModel& model) {
  Json j;
  Json factors = Json::array();
  for (const auto& f : model.factors()) {
    Json fj = Json::array();
    for (const auto& o : f) fj.push_back({{"label", o.label}, {"p", o.p}});
    factors.push_back(std::move(fj));
  }
  j["factors"] = std::move(factors);
  j["d"] = model.dim();
  Json entries = Json::array();
  for (std::size_t k = 0; k < model.size(); ++k) {
    const std::vector<int> idx = model.decode(k);
    Json x = Json::array();
    for (int i = 0; i < model.n(); ++i) x.push_back(model.factors()[i][idx[i]].label);
    entries.push_back({{"x", std::move(x)}, {"matrix", matrix_to_json(model.matrix(k))}});
  }
  j["map"] = {{"kind", "table"}, {"entries", std::move(entries)}};
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(fmt::format("cannot open '{}'", path.string()));
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw InvalidInput(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace phientropy
