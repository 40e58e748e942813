#include "carmafield/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace carmafield {

namespace {

using nlohmann::json;

std::vector<double> number_list(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ParseError(std::string(what) + " must be a non-empty array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError(std::string(what) + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

LevyBasisSpec parse_levy(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ParseError("levy must be an object with a string type");
  const std::string type = j.at("type").get<std::string>();
  const auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ParseError(std::string("levy.") + key + " must be a number");
    return j.at(key).get<double>();
  };
  if (type == "gaussian") return LevyBasisSpec::gaussian(num("sigma2", 1.0), num("beta", 0.0));
  if (type == "stable") return LevyBasisSpec::stable(num("alpha", 1.5), num("eta", 1.0));
  if (type == "compound_poisson") {
    JumpSizeLaw law = ConstantJump{1.0};
    if (j.contains("jump")) {
      const json& jj = j.at("jump");
      if (!jj.is_object() || !jj.contains("type") || !jj.at("type").is_string())
        throw ParseError("levy.jump must be an object with a string type");
      const std::string jt = jj.at("type").get<std::string>();
      const auto jnum = [&](const char* key, double fallback) {
        if (!jj.contains(key)) return fallback;
        if (!jj.at(key).is_number()) throw ParseError(std::string("levy.jump.") + key + " must be a number");
        return jj.at(key).get<double>();
      };
      if (jt == "constant")
        law = ConstantJump{jnum("value", 1.0)};
      else if (jt == "gaussian")
        law = GaussianJump{jnum("mean", 0.0), jnum("stddev", 1.0)};
      else if (jt == "laplace")
        law = LaplaceJump{jnum("scale", 1.0)};
      else
        throw ParseError("unknown jump law: " + jt);
    }
    return LevyBasisSpec::compound_poisson(num("rate", 1.0), law, num("beta", 0.0),
                                           num("sigma2", 0.0));
  }
  throw ParseError("unknown levy type: " + type);
}

}  // namespace

ModelDocument parse_model_document(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("model document must be a JSON object");
  if (!j.contains("levy")) throw ParseError("model document needs a levy entry");

  const std::string mode =
      j.contains("mode") ? j.at("mode").get<std::string>() : std::string("carma");
  ModelDocument doc{ModelSpec{}, parse_levy(j.at("levy"))};
  if (!j.contains("b")) throw ParseError("model document needs b");
  std::vector<double> b = number_list(j.at("b"), "b");

  if (mode == "carma") {
    if (!j.contains("a") || !j.at("a").is_array() || j.at("a").empty())
      throw ParseError("carma mode needs a: one coefficient list per axis");
    std::vector<Polynomial> polys;
    for (const auto& row : j.at("a")) polys.emplace_back(number_list(row, "a"));
    const int dim = j.contains("d") ? j.at("d").get<int>() : static_cast<int>(polys.size());
    doc.spec = ModelSpec::carma(dim, std::move(polys), std::move(b));
  } else if (mode == "gcarma") {
    if (!j.contains("A") || !j.at("A").is_array() || j.at("A").empty())
      throw ParseError("gcarma mode needs A: one matrix per axis");
    std::vector<Matrix> mats;
    for (const auto& mj : j.at("A")) {
      if (!mj.is_array() || mj.empty()) throw ParseError("A entries must be matrices");
      const int n = static_cast<int>(mj.size());
      Matrix m(n, n);
      for (int r = 0; r < n; ++r) {
        const std::vector<double> row = number_list(mj.at(static_cast<size_t>(r)), "A row");
        if (static_cast<int>(row.size()) != n) throw ParseError("A matrices must be square");
        for (int c = 0; c < n; ++c) m(r, c) = row[static_cast<size_t>(c)];
      }
      mats.push_back(std::move(m));
    }
    if (!j.contains("c")) throw ParseError("gcarma mode needs c");
    doc.spec = ModelSpec::gcarma(std::move(mats), std::move(b), number_list(j.at("c"), "c"));
  } else {
    throw ParseError("unknown mode: " + mode);
  }

  if (j.contains("p") && j.at("p").get<int>() != doc.spec.p)
    throw ParseError("declared p does not match the coefficients");
  if (j.contains("q") && doc.spec.mode == ModelMode::carma &&
      j.at("q").get<int>() != doc.spec.q)
    throw ParseError("declared q does not match b");
  return doc;
}

ModelDocument load_model_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_document(buf.str());
}

std::string validation_report_json(const ValidationReport& report) {
  json j;
  j["structurally_valid"] = report.structurally_valid;
  j["stationary"] = report.stationary;
  j["axis_distinct_eigenvalues"] = report.axis_distinct;
  j["no_common_roots"] = report.no_common_roots;
  j["log_moment_finite"] = report.log_moment_finite;
  j["companion_mode"] = report.companion_mode;
  j["failures"] = report.failures;
  j["passed"] = report.passed();
  return j.dump(2);
}

namespace {

json lag_table(const std::map<Lag, double>& table) {
  json j = json::object();
  for (const auto& [lag, v] : table)
    j[std::to_string(lag.first) + "," + std::to_string(lag.second)] = v;
  return j;
}

}  // namespace

std::string lag_table_json(const std::map<Lag, double>& table) {
  return lag_table(table).dump(2);
}

std::string arma_representation_json(const ArmaRepresentation& repr,
                                     const SpectralCheck& check, const MaMatch* ma) {
  json j;
  json ar = json::object();
  for (int k1 = 0; k1 <= repr.p; ++k1)
    for (int k2 = 0; k2 <= repr.p; ++k2)
      ar[std::to_string(k1) + "," + std::to_string(k2)] = repr.d(k1, k2);
  j["ar_coeffs"] = ar;
  json theta = json::object();
  for (int k1 = 0; k1 < repr.p; ++k1)
    for (int k2 = 0; k2 < repr.p; ++k2)
      theta[std::to_string(k1) + "," + std::to_string(k2)] = repr.theta_at(k1, k2);
  j["noise_weights"] = theta;
  json cov = json::array();
  for (int i = 0; i < repr.noise_cov.rows(); ++i) {
    json row = json::array();
    for (int c = 0; c < repr.noise_cov.cols(); ++c) row.push_back(repr.noise_cov(i, c));
    cov.push_back(row);
  }
  j["noise_cov"] = cov;
  j["rhs_acov"] = lag_table(repr.rhs_acov);
  j["spectral_check"] = {{"min_f", check.min_f}, {"log_integrable", check.log_integrable}};
  if (ma) {
    json sols = json::array();
    for (const auto& s : ma->solutions) sols.push_back({s[0], s[1], s[2], s[3]});
    j["ma_match"] = {{"status", ma->matched ? "matched" : "no_real_solution"},
                     {"solutions", sols}};
  }
  return j.dump(2);
}

}  // namespace carmafield
