#include "distboost/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace distboost {

using nlohmann::ordered_json;

Model Model::from_state(const FitState& state, Method method, std::vector<int> mstop,
                        const std::vector<std::string>& column_names) {
  if (column_names.size() != state.p) {
    throw std::invalid_argument("column name count does not match the fitted model");
  }
  Model m;
  m.family = state.family;
  m.method = method;
  m.step_length = state.step_length;
  m.mstop = std::move(mstop);
  m.offsets = state.offsets;
  const int k = state.family.n_params();
  m.intercepts.assign(k, 0.0);
  m.slopes.resize(k);
  for (const auto& [key, coef] : state.coefficients) {
    m.intercepts[key.first] += coef.intercept;
    m.slopes[key.first][column_names[key.second]] += coef.slope;
  }
  return m;
}

Predictors Model::predict_etas(const std::map<std::string, std::vector<double>>& columns,
                               std::size_t n) const {
  const int k = family.n_params();
  Predictors etas(k, std::vector<double>(n));
  for (int p = 0; p < k; ++p) {
    std::fill(etas[p].begin(), etas[p].end(), offsets[p] + intercepts[p]);
    for (const auto& [name, slope] : slopes[p]) {
      const auto it = columns.find(name);
      if (it == columns.end()) {
        throw std::invalid_argument(fmt::format("new data lacks column '{}' used by the model", name));
      }
      if (it->second.size() != n) throw std::invalid_argument("column length mismatch");
      for (std::size_t i = 0; i < n; ++i) etas[p][i] += slope * it->second[i];
    }
  }
  return etas;
}

std::string to_json(const Model& model) {
  ordered_json j;
  j["format"] = "distboost-model";
  j["version"] = kModelFormatVersion;
  j["family"] = std::string(model.family.name());
  j["method"] = std::string(method_name(model.method));
  j["step_length"] = model.step_length;
  j["mstop"] = model.mstop;
  ordered_json params = ordered_json::array();
  for (int p = 0; p < model.family.n_params(); ++p) {
    ordered_json entry;
    entry["name"] = model.family.param_names[p];
    entry["link"] = std::string(link_name(model.family.links[p]));
    entry["offset"] = model.offsets[p];
    entry["intercept"] = model.intercepts[p];
    ordered_json slopes = ordered_json::object();
    for (const auto& [name, v] : model.slopes[p]) slopes[name] = v;
    entry["coefficients"] = std::move(slopes);
    params.push_back(std::move(entry));
  }
  j["parameters"] = std::move(params);
  return j.dump(2) + "\n";
}

Model model_from_json(const std::string& text) {
  const auto j = ordered_json::parse(text);
  if (j.value("format", "") != "distboost-model") {
    throw std::invalid_argument("not a distboost model file");
  }
  if (j.at("version").get<int>() != kModelFormatVersion) {
    throw std::invalid_argument(
        fmt::format("unsupported model format version {}", j.at("version").get<int>()));
  }
  Model m;
  m.family = family_from_name(j.at("family").get<std::string>());
  m.method = method_from_name(j.at("method").get<std::string>());
  m.step_length = j.at("step_length").get<double>();
  m.mstop = j.at("mstop").get<std::vector<int>>();
  const auto& params = j.at("parameters");
  if (static_cast<int>(params.size()) != m.family.n_params()) {
    throw std::invalid_argument("model parameter count does not match its family");
  }
  for (int p = 0; p < m.family.n_params(); ++p) {
    const auto& entry = params[p];
    if (entry.at("name").get<std::string>() != m.family.param_names[p]) {
      throw std::invalid_argument("model parameters are out of order");
    }
    m.offsets.push_back(entry.at("offset").get<double>());
    m.intercepts.push_back(entry.at("intercept").get<double>());
    m.slopes.push_back(entry.at("coefficients").get<std::map<std::string, double>>());
  }
  return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  out << to_json(model);
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace distboost
