#pragma once

// Uniform scoring over the classifier families, plus a versioned JSON
// serialization of trained models.

#include <algorithm>
#include <limits>
#include <span>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "clfsec/classifiers/gamma_fusion.hpp"
#include "clfsec/classifiers/linear.hpp"
#include "clfsec/classifiers/one_class_svm.hpp"
#include "clfsec/error.hpp"

namespace clfsec {

using Model = std::variant<LinearModel, OneClassModel, FusionModel>;

inline const char* family_tag(const Model& m) {
  switch (m.index()) {
    case 0:
      return "linear";
    case 1:
      return "one_class_svm";
    default:
      return "llr_fusion";
  }
}

inline std::size_t model_dimension(const Model& m) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FusionModel>) return 2;
        else return v.dimension();
      },
      m);
}

/// Score oriented so that larger means more malicious:
///   linear      g(x)
///   one-class   rho - sum_i a_i k(sv_i, x)
///   fusion      log t - log(p(x|L) / p(x|M))
/// Thresholding at zero gives each family's own decision rule.
inline double decision_score(const Model& m, std::span<const double> x) {
  if (x.size() != model_dimension(m))
    throw Error("decision_score: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                std::to_string(model_dimension(m)) + ")");
  constexpr double kMax = std::numeric_limits<double>::max();
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearModel>) return v.discriminant(x);
        else if constexpr (std::is_same_v<T, OneClassModel>) return -v.decision_function(x);
        else return std::clamp(std::log(v.threshold) - llr_evaluate(v, x).log_ratio, -kMax, kMax);
      },
      m);
}

inline Label classify(const Model& m, std::span<const double> x) {
  return std::visit(
      [&](const auto& v) -> Label {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FusionModel>) return llr_decide(v, x);
        else return v.classify(x);
      },
      m);
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const Model& m) {
  nlohmann::json j;
  j["format"] = "clfsec-model";
  j["version"] = kModelFormatVersion;
  j["family"] = family_tag(m);
  j["dimension"] = model_dimension(m);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j["weights"] = v.weights;
          j["bias"] = v.bias;
        } else if constexpr (std::is_same_v<T, OneClassModel>) {
          j["nu"] = v.nu;
          j["gamma"] = v.kernel_gamma;
          j["rho"] = v.offset;
          j["coefficients"] = v.dual_coefficients;
          j["support_vectors"] = v.support_vectors;
        } else {
          j["threshold"] = v.threshold;
          for (Label y : kLabels) {
            auto& cls = j["classes"][to_string(y)];
            for (const auto& g : v.params[index_of(y)]) cls.push_back({{"shape", g.shape}, {"scale", g.scale}});
          }
        }
      },
      m);
  return j;
}

inline Model model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "clfsec-model") throw Error("model: not a clfsec model document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw Error("model: unsupported version " + j.at("version").dump());
    const std::string family = j.at("family").get<std::string>();
    const std::size_t dim = j.at("dimension").get<std::size_t>();
    Model m;
    if (family == "linear") {
      m = LinearModel{j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>()};
    } else if (family == "one_class_svm") {
      OneClassModel oc;
      oc.nu = j.at("nu").get<double>();
      oc.kernel_gamma = j.at("gamma").get<double>();
      oc.offset = j.at("rho").get<double>();
      oc.dual_coefficients = j.at("coefficients").get<std::vector<double>>();
      oc.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
      if (oc.dual_coefficients.size() != oc.support_vectors.size())
        throw Error("model: coefficient/support vector count mismatch");
      m = std::move(oc);
    } else if (family == "llr_fusion") {
      FusionModel fm;
      fm.threshold = j.at("threshold").get<double>();
      for (Label y : kLabels) {
        const auto& cls = j.at("classes").at(to_string(y));
        for (std::size_t f = 0; f < 2; ++f)
          fm.params[index_of(y)][f] = {cls.at(f).at("shape").get<double>(), cls.at(f).at("scale").get<double>()};
      }
      m = fm;
    } else {
      throw Error("model: unknown family '" + family + "'");
    }
    if (model_dimension(m) != dim) throw Error("model: declared dimension does not match parameters");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model: malformed document: ") + e.what());
  }
}

inline std::string serialize_model(const Model& m) { return model_to_json(m).dump(2); }

inline Model parse_model(const std::string& text) {
  try {
    return model_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("model: invalid JSON: ") + e.what());
  }
}

}  // namespace clfsec
