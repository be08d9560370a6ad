#ifndef WBIDF_MODEL_IO_HPP
#define WBIDF_MODEL_IO_HPP

// Model file layout (JSON, single object, format_version 1):
//
//   format          "wbidf-lda-model"
//   format_version  1
//   rng             generator algorithm used for sampling
//   config          {k, alpha, beta, iterations, burn_in, seed}
//   vocabulary      {n_docs, terms[V], doc_freq[V]}
//   documents       {ids[D], replication[D]}
//   phi             K rows of V probabilities
//   theta           D rows of K probabilities
//
// Doubles are written in shortest round-trip form, so load(save(m)) == m
// bit for bit.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wbidf/corpus.hpp"
#include "wbidf/error.hpp"
#include "wbidf/lda.hpp"
#include "wbidf/rng.hpp"

namespace wbidf {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFileName = "model.v1";

inline nlohmann::json model_to_json(const LdaModel& model) {
  using nlohmann::json;
  json j;
  j["format"] = "wbidf-lda-model";
  j["format_version"] = kModelFormatVersion;
  j["rng"] = Rng::kAlgorithm;
  j["config"] = {{"k", model.config.k},
                 {"alpha", model.config.alpha_value()},
                 {"beta", model.config.beta},
                 {"iterations", model.config.iterations},
                 {"burn_in", model.config.burn_in},
                 {"seed", model.config.seed}};
  j["vocabulary"] = {{"n_docs", model.vocab.n_docs()},
                     {"terms", model.vocab.terms()},
                     {"doc_freq", model.vocab.doc_freqs()}};
  j["documents"] = {{"ids", model.doc_ids},
                    {"replication", model.replication}};
  json phi = json::array();
  for (TopicId k = 0; k < model.k(); ++k) {
    const auto row = model.phi_row(k);
    phi.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["phi"] = std::move(phi);
  json theta = json::array();
  for (std::size_t d = 0; d < model.n_docs(); ++d) {
    const auto row = model.theta_row(d);
    theta.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["theta"] = std::move(theta);
  return j;
}

inline std::string serialize_model(const LdaModel& model) {
  return model_to_json(model).dump() + "\n";
}

inline LdaModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "wbidf-lda-model") {
      throw InputError("model: not a wbidf-lda-model file");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw InputError("model: unsupported format_version " +
                       std::to_string(version));
    }
    LdaModel m;
    const auto& c = j.at("config");
    m.config.k = c.at("k").get<std::uint32_t>();
    m.config.alpha = c.at("alpha").get<double>();
    m.config.beta = c.at("beta").get<double>();
    m.config.iterations = c.at("iterations").get<std::uint32_t>();
    m.config.burn_in = c.at("burn_in").get<std::uint32_t>();
    m.config.seed = c.at("seed").get<std::uint64_t>();

    const auto& v = j.at("vocabulary");
    m.vocab = Vocabulary::from_parts(
        v.at("terms").get<std::vector<std::string>>(),
        v.at("doc_freq").get<std::vector<std::uint64_t>>(),
        v.at("n_docs").get<std::uint64_t>());

    const auto& docs = j.at("documents");
    m.doc_ids = docs.at("ids").get<std::vector<std::string>>();
    m.replication = docs.at("replication").get<std::vector<std::uint32_t>>();
    if (m.replication.size() != m.doc_ids.size()) {
      throw InputError("model: documents.ids and replication differ");
    }

    const auto& phi = j.at("phi");
    if (phi.size() != m.config.k) throw InputError("model: phi has wrong rows");
    for (const auto& row : phi) {
      if (row.size() != m.vocab.size()) {
        throw InputError("model: phi row has wrong length");
      }
      for (const auto& x : row) m.phi.push_back(x.get<double>());
    }
    const auto& theta = j.at("theta");
    if (theta.size() != m.doc_ids.size()) {
      throw InputError("model: theta has wrong rows");
    }
    for (const auto& row : theta) {
      if (row.size() != m.config.k) {
        throw InputError("model: theta row has wrong length");
      }
      for (const auto& x : row) m.theta.push_back(x.get<double>());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model: malformed file (") + e.what() + ")");
  }
}

inline LdaModel deserialize_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("model: invalid JSON (") + e.what() + ")");
  }
  return model_from_json(j);
}

inline void save_model(const LdaModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << serialize_model(model);
  if (!out) throw Error("write failed for '" + path + "'");
}

inline LdaModel load_model(const std::string& path) {
  return deserialize_model(detail::read_file(path));
}

}  // namespace wbidf

#endif  // WBIDF_MODEL_IO_HPP
