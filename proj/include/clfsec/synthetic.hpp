#pragma once

// Synthetic stand-ins for the three application corpora, used by the
// bundled scenarios and the test suite.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "clfsec/data_model.hpp"
#include "clfsec/error.hpp"
#include "clfsec/ingestion.hpp"
#include "clfsec/rng.hpp"

namespace clfsec {

/// Binary bag-of-words. Every term has a legitimate presence rate in
/// [0.05, 0.3]; its malicious rate is that rate times a log-normal factor.
/// Samples are interleaved in generation order.
inline Dataset synthetic_spam(std::size_t dimension, std::size_t n, double prior_malicious, std::uint64_t seed) {
  if (dimension == 0 || n == 0) throw Error("synthetic_spam: dimension and n must be positive");
  Rng rates(derive_seed(seed, Stream::Synthetic, {1}));
  std::vector<double> p_l(dimension), p_m(dimension);
  for (std::size_t j = 0; j < dimension; ++j) {
    p_l[j] = 0.05 + 0.25 * rates.uniform();
    p_m[j] = std::clamp(p_l[j] * std::exp(rates.normal(0.0, 0.6)), 0.01, 0.9);
  }
  Rng rng(derive_seed(seed, Stream::Synthetic, {2}));
  Dataset out(dimension);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Label y = rng.bernoulli(prior_malicious) ? Label::Malicious : Label::Legitimate;
    const auto& p = y == Label::Malicious ? p_m : p_l;
    std::vector<double> x(dimension);
    for (std::size_t j = 0; j < dimension; ++j) x[j] = rng.bernoulli(p[j]) ? 1.0 : 0.0;
    out.add({std::move(x), y});
  }
  return out;
}

/// Raw fingerprint/face matcher scores drawn from per-class Gamma laws. The
/// fingerprint matcher separates the classes well, the face matcher less so.
struct ScoreModel {
  GammaProductDensity genuine{{10.0, 5.0}, {0.05, 0.07}};
  GammaProductDensity impostor{{2.0, 3.0}, {0.06, 0.07}};
};

/// Rows are written as a score table (user ids are synthetic); genuine rows
/// first, then impostor rows.
inline std::string synthetic_score_table(std::size_t n_genuine, std::size_t n_impostor, std::uint64_t seed,
                                         const ScoreModel& model = {}) {
  Rng rng(derive_seed(seed, Stream::Synthetic, {3}));
  std::string out = "user_id,claimed_id,fing_score,face_score,label\n";
  const auto row = [&](std::size_t user, std::size_t claimed, const std::vector<double>& s, const char* label) {
    out += "u" + std::to_string(user) + ",u" + std::to_string(claimed) + "," + detail::format_real(s[0]) + "," +
           detail::format_real(s[1]) + "," + label + "\n";
  };
  for (std::size_t i = 0; i < n_genuine; ++i) row(i, i, model.genuine.draw(rng), "genuine");
  for (std::size_t i = 0; i < n_impostor; ++i) {
    const std::size_t user = i % std::max<std::size_t>(n_genuine, 1);
    row(n_genuine + i, user, model.impostor.draw(rng), "impostor");
  }
  return out;
}

/// Normalized 2-D score dataset drawn directly from the score model, with
/// min-max bounds fitted on the drawn set.
inline Dataset synthetic_scores(std::size_t n_genuine, std::size_t n_impostor, std::uint64_t seed,
                                const ScoreModel& model = {}) {
  Rng rng(derive_seed(seed, Stream::Synthetic, {3}));
  std::vector<std::vector<double>> raw;
  std::vector<Label> labels;
  for (std::size_t i = 0; i < n_genuine; ++i) {
    raw.push_back(model.genuine.draw(rng));
    labels.push_back(Label::Legitimate);
  }
  for (std::size_t i = 0; i < n_impostor; ++i) {
    raw.push_back(model.impostor.draw(rng));
    labels.push_back(Label::Malicious);
  }
  std::array<MinMaxNormalizer, 2> norm;
  for (std::size_t f = 0; f < 2; ++f) {
    std::vector<double> col;
    for (const auto& r : raw) col.push_back(r[f]);
    norm[f] = MinMaxNormalizer::fit(col);
  }
  Dataset out(2);
  for (std::size_t i = 0; i < raw.size(); ++i) out.add({{norm[0](raw[i][0]), norm[1](raw[i][1])}, labels[i]});
  return out;
}

/// Two-dimensional anomaly-detection data: legitimate traffic is standard
/// normal, intrusions are spread uniformly over the ring 3 <= |x| <= 6.
inline Dataset synthetic_traffic(std::size_t n_legitimate, std::size_t n_malicious, std::uint64_t seed) {
  Rng rng(derive_seed(seed, Stream::Synthetic, {4}));
  Dataset out(2);
  for (std::size_t i = 0; i < n_legitimate; ++i) out.add({{rng.normal(), rng.normal()}, Label::Legitimate});
  for (std::size_t i = 0; i < n_malicious; ++i) {
    const double r = std::sqrt(9.0 + 27.0 * rng.uniform());
    const double a = 2.0 * std::numbers::pi * rng.uniform();
    out.add({{r * std::cos(a), r * std::sin(a)}, Label::Malicious});
  }
  return out;
}

/// Hex payload lines: legitimate payloads are printable text, intrusions
/// mix in high bytes and shell-code-like runs.
inline std::string synthetic_payloads(std::size_t n_legitimate, std::size_t n_malicious, std::uint64_t seed) {
  Rng rng(derive_seed(seed, Stream::Synthetic, {5}));
  static constexpr char kText[] = "GET /index.html HTTP/1.1 Host: www.example.com Accept: text/html";
  std::string out = "payload,label\n";
  const auto emit = [&](bool malicious) {
    const std::size_t len = 32 + rng.index(96);
    std::vector<std::uint8_t> bytes(len);
    for (auto& b : bytes) {
      if (malicious && rng.bernoulli(0.4))
        b = rng.bernoulli(0.5) ? 0x90 : static_cast<std::uint8_t>(128 + rng.index(128));
      else
        b = static_cast<std::uint8_t>(kText[rng.index(sizeof kText - 1)]);
    }
    out += encode_hex(bytes) + (malicious ? ",M\n" : ",L\n");
  };
  for (std::size_t i = 0; i < n_legitimate; ++i) emit(false);
  for (std::size_t i = 0; i < n_malicious; ++i) emit(true);
  return out;
}

/// Small plain-text email corpus with an index file, written under `dir`.
inline void write_synthetic_email_corpus(const std::filesystem::path& dir, std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> kHam{"meeting", "project", "schedule", "report", "lunch",  "thanks",
                                             "review",  "budget",  "team",     "notes",  "agenda", "draft"};
  static const std::vector<std::string> kSpam{"viagra", "winner", "free",  "cash",   "offer", "click",
                                              "prize",  "cheap",  "loans", "casino", "deal",  "bonus"};
  static const std::vector<std::string> kCommon{"the", "and", "you", "for", "this", "with", "your", "today"};
  std::filesystem::create_directories(dir / "data");
  Rng rng(derive_seed(seed, Stream::Synthetic, {6}));
  std::string index;
  for (std::size_t i = 0; i < n; ++i) {
    const bool spam = i % 2 == 1;
    const auto& topical = spam ? kSpam : kHam;
    const auto& other = spam ? kHam : kSpam;
    std::string text = "Subject: message " + std::to_string(i) + "\n\n";
    const std::size_t words = 20 + rng.index(30);
    for (std::size_t w = 0; w < words; ++w) {
      const double u = rng.uniform();
      const auto& pool = u < 0.45 ? topical : (u < 0.55 ? other : kCommon);
      text += pool[rng.index(pool.size())];
      text += (w % 12 == 11) ? "\n" : " ";
    }
    const std::string name = "data/msg" + std::to_string(i) + ".txt";
    write_text_file(dir / name, text);
    index += std::string(spam ? "spam " : "ham ") + name + "\n";
  }
  write_text_file(dir / "index", index);
}

}  // namespace clfsec
