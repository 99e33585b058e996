#pragma once

// Raw corpora to Datasets: email tokenization and information-gain feature
// selection, payload byte histograms, biometric score tables, and the dense
// CSV / sparse triplet file formats.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "clfsec/data_model.hpp"
#include "clfsec/error.hpp"

namespace clfsec {

using TokenSet = std::set<std::string>;

// ---------------------------------------------------------------------------
// Small text helpers

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool parse_size(std::string_view s, std::size_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline bool parse_label(std::string_view s, Label& out) {
  s = trim(s);
  if (s == "L") out = Label::Legitimate;
  else if (s == "M") out = Label::Malicious;
  else return false;
  return true;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string(), "cannot open file");
  return in;
}

inline std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Email tokenization

/// Lowercased maximal runs of ASCII letters and digits, kept when 2 to 40
/// characters long.
inline TokenSet tokenize(std::string_view text) {
  TokenSet out;
  std::string cur;
  const auto flush = [&] {
    if (cur.size() >= 2 && cur.size() <= 40) out.insert(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

struct EmailCorpus {
  std::vector<TokenSet> documents;
  std::vector<Label> labels;
  std::vector<std::string> paths;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Reads an index file of `ham|spam <path>` lines (paths relative to the
/// index file's directory). Unreadable documents or documents containing NUL
/// bytes are skipped and counted.
inline EmailCorpus load_email_corpus(const std::filesystem::path& index_path) {
  std::ifstream index = detail::open_input(index_path);
  const auto base = index_path.parent_path();
  EmailCorpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(index, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto sp = t.find_first_of(" \t");
    if (sp == std::string_view::npos)
      throw InputError(index_path.string(), detail::line_error(lineno, "expected `ham|spam <path>`"));
    const auto tag = t.substr(0, sp);
    Label y;
    if (tag == "ham") y = Label::Legitimate;
    else if (tag == "spam") y = Label::Malicious;
    else throw InputError(index_path.string(), detail::line_error(lineno, "unknown label '" + std::string(tag) + "'"));
    const std::filesystem::path rel(std::string(detail::trim(t.substr(sp))));
    const auto doc_path = rel.is_absolute() ? rel : base / rel;

    std::ifstream doc(doc_path, std::ios::binary);
    std::string text;
    if (doc) {
      std::ostringstream ss;
      ss << doc.rdbuf();
      text = ss.str();
    }
    if (!doc || text.find('\0') != std::string::npos) {
      ++corpus.skipped;
      corpus.warnings.push_back("skipped undecodable document " + doc_path.string());
      continue;
    }
    corpus.documents.push_back(tokenize(text));
    corpus.labels.push_back(y);
    corpus.paths.push_back(doc_path.string());
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Information-gain feature selection

struct Vocabulary {
  std::vector<std::string> terms;
  std::vector<double> gains;  // bits

  std::size_t size() const noexcept { return terms.size(); }
  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

namespace detail {
inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

inline double binary_entropy(double n_pos, double n) {
  if (n <= 0.0) return 0.0;
  const double p = n_pos / n;
  return -xlog2x(p) - xlog2x(1.0 - p);
}
}  // namespace detail

/// IG(t) = H(Y) - H(Y | presence of t) from document counts, in bits.
inline double information_gain(std::size_t spam_with, std::size_t docs_with, std::size_t spam_total,
                               std::size_t docs_total) {
  const double n = static_cast<double>(docs_total);
  const double n1 = static_cast<double>(docs_with), s1 = static_cast<double>(spam_with);
  const double n0 = n - n1, s0 = static_cast<double>(spam_total) - s1;
  const double h = detail::binary_entropy(static_cast<double>(spam_total), n);
  const double cond = (n1 / n) * detail::binary_entropy(s1, n1) + (n0 / n) * detail::binary_entropy(s0, n0);
  return std::max(0.0, h - cond);
}

/// Top `vocab_size` terms by information gain, ties broken by term order.
/// Asking for more terms than exist returns all of them and adds a warning.
inline Vocabulary information_gain_select(std::span<const TokenSet> documents, std::span<const Label> labels,
                                          std::size_t vocab_size, std::vector<std::string>* warnings = nullptr) {
  if (documents.size() != labels.size()) throw Error("information_gain_select: documents/labels size mismatch");
  const std::size_t spam_total = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Malicious));
  if (spam_total == 0 || spam_total == labels.size())
    throw Error("information_gain_select: both classes are required");

  std::map<std::string, std::array<std::size_t, 2>> counts;  // term -> {docs, spam docs}
  for (std::size_t i = 0; i < documents.size(); ++i)
    for (const auto& t : documents[i]) {
      auto& c = counts[t];
      ++c[0];
      if (labels[i] == Label::Malicious) ++c[1];
    }

  std::vector<std::pair<double, const std::string*>> ranked;
  ranked.reserve(counts.size());
  for (const auto& [term, c] : counts)
    ranked.emplace_back(information_gain(c[1], c[0], spam_total, documents.size()), &term);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });

  if (vocab_size > ranked.size() && warnings)
    warnings->push_back("requested vocabulary size " + std::to_string(vocab_size) + " exceeds the " +
                        std::to_string(ranked.size()) + " distinct terms; using all terms");
  Vocabulary v;
  for (std::size_t i = 0; i < std::min(vocab_size, ranked.size()); ++i) {
    v.terms.push_back(*ranked[i].second);
    v.gains.push_back(ranked[i].first);
  }
  return v;
}

/// Binary presence vector over the vocabulary.
inline std::vector<double> vectorize(const TokenSet& tokens, const Vocabulary& vocab) {
  std::vector<double> x(vocab.size(), 0.0);
  for (std::size_t i = 0; i < vocab.size(); ++i)
    if (tokens.contains(vocab.terms[i])) x[i] = 1.0;
  return x;
}

inline Dataset vectorize_corpus(std::span<const TokenSet> documents, std::span<const Label> labels,
                                const Vocabulary& vocab) {
  if (vocab.size() == 0) throw Error("vectorize: empty vocabulary");
  Dataset out(vocab.size());
  out.reserve(documents.size());
  for (std::size_t i = 0; i < documents.size(); ++i) out.add({vectorize(documents[i], vocab), labels[i]});
  return out;
}

// ---------------------------------------------------------------------------
// Payload 1-gram histograms

inline std::vector<double> payload_histogram(std::span<const std::uint8_t> payload) {
  if (payload.empty()) throw Error("payload_histogram: empty payload");
  std::vector<double> h(256, 0.0);
  for (std::uint8_t b : payload) h[b] += 1.0;
  const double n = static_cast<double>(payload.size());
  for (double& v : h) v /= n;
  return h;
}

inline std::vector<std::uint8_t> decode_hex(std::string_view hex) {
  hex = detail::trim(hex);
  if (hex.size() % 2 != 0) throw Error("hex payload has odd length");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    unsigned v = 0;
    const auto [ptr, ec] = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2, v, 16);
    if (ec != std::errc() || ptr != hex.data() + 2 * i + 2) throw Error("invalid hex digit in payload");
    out[i] = static_cast<std::uint8_t>(v);
  }
  return out;
}

inline std::string encode_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * bytes.size());
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 15]);
  }
  return out;
}

/// One `<hex>,<L|M>` line per payload; an optional `payload,label` header.
inline Dataset load_payloads(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  Dataset out(256);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || (lineno == 1 && t == "payload,label")) continue;
    const auto comma = t.rfind(',');
    Label y;
    if (comma == std::string_view::npos || !detail::parse_label(t.substr(comma + 1), y))
      throw InputError(path.string(), detail::line_error(lineno, "expected `<hex>,<L|M>`"));
    try {
      out.add({payload_histogram(decode_hex(t.substr(0, comma))), y});
    } catch (const InputError&) {
      throw;
    } catch (const Error& e) {
      throw InputError(path.string(), detail::line_error(lineno, e.what()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Biometric score tables

/// Min-max map fitted on a score column; values outside the fitted range clip.
struct MinMaxNormalizer {
  double min = 0.0;
  double max = 1.0;

  double operator()(double v) const { return std::clamp((v - min) / (max - min), 0.0, 1.0); }

  static MinMaxNormalizer fit(std::span<const double> values) {
    if (values.empty()) throw Error("degenerate scores: empty column");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*hi > *lo)) throw Error("degenerate scores: constant matcher column");
    return {*lo, *hi};
  }
};

struct ScoreTable {
  Dataset data{2};  // (fingerprint, face), normalized to [0, 1]
  std::vector<std::string> user_ids;
  std::vector<std::string> claimed_ids;
  std::array<MinMaxNormalizer, 2> normalizers;
};

namespace detail {
inline bool parse_score_label(std::string_view s, Label& y) {
  s = trim(s);
  if (s == "genuine" || s == "L") y = Label::Legitimate;
  else if (s == "impostor" || s == "M") y = Label::Malicious;
  else return false;
  return true;
}
}  // namespace detail

/// CSV `user_id,claimed_id,fing_score,face_score,label` with an optional
/// header; label is genuine/impostor (or L/M). Each matcher column is min-max
/// normalized with bounds fitted on the whole file.
inline ScoreTable load_scores(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  ScoreTable table;
  std::vector<std::array<double, 2>> raw;
  std::vector<Label> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    if (lineno == 1 && t.starts_with("user_id")) continue;
    const auto cols = detail::split(t, ',');
    if (cols.size() != 5) throw InputError(path.string(), detail::line_error(lineno, "expected 5 columns"));
    std::array<double, 2> s{};
    Label y;
    if (!detail::parse_double(cols[2], s[0]) || !detail::parse_double(cols[3], s[1]) || !std::isfinite(s[0]) ||
        !std::isfinite(s[1]))
      throw InputError(path.string(), detail::line_error(lineno, "invalid score value"));
    if (!detail::parse_score_label(cols[4], y))
      throw InputError(path.string(), detail::line_error(lineno, "unknown label '" + std::string(cols[4]) + "'"));
    raw.push_back(s);
    labels.push_back(y);
    table.user_ids.emplace_back(detail::trim(cols[0]));
    table.claimed_ids.emplace_back(detail::trim(cols[1]));
  }
  for (std::size_t f = 0; f < 2; ++f) {
    std::vector<double> col;
    col.reserve(raw.size());
    for (const auto& r : raw) col.push_back(r[f]);
    try {
      table.normalizers[f] = MinMaxNormalizer::fit(col);
    } catch (const Error& e) {
      throw InputError(path.string(), std::string(e.what()) + (f == 0 ? " (fingerprint)" : " (face)"));
    }
  }
  table.data.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    table.data.add({{table.normalizers[0](raw[i][0]), table.normalizers[1](raw[i][1])}, labels[i]});
  return table;
}

// ---------------------------------------------------------------------------
// Dense CSV and sparse triplet formats

/// Header `f0,...,f{d-1},label`, one row per sample, label L or M.
inline std::string dense_csv(const Dataset& data) {
  std::string out;
  for (std::size_t j = 0; j < data.dimension(); ++j) out += "f" + std::to_string(j) + ",";
  out += "label\n";
  for (const Sample& s : data) {
    for (double v : s.features) {
      out += detail::format_real(v);
      out += ',';
    }
    out += to_string(s.label);
    out += '\n';
  }
  return out;
}

inline Dataset parse_dense_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source, "empty file");
  const auto header = detail::split(detail::trim(line), ',');
  if (header.size() < 2 || detail::trim(header.back()) != "label")
    throw InputError(source, detail::line_error(1, "header must be f0,...,f{d-1},label"));
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j)
    if (detail::trim(header[j]) != "f" + std::to_string(j))
      throw InputError(source, detail::line_error(1, "header must be f0,...,f{d-1},label"));
  Dataset out(d);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto cols = detail::split(t, ',');
    if (cols.size() != d + 1)
      throw InputError(source, detail::line_error(lineno, "expected " + std::to_string(d + 1) + " columns, found " +
                                                              std::to_string(cols.size())));
    Sample s;
    s.features.resize(d);
    for (std::size_t j = 0; j < d; ++j)
      if (!detail::parse_double(cols[j], s.features[j]))
        throw InputError(source, detail::line_error(lineno, "invalid number '" + std::string(cols[j]) + "'"));
    if (!detail::parse_label(cols[d], s.label))
      throw InputError(source, detail::line_error(lineno, "unknown label '" + std::string(cols[d]) + "'"));
    out.add(std::move(s));
  }
  return out;
}

/// `<d> <idx>:<val> ... ,<label>` with 0-based indices; zeros are omitted.
inline std::string sparse_triplets(const Dataset& data) {
  std::string out;
  for (const Sample& s : data) {
    out += std::to_string(data.dimension());
    for (std::size_t j = 0; j < s.features.size(); ++j)
      if (s.features[j] != 0.0) out += " " + std::to_string(j) + ":" + detail::format_real(s.features[j]);
    out += ",";
    out += to_string(s.label);
    out += '\n';
  }
  return out;
}

inline Dataset parse_sparse_triplets(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<Dataset> out;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto comma = t.rfind(',');
    if (comma == std::string_view::npos) throw InputError(source, detail::line_error(lineno, "missing label column"));
    Label y;
    if (!detail::parse_label(t.substr(comma + 1), y))
      throw InputError(source, detail::line_error(lineno, "unknown label '" + std::string(t.substr(comma + 1)) + "'"));
    std::vector<std::string_view> tokens;
    for (auto tok : detail::split(detail::trim(t.substr(0, comma)), ' '))
      if (!tok.empty()) tokens.push_back(tok);
    std::size_t d = 0;
    if (tokens.empty() || !detail::parse_size(tokens[0], d) || d == 0)
      throw InputError(source, detail::line_error(lineno, "missing or invalid dimension"));
    if (!out) out.emplace(d);
    if (d != out->dimension())
      throw InputError(source, detail::line_error(lineno, "dimension " + std::to_string(d) + " differs from " +
                                                              std::to_string(out->dimension())));
    Sample s{std::vector<double>(d, 0.0), y};
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto colon = tokens[k].find(':');
      std::size_t idx = 0;
      double v = 0.0;
      if (colon == std::string_view::npos || !detail::parse_size(tokens[k].substr(0, colon), idx) ||
          !detail::parse_double(tokens[k].substr(colon + 1), v))
        throw InputError(source, detail::line_error(lineno, "malformed entry '" + std::string(tokens[k]) + "'"));
      if (idx >= d)
        throw InputError(source, detail::line_error(lineno, "index " + std::to_string(idx) + " out of range"));
      s.features[idx] = v;
    }
    out->add(std::move(s));
  }
  if (!out) throw InputError(source, "empty file");
  return std::move(*out);
}

/// Dense CSV when the first line starts with `f0,`, sparse triplets otherwise.
inline Dataset load_tabular(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  const int first = in.peek();
  if (first == 'f') return parse_dense_csv(in, path.string());
  return parse_sparse_triplets(in, path.string());
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(path.string(), "cannot open file for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError(path.string(), "write failed");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_dense_csv(const std::filesystem::path& path, const Dataset& data) {
  write_text_file(path, dense_csv(data));
}

}  // namespace clfsec
