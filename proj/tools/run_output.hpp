#pragma once

// Run manifest, input digests and deterministic CSV/JSON writers for the
// command-line tool.

#include <array>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "evweight/io.hpp"

namespace evweight::cli {

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

/// Shortest decimal that round-trips.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

struct RunManifest {
  std::string command;
  nlohmann::json settings = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 0;
  std::map<std::string, std::string> input_digests;
  std::string tool_version;
  double wall_time = 0.0;

  /// Digest over everything except wall_time.
  std::string digest() const { return sha256_hex(reproducible().dump()); }

  nlohmann::json to_json() const {
    nlohmann::json j = reproducible();
    j["wall_time"] = wall_time;
    j["digest"] = digest();
    return j;
  }

 private:
  nlohmann::json reproducible() const {
    return {{"command", command},       {"settings", settings},          {"seed", seed},
            {"n_samples", n_samples},   {"input_digests", input_digests}, {"tool_version", tool_version}};
  }
};

/// Writes files under one output directory.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw InputError(root_.string(), 0, "cannot create output directory: " + ec.message());
  }

  void write(const std::string& name, const std::string& content) const {
    const auto path = root_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(path.string(), 0, "cannot open for writing");
    out << content;
    if (!out) throw InputError(path.string(), 0, "write failed");
  }

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

/// CSV text whose first line is `# manifest_digest=<hex>`.
class CsvBuilder {
 public:
  CsvBuilder(const std::string& digest, std::initializer_list<std::string_view> columns) {
    text_ = "# manifest_digest=" + digest + "\n";
    bool first = true;
    for (auto c : columns) {
      if (!first) text_ += ',';
      text_ += c;
      first = false;
    }
    text_ += '\n';
  }

  CsvBuilder& row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) text_ += ',';
      text_ += fields[i];
    }
    text_ += '\n';
    return *this;
  }

  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

namespace detail {

inline void flatten(const nlohmann::json& j, const std::string& prefix,
                    std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
  } else if (j.is_number_float()) {
    out.emplace_back(prefix, format_double(j.get<double>()));
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else if (j.is_null()) {
    out.emplace_back(prefix, "");
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

}  // namespace detail

/// result.json, or result.csv as `field,value` rows with dotted keys.
inline void write_result(const OutputDir& dir, const nlohmann::json& result, const std::string& format,
                         const std::string& digest) {
  if (format == "json") {
    dir.write("result.json", result.dump(2) + "\n");
    return;
  }
  std::vector<std::pair<std::string, std::string>> rows;
  detail::flatten(result, "", rows);
  CsvBuilder csv(digest, {"field", "value"});
  for (auto& [k, v] : rows) csv.row({k, v});
  dir.write("result.csv", csv.str());
}

}  // namespace evweight::cli
