// Copyright 2026 The hallustat Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hallustat/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "hallustat/error.hpp"
#include "json.hpp"

namespace hallustat {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kBlockLines = 4096;

std::string where(std::size_t line) {
  return line == 0 ? std::string() : fmt::format("line {}: ", line);
}

Json parse_object(std::string_view line, std::size_t line_number) {
  Json doc;
  try {
    doc = Json::parse(line.begin(), line.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(fmt::format("{}malformed record: {}", where(line_number), e.what()),
                     line_number);
  } catch (const Json::out_of_range& e) {
    // A literal beyond double range would be +-inf.
    throw ValidationError(
        fmt::format("{}non-finite number in record: {}", where(line_number), e.what()),
        line_number);
  }
  if (!doc.is_object()) {
    throw ParseError(fmt::format("{}record is not an object", where(line_number)),
                     line_number);
  }
  return doc;
}

const Json& require(const Json& doc, const char* key, std::size_t line_number) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw ParseError(fmt::format("{}missing field '{}'", where(line_number), key),
                     line_number);
  }
  return *it;
}

std::string require_string(const Json& doc, const char* key, std::size_t line_number) {
  const Json& v = require(doc, key, line_number);
  if (!v.is_string()) {
    throw ParseError(fmt::format("{}field '{}' must be a string", where(line_number), key),
                     line_number);
  }
  return v.get<std::string>();
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::kHallucinated:
      return "hallucinated";
    case Label::kEntailed:
      return "entailed";
    case Label::kUnlabeled:
      return "unlabeled";
  }
  return "unlabeled";
}

Label parse_label(std::string_view text) {
  if (text == "hallucinated") return Label::kHallucinated;
  if (text == "entailed") return Label::kEntailed;
  if (text == "unlabeled") return Label::kUnlabeled;
  throw ParseError(fmt::format("unknown label '{}'", text));
}

std::string_view to_string(ScoringMode mode) {
  switch (mode) {
    case ScoringMode::kCausal:
      return "causal";
    case ScoringMode::kMasked:
      return "masked";
    case ScoringMode::kEncDec:
      return "encdec";
  }
  return "causal";
}

ScoringMode parse_scoring_mode(std::string_view text) {
  if (text == "causal") return ScoringMode::kCausal;
  if (text == "masked") return ScoringMode::kMasked;
  if (text == "encdec") return ScoringMode::kEncDec;
  throw ParseError(fmt::format("unknown scoring_mode '{}'", text));
}

void validate(const ExamplePoint& point, std::size_t line) {
  if (point.id.empty()) {
    throw ValidationError(fmt::format("{}id must be non-empty", where(line)), line);
  }
  if (point.tokens.empty()) {
    throw ValidationError(
        fmt::format("{}record '{}': tokens must be non-empty", where(line), point.id), line);
  }
  for (std::size_t j = 0; j < point.tokens.size(); ++j) {
    const TokenScore& t = point.tokens[j];
    if (!std::isfinite(t.logp_gold) || t.logp_gold > 0.0) {
      throw ValidationError(
          fmt::format("{}record '{}': logp_gold at token {} must be finite and <= 0 (got {})",
                      where(line), point.id, j, t.logp_gold),
          line);
    }
    if (!std::isfinite(t.entropy) || t.entropy < 0.0) {
      throw ValidationError(
          fmt::format("{}record '{}': entropy at token {} must be finite and >= 0 (got {})",
                      where(line), point.id, j, t.entropy),
          line);
    }
  }
}

bool is_header_line(std::string_view line) {
  line = trim_cr(line);
  // Cheap pre-check before paying for a full parse.
  if (line.find("\"header\"") == std::string_view::npos) return false;
  try {
    Json doc = Json::parse(line.begin(), line.end());
    return doc.is_object() && doc.contains("header");
  } catch (const Json::parse_error&) {
    return false;
  }
}

FileHeader parse_header(std::string_view line, std::size_t line_number) {
  Json doc = parse_object(trim_cr(line), line_number);
  require(doc, "header", line_number);
  FileHeader header;
  try {
    header.scoring_mode =
        parse_scoring_mode(require_string(doc, "scoring_mode", line_number));
  } catch (const ParseError& e) {
    if (e.line() != 0) throw;
    throw ParseError(where(line_number) + e.what(), line_number);
  }
  header.model = require_string(doc, "model", line_number);
  header.dataset = require_string(doc, "dataset", line_number);
  return header;
}

ExamplePoint parse_record(std::string_view line, std::size_t line_number) {
  Json doc = parse_object(trim_cr(line), line_number);
  for (const auto& [key, _] : doc.items()) {
    if (key != "id" && key != "label" && key != "tokens" && key != "meta") {
      throw ParseError(fmt::format("{}unknown field '{}'", where(line_number), key),
                       line_number);
    }
  }

  ExamplePoint point;
  point.id = require_string(doc, "id", line_number);
  const std::string label = require_string(doc, "label", line_number);
  try {
    point.label = parse_label(label);
  } catch (const ParseError& e) {
    throw ParseError(where(line_number) + e.what(), line_number);
  }

  const Json& tokens = require(doc, "tokens", line_number);
  if (!tokens.is_array()) {
    throw ParseError(fmt::format("{}field 'tokens' must be an array", where(line_number)),
                     line_number);
  }
  point.tokens.reserve(tokens.size());
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    const Json& pair = tokens[j];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
        !pair[1].is_number()) {
      throw ParseError(
          fmt::format("{}token {} must be a [logp_gold, entropy] number pair",
                      where(line_number), j),
          line_number);
    }
    point.tokens.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }

  if (auto it = doc.find("meta"); it != doc.end()) {
    if (!it->is_object()) {
      throw ParseError(fmt::format("{}field 'meta' must be an object", where(line_number)),
                       line_number);
    }
    for (const auto& [key, value] : it->items()) {
      if (!value.is_string()) {
        throw ParseError(
            fmt::format("{}meta value for '{}' must be a string", where(line_number), key),
            line_number);
      }
      point.meta.emplace(key, value.get<std::string>());
    }
  }

  validate(point, line_number);
  return point;
}

std::string serialize_record(const ExamplePoint& point) {
  Json doc;
  doc["id"] = point.id;
  doc["label"] = std::string(to_string(point.label));
  Json tokens = Json::array();
  for (const TokenScore& t : point.tokens) tokens.push_back({t.logp_gold, t.entropy});
  doc["tokens"] = std::move(tokens);
  if (!point.meta.empty()) {
    Json meta = Json::object();
    for (const auto& [k, v] : point.meta) meta[k] = v;
    doc["meta"] = std::move(meta);
  }
  return doc.dump();
}

std::string serialize_header(const FileHeader& header) {
  Json doc;
  doc["header"] = true;
  doc["scoring_mode"] = std::string(to_string(header.scoring_mode));
  doc["model"] = header.model;
  doc["dataset"] = header.dataset;
  return doc.dump();
}

namespace {

struct ParsedLine {
  std::optional<ExamplePoint> point;
  std::exception_ptr error;
};

void parse_block(const std::vector<std::string>& lines, std::size_t first_line,
                 std::vector<ParsedLine>& out, unsigned threads) {
  out.assign(lines.size(), {});
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        out[i].point = parse_record(lines[i], first_line + i);
      } catch (...) {
        out[i].error = std::current_exception();
      }
    }
  };
  const std::size_t n = lines.size();
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (workers <= 1) {
    work(0, n);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(work, begin, end);
  }
}

}  // namespace

ExampleCollection load_collection(std::istream& in, const LoadOptions& options) {
  ExampleCollection collection;
  collection.source = options.source;
  std::unordered_map<std::string, std::size_t> first_seen;

  std::vector<std::string> block;
  std::vector<ParsedLine> parsed;
  std::size_t line_number = 0;
  std::size_t block_start = 1;

  auto flush = [&] {
    parse_block(block, block_start, parsed, options.threads);
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      if (parsed[i].error) std::rethrow_exception(parsed[i].error);
      ExamplePoint& point = *parsed[i].point;
      const std::size_t at = block_start + i;
      auto [it, inserted] = first_seen.emplace(point.id, at);
      if (!inserted) {
        throw ValidationError(fmt::format("line {}: duplicate id '{}' (first seen at line {})",
                                          at, point.id, it->second),
                              at);
      }
      collection.points.push_back(std::move(point));
    }
    block.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number == 1 && is_header_line(line)) {
      collection.header = parse_header(line, 1);
      block_start = 2;
      continue;
    }
    block.push_back(std::move(line));
    if (block.size() == kBlockLines) {
      flush();
      block_start = line_number + 1;
    }
  }
  if (in.bad()) throw DataError(fmt::format("read error in '{}'", options.source));
  if (!block.empty()) flush();
  return collection;
}

ExampleCollection load_collection_file(const std::string& path, unsigned threads) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path));
  try {
    return load_collection(in, {.source = path, .threads = threads});
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path, e.what()), e.line());
  }
}

LabelSplit split_by_label(const ExampleCollection& collection) {
  LabelSplit split;
  split.hallucinated.source = collection.source;
  split.hallucinated.header = collection.header;
  split.entailed.source = collection.source;
  split.entailed.header = collection.header;
  for (const ExamplePoint& point : collection.points) {
    if (point.label == Label::kHallucinated) {
      split.hallucinated.points.push_back(point);
    } else if (point.label == Label::kEntailed) {
      split.entailed.points.push_back(point);
    }
  }
  return split;
}

}  // namespace hallustat
