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

// Token-score interchange format.
//
// A record file is line-delimited. Each line is a flat JSON object:
//
//   {"id":"wow-17","label":"hallucinated","tokens":[[-0.41,2.3],[-1.2,3.05]],
//    "meta":{"dataset":"wow","split":"dev"}}
//
// where every token is a [logp_gold, entropy] pair in nats. The first line may
// instead be a header, recognised by its "header" field:
//
//   {"header":true,"scoring_mode":"causal","model":"gpt2","dataset":"wow"}

#ifndef HALLUSTAT_INGEST_HPP_
#define HALLUSTAT_INGEST_HPP_

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hallustat {

struct TokenScore {
  double logp_gold = 0.0;  // natural log, <= 0
  double entropy = 0.0;    // nats, >= 0

  friend bool operator==(const TokenScore&, const TokenScore&) = default;
};

enum class Label { kHallucinated, kEntailed, kUnlabeled };

std::string_view to_string(Label label);
// Throws ParseError for anything other than the three lowercase names.
Label parse_label(std::string_view text);

struct ExamplePoint {
  std::string id;
  Label label = Label::kUnlabeled;
  std::vector<TokenScore> tokens;
  std::map<std::string, std::string> meta;

  friend bool operator==(const ExamplePoint&, const ExamplePoint&) = default;
};

enum class ScoringMode { kCausal, kMasked, kEncDec };

std::string_view to_string(ScoringMode mode);
ScoringMode parse_scoring_mode(std::string_view text);

struct FileHeader {
  ScoringMode scoring_mode = ScoringMode::kCausal;
  std::string model;
  std::string dataset;

  friend bool operator==(const FileHeader&, const FileHeader&) = default;
};

struct ExampleCollection {
  std::vector<ExamplePoint> points;
  std::string source;
  std::optional<FileHeader> header;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Checks the TokenScore and ExamplePoint invariants; throws ValidationError
/// naming the offending field and token index.
void validate(const ExamplePoint& point, std::size_t line = 0);

/// Parses one record line. `line_number` is only used in error messages.
ExamplePoint parse_record(std::string_view line, std::size_t line_number = 1);

bool is_header_line(std::string_view line);
FileHeader parse_header(std::string_view line, std::size_t line_number = 1);

/// Single line, no trailing newline. Doubles are written in shortest
/// round-trip form, so parse_record(serialize_record(p)) == p.
std::string serialize_record(const ExamplePoint& point);
std::string serialize_header(const FileHeader& header);

struct LoadOptions {
  std::string source;
  // Records are parsed in blocks on up to this many threads.
  unsigned threads = 1;
};

/// Reads a whole record stream. Errors carry the 1-based line number; the
/// first failing line (in file order) is the one reported.
ExampleCollection load_collection(std::istream& in, const LoadOptions& options = {});
ExampleCollection load_collection_file(const std::string& path, unsigned threads = 1);

struct LabelSplit {
  ExampleCollection hallucinated;
  ExampleCollection entailed;
};

/// Unlabeled points are dropped from both sides; order is preserved.
LabelSplit split_by_label(const ExampleCollection& collection);

}  // namespace hallustat

#endif  // HALLUSTAT_INGEST_HPP_
