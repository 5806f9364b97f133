#include "factcheck/ingestion.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <json.hpp>

#include "factcheck/errors.hpp"
#include "factcheck/text.hpp"

namespace factcheck {

namespace {

using nlohmann::json;

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line_no, key, "missing");
  if (!it->is_string()) throw ParseError(line_no, key, "expected a string");
  return it->get<std::string>();
}

Triple parse_triple_json(const json& value, std::size_t line_no, std::size_t index) {
  const std::string field = "triples[" + std::to_string(index) + "]";
  if (!value.is_array() || value.size() != 3) {
    throw ParseError(line_no, field, "expected [subject, predicate, object]");
  }
  for (const auto& part : value) {
    if (!part.is_string()) throw ParseError(line_no, field, "triple parts must be strings");
  }
  try {
    return Triple(value[0].get<std::string>(), value[1].get<std::string>(),
                  value[2].get<std::string>());
  } catch (const InvalidArgument& e) {
    throw ParseError(line_no, field, e.what());
  }
}

GoldLabel parse_gold_json(const json& gold, std::size_t line_no) {
  if (!gold.is_object()) throw ParseError(line_no, "gold", "expected an object");
  std::optional<FineVerdict> fine;
  std::optional<RoughVerdict> rough;
  if (auto it = gold.find("fine"); it != gold.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(line_no, "gold.fine", "expected a string");
    try {
      fine = parse_fine_verdict(it->get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, "gold.fine", e.what());
    }
  }
  if (auto it = gold.find("rough"); it != gold.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(line_no, "gold.rough", "expected a string");
    try {
      rough = parse_rough_verdict(it->get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, "gold.rough", e.what());
    }
  }
  if (!fine && !rough) throw ParseError(line_no, "gold", "needs 'fine' or 'rough'");
  try {
    return GoldLabel(rough.value_or(to_rough(fine.value_or(FineVerdict::ok))), fine);
  } catch (const InvalidArgument& e) {
    throw ParseError(line_no, "gold", e.what());
  }
}

}  // namespace

Example parse_example_line(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, "", std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_no, "", "expected a JSON object");

  Example ex;
  ex.id = require_string(obj, "id", line_no);

  auto triples = obj.find("triples");
  if (triples == obj.end()) throw ParseError(line_no, "triples", "missing");
  if (!triples->is_array()) throw ParseError(line_no, "triples", "expected an array");
  if (triples->empty()) throw ParseError(line_no, "triples", "must not be empty");
  ex.triples.reserve(triples->size());
  for (std::size_t i = 0; i < triples->size(); ++i) {
    ex.triples.push_back(parse_triple_json((*triples)[i], line_no, i));
  }

  ex.text = require_string(obj, "text", line_no);
  if (text::is_blank(ex.text)) throw ParseError(line_no, "text", "must not be empty");

  if (auto gold = obj.find("gold"); gold != obj.end() && !gold->is_null()) {
    ex.gold = parse_gold_json(*gold, line_no);
  }
  if (auto score = obj.find("human_score"); score != obj.end() && !score->is_null()) {
    if (!score->is_number()) throw ParseError(line_no, "human_score", "expected a number");
    ex.human_score = score->get<double>();
  }
  return ex;
}

std::vector<Example> parse_jsonl(std::istream& in) {
  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    out.push_back(parse_example_line(line, line_no));
  }
  return out;
}

std::vector<Example> parse_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_jsonl(in);
}

std::vector<Triple> parse_pipe_triples(std::string_view block) {
  std::vector<Triple> out;
  std::size_t line_no = 0;
  while (!block.empty()) {
    ++line_no;
    const auto nl = block.find('\n');
    std::string_view line = block.substr(0, nl);
    block = nl == std::string_view::npos ? std::string_view{} : block.substr(nl + 1);
    if (text::is_blank(line)) continue;

    std::vector<std::string> fields;
    for (std::size_t start = 0;;) {
      const auto bar = line.find('|', start);
      fields.emplace_back(text::trim(line.substr(start, bar - start)));
      if (bar == std::string_view::npos) break;
      start = bar + 1;
    }
    if (fields.size() != 3) {
      throw ParseError(line_no, "", "expected 'subject | predicate | object', got " +
                                        std::to_string(fields.size()) + " field(s)");
    }
    try {
      out.emplace_back(std::move(fields[0]), std::move(fields[1]), std::move(fields[2]));
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, "", e.what());
    }
  }
  return out;
}

std::vector<Triple> parse_e2e_mr(std::string_view mr) {
  // Split on commas outside brackets, tracking bracket depth.
  std::vector<std::string_view> pairs;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < mr.size(); ++i) {
    const char c = mr[i];
    if (c == '[') {
      if (++depth > 1) {
        throw ParseError(0, std::string(text::trim(mr.substr(start))), "nested '['");
      }
    } else if (c == ']') {
      if (--depth < 0) {
        throw ParseError(0, std::string(text::trim(mr.substr(start, i + 1 - start))),
                         "unbalanced ']'");
      }
    } else if (c == ',' && depth == 0) {
      pairs.push_back(mr.substr(start, i - start));
      start = i + 1;
    }
  }
  if (depth != 0) throw ParseError(0, std::string(text::trim(mr.substr(start))), "unclosed '['");
  pairs.push_back(mr.substr(start));

  struct Pair {
    std::string attribute;
    std::string value;
  };
  std::vector<Pair> parsed;
  std::optional<std::string> name;
  for (std::string_view raw : pairs) {
    const std::string_view pair = text::trim(raw);
    if (pair.empty()) {
      if (pairs.size() == 1) break;  // empty MR
      throw ParseError(0, "", "empty attribute pair in MR");
    }
    const auto open = pair.find('[');
    if (open == std::string_view::npos || pair.back() != ']') {
      throw ParseError(0, std::string(pair), "expected attribute[value]");
    }
    const std::string attribute(text::trim(pair.substr(0, open)));
    const std::string value(text::trim(pair.substr(open + 1, pair.size() - open - 2)));
    if (attribute.empty()) throw ParseError(0, std::string(pair), "empty attribute name");
    if (value.empty()) throw ParseError(0, std::string(pair), "empty value");
    if (text::predicate_key(attribute) == "name") {
      if (name) throw ParseError(0, std::string(pair), "more than one name pair");
      name = value;
      continue;
    }
    parsed.push_back(Pair{text::predicate_key(attribute), value});
  }
  if (!name) throw ParseError(0, std::string(text::trim(mr)), "MR has no name[...] pair");

  std::vector<Triple> out;
  out.reserve(parsed.size());
  for (auto& p : parsed) out.emplace_back(*name, std::move(p.attribute), std::move(p.value));
  return out;
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::istreambuf_iterator<char> it(in), end;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // a lone empty field is a blank line
    if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
    record.clear();
  };

  while (it != end) {
    const char c = *it++;
    if (in_quotes) {
      if (c == '"') {
        if (it != end && *it == '"') {
          field.push_back('"');
          ++it;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (it != end && *it == '\n') ++it;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError(records.size() + 1, "", "unterminated quoted CSV field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

void RatingsConfig::validate() const {
  if (id_column.empty()) throw InvalidArgument("ratings id column name is empty");
  if (score_column.empty()) throw InvalidArgument("ratings score column name is empty");
  if (!(threshold >= 1.0 && threshold <= 3.0)) {
    throw InvalidArgument("ratings threshold must lie in [1, 3], got " + std::to_string(threshold));
  }
}

GoldLabel gold_from_score(double score, double threshold) {
  return GoldLabel(score >= threshold ? RoughVerdict::ok : RoughVerdict::not_ok);
}

std::map<std::string, Rating> load_ratings(std::istream& csv, const RatingsConfig& cfg) {
  cfg.validate();
  const auto records = read_csv(csv);
  if (records.empty()) throw ParseError(1, "", "ratings CSV has no header row");
  const auto& header = records.front();

  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (text::trim(header[i]) == name) return i;
    }
    throw ParseError(1, name, "column not found in header");
  };
  const std::size_t id_col = column(cfg.id_column);
  const std::size_t score_col = column(cfg.score_column);
  const std::optional<std::size_t> text_col =
      cfg.text_column.empty() ? std::nullopt : std::optional(column(cfg.text_column));

  std::map<std::string, Rating> out;
  for (std::size_t row = 1; row < records.size(); ++row) {
    const auto& rec = records[row];
    const std::size_t record_no = row + 1;
    auto cell = [&](std::size_t col, const std::string& name) -> const std::string& {
      if (col >= rec.size()) throw ParseError(record_no, name, "row is too short");
      return rec[col];
    };
    const std::string id(text::trim(cell(id_col, cfg.id_column)));
    const std::string_view raw_score = text::trim(cell(score_col, cfg.score_column));
    double score = 0.0;
    const auto [ptr, ec] = std::from_chars(raw_score.data(), raw_score.data() + raw_score.size(), score);
    if (ec != std::errc() || ptr != raw_score.data() + raw_score.size() || !std::isfinite(score)) {
      throw ParseError(record_no, cfg.score_column,
                       "unparseable score '" + std::string(raw_score) + "'");
    }
    std::string txt = text_col ? cell(*text_col, cfg.text_column) : std::string();
    auto [it, inserted] =
        out.try_emplace(id, Rating{score, gold_from_score(score, cfg.threshold), std::move(txt)});
    if (!inserted) throw ParseError(record_no, cfg.id_column, "duplicate id '" + id + "'");
  }
  return out;
}

}  // namespace factcheck
