#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gifts/attributes.hpp"
#include "gifts/error.hpp"
#include "gifts/json_io.hpp"
#include "gifts/metrics.hpp"

namespace gifts::report {

using json_io::Json;

struct AttributeSummary {
  std::optional<double> mean;      // x100; nullopt when no cell could be scored
  std::size_t n = 0;               // scored cells (or runs, for a multi-run summary)
  std::size_t excluded = 0;        // cells left out of the mean
  std::optional<double> variance;  // across runs; multi-run summaries only
};

struct MetricReport {
  std::string variant;
  std::string defense = "none";
  std::string run;  // run label, e.g. "1", or "mean" for a multi-run summary
  std::size_t runs = 1;
  std::vector<metrics::ProfileScore> cells;
  std::map<AttributeKind, AttributeSummary> attributes;
  std::optional<double> avg;
  std::optional<double> avg_variance;
  std::size_t avg_n = 0;  // attributes contributing to avg
  std::vector<std::string> warnings;
};

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Population variance (divides by the number of values).
inline double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

/// Fills attribute means (x100, with n) and the overall Avg, the mean of attribute means.
inline void summarize(MetricReport& r) {
  r.attributes.clear();
  std::vector<double> means;
  for (AttributeKind a : kAllAttributes) {
    std::vector<double> scores;
    AttributeSummary s;
    for (const auto& p : r.cells) {
      for (const auto& c : p.attributes) {
        if (c.attribute != a) continue;
        if (c.score) {
          scores.push_back(*c.score * 100.0);
        } else {
          ++s.excluded;
        }
      }
    }
    s.n = scores.size();
    if (!scores.empty()) {
      s.mean = mean_of(scores);
      means.push_back(*s.mean);
    }
    r.attributes[a] = s;
  }
  r.avg_n = means.size();
  r.avg = means.empty() ? std::nullopt : std::optional<double>(mean_of(means));
}

/// Mean and variance across runs of each attribute mean and of Avg.
inline MetricReport combine_runs(const std::vector<MetricReport>& runs) {
  require(!runs.empty(), "need at least one run to combine");
  MetricReport out;
  out.variant = runs.front().variant;
  out.defense = runs.front().defense;
  out.run = "mean";
  out.runs = runs.size();
  for (AttributeKind a : kAllAttributes) {
    std::vector<double> v;
    for (const auto& r : runs) {
      auto it = r.attributes.find(a);
      if (it != r.attributes.end() && it->second.mean) v.push_back(*it->second.mean);
    }
    AttributeSummary s;
    s.n = v.size();
    s.excluded = runs.size() - v.size();
    if (!v.empty()) {
      s.mean = mean_of(v);
      s.variance = variance_of(v);
    }
    out.attributes[a] = s;
  }
  std::vector<double> avgs;
  for (const auto& r : runs) {
    if (r.avg) avgs.push_back(*r.avg);
  }
  out.avg_n = avgs.size();
  if (!avgs.empty()) {
    out.avg = mean_of(avgs);
    out.avg_variance = variance_of(avgs);
  }
  return out;
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline std::string to_jsonl(const MetricReport& r) {
  std::string out;
  auto line = [&out](const Json& j) { out += j.dump() + "\n"; };
  line({{"type", "meta"}, {"variant", r.variant}, {"defense", r.defense}, {"run", r.run},
        {"runs", r.runs}, {"warnings", r.warnings}});
  for (const auto& p : r.cells) {
    for (const auto& c : p.attributes) {
      Json j = {{"type", "cell"}, {"individual_id", p.individual_id},
                {"attribute", std::string(code_of(c.attribute))}, {"score", optional_number(c.score)}};
      if (!c.note.empty()) j["note"] = c.note;
      if (!c.warnings.empty()) j["warnings"] = c.warnings;
      line(j);
    }
  }
  for (const auto& [a, s] : r.attributes) {
    Json j = {{"type", "attribute"}, {"attribute", std::string(code_of(a))},
              {"mean", optional_number(s.mean)}, {"n", s.n}, {"excluded", s.excluded}};
    if (s.variance) j["variance"] = *s.variance;
    line(j);
  }
  Json overall = {{"type", "overall"}, {"avg", optional_number(r.avg)}, {"n_attributes", r.avg_n}};
  if (r.avg_variance) overall["variance"] = *r.avg_variance;
  line(overall);
  return out;
}

inline std::optional<double> read_optional_number(const Json& j, const std::string& context) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_number()) throw Error(ErrorCode::SchemaMismatch, context + ": expected a number or null");
  return j.get<double>();
}

/// Reads the summary records of a report file; cell lines are skipped.
inline MetricReport parse_report(const std::string& content, const std::string& origin) {
  MetricReport r;
  bool meta = false;
  bool overall = false;
  std::istringstream in(content);
  std::string text_line;
  for (std::size_t lineno = 1; std::getline(in, text_line); ++lineno) {
    if (text::trim(text_line).empty()) continue;
    const std::string ctx = origin + ":" + std::to_string(lineno);
    Json j;
    try {
      j = Json::parse(text_line);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::SchemaMismatch, ctx + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
      throw Error(ErrorCode::SchemaMismatch, ctx + ": record without a type");
    }
    const std::string type = j["type"].get<std::string>();
    try {
      if (type == "meta") {
        r.variant = j.at("variant").get<std::string>();
        r.defense = j.at("defense").get<std::string>();
        r.run = j.at("run").get<std::string>();
        r.runs = j.at("runs").get<std::size_t>();
        if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
        meta = true;
      } else if (type == "attribute") {
        const auto a = attribute_from_code(j.at("attribute").get<std::string>());
        if (!a) throw Error(ErrorCode::SchemaMismatch, ctx + ": unknown attribute code");
        AttributeSummary s;
        s.mean = read_optional_number(j.at("mean"), ctx);
        s.n = j.at("n").get<std::size_t>();
        s.excluded = j.at("excluded").get<std::size_t>();
        if (j.contains("variance")) s.variance = read_optional_number(j["variance"], ctx);
        r.attributes[*a] = s;
      } else if (type == "overall") {
        r.avg = read_optional_number(j.at("avg"), ctx);
        r.avg_n = j.at("n_attributes").get<std::size_t>();
        if (j.contains("variance")) r.avg_variance = read_optional_number(j["variance"], ctx);
        overall = true;
      } else if (type != "cell") {
        throw Error(ErrorCode::SchemaMismatch, ctx + ": unknown record type '" + type + "'");
      }
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::SchemaMismatch, ctx + ": " + e.what());
    }
  }
  if (!meta || !overall) throw Error(ErrorCode::SchemaMismatch, origin + ": missing meta or overall record");
  return r;
}

inline std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string cell_text(const std::optional<double>& mean, const std::optional<double>& variance) {
  if (!mean) return "--";
  std::string s = fixed1(*mean);
  if (variance) s += "±" + fixed1(*variance);
  return s;
}

/// Display width, counting each UTF-8 code point once.
inline std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80;
  return w;
}

/// Rows in input order; columns Variant, Defense, AGE..MAR, Avg, right-aligned numbers.
inline std::string render_table(const std::vector<MetricReport>& rows) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"Variant", "Defense"};
  for (AttributeKind a : kAllAttributes) header.emplace_back(code_of(a));
  header.emplace_back("Avg");
  grid.push_back(header);
  for (const auto& r : rows) {
    std::vector<std::string> row = {r.variant, r.defense};
    for (AttributeKind a : kAllAttributes) {
      auto it = r.attributes.find(a);
      row.push_back(it == r.attributes.end() ? "--" : cell_text(it->second.mean, it->second.variance));
    }
    row.push_back(cell_text(r.avg, r.avg_variance));
    grid.push_back(row);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], display_width(row[c]));
  }
  std::string out;
  for (const auto& row : grid) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - display_width(row[c]), ' ');
      if (c) line += "  ";
      line += c < 2 ? row[c] + pad : pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

/// Groups reports by (variant, defense) in first-seen order. A group of one keeps its
/// values; larger groups become the mean and variance across their files.
inline std::vector<MetricReport> group_rows(const std::vector<MetricReport>& reports) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<MetricReport>> groups;
  for (const auto& r : reports) {
    auto key = std::make_pair(r.variant, r.defense);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(r);
  }
  std::vector<MetricReport> rows;
  for (const auto& key : order) {
    const auto& g = groups[key];
    rows.push_back(g.size() == 1 ? g.front() : combine_runs(g));
  }
  return rows;
}

}  // namespace gifts::report
