// Copyright 2026 The semmix Authors.
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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "semmix/error.h"
#include "semmix/metrics.h"

namespace semmix {
namespace {

constexpr const char* kCsvHeader = "clip_id,mag,env,kld,delta_ib,w_dis,kld_space,errors";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_fixed(double v, int decimals) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits CSV text into records, honouring quoted fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw DataError("CSV: unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_double(const std::string& s, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw DataError(std::string("CSV: bad number '") + s + "' in column " + column);
  }
  return v;
}

}  // namespace

void sort_reports(std::vector<MetricsReport>& reports) {
  std::sort(reports.begin(), reports.end(),
            [](const MetricsReport& a, const MetricsReport& b) { return a.clip_id < b.clip_id; });
}

MetricsReport aggregate(std::vector<MetricsReport> reports, const std::string& label) {
  sort_reports(reports);
  MetricsReport out;
  out.clip_id = label;
  std::size_t n = 0, n_ib = 0;
  double ib = 0.0;
  for (const auto& r : reports) {
    if (!r.ok()) continue;
    ++n;
    out.mag += r.mag;
    out.env += r.env;
    out.kld += r.kld;
    out.w_dis += r.w_dis;
    if (r.delta_ib) {
      ib += *r.delta_ib;
      ++n_ib;
    }
    if (out.kld_space.empty()) {
      out.kld_space = r.kld_space;
    } else if (out.kld_space != r.kld_space) {
      out.kld_space = "mixed";
    }
  }
  if (n == 0) {
    out.errors = "no successful clips";
    return out;
  }
  out.mag /= n;
  out.env /= n;
  out.kld /= n;
  out.w_dis /= n;
  if (n_ib > 0) out.delta_ib = ib / n_ib;
  return out;
}

std::string reports_to_csv(std::vector<MetricsReport> reports) {
  sort_reports(reports);
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : reports) {
    os << csv_escape(r.clip_id) << ',' << fmt_double(r.mag) << ',' << fmt_double(r.env) << ','
       << fmt_double(r.kld) << ',' << (r.delta_ib ? fmt_double(*r.delta_ib) : "n/a") << ','
       << fmt_double(r.w_dis) << ',' << csv_escape(r.kld_space) << ',' << csv_escape(r.errors)
       << '\n';
  }
  return os.str();
}

std::vector<MetricsReport> reports_from_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw DataError("CSV: empty report");
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
  if (header != kCsvHeader) throw DataError("CSV: unexpected header '" + header + "'");
  std::vector<MetricsReport> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 8) throw DataError("CSV: row " + std::to_string(i) + " has " +
                                       std::to_string(f.size()) + " fields");
    MetricsReport r;
    r.clip_id = f[0];
    r.mag = parse_double(f[1], "mag");
    r.env = parse_double(f[2], "env");
    r.kld = parse_double(f[3], "kld");
    if (f[4] != "n/a") r.delta_ib = parse_double(f[4], "delta_ib");
    r.w_dis = parse_double(f[5], "w_dis");
    r.kld_space = f[6];
    r.errors = f[7];
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json reports_to_json(std::vector<MetricsReport> reports) {
  sort_reports(reports);
  nlohmann::json j;
  j["scale_note"] = MetricsReport::kScaleNote;
  j["clips"] = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json c = {{"clip_id", r.clip_id}, {"mag", r.mag},     {"env", r.env},
                        {"kld", r.kld},         {"w_dis", r.w_dis}, {"kld_space", r.kld_space},
                        {"errors", r.errors}};
    c["delta_ib"] = r.delta_ib ? nlohmann::json(*r.delta_ib) : nlohmann::json(nullptr);
    j["clips"].push_back(std::move(c));
  }
  return j;
}

std::vector<MetricsReport> reports_from_json(const nlohmann::json& j) {
  std::vector<MetricsReport> out;
  try {
    for (const auto& c : j.at("clips")) {
      MetricsReport r;
      r.clip_id = c.at("clip_id").get<std::string>();
      r.mag = c.at("mag").get<double>();
      r.env = c.at("env").get<double>();
      r.kld = c.at("kld").get<double>();
      r.w_dis = c.at("w_dis").get<double>();
      if (!c.at("delta_ib").is_null()) r.delta_ib = c.at("delta_ib").get<double>();
      r.kld_space = c.value("kld_space", "");
      r.errors = c.value("errors", "");
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report JSON: ") + e.what());
  }
  return out;
}

double percent_improvement(double baseline, double value) {
  if (baseline == 0.0) return 0.0;
  return 100.0 * (baseline - value) / std::abs(baseline);
}

std::string format_percent(double baseline, double value, int decimals) {
  const double pct = percent_improvement(baseline, value);
  const double scale = std::pow(10.0, decimals);
  const double rounded = std::round(pct * scale) / scale;
  if (rounded == 0.0) return fmt_fixed(0.0, decimals) + "%";
  return (rounded > 0 ? "+" : "-") + fmt_fixed(std::abs(rounded), decimals) + "%";
}

std::string render_table(const std::vector<TableRow>& rows, std::size_t baseline) {
  struct Column {
    const char* name;
    std::optional<double> (*get)(const MetricsReport&);
  };
  const Column columns[] = {
      {"MAG", [](const MetricsReport& r) -> std::optional<double> { return r.mag; }},
      {"ENV", [](const MetricsReport& r) -> std::optional<double> { return r.env; }},
      {"KLD", [](const MetricsReport& r) -> std::optional<double> { return r.kld; }},
      {"dIB", [](const MetricsReport& r) { return r.delta_ib; }},
      {"W-dis", [](const MetricsReport& r) -> std::optional<double> { return r.w_dis; }},
  };

  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Method"});
  for (const auto& c : columns) cells.back().push_back(c.name);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> line{rows[i].method};
    for (const auto& c : columns) {
      const auto v = c.get(rows[i].metrics);
      if (!v) {
        line.push_back("--");
        continue;
      }
      std::string cell = fmt_fixed(*v, 2);
      const auto base = baseline < rows.size() ? c.get(rows[baseline].metrics) : std::nullopt;
      if (i != baseline && base) cell += " (" + format_percent(*base, *v) + ")";
      line.push_back(cell);
    }
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& line : cells) {
    for (std::size_t k = 0; k < line.size(); ++k) width[k] = std::max(width[k], line[k].size());
  }
  std::ostringstream os;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t k = 0; k < cells[r].size(); ++k) {
      const std::string& s = cells[r][k];
      if (k == 0) {
        os << s << std::string(width[k] - s.size(), ' ');
      } else {
        os << "  " << std::string(width[k] - s.size(), ' ') << s;
      }
    }
    os << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  return os.str();
}

}  // namespace semmix
