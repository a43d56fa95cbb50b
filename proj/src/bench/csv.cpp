#include "lasmc/bench/csv.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "lasmc/errors.hpp"

namespace lasmc::bench {

int ResultTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) return static_cast<int>(c);
  return -1;
}

std::pair<double, double> ResultTable::mean_se(int col) const {
  double s = 0.0, s2 = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    const double v = r.at(static_cast<std::size_t>(col));
    if (std::isnan(v)) continue;
    s += v;
    s2 += v * v;
    ++n;
  }
  if (n == 0) return {std::nan(""), std::nan("")};
  const double mean = s / n;
  if (n < 2) return {mean, std::nan("")};
  const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1));
  return {mean, std::sqrt(var / n)};
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const ResultTable& table) {
  os << "row";
  for (const auto& l : table.labels) os << ',' << csv_escape(l.first);
  os << ",rep";
  for (const auto& c : table.columns) os << ',' << csv_escape(c);
  os << "\r\n";
  auto line = [&](std::string_view kind, const std::string& rep, const std::vector<double>& v) {
    os << kind;
    for (const auto& l : table.labels) os << ',' << csv_escape(l.second);
    os << ',' << rep;
    for (double x : v) os << ',' << format_double(x);
    os << "\r\n";
  };
  for (std::size_t r = 0; r < table.rows.size(); ++r) line("rep", std::to_string(r), table.rows[r]);
  std::vector<double> mean(table.columns.size()), se(table.columns.size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto [m, s] = table.mean_se(static_cast<int>(c));
    mean[c] = m;
    se[c] = s;
  }
  line("mean", "", mean);
  line("se", "", se);
  for (const auto& [kind, v] : table.extra) line(kind, "", v);
}

std::string to_csv(const ResultTable& table) {
  std::ostringstream os;
  write_csv(os, table);
  return os.str();
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  std::size_t i = 0;
  auto end_record = [&] {
    rec.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(rec));
    rec.clear();
    any = false;
  };
  while (i < text.size()) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field += ch;
      }
      ++i;
      continue;
    }
    if (ch == '"') {
      if (!field.empty()) throw ConfigError("malformed CSV: quote inside an unquoted field");
      quoted = true;
      any = true;
    } else if (ch == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else {
      field += ch;
      any = true;
    }
    ++i;
  }
  if (quoted) throw ConfigError("malformed CSV: unterminated quoted field");
  if (any || !field.empty() || !rec.empty()) end_record();
  return records;
}

}  // namespace lasmc::bench
