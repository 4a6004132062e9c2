#include "coja/series_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coja/error.hpp"

namespace coja {

namespace {

void append17(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

double parse_double(std::string_view field) {
  const std::string s(field);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw InvalidArgument("malformed number in series: '" + s + "'");
  return v;
}

long parse_long(std::string_view field) {
  const std::string s(field);
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw InvalidArgument("malformed integer in series: '" + s + "'");
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

SeriesFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".json" ? SeriesFormat::Json : SeriesFormat::Csv;
}

std::string to_csv(const AggregateSeries& series) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : series.rows) {
    out += std::to_string(r.t);
    for (double v : {r.mean_sin2, r.p20, r.p80, r.bound_sin2}) {
      out += ',';
      append17(out, v);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const AggregateSeries& series) {
  nlohmann::json j;
  j["config"] = series.config;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : series.rows) {
    j["rows"].push_back(
        {{"t", r.t}, {"mean_sin2", r.mean_sin2}, {"p20", r.p20}, {"p80", r.p80}, {"bound_sin2", r.bound_sin2}});
  }
  return j.dump(2) + "\n";
}

AggregateSeries parse_csv(std::string_view text) {
  AggregateSeries series;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (header) {
      if (line != kCsvHeader) throw InvalidArgument("unexpected CSV header");
      header = false;
      continue;
    }
    if (line.empty()) continue;

    std::string_view fields[5];
    std::size_t start = 0;
    for (int k = 0; k < 5; ++k) {
      const std::size_t comma = k < 4 ? line.find(',', start) : line.size();
      if (comma == std::string_view::npos) throw InvalidArgument("CSV row has too few fields");
      fields[k] = line.substr(start, comma - start);
      start = comma + 1;
    }
    series.rows.push_back({parse_long(fields[0]), parse_double(fields[1]), parse_double(fields[2]),
                           parse_double(fields[3]), parse_double(fields[4])});
  }
  if (header) throw InvalidArgument("missing CSV header");
  return series;
}

AggregateSeries parse_json(std::string_view text) {
  AggregateSeries series;
  try {
    const auto j = nlohmann::json::parse(text);
    series.config = j.at("config").get<std::string>();
    for (const auto& r : j.at("rows")) {
      series.rows.push_back({r.at("t").get<long>(), r.at("mean_sin2").get<double>(), r.at("p20").get<double>(),
                             r.at("p80").get<double>(), r.at("bound_sin2").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed series JSON: ") + e.what());
  }
  return series;
}

void export_series(const AggregateSeries& series, SeriesFormat format, const std::filesystem::path& path) {
  if (series.rows.empty()) throw InvalidArgument("refusing to export an empty series");
  const std::string body = format == SeriesFormat::Csv ? to_csv(series) : to_json(series);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << body;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

AggregateSeries import_series(const std::filesystem::path& path, std::optional<SeriesFormat> format) {
  const std::string text = read_file(path);
  return format.value_or(format_for_path(path)) == SeriesFormat::Csv ? parse_csv(text) : parse_json(text);
}

}  // namespace coja
