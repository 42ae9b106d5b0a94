#include "changesim/dataset.hpp"

#include <algorithm>
#include <charconv>

namespace changesim::mc {

void Dataset::add_column(Column col) {
  if (has_column(col.name))
    throw ValidationError("duplicate column '" + col.name + "'");
  if (!columns_.empty() && col.values.size() != n_)
    throw ValidationError("column '" + col.name + "' has " +
                          std::to_string(col.values.size()) + " rows, expected " +
                          std::to_string(n_));
  if (columns_.empty()) n_ = col.values.size();
  columns_.push_back(std::move(col));
}

bool Dataset::has_column(const std::string& name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.name == name; });
}

const Column& Dataset::column(const std::string& name) const {
  for (const Column& c : columns_)
    if (c.name == name) return c;
  throw UnknownNameError("unknown column '" + name + "'");
}

namespace {

// %.17g equivalent via to_chars: enough digits to round-trip any double.
void append_number(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc{}) throw InternalError("number formatting failed");
  out.append(buf, ptr);
}

}  // namespace

std::string Dataset::to_csv(bool include_latent) const {
  std::vector<const Column*> cols;
  for (const Column& c : columns_)
    if (include_latent || c.kind != ColumnKind::Latent) cols.push_back(&c);
  if (cols.empty()) throw ValidationError("no exportable columns");
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i]->name;
  }
  out += '\n';
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out += ',';
      append_number(out, cols[i]->values[r]);
    }
    out += '\n';
  }
  return out;
}

Dataset Dataset::from_csv(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    start = end + 1;
  }
  if (lines.empty()) throw ValidationError("empty CSV");

  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(pos));
        return fields;
      }
      fields.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
  };

  const std::vector<std::string> header = split(lines[0]);
  std::vector<Column> cols;
  for (const std::string& name : header) {
    if (name.empty()) throw ValidationError("CSV has an empty column name");
    cols.push_back(Column{name, ColumnKind::Observed, {}});
  }
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::vector<std::string> fields = split(lines[li]);
    if (fields.size() != header.size())
      throw ValidationError("CSV row " + std::to_string(li + 1) + " has " +
                            std::to_string(fields.size()) +
                            " fields, expected " +
                            std::to_string(header.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      double v = 0.0;
      const std::string& f = fields[i];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size())
        throw ValidationError("CSV row " + std::to_string(li + 1) +
                              ": field '" + f + "' is not a number");
      cols[i].values.push_back(v);
    }
  }
  Dataset out;
  for (Column& c : cols) out.add_column(std::move(c));
  return out;
}

}  // namespace changesim::mc
