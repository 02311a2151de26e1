#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "genesel/dataset.hpp"
#include "genesel/error.hpp"

namespace genesel {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Comma split with optional double-quoted fields ("" escapes a quote).
std::vector<std::string> split_fields(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"' && trim(cur).empty()) {
      cur.clear();
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      fields.emplace_back(was_quoted ? cur : std::string(trim(cur)));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  fields.emplace_back(was_quoted ? cur : std::string(trim(cur)));
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

LoadedDataset read_csv(std::istream& in, const CsvOptions& options, std::string name) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) {
      header = split_fields(line, line_no);
      break;
    }
  }
  if (header.size() < 2) {
    throw ParseError(line_no, "header must name at least one gene and the label column");
  }
  const std::size_t n_cols = header.size();
  const std::size_t n_genes = n_cols - 1;
  const std::size_t label_pos = options.label_column == LabelColumn::first ? 0 : n_cols - 1;
  const std::size_t gene_offset = options.label_column == LabelColumn::first ? 1 : 0;

  std::vector<std::string> gene_ids(header.begin() + static_cast<std::ptrdiff_t>(gene_offset),
                                    header.begin() + static_cast<std::ptrdiff_t>(gene_offset + n_genes));
  std::vector<double> values;
  std::vector<ClassIndex> labels;
  std::vector<std::string> class_names;
  std::unordered_map<std::string, ClassIndex> class_index;
  MissingMask mask;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_fields(line, line_no);
    if (fields.size() != n_cols) {
      throw ParseError(line_no, "expected " + std::to_string(n_cols) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    const std::size_t row = labels.size();
    const std::string& label = fields[label_pos];
    if (label.empty() || label == options.missing_token) {
      throw ParseError(line_no, "missing class label");
    }
    auto [it, inserted] = class_index.try_emplace(label, static_cast<ClassIndex>(class_names.size()));
    if (inserted) class_names.push_back(label);
    labels.push_back(it->second);

    for (std::size_t j = 0; j < n_genes; ++j) {
      const std::string& cell = fields[gene_offset + j];
      if (cell.empty() || cell == options.missing_token) {
        mask.cells.emplace_back(row, j);
        values.push_back(0.0);
        continue;
      }
      double v = 0.0;
      if (!parse_double(cell, v)) {
        throw ParseError(line_no, "non-numeric expression value '" + cell + "' in column '" +
                                      gene_ids[j] + "'");
      }
      values.push_back(v);
    }
  }
  if (labels.empty()) throw ValidationError("CSV contains a header but no samples");
  if (class_names.size() < 2) {
    throw ValidationError("CSV contains a single class '" + class_names.front() + "'");
  }

  Matrix m(labels.size(), n_genes, std::move(values));
  return {Dataset(std::move(m), std::move(labels), std::move(gene_ids), std::move(class_names),
                  std::move(name)),
          std::move(mask)};
}

LoadedDataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string name = path;
  if (auto slash = name.find_last_of("/\\"); slash != std::string::npos) name.erase(0, slash + 1);
  if (auto dot = name.rfind('.'); dot != std::string::npos && dot > 0) name.erase(dot);
  return read_csv(in, options, std::move(name));
}

void write_csv(std::ostream& out, const Dataset& ds, const MissingMask& mask,
               const CsvOptions& options) {
  const bool label_first = options.label_column == LabelColumn::first;
  if (label_first) out << "class";
  for (std::size_t j = 0; j < ds.n_genes(); ++j) {
    if (j > 0 || label_first) out << ',';
    out << quote_if_needed(ds.gene_ids()[j]);
  }
  if (!label_first) out << ",class";
  out << '\n';

  std::size_t next_missing = 0;
  char buf[64];
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    const auto& label = ds.class_names()[static_cast<std::size_t>(ds.labels()[i])];
    if (label_first) out << quote_if_needed(label);
    for (std::size_t j = 0; j < ds.n_genes(); ++j) {
      if (j > 0 || label_first) out << ',';
      if (next_missing < mask.cells.size() && mask.cells[next_missing] == std::pair{i, j}) {
        out << options.missing_token;
        ++next_missing;
        continue;
      }
      // Shortest representation that round-trips exactly.
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, ds.values()(i, j));
      out.write(buf, ptr - buf);
    }
    if (!label_first) out << ',' << quote_if_needed(label);
    out << '\n';
  }
}

void save_csv(const std::string& path, const Dataset& ds, const MissingMask& mask,
              const CsvOptions& options) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_csv(out, ds, mask, options);
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace genesel
