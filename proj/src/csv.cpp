#include "gaplm/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace gaplm {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

bool parse_number(const std::string& token, double& out) {
  if (token.empty()) return false;
  char* end = nullptr;
  out = std::strtod(token.c_str(), &end);
  return end == token.c_str() + token.size();
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw Error(ErrorCode::config_error, "missing column '" + name + "'",
              {{"column", name}});
}

double parse_cell(const std::vector<std::string>& fields, int column,
                  const std::string& column_name, int line) {
  if (column >= static_cast<int>(fields.size()))
    throw Error(ErrorCode::parse_error,
                "short row at line " + std::to_string(line),
                {{"line", std::to_string(line)}});
  double value;
  if (!parse_number(fields[static_cast<std::size_t>(column)], value))
    throw Error(ErrorCode::parse_error,
                "non-numeric cell at line " + std::to_string(line) +
                    ", column '" + column_name + "'",
                {{"line", std::to_string(line)}, {"column", column_name}});
  return value;
}

}  // namespace

ClusteredDataset parse_csv(const std::string& text, const CsvOptions& options) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::parse_error, "empty file");
  const std::vector<std::string> header = split_line(line);

  const int id_col = find_column(header, options.cluster_column);
  const int y_col = find_column(header, options.response_column);
  std::vector<int> x_cols, z_cols;
  for (const auto& name : options.linear_columns)
    x_cols.push_back(find_column(header, name));
  for (const auto& name : options.additive_columns)
    z_cols.push_back(find_column(header, name));

  struct Row {
    double y;
    std::vector<double> x, z;
  };
  std::map<std::string, std::vector<Row>> groups;
  std::vector<std::string> id_order;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_line(line);
    if (id_col >= static_cast<int>(fields.size()))
      throw Error(ErrorCode::parse_error,
                  "short row at line " + std::to_string(line_no),
                  {{"line", std::to_string(line_no)}});
    const std::string id = fields[static_cast<std::size_t>(id_col)];
    Row row;
    row.y = parse_cell(fields, y_col, options.response_column, line_no);
    for (std::size_t k = 0; k < x_cols.size(); ++k)
      row.x.push_back(
          parse_cell(fields, x_cols[k], options.linear_columns[k], line_no));
    for (std::size_t k = 0; k < z_cols.size(); ++k) {
      const double v =
          parse_cell(fields, z_cols[k], options.additive_columns[k], line_no);
      if (!options.rescale && !(v >= 0.0 && v <= 1.0))
        throw Error(ErrorCode::numeric_domain,
                    "additive covariate outside [0,1] at line " +
                        std::to_string(line_no) + ", column '" +
                        options.additive_columns[k] +
                        "' (enable rescaling or transform the data)",
                    {{"line", std::to_string(line_no)},
                     {"column", options.additive_columns[k]}});
      row.z.push_back(v);
    }
    if (groups.find(id) == groups.end()) id_order.push_back(id);
    groups[id].push_back(std::move(row));
  }
  if (groups.empty())
    throw Error(ErrorCode::parse_error, "no data rows");

  // Canonical cluster order: numeric when every id parses as a number,
  // lexicographic otherwise, so shuffled files load identically.
  bool all_numeric = true;
  std::vector<std::pair<double, std::string>> numeric_ids;
  for (const auto& id : id_order) {
    double value;
    if (!parse_number(id, value)) {
      all_numeric = false;
      break;
    }
    numeric_ids.emplace_back(value, id);
  }
  if (all_numeric) {
    std::sort(numeric_ids.begin(), numeric_ids.end());
    id_order.clear();
    for (const auto& [value, id] : numeric_ids) id_order.push_back(id);
  } else {
    std::sort(id_order.begin(), id_order.end());
  }

  const int d1 = static_cast<int>(x_cols.size());
  const int d2 = static_cast<int>(z_cols.size());

  ClusteredDataset data;
  data.z_maps.assign(static_cast<std::size_t>(d2), AffineMap{});
  for (const auto& id : id_order) {
    const auto& rows = groups[id];
    Cluster c;
    c.id = id;
    const int m = static_cast<int>(rows.size());
    c.y.resize(m);
    c.x.resize(m, d1);
    c.z.resize(m, d2);
    for (int j = 0; j < m; ++j) {
      c.y[j] = rows[static_cast<std::size_t>(j)].y;
      for (int k = 0; k < d1; ++k)
        c.x(j, k) = rows[static_cast<std::size_t>(j)].x[static_cast<std::size_t>(k)];
      for (int k = 0; k < d2; ++k)
        c.z(j, k) = rows[static_cast<std::size_t>(j)].z[static_cast<std::size_t>(k)];
    }
    data.clusters.push_back(std::move(c));
  }

  if (options.rescale) {
    for (int k = 0; k < d2; ++k) {
      double lo = data.clusters[0].z(0, k), hi = lo;
      for (const auto& c : data.clusters)
        for (Eigen::Index j = 0; j < c.z.rows(); ++j) {
          lo = std::min(lo, c.z(j, k));
          hi = std::max(hi, c.z(j, k));
        }
      if (!(hi > lo))
        throw Error(ErrorCode::config_error,
                    "additive column '" + options.additive_columns[
                        static_cast<std::size_t>(k)] +
                        "' is constant; cannot rescale");
      data.z_maps[static_cast<std::size_t>(k)] = AffineMap{lo, hi - lo};
      for (auto& c : data.clusters)
        for (Eigen::Index j = 0; j < c.z.rows(); ++j)
          c.z(j, k) = data.z_maps[static_cast<std::size_t>(k)].to_unit(c.z(j, k));
    }
  }

  data.validate();
  return data;
}

ClusteredDataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::io_error, "cannot open '" + path + "'",
                {{"path", path}});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), options);
}

std::string dataset_csv(const ClusteredDataset& data, const CsvOptions& options) {
  std::string out = options.cluster_column + "," + options.response_column;
  for (const auto& name : options.linear_columns) out += "," + name;
  for (const auto& name : options.additive_columns) out += "," + name;
  out += "\n";
  char buf[64];
  for (const auto& c : data.clusters) {
    for (Eigen::Index j = 0; j < c.y.size(); ++j) {
      out += c.id;
      std::snprintf(buf, sizeof(buf), ",%.17g", c.y[j]);
      out += buf;
      for (Eigen::Index k = 0; k < c.x.cols(); ++k) {
        std::snprintf(buf, sizeof(buf), ",%.17g", c.x(j, k));
        out += buf;
      }
      for (Eigen::Index k = 0; k < c.z.cols(); ++k) {
        std::snprintf(buf, sizeof(buf), ",%.17g", c.z(j, k));
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

void save_csv(const std::string& path, const ClusteredDataset& data,
              const CsvOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::io_error, "cannot write '" + path + "'",
                {{"path", path}});
  out << dataset_csv(data, options);
}

}  // namespace gaplm
