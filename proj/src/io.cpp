#include "auxcop/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "auxcop/error.hpp"

namespace auxcop {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw Error(Errc::io_error, "cannot parse '" + s + "' as a number");
  return v;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string header_comment(std::uint64_t config_hash, std::uint64_t seed) {
  return "# auxcopula config=" + hex64(config_hash) + " seed=" + std::to_string(seed) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  throw Error(Errc::io_error, "CSV has no column '" + name + "'");
}

namespace {

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    if (!have_header) {
      if (line.empty()) continue;
      t.header = split_record(line);
      have_header = true;
      continue;
    }
    if (line.empty() && t.header.size() != 1) continue;
    auto rec = split_record(line);
    if (rec.size() != t.header.size())
      throw Error(Errc::io_error, "CSV row " + std::to_string(t.rows.size() + 1) + " has " +
                                      std::to_string(rec.size()) + " fields, header has " +
                                      std::to_string(t.header.size()));
    t.rows.push_back(std::move(rec));
  }
  if (!have_header) throw Error(Errc::io_error, "CSV has no header row");
  return t;
}

SchemaFile schema_from_json(const nlohmann::json& doc) {
  SchemaFile out;
  if (!doc.contains("columns") || !doc["columns"].is_array())
    throw Error(Errc::config_error, "schema JSON needs a 'columns' array");
  out.candidate_bins = doc.value("candidate_bins", 20);
  for (const auto& c : doc["columns"]) {
    ColumnSchema s;
    try {
      s.name = c.at("name").get<std::string>();
      s.kind = column_kind_from_string(c.at("kind").get<std::string>());
      if (c.contains("levels")) s.levels = c["levels"].get<std::vector<std::string>>();
      s.missingness = missingness_mode_from_string(c.value("missingness_mode", std::string("mcar")));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::config_error, std::string("schema column: ") + e.what());
    }
    s.validate();

    ColumnModel m;
    if (c.contains("aux")) {
      std::vector<std::pair<double, double>> known;
      std::vector<double> intermediate;
      for (const auto& e : c["aux"]) {
        if (!e.is_array() || e.size() != 2)
          throw Error(Errc::config_error, "aux entries of '" + s.name + "' must be [tau, value]");
        if (e[0].is_null())
          intermediate.push_back(e[1].get<double>());
        else
          known.emplace_back(e[0].get<double>(), e[1].get<double>());
      }
      AuxiliaryQuantileSet aux = validate_aux(s, known);
      for (double v : intermediate) aux.points.push_back({v, std::nullopt});
      std::stable_sort(aux.points.begin(), aux.points.end(),
                       [](const AuxPoint& a, const AuxPoint& b) { return a.value < b.value; });
      m.aux = std::move(aux);
    }
    if (c.contains("marginal")) m.marginal = marginal_from_json(c["marginal"]);
    out.schemas.push_back(std::move(s));
    out.models.push_back(std::move(m));
  }
  return out;
}

nlohmann::json schema_to_json(const std::vector<ColumnSchema>& schemas,
                              const std::vector<ColumnModel>& models) {
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t j = 0; j < schemas.size(); ++j) {
    const auto& s = schemas[j];
    nlohmann::json c{{"name", s.name},
                     {"kind", to_string(s.kind)},
                     {"missingness_mode", to_string(s.missingness)}};
    if (s.kind == ColumnKind::categorical) c["levels"] = s.levels;
    if (j < models.size()) {
      const auto& m = models[j];
      if (m.aux) {
        nlohmann::json aux = nlohmann::json::array();
        for (const auto& p : m.aux->points)
          aux.push_back({p.tau ? nlohmann::json(*p.tau) : nlohmann::json(nullptr), p.value});
        c["aux"] = aux;
      }
      if (m.marginal) c["marginal"] = m.marginal->to_json();
    }
    cols.push_back(c);
  }
  return {{"columns", cols}};
}

Dataset dataset_from_csv(const CsvTable& table, const std::vector<ColumnSchema>& schemas) {
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto p = static_cast<Eigen::Index>(schemas.size());
  Eigen::MatrixXd values(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& s = schemas[static_cast<std::size_t>(j)];
    const std::size_t col = table.column(s.name);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::string& cell = table.rows[static_cast<std::size_t>(i)][col];
      if (cell.empty()) {
        values(i, j) = kMissing;
        continue;
      }
      if (s.kind == ColumnKind::categorical) {
        auto it = std::find(s.levels.begin(), s.levels.end(), cell);
        if (it == s.levels.end())
          throw Error(Errc::io_error, "column '" + s.name + "' row " + std::to_string(i + 1) +
                                          ": unknown level '" + cell + "'");
        values(i, j) = static_cast<double>(it - s.levels.begin());
      } else {
        try {
          values(i, j) = parse_double(cell);
        } catch (const Error&) {
          throw Error(Errc::io_error, "column '" + s.name + "' row " + std::to_string(i + 1) +
                                          ": cannot parse '" + cell + "'");
        }
      }
    }
  }
  return Dataset(schemas, std::move(values));
}

std::string dataset_to_csv(const std::vector<ColumnSchema>& schemas, const Eigen::MatrixXd& values) {
  std::string out;
  for (std::size_t j = 0; j < schemas.size(); ++j) {
    if (j) out += ',';
    out += quote_field(schemas[j].name);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j) out += ',';
      const double v = values(i, j);
      if (std::isnan(v)) continue;
      const auto& s = schemas[static_cast<std::size_t>(j)];
      if (s.kind == ColumnKind::categorical)
        out += quote_field(s.levels[static_cast<std::size_t>(v)]);
      else
        out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

namespace {

void append_draw_rows(std::string& out, const PosteriorDraw& d) {
  const Eigen::Index dim = d.corr.rows();
  const std::string sweep = std::to_string(d.sweep);
  for (Eigen::Index u = 0; u < dim; ++u)
    for (Eigen::Index v = u + 1; v < dim; ++v)
      out += sweep + ",corr," + std::to_string(u) + ',' + std::to_string(v) + ',' +
             format_double(d.corr(u, v)) + '\n';
  for (Eigen::Index u = 0; u < dim; ++u)
    out += sweep + ",alpha," + std::to_string(u) + ",0," + format_double(d.alpha(u)) + '\n';
  for (Eigen::Index u = 0; u < dim; ++u)
    out += sweep + ",omega," + std::to_string(u) + ",0," + format_double(d.omega_diag(u)) + '\n';
}

}  // namespace

std::string draws_to_csv(const PosteriorOutput& post) {
  std::string out = "sweep,param,i,j,value\n";
  append_draw_rows(out, post.initial);
  for (const auto& d : post.draws) append_draw_rows(out, d);
  return out;
}

std::string marginals_to_csv(const PosteriorOutput& post) {
  std::string out = "sweep,column,value,level\n";
  for (const auto& d : post.draws)
    for (std::size_t j = 0; j < d.marginal_knots.size(); ++j)
      for (const auto& k : d.marginal_knots[j])
        out += std::to_string(d.sweep) + ',' + quote_field(post.schemas[j].name) + ',' +
               format_double(k.value) + ',' + format_double(k.level) + '\n';
  return out;
}

std::string missing_draws_to_csv(const PosteriorOutput& post) {
  std::string out = "sweep,row,column,value\n";
  for (const auto& d : post.draws)
    for (std::size_t c = 0; c < d.missing_values.size(); ++c) {
      const auto& cell = post.missing_cells[c];
      out += std::to_string(d.sweep) + ',' + std::to_string(cell.row) + ',' +
             quote_field(post.schemas[static_cast<std::size_t>(cell.col)].name) + ',' +
             format_double(d.missing_values[c]) + '\n';
    }
  return out;
}

PosteriorOutput posterior_from_files(const nlohmann::json& meta, const CsvTable& marginals,
                                     const CsvTable& missing) {
  PosteriorOutput post;
  post.mode = likelihood_mode_from_string(meta.at("mode").get<std::string>());
  const SchemaFile schema = schema_from_json(meta.at("schema"));
  post.schemas = schema.schemas;
  post.models = schema.models;
  post.layout = build_layout(post.schemas);
  std::map<std::string, Eigen::Index> col_of;
  for (std::size_t j = 0; j < post.schemas.size(); ++j)
    col_of[post.schemas[j].name] = static_cast<Eigen::Index>(j);
  for (const auto& cell : meta.at("missing_cells"))
    post.missing_cells.push_back({cell.at(0).get<Eigen::Index>(), cell.at(1).get<Eigen::Index>()});
  const auto sweeps = meta.at("sweeps").get<std::vector<int>>();

  std::map<int, std::size_t> draw_of;
  for (int s : sweeps) {
    draw_of[s] = post.draws.size();
    PosteriorDraw d;
    d.sweep = s;
    d.missing_values.reserve(post.missing_cells.size());
    post.draws.push_back(std::move(d));
  }
  auto find_draw = [&](const std::string& text) -> PosteriorDraw& {
    auto it = draw_of.find(std::stoi(text));
    if (it == draw_of.end()) throw Error(Errc::io_error, "sweep " + text + " is not a retained draw");
    return post.draws[it->second];
  };
  auto find_col = [&](const std::string& name) {
    auto it = col_of.find(name);
    if (it == col_of.end()) throw Error(Errc::io_error, "unknown column '" + name + "'");
    return it->second;
  };

  {
    const std::size_t s = marginals.column("sweep"), c = marginals.column("column"),
                      v = marginals.column("value"), l = marginals.column("level");
    for (const auto& row : marginals.rows) {
      auto& d = find_draw(row[s]);
      if (d.marginal_knots.empty()) d.marginal_knots.resize(post.schemas.size());
      d.marginal_knots[static_cast<std::size_t>(find_col(row[c]))].push_back(
          {parse_double(row[v]), parse_double(row[l])});
    }
  }
  {
    const std::size_t s = missing.column("sweep"), v = missing.column("value");
    for (const auto& row : missing.rows) find_draw(row[s]).missing_values.push_back(parse_double(row[v]));
  }
  for (const auto& d : post.draws)
    if (d.missing_values.size() != post.missing_cells.size())
      throw Error(Errc::io_error, "sweep " + std::to_string(d.sweep) + " has " +
                                      std::to_string(d.missing_values.size()) +
                                      " missing-cell values, expected " +
                                      std::to_string(post.missing_cells.size()));
  return post;
}

}  // namespace auxcop
