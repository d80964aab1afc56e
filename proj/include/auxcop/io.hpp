#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "auxcop/core_types.hpp"
#include "auxcop/imputation.hpp"
#include "auxcop/sampler.hpp"

namespace auxcop {

/// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t v);
/// "# auxcopula config=<hash> seed=<seed>\n"
std::string header_comment(std::uint64_t config_hash, std::uint64_t seed);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

/// RFC-4180-style fields; lines starting with '#' are comments.
CsvTable parse_csv(const std::string& text);

/// Column schemas and per-column marginal information from a JSON document:
/// {"columns": [{"name", "kind", "levels"?, "missingness_mode",
///               "aux": [[tau, value], ...]?, "marginal": {...}?}, ...]}.
/// An aux entry with a null tau is an intermediate point.
struct SchemaFile {
  std::vector<ColumnSchema> schemas;
  std::vector<ColumnModel> models;
  int candidate_bins = 20;
};
SchemaFile schema_from_json(const nlohmann::json& doc);
nlohmann::json schema_to_json(const std::vector<ColumnSchema>& schemas,
                              const std::vector<ColumnModel>& models);

/// Columns are matched to schema names; empty cells are missing; categorical
/// cells hold level labels.
Dataset dataset_from_csv(const CsvTable& table, const std::vector<ColumnSchema>& schemas);
std::string dataset_to_csv(const std::vector<ColumnSchema>& schemas, const Eigen::MatrixXd& values);

/// Long format: sweep,param,i,j,value for corr (i < j), alpha and omega (j = 0).
std::string draws_to_csv(const PosteriorOutput& post);
/// sweep,column,value,level for each knot of each estimated marginal.
std::string marginals_to_csv(const PosteriorOutput& post);
/// sweep,row,column,value with the per-draw value of each missing cell.
std::string missing_draws_to_csv(const PosteriorOutput& post);

/// Rebuilds what imputation needs (mode, models, missing cells, per-draw
/// marginals and missing-cell values) from the files written by `fit`.
PosteriorOutput posterior_from_files(const nlohmann::json& meta, const CsvTable& marginals,
                                     const CsvTable& missing);

}  // namespace auxcop
