#pragma once

#include <string>
#include <vector>

#include "gaplm/dataset.hpp"

namespace gaplm {

// Comma-separated, header required, '.' decimal. No quoting.
struct CsvOptions {
  std::string cluster_column = "cluster";
  std::string response_column = "y";
  std::vector<std::string> linear_columns;
  std::vector<std::string> additive_columns;
  bool rescale = false;  // min-max map each additive column onto [0,1]
};

// Rows are grouped by the cluster-id column keeping within-cluster order;
// clusters are ordered by id (numerically when every id parses as a number).
ClusteredDataset parse_csv(const std::string& text, const CsvOptions& options);
ClusteredDataset load_csv(const std::string& path, const CsvOptions& options);

// Serializes the in-memory dataset (additive covariates on the model's
// [0,1] scale); loading the result back with rescale disabled reproduces
// the dataset bit-exactly.
std::string dataset_csv(const ClusteredDataset& data, const CsvOptions& options);
void save_csv(const std::string& path, const ClusteredDataset& data,
              const CsvOptions& options);

}  // namespace gaplm
