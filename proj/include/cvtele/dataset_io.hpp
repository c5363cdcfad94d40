#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cvtele/tomography.hpp"

namespace cvtele {

// Dataset: CSV with header `phase,value`, one sample per row, plus a JSON
// sidecar {seed, source_label, scan: {kind, bins}, n_samples}.
void write_dataset(const TomographyDataset& data, const std::filesystem::path& csv_path,
                   const std::filesystem::path& sidecar_path);
TomographyDataset read_dataset(const std::filesystem::path& csv_path,
                               const std::filesystem::path& sidecar_path);

std::string dataset_csv(const TomographyDataset& data);
nlohmann::json dataset_sidecar(const TomographyDataset& data);

// Grid: JSON {x_axis, p_axis, shape: [nx, np], values (row-major over x),
// metadata: {cutoff, sample_count, method}}; optional CSV matrix with one row
// per x value.
nlohmann::json grid_to_json(const WignerGrid& grid);
WignerGrid grid_from_json(const nlohmann::json& j);
void write_grid_json(const WignerGrid& grid, const std::filesystem::path& path);
void write_grid_csv(const WignerGrid& grid, const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

}  // namespace cvtele
