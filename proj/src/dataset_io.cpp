#include "cvtele/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace cvtele {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_double(std::string_view text, std::size_t line) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::runtime_error("dataset line " + std::to_string(line) + ": bad number '" +
                             std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::string dataset_csv(const TomographyDataset& data) {
  std::string out = "phase,value\n";
  out.reserve(data.samples.size() * 44);
  for (const auto& s : data.samples) {
    out += format_double(s.phase);
    out += ',';
    out += format_double(s.value);
    out += '\n';
  }
  return out;
}

nlohmann::json dataset_sidecar(const TomographyDataset& data) {
  return nlohmann::json{{"seed", data.seed.value},
                        {"source_label", data.source_label},
                        {"scan", {{"kind", to_string(data.scan.kind)}, {"bins", data.scan.bins}}},
                        {"n_samples", data.samples.size()}};
}

void write_dataset(const TomographyDataset& data, const std::filesystem::path& csv_path,
                   const std::filesystem::path& sidecar_path) {
  write_text(csv_path, dataset_csv(data));
  write_text(sidecar_path, dataset_sidecar(data).dump(2) + "\n");
}

TomographyDataset read_dataset(const std::filesystem::path& csv_path,
                               const std::filesystem::path& sidecar_path) {
  const nlohmann::json meta = nlohmann::json::parse(read_text(sidecar_path));
  TomographyDataset data;
  data.seed = Seed{meta.at("seed").get<std::uint64_t>()};
  data.source_label = meta.at("source_label").get<std::string>();
  data.scan.kind = scan_kind_from_string(meta.at("scan").at("kind").get<std::string>());
  data.scan.bins = meta.at("scan").at("bins").get<std::size_t>();

  std::istringstream in(read_text(csv_path));
  std::string line;
  if (!std::getline(in, line) || line != "phase,value") {
    throw std::runtime_error("dataset CSV must start with header 'phase,value'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) + ": missing comma");
    }
    const std::string_view view(line);
    data.samples.push_back(HomodyneSample::canonical(parse_double(view.substr(0, comma), line_no),
                                                     parse_double(view.substr(comma + 1), line_no)));
  }
  if (meta.contains("n_samples") && meta.at("n_samples").get<std::size_t>() != data.samples.size()) {
    throw std::runtime_error("dataset sample count does not match sidecar");
  }
  return data;
}

nlohmann::json grid_to_json(const WignerGrid& grid) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(grid.values.size()));
  for (Eigen::Index i = 0; i < grid.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < grid.values.cols(); ++j) flat.push_back(grid.values(i, j));
  }
  return nlohmann::json{{"x_axis", grid.x_axis},
                        {"p_axis", grid.p_axis},
                        {"shape", {grid.values.rows(), grid.values.cols()}},
                        {"values", flat},
                        {"metadata",
                         {{"cutoff", grid.cutoff},
                          {"sample_count", grid.sample_count},
                          {"method", grid.method}}}};
}

WignerGrid grid_from_json(const nlohmann::json& j) {
  WignerGrid grid;
  grid.x_axis = j.at("x_axis").get<std::vector<double>>();
  grid.p_axis = j.at("p_axis").get<std::vector<double>>();
  const auto flat = j.at("values").get<std::vector<double>>();
  const auto nx = static_cast<Eigen::Index>(grid.x_axis.size());
  const auto np = static_cast<Eigen::Index>(grid.p_axis.size());
  if (static_cast<Eigen::Index>(flat.size()) != nx * np) {
    throw std::runtime_error("grid JSON: values length does not match axes");
  }
  grid.values.resize(nx, np);
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index k = 0; k < np; ++k) grid.values(i, k) = flat[static_cast<std::size_t>(i * np + k)];
  }
  const auto& meta = j.at("metadata");
  grid.cutoff = meta.at("cutoff").get<double>();
  grid.sample_count = meta.at("sample_count").get<std::size_t>();
  grid.method = meta.at("method").get<std::string>();
  return grid;
}

void write_grid_json(const WignerGrid& grid, const std::filesystem::path& path) {
  write_text(path, grid_to_json(grid).dump() + "\n");
}

void write_grid_csv(const WignerGrid& grid, const std::filesystem::path& path) {
  std::string out;
  for (Eigen::Index i = 0; i < grid.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(grid.values(i, j));
    }
    out += '\n';
  }
  write_text(path, out);
}

}  // namespace cvtele
