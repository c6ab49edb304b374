#include "psc/dataio.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "psc/error.hpp"
#include "psc/rng.hpp"

namespace psc {
namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError("line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

bool parse_int(const std::string& text, std::int64_t& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec == std::errc() && ptr == t.data() + t.size()) return true;
  // Accept integral reals such as "2.0".
  double v = 0.0;
  if (parse_double(t, v) && v == std::floor(v) && std::abs(v) < 9.0e15) {
    out = static_cast<std::int64_t>(v);
    return true;
  }
  return false;
}

std::ifstream open_or_throw(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return in;
}

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw ParseError("'" + path.string() + "': truncated IDX header");
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::vector<unsigned char> read_payload(std::istream& in, std::size_t bytes,
                                        const std::filesystem::path& path) {
  std::vector<unsigned char> payload(bytes);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw ParseError("'" + path.string() + "': truncated IDX payload, expected " +
                     std::to_string(bytes) + " bytes, got " + std::to_string(in.gcount()));
  }
  return payload;
}

}  // namespace

LabeledData load_csv(const std::filesystem::path& path,
                     const std::optional<std::string>& label_column) {
  auto in = open_or_throw(path, std::ios::in);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path.string() + "': missing header row");
  const auto header = split_csv_line(line, 1);
  std::optional<std::size_t> label_idx;
  if (label_column) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (trim(header[j]) == *label_column) label_idx = j;
    if (!label_idx) {
      throw ParseError("'" + path.string() + "': label column '" + *label_column +
                       "' not found in header");
    }
  }
  const std::size_t width = header.size() - (label_idx ? 1 : 0);
  if (width == 0) throw ParseError("'" + path.string() + "': no feature columns");

  std::vector<double> values;
  LabelVector labels;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() != header.size()) {
      throw ParseError("'" + path.string() + "' line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (label_idx && j == *label_idx) {
        std::int64_t id = 0;
        if (!parse_int(fields[j], id) || id < 0) {
          throw ParseError("'" + path.string() + "' row " + std::to_string(rows + 1) +
                           ", column '" + trim(header[j]) + "': label '" + fields[j] +
                           "' is not a non-negative integer");
        }
        labels.push_back(id);
        continue;
      }
      double v = 0.0;
      if (!parse_double(fields[j], v)) {
        throw ParseError("'" + path.string() + "' row " + std::to_string(rows + 1) +
                         ", column " + std::to_string(j + 1) + " ('" + trim(header[j]) +
                         "'): cannot parse '" + fields[j] + "' as a finite number");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("'" + path.string() + "': no data rows");
  LabeledData out{Matrix(rows, width, std::move(values)), std::nullopt};
  if (label_idx) out.labels = std::move(labels);
  return out;
}

Matrix load_idx(const std::filesystem::path& path) {
  auto in = open_or_throw(path, std::ios::binary);
  const std::uint32_t magic = read_be32(in, path);
  if (magic != 0x00000803) {
    std::ostringstream msg;
    msg << "'" << path.string() << "': bad IDX image magic 0x" << std::hex << magic
        << " (expected 0x00000803)";
    throw ParseError(msg.str());
  }
  const std::size_t count = read_be32(in, path);
  const std::size_t h = read_be32(in, path);
  const std::size_t w = read_be32(in, path);
  if (count == 0 || h == 0 || w == 0) throw ParseError("'" + path.string() + "': empty IDX file");
  const auto payload = read_payload(in, count * h * w, path);
  Matrix out(count, h * w);
  for (std::size_t i = 0; i < payload.size(); ++i) out.data()[i] = payload[i] / 255.0;
  return out;
}

LabelVector load_idx_labels(const std::filesystem::path& path) {
  auto in = open_or_throw(path, std::ios::binary);
  const std::uint32_t magic = read_be32(in, path);
  if (magic != 0x00000801) {
    throw ParseError("'" + path.string() + "': bad IDX label magic (expected 0x00000801)");
  }
  const std::size_t count = read_be32(in, path);
  const auto payload = read_payload(in, count, path);
  return LabelVector(payload.begin(), payload.end());
}

LabeledData gen_circles(std::size_t n, double radius_inner, double radius_outer,
                        double noise_std, std::uint64_t seed) {
  if (n < 2) throw ConfigError("gen_circles needs n >= 2");
  if (!(radius_inner > 0.0) || !(radius_inner < radius_outer)) {
    throw ConfigError("gen_circles needs 0 < radius_inner < radius_outer");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("gen_circles needs noise_std >= 0");
  SplitMix64 rng(seed);
  Matrix data(n, 2);
  LabelVector labels(n);
  const std::size_t inner = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const bool is_inner = i < inner;
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    double r = is_inner ? radius_inner : radius_outer;
    if (noise_std > 0.0) r += noise_std * rng.normal();
    data(i, 0) = r * std::cos(angle);
    data(i, 1) = r * std::sin(angle);
    labels[i] = is_inner ? 0 : 1;
  }
  return {std::move(data), std::move(labels)};
}

LabeledData gen_blobs(std::size_t n, std::size_t dim, std::size_t centers, double cluster_std,
                      double center_box, std::uint64_t seed) {
  if (n == 0 || dim == 0 || centers == 0) throw ConfigError("gen_blobs needs n, dim, centers >= 1");
  if (!(cluster_std >= 0.0) || !(center_box > 0.0)) {
    throw ConfigError("gen_blobs needs cluster_std >= 0 and center_box > 0");
  }
  SplitMix64 rng(seed);
  Matrix c(centers, dim);
  for (double& v : c.values()) v = (2.0 * rng.uniform() - 1.0) * center_box;
  Matrix data(n, dim);
  LabelVector labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t which = i % centers;
    labels[i] = static_cast<std::int64_t>(which);
    for (std::size_t j = 0; j < dim; ++j) data(i, j) = c(which, j) + cluster_std * rng.normal();
  }
  return {std::move(data), std::move(labels)};
}

Matrix ScalerParams::apply(const Matrix& data) const {
  if (data.cols() != mean.size()) {
    throw ShapeError("scaler fitted on " + std::to_string(mean.size()) + " columns applied to " +
                     std::to_string(data.cols()));
  }
  Matrix out(data.rows(), data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t j = 0; j < data.cols(); ++j) out(i, j) = (data(i, j) - mean[j]) / std[j];
  return out;
}

Matrix ScalerParams::inverse(const Matrix& data) const {
  if (data.cols() != mean.size()) {
    throw ShapeError("scaler fitted on " + std::to_string(mean.size()) + " columns inverted on " +
                     std::to_string(data.cols()));
  }
  Matrix out(data.rows(), data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t j = 0; j < data.cols(); ++j) out(i, j) = data(i, j) * std[j] + mean[j];
  return out;
}

Standardized standardize(const Matrix& data) {
  if (data.rows() < 2) throw ConfigError("standardize needs at least 2 rows");
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  ScalerParams params{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += data(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    bool constant = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = data(i, j) - mean;
      ss += diff * diff;
      constant = constant && data(i, j) == data(0, j);
    }
    params.mean[j] = constant ? data(0, j) : mean;
    const double sd = std::sqrt(ss / static_cast<double>(n));
    params.std[j] = (constant || sd == 0.0) ? 1.0 : sd;
  }
  return {params.apply(data), std::move(params)};
}

void write_labels_csv(const std::filesystem::path& path, const std::vector<std::int64_t>& labels,
                      const std::string& header) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << header << '\n';
  for (auto id : labels) out << id << '\n';
  if (!out) throw ParseError("write to '" + path.string() + "' failed");
}

LabelVector read_labels_csv(const std::filesystem::path& path,
                            const std::optional<std::string>& column) {
  auto in = open_or_throw(path, std::ios::in);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path.string() + "': missing header row");
  const auto header = split_csv_line(line, 1);
  std::size_t idx = 0;
  if (column) {
    bool found = false;
    for (std::size_t j = 0; j < header.size(); ++j)
      if (trim(header[j]) == *column) {
        idx = j;
        found = true;
      }
    if (!found) throw ParseError("'" + path.string() + "': column '" + *column + "' not found");
  } else if (header.size() != 1) {
    throw ParseError("'" + path.string() + "': several columns; name the label column");
  }
  LabelVector labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() != header.size()) {
      throw ParseError("'" + path.string() + "' line " + std::to_string(line_no) +
                       ": ragged row");
    }
    std::int64_t id = 0;
    if (!parse_int(fields[idx], id) || id < 0) {
      throw ParseError("'" + path.string() + "' line " + std::to_string(line_no) + ": label '" +
                       fields[idx] + "' is not a non-negative integer");
    }
    labels.push_back(id);
  }
  return labels;
}

void write_csv(const std::filesystem::path& path, const Matrix& data,
               const std::optional<LabelVector>& labels) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  for (std::size_t j = 0; j < data.cols(); ++j) out << (j ? "," : "") << 'x' << j;
  if (labels) out << ",label";
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) out << (j ? "," : "") << data(i, j);
    if (labels) out << ',' << (*labels)[i];
    out << '\n';
  }
  if (!out) throw ParseError("write to '" + path.string() + "' failed");
}

}  // namespace psc
