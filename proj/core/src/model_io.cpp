#include <openssl/evp.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "psc/bench.hpp"
#include "psc/error.hpp"
#include "psc/psc.hpp"

namespace psc {
namespace {

static_assert(std::endian::native == std::endian::little,
              "model blobs are written as little-endian IEEE-754");

constexpr std::string_view kMagic = "psc-model";

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double_field(const std::string& text, const std::string& key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("model field '" + key + "': bad number '" + text + "'");
  }
  return v;
}

std::uint64_t parse_uint_field(const std::string& text, const std::string& key) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("model field '" + key + "': bad integer '" + text + "'");
  }
  return v;
}

std::string base64_encode(std::span<const double> values) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
  const std::size_t n = values.size() * sizeof(double);
  std::string out(4 * ((n + 2) / 3), '\0');
  const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes,
                                      static_cast<int>(n));
  out.resize(static_cast<std::size_t>(written));
  return out;
}

std::vector<double> base64_decode(const std::string& text, std::size_t count,
                                  const std::string& name) {
  if (text.size() % 4 != 0) throw FormatError("blob '" + name + "': malformed base64");
  std::vector<unsigned char> raw(3 * text.size() / 4 + 1);
  const int len = EVP_DecodeBlock(raw.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
  if (len < 0) throw FormatError("blob '" + name + "': malformed base64");
  // EVP_DecodeBlock keeps padding bytes in its length.
  std::size_t padding = 0;
  if (!text.empty() && text.back() == '=') padding = text[text.size() - 2] == '=' ? 2 : 1;
  const std::size_t bytes = static_cast<std::size_t>(len) - padding;
  if (bytes != count * sizeof(double)) {
    throw FormatError("blob '" + name + "': expected " + std::to_string(count) +
                      " values, decoded " + std::to_string(bytes) + " bytes");
  }
  std::vector<double> out(count);
  std::memcpy(out.data(), raw.data(), bytes);
  return out;
}

struct Reader {
  std::istringstream in;
  std::size_t line_no = 0;

  std::vector<std::string> next(const char* expected_key) {
    std::string line;
    if (!std::getline(in, line)) {
      throw FormatError(std::string("model truncated: expected '") + expected_key + "'");
    }
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> out;
    for (std::string f; fields >> f;) out.push_back(f);
    if (out.empty() || out[0] != expected_key) {
      throw FormatError("model line " + std::to_string(line_no) + ": expected '" +
                        expected_key + "'");
    }
    return out;
  }

  std::string value(const char* key) {
    auto f = next(key);
    if (f.size() != 2) throw FormatError(std::string("model field '") + key + "' malformed");
    return f[1];
  }

  std::vector<double> blob(const std::string& name, std::size_t count) {
    auto f = next("blob");
    if (f.size() != 4 || f[1] != name || parse_uint_field(f[2], name) != count) {
      throw FormatError("model line " + std::to_string(line_no) + ": expected blob '" + name +
                        "' with " + std::to_string(count) + " values");
    }
    return base64_decode(f[3], count, name);
  }
};

}  // namespace

std::string serialize_model(const PscModel& model) {
  model.validate();
  std::ostringstream out;
  const auto& cfg = model.regressor.config();
  out << kMagic << '\n';
  out << "format_version " << kModelFormatVersion << '\n';
  out << "d " << model.d << '\n';
  out << "p " << model.p << '\n';
  out << "sigma " << format_double(model.sigma) << '\n';
  out << "sample_rate " << format_double(model.sample_rate) << '\n';
  out << "sample_size " << model.sample_size << '\n';
  out << "train_seed " << model.train_seed << '\n';
  out << "final_train_mse " << format_double(model.final_train_mse) << '\n';
  out << "layers " << cfg.layer_count() << '\n';
  for (std::size_t l = 0; l < cfg.layer_count(); ++l) {
    out << "layer " << l << ' ' << cfg.widths[l] << ' ' << cfg.widths[l + 1] << ' '
        << to_string(cfg.activations[l]) << '\n';
  }
  out << "scaler " << (model.scaler ? 1 : 0) << '\n';
  const auto& layers = model.regressor.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    out << "blob weights" << l << ' ' << layers[l].weights.size() << ' '
        << base64_encode(layers[l].weights.values()) << '\n';
    out << "blob bias" << l << ' ' << layers[l].bias.size() << ' '
        << base64_encode(layers[l].bias) << '\n';
  }
  if (model.scaler) {
    out << "blob scaler_mean " << model.d << ' ' << base64_encode(model.scaler->mean) << '\n';
    out << "blob scaler_std " << model.d << ' ' << base64_encode(model.scaler->std) << '\n';
  }
  std::string body = out.str();
  body += "checksum sha256 " + sha256_hex(body.data(), body.size()) + '\n';
  return body;
}

PscModel parse_model(const std::string& text) {
  Reader r{std::istringstream(text)};
  std::string first;
  if (!std::getline(r.in, first) || first != kMagic) {
    throw FormatError("not a PSC model file (missing 'psc-model' header)");
  }
  ++r.line_no;
  const auto version = parse_uint_field(r.value("format_version"), "format_version");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
  }

  const auto tag = text.rfind("checksum sha256 ");
  if (tag == std::string::npos || (tag > 0 && text[tag - 1] != '\n')) {
    throw FormatError("model file has no checksum line");
  }
  std::string stored = text.substr(tag + 16);
  while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
  if (stored != sha256_hex(text.data(), tag)) {
    throw FormatError("model checksum mismatch: file is corrupted");
  }

  PscModel m;
  m.format_version = static_cast<std::uint32_t>(version);
  m.d = parse_uint_field(r.value("d"), "d");
  m.p = parse_uint_field(r.value("p"), "p");
  m.sigma = parse_double_field(r.value("sigma"), "sigma");
  m.sample_rate = parse_double_field(r.value("sample_rate"), "sample_rate");
  m.sample_size = parse_uint_field(r.value("sample_size"), "sample_size");
  m.train_seed = parse_uint_field(r.value("train_seed"), "train_seed");
  m.final_train_mse = parse_double_field(r.value("final_train_mse"), "final_train_mse");
  const auto layer_count = parse_uint_field(r.value("layers"), "layers");
  if (layer_count == 0 || layer_count > 1024) throw FormatError("implausible layer count");
  MlpConfig cfg;
  for (std::size_t l = 0; l < layer_count; ++l) {
    auto f = r.next("layer");
    if (f.size() != 5 || parse_uint_field(f[1], "layer") != l) {
      throw FormatError("model line " + std::to_string(r.line_no) + ": malformed layer");
    }
    const auto in = parse_uint_field(f[2], "layer");
    const auto out = parse_uint_field(f[3], "layer");
    if (l == 0) cfg.widths.push_back(in);
    if (cfg.widths.back() != in) throw FormatError("layer widths do not chain");
    cfg.widths.push_back(out);
    try {
      cfg.activations.push_back(activation_from_string(f[4]));
    } catch (const ConfigError& e) {
      throw FormatError(e.what());
    }
  }
  const auto has_scaler = parse_uint_field(r.value("scaler"), "scaler");
  try {
    m.regressor = Mlp(cfg);
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
  auto& layers = m.regressor.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto w = r.blob("weights" + std::to_string(l), layers[l].weights.size());
    layers[l].weights = Matrix(layers[l].weights.rows(), layers[l].weights.cols(), std::move(w));
    layers[l].bias = r.blob("bias" + std::to_string(l), layers[l].bias.size());
  }
  if (has_scaler == 1) {
    ScalerParams sp;
    sp.mean = r.blob("scaler_mean", m.d);
    sp.std = r.blob("scaler_std", m.d);
    m.scaler = std::move(sp);
  } else if (has_scaler != 0) {
    throw FormatError("model field 'scaler' must be 0 or 1");
  }
  r.next("checksum");
  m.validate();
  return m;
}

void save_model(const PscModel& model, const std::filesystem::path& path) {
  const std::string text = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write model file '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ParseError("writing model file '" + path.string() + "' failed");
}

PscModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace psc
