#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sva/neural.hpp"
#include "sva/numio.hpp"

namespace sva {

namespace {

constexpr int kFormatVersion = 1;

std::string expect_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(std::string("model: truncated file, expected ") + what);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

long header_value(const std::string& line, const std::string& key) {
  const std::string prefix = key + "=";
  if (line.rfind(prefix, 0) != 0) {
    throw ValidationError("model: expected header '" + key + "=...', found '" + line + "'");
  }
  return parse_long(line.substr(prefix.size()), key.c_str());
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> parts;
  std::istringstream stream(line);
  std::string part;
  while (stream >> part) parts.push_back(std::move(part));
  return parts;
}

}  // namespace

void save_model(std::ostream& out, const ModelParams& m) {
  out << "format=" << kFormatVersion << '\n';
  out << "D=" << m.input_dim() << '\n';
  out << "H=" << m.hidden_dim() << '\n';
  out << "A=" << m.attn_dim() << '\n';
  out << "G=" << m.genre_dim() << '\n';
  out << "seed=" << m.rng_seed << '\n';
  for (const ConstTensorRef& tensor : tensors(m)) {
    out << tensor.name << ' ' << tensor.values.rows() << ' ' << tensor.values.cols() << '\n';
    for (Eigen::Index r = 0; r < tensor.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.values.cols(); ++c) {
        if (c > 0) out << ' ';
        out << format_double(tensor.values(r, c));
      }
      out << '\n';
    }
  }
}

ModelParams load_model(std::istream& in) {
  const long format = header_value(expect_line(in, "format"), "format");
  if (format != kFormatVersion) {
    throw ValidationError("model: version-mismatch, file format " + std::to_string(format) +
                          " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  }
  const long input_dim = header_value(expect_line(in, "D"), "D");
  const long hidden_dim = header_value(expect_line(in, "H"), "H");
  const long attn_dim = header_value(expect_line(in, "A"), "A");
  const long genre_dim = header_value(expect_line(in, "G"), "G");

  const std::string seed_line = expect_line(in, "seed");
  if (seed_line.rfind("seed=", 0) != 0) {
    throw ValidationError("model: expected header 'seed=...', found '" + seed_line + "'");
  }
  std::uint64_t seed = 0;
  {
    const std::string text = seed_line.substr(5);
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ValidationError("model: invalid seed '" + text + "'");
    }
  }
  if (input_dim <= 0 || hidden_dim <= 0 || attn_dim <= 0 || genre_dim < 0) {
    throw ValidationError("model: invalid dimensions in header");
  }

  ModelParams m = ModelParams::zeros_like(ModelParams::init(
      static_cast<int>(input_dim), static_cast<int>(hidden_dim), static_cast<int>(attn_dim),
      static_cast<int>(genre_dim), 0));
  m.rng_seed = seed;

  for (TensorRef tensor : tensors(m)) {
    const std::string section = expect_line(in, "tensor header");
    const std::vector<std::string> header = split_ws(section);
    if (header.size() != 3 || header[0] != tensor.name) {
      throw ValidationError(std::string("model: expected tensor '") + tensor.name +
                            "', found '" + section + "'");
    }
    const long rows = parse_long(header[1], "tensor rows");
    const long cols = parse_long(header[2], "tensor cols");
    if (rows != tensor.values.rows() || cols != tensor.values.cols()) {
      throw ValidationError(std::string("model: tensor '") + tensor.name + "' has shape " +
                            header[1] + "x" + header[2] + ", expected " +
                            std::to_string(tensor.values.rows()) + "x" +
                            std::to_string(tensor.values.cols()));
    }
    for (long r = 0; r < rows; ++r) {
      const std::string row_line = expect_line(in, "tensor row");
      const std::vector<std::string> values = split_ws(row_line);
      if (values.size() != static_cast<std::size_t>(cols)) {
        throw ValidationError(std::string("model: truncated row in tensor '") + tensor.name +
                              "'");
      }
      for (long c = 0; c < cols; ++c) {
        tensor.values(r, c) = parse_double(values[static_cast<std::size_t>(c)], "tensor value");
      }
    }
  }

  std::string trailing;
  while (std::getline(in, trailing)) {
    if (!trailing.empty() && trailing.back() == '\r') trailing.pop_back();
    if (!trailing.empty()) {
      throw ValidationError("model: unexpected trailing content '" + trailing + "'");
    }
  }
  return m;
}

void save_model_file(const std::string& path, const ModelParams& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  save_model(out, m);
  if (!out) throw IoError("failed while writing model file '" + path + "'");
}

ModelParams load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read model file '" + path + "'");
  return load_model(in);
}

}  // namespace sva
