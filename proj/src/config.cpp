#include "sva/config.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>

#include "sva/numio.hpp"

namespace sva {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

int positive_int(std::string_view value, const char* what) {
  const long v = parse_long(value, what);
  if (v < 1) {
    throw ValidationError(std::string("config: ") + what + " must be >= 1, got " +
                          std::string(value));
  }
  return static_cast<int>(v);
}

}  // namespace

void apply_config_entry(RunConfig& cfg, std::string_view key, std::string_view value) {
  const std::string k = trim(key);
  const std::string v = trim(value);
  if (k == "scripts_dir") {
    cfg.scripts_dir = v;
  } else if (k == "manifest") {
    cfg.manifest = v;
  } else if (k == "demographics") {
    cfg.demographics = v;
  } else if (k == "embeddings") {
    cfg.embeddings = v;
  } else if (k == "sentiment") {
    cfg.sentiment = v;
  } else if (k == "parses") {
    cfg.parses = v;
  } else if (k == "genres") {
    cfg.genres = v;
  } else if (k == "out_dir") {
    cfg.out_dir = v;
  } else if (k == "log_level") {
    if (v != "debug" && v != "info" && v != "warning" && v != "error") {
      throw ValidationError("config: log_level must be debug, info, warning or error");
    }
    cfg.log_level = v;
  } else if (k == "sentiment_dim") {
    cfg.sentiment_dim = positive_int(v, "sentiment_dim");
  } else if (k == "ngram_order") {
    cfg.ngram_order = positive_int(v, "ngram_order");
  } else if (k == "learning_rate") {
    cfg.train.learning_rate = parse_double(v, "learning_rate");
    if (cfg.train.learning_rate <= 0.0) {
      throw ValidationError("config: learning_rate must be > 0");
    }
  } else if (k == "batch_size") {
    cfg.train.batch_size = positive_int(v, "batch_size");
  } else if (k == "dropout_keep") {
    cfg.train.dropout_keep = parse_double(v, "dropout_keep");
    if (cfg.train.dropout_keep <= 0.0 || cfg.train.dropout_keep > 1.0) {
      throw ValidationError("config: dropout_keep must be in (0, 1]");
    }
  } else if (k == "convergence_delta") {
    cfg.train.convergence_delta = parse_double(v, "convergence_delta");
    if (cfg.train.convergence_delta <= 0.0) {
      throw ValidationError("config: convergence_delta must be > 0");
    }
  } else if (k == "max_epochs") {
    cfg.train.max_epochs = positive_int(v, "max_epochs");
  } else if (k == "folds") {
    cfg.train.folds = positive_int(v, "folds");
    if (cfg.train.folds < 2) {
      throw ValidationError("config: folds must be >= 2");
    }
  } else if (k == "hidden_grid") {
    std::vector<int> grid;
    std::string part;
    std::istringstream stream(v);
    while (std::getline(stream, part, ',')) {
      const std::string p = trim(part);
      if (!p.empty()) grid.push_back(positive_int(p, "hidden size"));
    }
    if (grid.empty()) {
      throw ValidationError("config: hidden_grid must list at least one size");
    }
    cfg.train.hidden_grid = std::move(grid);
  } else if (k == "k") {
    const long parsed = parse_long(v, "k");
    if (parsed < 2 || parsed % 2 != 0) {
      throw ValidationError("odd-k: k must be a positive even number, got " + v);
    }
    cfg.train.k = static_cast<int>(parsed);
  } else if (k == "seed") {
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
      throw ValidationError("config: invalid seed '" + v + "'");
    }
    cfg.train.seed = seed;
  } else if (k == "attention_dim") {
    cfg.train.attention_dim = positive_int(v, "attention_dim");
  } else if (k == "grouping") {
    cfg.grouping = grouping_from_string(v);
  } else {
    throw ValidationError("config: unknown key '" + k + "'");
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config: expected key=value at line " + std::to_string(line_no));
    }
    apply_config_entry(cfg, stripped.substr(0, eq), stripped.substr(eq + 1));
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  return parse_config(in);
}

}  // namespace sva
