#include "sva/script.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "sva/numio.hpp"
#include "sva/tokenize.hpp"

namespace sva {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string upper_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

// RFC-style CSV field splitting with double-quote escaping; unquoted fields
// are trimmed.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (true) {
    std::string field;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (i < line.size()) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            ++i;
            break;
          }
        } else {
          field += line[i++];
        }
      }
      while (i < line.size() && line[i] != ',') ++i;
    } else {
      while (i < line.size() && line[i] != ',') field += line[i++];
      field = trim(field);
    }
    fields.push_back(std::move(field));
    if (i >= line.size()) break;
    ++i;  // skip comma
  }
  return fields;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (const char c : text) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

bool is_parenthetical(const std::string& trimmed) {
  return trimmed.size() >= 2 && trimmed.front() == '(' && trimmed.back() == ')';
}

bool is_scene_heading(const std::string& trimmed) {
  return trimmed.rfind("INT.", 0) == 0 || trimmed.rfind("EXT.", 0) == 0;
}

// Remove trailing "(...)" groups, e.g. "JOHN (V.O.)" -> "JOHN".
std::string strip_trailing_parentheticals(std::string s) {
  while (true) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty() || s.back() != ')') break;
    const std::size_t open = s.find_last_of('(');
    if (open == std::string::npos) break;
    s.erase(open);
  }
  return s;
}

bool is_character_cue(const std::string& trimmed) {
  if (trimmed.size() > 40) return false;
  const std::string core = strip_trailing_parentheticals(trimmed);
  if (core.empty() || is_scene_heading(core)) return false;
  bool has_letter = false;
  for (const unsigned char c : core) {
    if (std::isupper(c)) {
      has_letter = true;
    } else if (std::isdigit(c) == 0 && c != ' ' && c != '.' && c != '\'' && c != '-') {
      return false;
    }
  }
  return has_letter;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

int parse_index_field(const std::string& text, const char* what) {
  long value = 0;
  try {
    value = parse_long(text);
  } catch (const ValidationError&) {
    throw ValidationError(std::string("parse error: non-integer ") + what + " '" + text + "'");
  }
  if (value < 0) {
    throw ValidationError(std::string("parse error: negative ") + what + " '" + text + "'");
  }
  return static_cast<int>(value);
}

}  // namespace

ViolenceLabel label_from_string(std::string_view text) {
  const std::string up = upper_ascii(trim(text));
  if (up == "LOW") return ViolenceLabel::Low;
  if (up == "MED") return ViolenceLabel::Med;
  if (up == "HIGH") return ViolenceLabel::High;
  throw ValidationError("unknown-label: '" + std::string(text) +
                        "' is not one of LOW, MED, HIGH");
}

std::string_view to_string(ViolenceLabel label) {
  switch (label) {
    case ViolenceLabel::Low: return "LOW";
    case ViolenceLabel::Med: return "MED";
    case ViolenceLabel::High: return "HIGH";
  }
  return "LOW";
}

Gender gender_from_string(std::string_view text, bool* known) {
  const std::string up = upper_ascii(trim(text));
  if (known != nullptr) *known = true;
  if (up == "FEMALE") return Gender::Female;
  if (up == "MALE") return Gender::Male;
  if (up == "UNKNOWN") return Gender::Unknown;
  if (known != nullptr) *known = false;
  return Gender::Unknown;
}

std::string_view to_string(Gender gender) {
  switch (gender) {
    case Gender::Female: return "FEMALE";
    case Gender::Male: return "MALE";
    case Gender::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

Race race_from_string(std::string_view text, bool* known) {
  const std::string up = upper_ascii(trim(text));
  if (known != nullptr) *known = true;
  if (up == "WHITE") return Race::White;
  if (up == "BLACK") return Race::Black;
  if (up == "LATINO") return Race::Latino;
  if (up == "ASIAN") return Race::Asian;
  if (up == "MIXED") return Race::Mixed;
  if (up == "OTHER") return Race::Other;
  if (up == "UNKNOWN") return Race::Unknown;
  if (known != nullptr) *known = false;
  return Race::Unknown;
}

std::string_view to_string(Race race) {
  switch (race) {
    case Race::White: return "WHITE";
    case Race::Black: return "BLACK";
    case Race::Latino: return "LATINO";
    case Race::Asian: return "ASIAN";
    case Race::Mixed: return "MIXED";
    case Race::Other: return "OTHER";
    case Race::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::string normalize_speaker(std::string_view cue) {
  std::string core = strip_trailing_parentheticals(std::string(cue));
  std::string out;
  bool pending_space = false;
  for (const unsigned char c : core) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += static_cast<char>(std::toupper(c));
    }
  }
  return out;
}

Screenplay parse_screenplay(std::string_view raw_text, std::string movie_id) {
  if (trim(raw_text).empty()) {
    throw ValidationError("empty-screenplay: movie '" + movie_id + "' has no text");
  }

  Screenplay play;
  play.movie_id = std::move(movie_id);

  std::optional<std::string> speaker;
  std::vector<std::string> block;

  const auto commit = [&]() {
    if (speaker.has_value() && !block.empty()) {
      std::string text;
      for (const std::string& part : block) {
        if (!text.empty()) text += ' ';
        text += part;
      }
      Utterance utt;
      utt.movie_id = play.movie_id;
      utt.index = static_cast<int>(play.utterances.size());
      utt.speaker_id = *speaker;
      utt.text = std::move(text);
      utt.tokens = tokenize(utt.text);
      play.utterances.push_back(std::move(utt));
    }
    block.clear();
  };

  std::istringstream stream{std::string(raw_text)};
  std::string raw_line;
  int line_no = 0;
  while (std::getline(stream, raw_line)) {
    ++line_no;
    const std::string line = strip_cr(raw_line);
    if (is_blank(line)) {
      commit();
      speaker.reset();
      continue;
    }
    const std::string trimmed = trim(line);
    if (speaker.has_value()) {
      if (!is_parenthetical(trimmed)) block.push_back(trimmed);
      continue;
    }
    if (is_scene_heading(trimmed)) continue;
    if (is_character_cue(trimmed)) {
      speaker = normalize_speaker(trimmed);
      block.clear();
      continue;
    }
    if (is_parenthetical(trimmed)) {
      throw ValidationError("malformed-script: dialogue block with no preceding character cue at line " +
                            std::to_string(line_no));
    }
    // action line; ignored
  }
  commit();
  return play;
}

std::map<std::string, ManifestEntry> load_manifest(std::istream& rows) {
  std::string line;
  if (!std::getline(rows, line)) {
    throw ValidationError("manifest: empty file");
  }
  if (upper_ascii(trim(strip_cr(line))) != "MOVIE_ID,TITLE,GENRES,VIOLENCE_LABEL") {
    throw ValidationError("manifest: expected header movie_id,title,genres,violence_label");
  }
  std::map<std::string, ManifestEntry> manifest;
  int line_no = 1;
  while (std::getline(rows, line)) {
    ++line_no;
    line = strip_cr(line);
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 4) {
      throw ValidationError("manifest: expected 4 fields at line " + std::to_string(line_no));
    }
    const std::string& movie_id = fields[0];
    if (movie_id.empty()) {
      throw ValidationError("manifest: empty movie_id at line " + std::to_string(line_no));
    }
    ManifestEntry entry;
    entry.title = fields[1];
    for (const std::string& genre : split_on(fields[2], '|')) {
      const std::string g = trim(genre);
      if (!g.empty()) entry.genres.insert(g);
    }
    if (!trim(fields[3]).empty()) entry.violence_label = label_from_string(fields[3]);
    if (!manifest.emplace(movie_id, std::move(entry)).second) {
      throw ValidationError("manifest: duplicate movie_id '" + movie_id + "' at line " +
                            std::to_string(line_no));
    }
  }
  return manifest;
}

DemographicsFile load_demographics(std::istream& rows) {
  std::string line;
  if (!std::getline(rows, line)) {
    throw ValidationError("demographics: empty file");
  }
  if (upper_ascii(trim(strip_cr(line))) != "MOVIE_ID,CHARACTER_ID,GENDER,RACE") {
    throw ValidationError("demographics: expected header movie_id,character_id,gender,race");
  }
  DemographicsFile result;
  std::set<std::pair<std::string, std::string>> seen;
  int line_no = 1;
  while (std::getline(rows, line)) {
    ++line_no;
    line = strip_cr(line);
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 4) {
      throw ValidationError("demographics: expected 4 fields at line " + std::to_string(line_no));
    }
    DemographicRecord record;
    record.movie_id = fields[0];
    record.character_id = fields[1];
    if (record.movie_id.empty() || record.character_id.empty()) {
      throw ValidationError("demographics: empty id at line " + std::to_string(line_no));
    }
    bool known = true;
    record.gender = gender_from_string(fields[2], &known);
    if (!known) ++result.unknown_value_warnings;
    record.race = race_from_string(fields[3], &known);
    if (!known) ++result.unknown_value_warnings;
    if (!seen.emplace(record.movie_id, record.character_id).second) {
      throw ValidationError("demographics: duplicate character '" + record.character_id +
                            "' in movie '" + record.movie_id + "' at line " +
                            std::to_string(line_no));
    }
    result.records.push_back(std::move(record));
  }
  return result;
}

DemographicsIndex index_demographics(const std::vector<DemographicRecord>& records) {
  DemographicsIndex index;
  for (const DemographicRecord& record : records) {
    index.emplace(std::make_pair(record.movie_id, record.character_id), record);
  }
  return index;
}

std::vector<ParsedSentence> load_conllu(std::istream& stream) {
  std::vector<ParsedSentence> sentences;
  std::optional<std::string> movie_id;
  std::optional<int> utt_index;
  std::vector<ParsedToken> tokens;
  int sentence_start_line = 0;

  const auto finalize = [&](int line_no) {
    if (tokens.empty()) {
      movie_id.reset();
      utt_index.reset();
      return;
    }
    if (!movie_id.has_value() || !utt_index.has_value()) {
      throw ValidationError(
          "unaligned-sentence: sentence starting at line " + std::to_string(sentence_start_line) +
          " lacks # movie_id / # utt_index comments");
    }
    for (const ParsedToken& token : tokens) {
      if (token.head < 0 || token.head > static_cast<int>(tokens.size())) {
        throw ValidationError("parse error: head " + std::to_string(token.head) +
                              " out of range in sentence ending at line " + std::to_string(line_no));
      }
    }
    const auto roots = std::count_if(tokens.begin(), tokens.end(),
                                     [](const ParsedToken& t) { return t.head == 0; });
    if (roots != 1) {
      throw ValidationError("parse error: expected exactly one root, found " +
                            std::to_string(roots) + " in sentence ending at line " +
                            std::to_string(line_no));
    }
    ParsedSentence sentence;
    sentence.movie_id = *movie_id;
    sentence.utt_index = *utt_index;
    sentence.tokens = std::move(tokens);
    sentences.push_back(std::move(sentence));
    tokens.clear();
    movie_id.reset();
    utt_index.reset();
  };

  std::string raw_line;
  int line_no = 0;
  while (std::getline(stream, raw_line)) {
    ++line_no;
    const std::string line = strip_cr(raw_line);
    if (trim(line).empty()) {
      finalize(line_no);
      continue;
    }
    if (tokens.empty() && !movie_id.has_value() && !utt_index.has_value()) {
      sentence_start_line = line_no;
    }
    if (line[0] == '#') {
      const std::size_t eq = line.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(line.substr(1, eq - 1));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "movie_id") {
          movie_id = value;
        } else if (key == "utt_index") {
          utt_index = parse_index_field(value, "utt_index");
        }
      }
      continue;
    }
    const std::vector<std::string> fields = split_on(line, '\t');
    if (fields.size() != 10) {
      throw ValidationError("parse error: expected 10 tab-separated columns at line " +
                            std::to_string(line_no) + ", found " +
                            std::to_string(fields.size()));
    }
    // multiword-token ranges (1-2) and empty nodes (1.1) carry no tree edges
    if (fields[0].find('-') != std::string::npos || fields[0].find('.') != std::string::npos) {
      continue;
    }
    const int id = parse_index_field(fields[0], "token id");
    if (id != static_cast<int>(tokens.size()) + 1) {
      throw ValidationError("parse error: token id " + std::to_string(id) +
                            " out of sequence at line " + std::to_string(line_no));
    }
    ParsedToken token;
    token.surface = fields[1];
    token.lemma = fields[2];
    token.upos = fields[3];
    token.head = parse_index_field(fields[6], "head");
    token.deprel = fields[7];
    if (fields[9] != "_") {
      for (const std::string& part : split_on(fields[9], '|')) {
        const std::size_t eq = part.find('=');
        if (eq == std::string::npos) {
          token.misc.emplace(part, "");
        } else {
          token.misc.emplace(part.substr(0, eq), part.substr(eq + 1));
        }
      }
    }
    tokens.push_back(std::move(token));
  }
  finalize(line_no);
  return sentences;
}

void write_dataset(std::ostream& out, const std::vector<Screenplay>& movies) {
  for (const Screenplay& movie : movies) {
    for (const Utterance& utt : movie.utterances) {
      nlohmann::ordered_json record;
      record["movie_id"] = utt.movie_id;
      record["index"] = utt.index;
      record["speaker_id"] = utt.speaker_id;
      record["text"] = utt.text;
      out << record.dump() << '\n';
    }
  }
}

std::vector<Screenplay> read_dataset(std::istream& in) {
  std::vector<Screenplay> movies;
  std::map<std::string, std::size_t> by_id;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(strip_cr(line)).empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("dataset: bad JSON at line " + std::to_string(line_no) + ": " +
                            e.what());
    }
    if (!record.is_object() || !record.contains("movie_id") || !record.contains("index") ||
        !record.contains("speaker_id") || !record.contains("text")) {
      throw ValidationError("dataset: missing field at line " + std::to_string(line_no));
    }
    Utterance utt;
    utt.movie_id = record.at("movie_id").get<std::string>();
    utt.index = record.at("index").get<int>();
    utt.speaker_id = record.at("speaker_id").get<std::string>();
    utt.text = record.at("text").get<std::string>();
    utt.tokens = tokenize(utt.text);
    if (utt.movie_id.empty() || utt.speaker_id.empty() || utt.text.empty()) {
      throw ValidationError("dataset: empty field at line " + std::to_string(line_no));
    }
    auto [it, inserted] = by_id.emplace(utt.movie_id, movies.size());
    if (inserted) {
      Screenplay play;
      play.movie_id = utt.movie_id;
      movies.push_back(std::move(play));
    }
    Screenplay& movie = movies[it->second];
    if (utt.index != static_cast<int>(movie.utterances.size())) {
      throw ValidationError("dataset: non-consecutive utterance index " +
                            std::to_string(utt.index) + " for movie '" + utt.movie_id +
                            "' at line " + std::to_string(line_no));
    }
    movie.utterances.push_back(std::move(utt));
  }
  return movies;
}

}  // namespace sva
