#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sva/errors.hpp"

namespace sva {

// Movie-level violence rating. Severity order Low < Med < High; ties in
// classifier argmaxes break toward the lower severity.
enum class ViolenceLabel { Low, Med, High };

enum class Gender { Female, Male, Unknown };
enum class Race { White, Black, Latino, Asian, Mixed, Other, Unknown };

ViolenceLabel label_from_string(std::string_view text);  // case-insensitive
std::string_view to_string(ViolenceLabel label);
Gender gender_from_string(std::string_view text, bool* known = nullptr);
std::string_view to_string(Gender gender);
Race race_from_string(std::string_view text, bool* known = nullptr);
std::string_view to_string(Race race);

// One continuous block of dialogue spoken by a single character.
struct Utterance {
  std::string movie_id;
  int index = 0;  // position in the movie's dialogue order, consecutive from 0
  std::string speaker_id;
  std::string text;
  std::vector<std::string> tokens;  // tokenize(text)
};

struct Screenplay {
  std::string movie_id;
  std::string title;
  std::vector<Utterance> utterances;
  std::set<std::string> genres;
  std::optional<ViolenceLabel> violence_label;
};

struct DemographicRecord {
  std::string movie_id;
  std::string character_id;
  Gender gender = Gender::Unknown;
  Race race = Race::Unknown;
};

// (movie_id, character_id) -> record. Character identity is the normalized
// cue string within one movie; ids are not comparable across movies.
using DemographicsIndex = std::map<std::pair<std::string, std::string>, DemographicRecord>;

struct ParsedToken {
  std::string surface;
  std::string lemma;
  std::string upos;
  int head = 0;  // 0 = root, otherwise 1-based index of the head token
  std::string deprel;
  std::map<std::string, std::string> misc;  // MISC column key-value entries
};

struct ParsedSentence {
  std::string movie_id;
  int utt_index = 0;
  std::vector<ParsedToken> tokens;
};

// Trim, uppercase, collapse internal whitespace, strip trailing
// parentheticals such as "(V.O.)" or "(CONT'D)".
std::string normalize_speaker(std::string_view cue);

// Extract ordered speaker/utterance pairs from plain screenplay text.
// Grammar: a character cue is a line of uppercase letters, digits, spaces,
// periods, apostrophes and hyphens (length <= 40, at least one letter, not
// starting with INT. or EXT., an optional trailing parenthetical allowed);
// the non-blank lines that follow it are the dialogue block, joined with
// single spaces. Lines fully enclosed in parentheses inside a block are
// stage directions and are dropped; everything else (scene headings,
// action) is discarded.
//
// Throws ValidationError "empty-screenplay" on empty input and
// "malformed-script" (with a line number) when dialogue furniture appears
// with no preceding cue.
Screenplay parse_screenplay(std::string_view raw_text, std::string movie_id);

struct ManifestEntry {
  std::string title;
  std::set<std::string> genres;
  std::optional<ViolenceLabel> violence_label;  // absent = inference-only movie
};

// CSV with header movie_id,title,genres,violence_label; genres are
// pipe-separated inside the field. Unknown labels and duplicate movie ids
// are errors; an empty label field is allowed.
std::map<std::string, ManifestEntry> load_manifest(std::istream& rows);

struct DemographicsFile {
  std::vector<DemographicRecord> records;
  std::size_t unknown_value_warnings = 0;  // gender/race strings mapped to UNKNOWN
};

// CSV with header movie_id,character_id,gender,race. Unrecognized gender or
// race strings fall back to UNKNOWN and bump the warning count; a duplicate
// (movie_id, character_id) is an error.
DemographicsFile load_demographics(std::istream& rows);

DemographicsIndex index_demographics(const std::vector<DemographicRecord>& records);

// 10-column CoNLL-U. Every sentence must carry `# movie_id = ...` and
// `# utt_index = ...` comments; multiword-token and empty-node lines are
// skipped. Sentences must have exactly one root and in-range heads.
std::vector<ParsedSentence> load_conllu(std::istream& stream);

// Canonical dataset: one JSON object per line with fields movie_id, index,
// speaker_id, text. Tokens are recomputed on read, so write->read is the
// identity on Screenplay values produced by parse_screenplay.
void write_dataset(std::ostream& out, const std::vector<Screenplay>& movies);
std::vector<Screenplay> read_dataset(std::istream& in);

}  // namespace sva
