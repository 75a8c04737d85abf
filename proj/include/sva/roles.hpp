#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sva/script.hpp"

namespace sva {

// Subject/object part-of-speech shape of a triplet. Only Pvp and Pvpn
// survive form filtering; they are the shapes that convey the direction of
// the action between likely characters.
enum class SvoForm { Pvn, Pvp, Nvn, Pvpn, Other };

enum class SpeakerRole { Victim, Perpetrator, Narrator };

std::string_view to_string(SvoForm form);
SvoForm form_from_string(std::string_view text);
std::string_view to_string(SpeakerRole role);
SpeakerRole role_from_string(std::string_view text);

struct SvoParticipant {
  std::string surface;
  std::string upos;
  int token_index = -1;  // 0-based position in the parsed sentence
};

// A directed subject-verb-object extraction. Passive clauses are already
// normalized to active direction (agent as subject) with passive = true.
struct SvoTriplet {
  std::string movie_id;
  int utterance_index = 0;
  SvoParticipant subject;
  std::string verb_lemma;
  SvoParticipant object;
  SvoForm form = SvoForm::Other;
  bool passive = false;
};

// One triplet per (verb, subject, object) combination over all VERB tokens
// with both a subject dependent (nsubj / nsubj:pass) and an object
// dependent (obj / dobj, or the by-agent oblique for passives).
std::vector<SvoTriplet> extract_svo(const ParsedSentence& sentence);

// Keeps exactly the PVP and PVPN forms, preserving order.
std::vector<SvoTriplet> filter_forms(std::vector<SvoTriplet> triplets);

// Percentage of each form over all triplets; values sum to 100.
std::map<SvoForm, double> form_distribution(const std::vector<SvoTriplet>& triplets);

struct Resolution {
  std::optional<std::string> subject_char;
  std::optional<std::string> object_char;
};

// Deterministic mention resolution:
//   I/me/we/us/my/myself        -> the speaker
//   you/your/yourself           -> nearest preceding different speaker within
//                                  2 utterances, else nearest following
//                                  within 2, else unresolved
//   other pronouns              -> Coref= MISC annotation when present
//   proper nouns                -> exact normalized match in the roster
// `parse` supplies the Coref annotations, `movie_utterances` the addressee
// context, `roster` the movie's normalized character names.
Resolution resolve_participants(const SvoTriplet& triplet, const ParsedSentence& parse,
                                const std::vector<Utterance>& movie_utterances,
                                const std::set<std::string>& roster);

struct RoleAssignment {
  SvoTriplet triplet;
  std::string speaker_id;
  SpeakerRole speaker_role = SpeakerRole::Narrator;
  std::optional<std::string> perpetrator_id;
  std::optional<std::string> victim_id;
  ViolenceLabel violence_level = ViolenceLabel::Med;
};

// Speaker as subject -> perpetrator; speaker as object -> victim; otherwise
// narrator with whichever participants resolved. Only MED/HIGH utterances
// may reach this point; LOW is rejected.
RoleAssignment assign_role(const SvoTriplet& triplet, const Resolution& resolution,
                           const std::string& speaker_id, ViolenceLabel violence_level);

struct CharacterDemo {
  Gender gender = Gender::Unknown;
  Race race = Race::Unknown;
};

struct InteractionPair {
  std::string movie_id;
  std::string perpetrator_id;
  std::string victim_id;
  CharacterDemo perpetrator_demo;
  CharacterDemo victim_demo;
  ViolenceLabel violence_level = ViolenceLabel::Med;
};

// One pair per assignment whose perpetrator and victim both resolved;
// demographics fall back to UNKNOWN when a character has no record.
std::vector<InteractionPair> collect_interactions(const std::vector<RoleAssignment>& assignments,
                                                  const DemographicsIndex& demographics);

// Role rows: movie_id,utterance_index,speaker_id,speaker_role,verb_lemma,
// perpetrator_id|-,victim_id|-,violence_level.
void write_roles(std::ostream& out, const std::vector<RoleAssignment>& assignments);
std::vector<RoleAssignment> read_roles(std::istream& in);

// Interaction rows: movie_id,perpetrator_id,perp_gender,perp_race,
// victim_id,vic_gender,vic_race,violence_level.
void write_interactions(std::ostream& out, const std::vector<InteractionPair>& pairs);
std::vector<InteractionPair> read_interactions(std::istream& in);

}  // namespace sva
