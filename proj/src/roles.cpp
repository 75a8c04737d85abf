#include "sva/roles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <istream>
#include <ostream>

#include "sva/numio.hpp"

namespace sva {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

const std::set<std::string, std::less<>> kFirstPerson = {"i", "me", "we", "us", "my", "myself"};
const std::set<std::string, std::less<>> kSecondPerson = {"you", "your", "yourself"};

constexpr int kAddresseeReach = 2;

SvoForm form_of(const std::string& subject_upos, const std::string& object_upos) {
  if (subject_upos == "PRON" && object_upos == "NOUN") return SvoForm::Pvn;
  if (subject_upos == "PRON" && object_upos == "PRON") return SvoForm::Pvp;
  if (subject_upos == "NOUN" && object_upos == "NOUN") return SvoForm::Nvn;
  if (subject_upos == "PRON" && object_upos == "PROPN") return SvoForm::Pvpn;
  return SvoForm::Other;
}

std::vector<std::string> split_csv_plain(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

std::string or_dash(const std::optional<std::string>& value) {
  return value.has_value() ? *value : std::string("-");
}

std::optional<std::string> from_dash(const std::string& value) {
  if (value == "-") return std::nullopt;
  return value;
}

}  // namespace

std::string_view to_string(SvoForm form) {
  switch (form) {
    case SvoForm::Pvn: return "PVN";
    case SvoForm::Pvp: return "PVP";
    case SvoForm::Nvn: return "NVN";
    case SvoForm::Pvpn: return "PVPN";
    case SvoForm::Other: return "OTHER";
  }
  return "OTHER";
}

SvoForm form_from_string(std::string_view text) {
  if (text == "PVN") return SvoForm::Pvn;
  if (text == "PVP") return SvoForm::Pvp;
  if (text == "NVN") return SvoForm::Nvn;
  if (text == "PVPN") return SvoForm::Pvpn;
  if (text == "OTHER") return SvoForm::Other;
  throw ValidationError("unknown form '" + std::string(text) + "'");
}

std::string_view to_string(SpeakerRole role) {
  switch (role) {
    case SpeakerRole::Victim: return "VICTIM";
    case SpeakerRole::Perpetrator: return "PERPETRATOR";
    case SpeakerRole::Narrator: return "NARRATOR";
  }
  return "NARRATOR";
}

SpeakerRole role_from_string(std::string_view text) {
  if (text == "VICTIM") return SpeakerRole::Victim;
  if (text == "PERPETRATOR") return SpeakerRole::Perpetrator;
  if (text == "NARRATOR") return SpeakerRole::Narrator;
  throw ValidationError("unknown role '" + std::string(text) + "'");
}

std::vector<SvoTriplet> extract_svo(const ParsedSentence& sentence) {
  const auto& tokens = sentence.tokens;
  std::vector<std::vector<int>> children(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int head = tokens[i].head;
    if (head > 0) {
      children[static_cast<std::size_t>(head - 1)].push_back(static_cast<int>(i));
    }
  }

  std::vector<SvoTriplet> triplets;
  for (std::size_t v = 0; v < tokens.size(); ++v) {
    if (tokens[v].upos != "VERB") continue;
    std::vector<int> active_subjects;
    std::vector<int> passive_subjects;
    std::vector<int> objects;
    std::vector<int> agents;
    for (const int child : children[v]) {
      const std::string& deprel = tokens[static_cast<std::size_t>(child)].deprel;
      if (deprel == "nsubj") {
        active_subjects.push_back(child);
      } else if (deprel == "nsubj:pass") {
        passive_subjects.push_back(child);
      } else if (deprel == "obj" || deprel == "dobj") {
        objects.push_back(child);
      } else if (deprel == "obl:agent" || deprel == "nmod:agent" || deprel == "agent") {
        agents.push_back(child);
      }
    }

    const auto participant = [&tokens](int index) {
      return SvoParticipant{tokens[static_cast<std::size_t>(index)].surface,
                            tokens[static_cast<std::size_t>(index)].upos, index};
    };
    const auto emit = [&](int subject, int object, bool passive) {
      SvoTriplet triplet;
      triplet.movie_id = sentence.movie_id;
      triplet.utterance_index = sentence.utt_index;
      triplet.subject = participant(subject);
      triplet.verb_lemma = tokens[v].lemma;
      triplet.object = participant(object);
      triplet.form = form_of(triplet.subject.upos, triplet.object.upos);
      triplet.passive = passive;
      triplets.push_back(std::move(triplet));
    };

    for (const int subject : active_subjects) {
      for (const int object : objects) emit(subject, object, false);
    }
    // passive normalized to active direction: agent acts on the grammatical
    // subject
    for (const int subject : passive_subjects) {
      for (const int agent : agents) emit(agent, subject, true);
    }
  }
  return triplets;
}

std::vector<SvoTriplet> filter_forms(std::vector<SvoTriplet> triplets) {
  triplets.erase(std::remove_if(triplets.begin(), triplets.end(),
                                [](const SvoTriplet& t) {
                                  return t.form != SvoForm::Pvp && t.form != SvoForm::Pvpn;
                                }),
                 triplets.end());
  return triplets;
}

std::map<SvoForm, double> form_distribution(const std::vector<SvoTriplet>& triplets) {
  require(!triplets.empty(), "form distribution: empty triplet list");
  std::map<SvoForm, double> distribution = {
      {SvoForm::Pvn, 0.0}, {SvoForm::Pvp, 0.0}, {SvoForm::Nvn, 0.0},
      {SvoForm::Pvpn, 0.0}, {SvoForm::Other, 0.0}};
  for (const SvoTriplet& triplet : triplets) {
    distribution[triplet.form] += 1.0;
  }
  for (auto& [form, share] : distribution) {
    share = share * 100.0 / static_cast<double>(triplets.size());
  }
  return distribution;
}

Resolution resolve_participants(const SvoTriplet& triplet, const ParsedSentence& parse,
                                const std::vector<Utterance>& movie_utterances,
                                const std::set<std::string>& roster) {
  require(triplet.utterance_index >= 0 &&
              triplet.utterance_index < static_cast<int>(movie_utterances.size()),
          "resolution: utterance index " + std::to_string(triplet.utterance_index) +
              " out of range for movie '" + triplet.movie_id + "'");
  const std::string& speaker =
      movie_utterances[static_cast<std::size_t>(triplet.utterance_index)].speaker_id;

  const auto addressee = [&]() -> std::optional<std::string> {
    for (int step = 1; step <= kAddresseeReach; ++step) {
      const int idx = triplet.utterance_index - step;
      if (idx < 0) break;
      const std::string& other = movie_utterances[static_cast<std::size_t>(idx)].speaker_id;
      if (other != speaker) return other;
    }
    for (int step = 1; step <= kAddresseeReach; ++step) {
      const int idx = triplet.utterance_index + step;
      if (idx >= static_cast<int>(movie_utterances.size())) break;
      const std::string& other = movie_utterances[static_cast<std::size_t>(idx)].speaker_id;
      if (other != speaker) return other;
    }
    return std::nullopt;
  };

  const auto resolve_one = [&](const SvoParticipant& p) -> std::optional<std::string> {
    if (p.upos == "PRON") {
      const std::string lowered = lower_ascii(p.surface);
      if (kFirstPerson.count(lowered) > 0) return speaker;
      if (kSecondPerson.count(lowered) > 0) return addressee();
      if (p.token_index >= 0 && p.token_index < static_cast<int>(parse.tokens.size())) {
        const auto& misc = parse.tokens[static_cast<std::size_t>(p.token_index)].misc;
        const auto it = misc.find("Coref");
        if (it != misc.end() && !it->second.empty()) return it->second;
      }
      return std::nullopt;
    }
    if (p.upos == "PROPN") {
      const std::string normalized = normalize_speaker(p.surface);
      if (roster.count(normalized) > 0) return normalized;
      return std::nullopt;
    }
    return std::nullopt;
  };

  Resolution resolution;
  resolution.subject_char = resolve_one(triplet.subject);
  resolution.object_char = resolve_one(triplet.object);
  return resolution;
}

RoleAssignment assign_role(const SvoTriplet& triplet, const Resolution& resolution,
                           const std::string& speaker_id, ViolenceLabel violence_level) {
  require(violence_level != ViolenceLabel::Low,
          "roles: LOW-classified utterances are gated out of role assignment");
  RoleAssignment assignment;
  assignment.triplet = triplet;
  assignment.speaker_id = speaker_id;
  assignment.violence_level = violence_level;
  if (resolution.subject_char == speaker_id) {
    assignment.speaker_role = SpeakerRole::Perpetrator;
    assignment.perpetrator_id = speaker_id;
    assignment.victim_id = resolution.object_char;
  } else if (resolution.object_char == speaker_id) {
    assignment.speaker_role = SpeakerRole::Victim;
    assignment.victim_id = speaker_id;
    assignment.perpetrator_id = resolution.subject_char;
  } else {
    assignment.speaker_role = SpeakerRole::Narrator;
    assignment.perpetrator_id = resolution.subject_char;
    assignment.victim_id = resolution.object_char;
  }
  return assignment;
}

std::vector<InteractionPair> collect_interactions(const std::vector<RoleAssignment>& assignments,
                                                  const DemographicsIndex& demographics) {
  std::vector<InteractionPair> pairs;
  for (const RoleAssignment& assignment : assignments) {
    if (!assignment.perpetrator_id.has_value() || !assignment.victim_id.has_value()) continue;
    InteractionPair pair;
    pair.movie_id = assignment.triplet.movie_id;
    pair.perpetrator_id = *assignment.perpetrator_id;
    pair.victim_id = *assignment.victim_id;
    pair.violence_level = assignment.violence_level;
    const auto perp = demographics.find({pair.movie_id, pair.perpetrator_id});
    if (perp != demographics.end()) {
      pair.perpetrator_demo = {perp->second.gender, perp->second.race};
    }
    const auto victim = demographics.find({pair.movie_id, pair.victim_id});
    if (victim != demographics.end()) {
      pair.victim_demo = {victim->second.gender, victim->second.race};
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void write_roles(std::ostream& out, const std::vector<RoleAssignment>& assignments) {
  out << "movie_id,utterance_index,speaker_id,speaker_role,verb_lemma,"
         "perpetrator_id,victim_id,violence_level\n";
  for (const RoleAssignment& a : assignments) {
    out << a.triplet.movie_id << ',' << a.triplet.utterance_index << ',' << a.speaker_id << ','
        << to_string(a.speaker_role) << ',' << a.triplet.verb_lemma << ','
        << or_dash(a.perpetrator_id) << ',' << or_dash(a.victim_id) << ','
        << to_string(a.violence_level) << '\n';
  }
}

std::vector<RoleAssignment> read_roles(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("roles: empty file");
  }
  std::vector<RoleAssignment> assignments;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_plain(line);
    if (fields.size() != 8) {
      throw ValidationError("roles: expected 8 fields at line " + std::to_string(line_no));
    }
    RoleAssignment a;
    a.triplet.movie_id = fields[0];
    a.triplet.utterance_index = static_cast<int>(parse_long(fields[1], "utterance index"));
    a.speaker_id = fields[2];
    a.speaker_role = role_from_string(fields[3]);
    a.triplet.verb_lemma = fields[4];
    a.perpetrator_id = from_dash(fields[5]);
    a.victim_id = from_dash(fields[6]);
    a.violence_level = label_from_string(fields[7]);
    assignments.push_back(std::move(a));
  }
  return assignments;
}

void write_interactions(std::ostream& out, const std::vector<InteractionPair>& pairs) {
  out << "movie_id,perpetrator_id,perp_gender,perp_race,victim_id,vic_gender,vic_race,"
         "violence_level\n";
  for (const InteractionPair& pair : pairs) {
    out << pair.movie_id << ',' << pair.perpetrator_id << ','
        << to_string(pair.perpetrator_demo.gender) << ',' << to_string(pair.perpetrator_demo.race)
        << ',' << pair.victim_id << ',' << to_string(pair.victim_demo.gender) << ','
        << to_string(pair.victim_demo.race) << ',' << to_string(pair.violence_level) << '\n';
  }
}

std::vector<InteractionPair> read_interactions(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("interactions: empty file");
  }
  std::vector<InteractionPair> pairs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_plain(line);
    if (fields.size() != 8) {
      throw ValidationError("interactions: expected 8 fields at line " + std::to_string(line_no));
    }
    InteractionPair pair;
    pair.movie_id = fields[0];
    pair.perpetrator_id = fields[1];
    pair.perpetrator_demo.gender = gender_from_string(fields[2]);
    pair.perpetrator_demo.race = race_from_string(fields[3]);
    pair.victim_id = fields[4];
    pair.victim_demo.gender = gender_from_string(fields[5]);
    pair.victim_demo.race = race_from_string(fields[6]);
    pair.violence_level = label_from_string(fields[7]);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace sva
