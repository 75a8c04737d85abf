#include <sstream>

#include "doctest.h"
#include "sva/roles.hpp"

namespace {

using namespace sva;

ParsedToken tok(std::string surface, std::string lemma, std::string upos, int head,
                std::string deprel, std::map<std::string, std::string> misc = {}) {
  ParsedToken t;
  t.surface = std::move(surface);
  t.lemma = std::move(lemma);
  t.upos = std::move(upos);
  t.head = head;
  t.deprel = std::move(deprel);
  t.misc = std::move(misc);
  return t;
}

ParsedSentence sentence(std::string movie_id, int utt_index, std::vector<ParsedToken> tokens) {
  ParsedSentence s;
  s.movie_id = std::move(movie_id);
  s.utt_index = utt_index;
  s.tokens = std::move(tokens);
  return s;
}

Utterance utt(const std::string& movie_id, int index, std::string speaker) {
  Utterance u;
  u.movie_id = movie_id;
  u.index = index;
  u.speaker_id = std::move(speaker);
  return u;
}

// "they attacked her"
ParsedSentence attacked_her(int utt_index = 0) {
  return sentence("m1", utt_index,
                  {tok("they", "they", "PRON", 2, "nsubj"),
                   tok("attacked", "attack", "VERB", 0, "root"),
                   tok("her", "she", "PRON", 2, "obj")});
}

}  // namespace

TEST_CASE("extract_svo reads an active transitive clause") {
  const std::vector<SvoTriplet> triplets = extract_svo(attacked_her());
  REQUIRE(triplets.size() == 1);
  const SvoTriplet& t = triplets[0];
  CHECK(t.movie_id == "m1");
  CHECK(t.subject.surface == "they");
  CHECK(t.subject.token_index == 0);
  CHECK(t.verb_lemma == "attack");
  CHECK(t.object.surface == "her");
  CHECK(t.object.token_index == 2);
  CHECK(t.form == SvoForm::Pvp);
  CHECK_FALSE(t.passive);
}

TEST_CASE("extract_svo normalizes passives to the active direction") {
  // "i was attacked by them": grammatical subject becomes the object
  const ParsedSentence by_agent =
      sentence("m1", 0,
               {tok("i", "I", "PRON", 3, "nsubj:pass"), tok("was", "be", "AUX", 3, "aux:pass"),
                tok("attacked", "attack", "VERB", 0, "root"), tok("by", "by", "ADP", 5, "case"),
                tok("them", "they", "PRON", 3, "obl:agent")});
  const std::vector<SvoTriplet> triplets = extract_svo(by_agent);
  REQUIRE(triplets.size() == 1);
  CHECK(triplets[0].subject.surface == "them");
  CHECK(triplets[0].object.surface == "i");
  CHECK(triplets[0].verb_lemma == "attack");
  CHECK(triplets[0].passive);
  CHECK(triplets[0].form == SvoForm::Pvp);

  // same sentence with the bare "agent" relation on the verb
  const ParsedSentence bare_agent =
      sentence("m1", 0,
               {tok("i", "I", "PRON", 3, "nsubj:pass"), tok("was", "be", "AUX", 3, "aux:pass"),
                tok("attacked", "attack", "VERB", 0, "root"),
                tok("them", "they", "PRON", 3, "agent")});
  const std::vector<SvoTriplet> again = extract_svo(bare_agent);
  REQUIRE(again.size() == 1);
  CHECK(again[0].subject.surface == "them");
  CHECK(again[0].passive);
}

TEST_CASE("extract_svo skips clauses without a full frame") {
  const ParsedSentence intransitive = sentence(
      "m1", 0, {tok("they", "they", "PRON", 2, "nsubj"), tok("ran", "run", "VERB", 0, "root")});
  CHECK(extract_svo(intransitive).empty());

  const ParsedSentence no_subject = sentence(
      "m1", 0, {tok("hit", "hit", "VERB", 0, "root"), tok("him", "he", "PRON", 1, "obj")});
  CHECK(extract_svo(no_subject).empty());

  // passive subject with no expressed agent
  const ParsedSentence agentless =
      sentence("m1", 0,
               {tok("he", "he", "PRON", 3, "nsubj:pass"), tok("was", "be", "AUX", 3, "aux:pass"),
                tok("hurt", "hurt", "VERB", 0, "root")});
  CHECK(extract_svo(agentless).empty());
}

TEST_CASE("extract_svo emits the subject-object cross product per verb") {
  const ParsedSentence doubled =
      sentence("m1", 0,
               {tok("john", "John", "PROPN", 3, "nsubj"), tok("mary", "Mary", "PROPN", 3, "nsubj"),
                tok("hit", "hit", "VERB", 0, "root"), tok("him", "he", "PRON", 3, "obj"),
                tok("her", "she", "PRON", 3, "obj")});
  const std::vector<SvoTriplet> triplets = extract_svo(doubled);
  REQUIRE(triplets.size() == 4);
  CHECK(triplets[0].subject.surface == "john");
  CHECK(triplets[0].object.surface == "him");
  CHECK(triplets[1].subject.surface == "john");
  CHECK(triplets[1].object.surface == "her");
  CHECK(triplets[3].subject.surface == "mary");
  CHECK(triplets[3].object.surface == "her");
}

TEST_CASE("form classification covers the upos grid") {
  const auto form_for = [](const std::string& subj_upos, const std::string& obj_upos) {
    const ParsedSentence s =
        sentence("m1", 0,
                 {tok("s", "s", subj_upos, 2, "nsubj"), tok("hit", "hit", "VERB", 0, "root"),
                  tok("o", "o", obj_upos, 2, "obj")});
    const std::vector<SvoTriplet> out = extract_svo(s);
    REQUIRE(out.size() == 1);
    return out[0].form;
  };
  CHECK(form_for("PRON", "NOUN") == SvoForm::Pvn);
  CHECK(form_for("PRON", "PRON") == SvoForm::Pvp);
  CHECK(form_for("NOUN", "NOUN") == SvoForm::Nvn);
  CHECK(form_for("PRON", "PROPN") == SvoForm::Pvpn);
  CHECK(form_for("PROPN", "PRON") == SvoForm::Other);
  CHECK(form_for("NOUN", "PRON") == SvoForm::Other);
}

TEST_CASE("filter_forms keeps exactly PVP and PVPN in order") {
  std::vector<SvoTriplet> triplets(5);
  triplets[0].form = SvoForm::Pvp;
  triplets[0].verb_lemma = "a";
  triplets[1].form = SvoForm::Pvn;
  triplets[2].form = SvoForm::Pvpn;
  triplets[2].verb_lemma = "c";
  triplets[3].form = SvoForm::Other;
  triplets[4].form = SvoForm::Pvp;
  triplets[4].verb_lemma = "e";

  const std::vector<SvoTriplet> kept = filter_forms(triplets);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].verb_lemma == "a");
  CHECK(kept[1].verb_lemma == "c");
  CHECK(kept[2].verb_lemma == "e");
  CHECK(filter_forms({}).empty());
}

TEST_CASE("form_distribution is a percentage over all five forms") {
  std::vector<SvoTriplet> triplets(4);
  triplets[0].form = SvoForm::Pvp;
  triplets[1].form = SvoForm::Pvp;
  triplets[2].form = SvoForm::Pvn;
  triplets[3].form = SvoForm::Other;

  const std::map<SvoForm, double> distribution = form_distribution(triplets);
  REQUIRE(distribution.size() == 5);
  CHECK(distribution.at(SvoForm::Pvp) == doctest::Approx(50.0));
  CHECK(distribution.at(SvoForm::Pvn) == doctest::Approx(25.0));
  CHECK(distribution.at(SvoForm::Other) == doctest::Approx(25.0));
  CHECK(distribution.at(SvoForm::Nvn) == 0.0);
  double total = 0.0;
  for (const auto& [form, share] : distribution) total += share;
  CHECK(total == doctest::Approx(100.0).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(form_distribution({}), doctest::Contains("empty"), ValidationError);
}

TEST_CASE("resolve_participants: first person resolves to the speaker") {
  const ParsedSentence parse =
      sentence("m1", 0,
               {tok("i", "I", "PRON", 2, "nsubj"), tok("hit", "hit", "VERB", 0, "root"),
                tok("him", "he", "PRON", 2, "obj")});
  const std::vector<SvoTriplet> triplets = extract_svo(parse);
  REQUIRE(triplets.size() == 1);

  const std::vector<Utterance> utterances = {utt("m1", 0, "JOHN")};
  const Resolution r = resolve_participants(triplets[0], parse, utterances, {"JOHN"});
  REQUIRE(r.subject_char.has_value());
  CHECK(*r.subject_char == "JOHN");
  CHECK_FALSE(r.object_char.has_value());  // "him" has no Coref annotation
}

TEST_CASE("resolve_participants: second person scans nearby different speakers") {
  ParsedSentence parse =
      sentence("m1", 2,
               {tok("you", "you", "PRON", 2, "nsubj"), tok("hit", "hit", "VERB", 0, "root"),
                tok("me", "I", "PRON", 2, "obj")});
  std::vector<SvoTriplet> triplets = extract_svo(parse);
  REQUIRE(triplets.size() == 1);

  // two utterances back is the nearest different speaker
  const std::vector<Utterance> utterances = {utt("m1", 0, "MARY"), utt("m1", 1, "JOHN"),
                                             utt("m1", 2, "JOHN"), utt("m1", 3, "ALICE")};
  const Resolution r = resolve_participants(triplets[0], parse, utterances, {});
  REQUIRE(r.subject_char.has_value());
  CHECK(*r.subject_char == "MARY");
  CHECK(*r.object_char == "JOHN");

  // nothing usable before: falls forward to the closest different speaker
  const std::vector<Utterance> monologue_start = {utt("m1", 0, "JOHN"), utt("m1", 1, "JOHN"),
                                                  utt("m1", 2, "JOHN"), utt("m1", 3, "ALICE")};
  parse.utt_index = 0;
  triplets = extract_svo(parse);
  triplets[0].utterance_index = 0;
  const Resolution forward = resolve_participants(triplets[0], parse, monologue_start, {});
  CHECK_FALSE(forward.subject_char.has_value());  // ALICE is 3 steps away

  const std::vector<Utterance> nearby = {utt("m1", 0, "JOHN"), utt("m1", 1, "ALICE")};
  const Resolution found = resolve_participants(triplets[0], parse, nearby, {});
  REQUIRE(found.subject_char.has_value());
  CHECK(*found.subject_char == "ALICE");
}

TEST_CASE("resolve_participants: third person uses Coref, proper nouns use the roster") {
  const ParsedSentence parse = sentence(
      "m1", 0,
      {tok("she", "she", "PRON", 2, "nsubj", {{"Coref", "MARY"}}),
       tok("stabbed", "stab", "VERB", 0, "root"), tok("Johnny", "Johnny", "PROPN", 2, "obj")});
  const std::vector<SvoTriplet> triplets = extract_svo(parse);
  REQUIRE(triplets.size() == 1);

  const std::vector<Utterance> utterances = {utt("m1", 0, "NARRATOR")};
  const Resolution hit = resolve_participants(triplets[0], parse, utterances, {"JOHNNY", "MARY"});
  CHECK(*hit.subject_char == "MARY");
  CHECK(*hit.object_char == "JOHNNY");  // normalized roster match

  const Resolution miss = resolve_participants(triplets[0], parse, utterances, {"SOMEONE"});
  CHECK(*miss.subject_char == "MARY");
  CHECK_FALSE(miss.object_char.has_value());

  CHECK_THROWS_WITH_AS(resolve_participants(triplets[0], parse, {}, {}),
                       doctest::Contains("out of range"), ValidationError);
}

TEST_CASE("assign_role follows the speaker's grammatical position") {
  SvoTriplet triplet;
  triplet.movie_id = "m1";
  triplet.verb_lemma = "attack";

  Resolution resolution;
  resolution.subject_char = "JOHN";
  resolution.object_char = "MARY";

  const RoleAssignment perp = assign_role(triplet, resolution, "JOHN", ViolenceLabel::High);
  CHECK(perp.speaker_role == SpeakerRole::Perpetrator);
  CHECK(*perp.perpetrator_id == "JOHN");
  CHECK(*perp.victim_id == "MARY");

  const RoleAssignment victim = assign_role(triplet, resolution, "MARY", ViolenceLabel::Med);
  CHECK(victim.speaker_role == SpeakerRole::Victim);
  CHECK(*victim.perpetrator_id == "JOHN");
  CHECK(*victim.victim_id == "MARY");

  const RoleAssignment narrator = assign_role(triplet, resolution, "ALICE", ViolenceLabel::Med);
  CHECK(narrator.speaker_role == SpeakerRole::Narrator);
  CHECK(*narrator.perpetrator_id == "JOHN");
  CHECK(*narrator.victim_id == "MARY");

  // "they attacked her" spoken by someone else: narrator even with loose ends
  Resolution partial;
  const RoleAssignment loose = assign_role(triplet, partial, "ALICE", ViolenceLabel::Med);
  CHECK(loose.speaker_role == SpeakerRole::Narrator);
  CHECK_FALSE(loose.perpetrator_id.has_value());
  CHECK_FALSE(loose.victim_id.has_value());

  CHECK_THROWS_WITH_AS(assign_role(triplet, resolution, "JOHN", ViolenceLabel::Low),
                       doctest::Contains("LOW"), ValidationError);
}

TEST_CASE("collect_interactions keeps fully resolved pairs with demographics") {
  std::vector<RoleAssignment> assignments(3);
  assignments[0].triplet.movie_id = "m1";
  assignments[0].perpetrator_id = "JOHN";
  assignments[0].victim_id = "MARY";
  assignments[0].violence_level = ViolenceLabel::High;
  assignments[1].triplet.movie_id = "m1";
  assignments[1].perpetrator_id = "JOHN";  // victim unresolved: dropped
  assignments[2].triplet.movie_id = "m1";
  assignments[2].perpetrator_id = "JOHN";
  assignments[2].victim_id = "STRANGER";  // no demographics record
  assignments[2].violence_level = ViolenceLabel::Med;

  DemographicsIndex demographics;
  demographics[{"m1", "JOHN"}] = DemographicRecord{"m1", "JOHN", Gender::Male, Race::White};
  demographics[{"m1", "MARY"}] = DemographicRecord{"m1", "MARY", Gender::Female, Race::Black};

  const std::vector<InteractionPair> pairs = collect_interactions(assignments, demographics);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].perpetrator_demo.gender == Gender::Male);
  CHECK(pairs[0].victim_demo.race == Race::Black);
  CHECK(pairs[0].violence_level == ViolenceLabel::High);
  CHECK(pairs[1].victim_demo.gender == Gender::Unknown);
  CHECK(pairs[1].victim_demo.race == Race::Unknown);
}

TEST_CASE("role and interaction rows round-trip through their CSV forms") {
  SvoTriplet triplet;
  triplet.movie_id = "m1";
  triplet.utterance_index = 3;
  triplet.verb_lemma = "attack";
  Resolution resolution;
  resolution.subject_char = "JOHN";
  std::vector<RoleAssignment> assignments = {
      assign_role(triplet, resolution, "JOHN", ViolenceLabel::High)};

  std::ostringstream out;
  write_roles(out, assignments);
  std::istringstream in(out.str());
  const std::vector<RoleAssignment> parsed = read_roles(in);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].speaker_role == SpeakerRole::Perpetrator);
  CHECK(parsed[0].triplet.utterance_index == 3);
  CHECK(parsed[0].triplet.verb_lemma == "attack");
  CHECK_FALSE(parsed[0].victim_id.has_value());
  std::ostringstream again;
  write_roles(again, parsed);
  CHECK(again.str() == out.str());

  std::istringstream empty("");
  CHECK_THROWS_WITH_AS(read_roles(empty), doctest::Contains("empty"), ValidationError);

  InteractionPair pair;
  pair.movie_id = "m1";
  pair.perpetrator_id = "JOHN";
  pair.victim_id = "MARY";
  pair.perpetrator_demo = {Gender::Male, Race::Latino};
  pair.victim_demo = {Gender::Female, Race::Asian};
  pair.violence_level = ViolenceLabel::Med;

  std::ostringstream pair_out;
  write_interactions(pair_out, {pair});
  std::istringstream pair_in(pair_out.str());
  const std::vector<InteractionPair> pairs = read_interactions(pair_in);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].perpetrator_demo.race == Race::Latino);
  CHECK(pairs[0].victim_demo.gender == Gender::Female);
  std::ostringstream pair_again;
  write_interactions(pair_again, pairs);
  CHECK(pair_again.str() == pair_out.str());
}
