#include <sstream>

#include "doctest.h"
#include "sva/script.hpp"
#include "sva/tokenize.hpp"

namespace {

using namespace sva;

const char* kSampleScript = R"(INT. WAREHOUSE - NIGHT

A dim light swings overhead.

JOHN
Put the gun down.
I mean it.

MARY (V.O.)
(whispering)
You never mean it.

He steps closer.

JOHN
Watch me.
)";

}  // namespace

TEST_CASE("tokenize lowercases, strips punctuation, keeps inner apostrophes") {
  const std::vector<std::string> tokens = tokenize("You'll regret this—I swear!");
  REQUIRE(tokens == std::vector<std::string>{"you'll", "regret", "this", "i", "swear"});
}

TEST_CASE("tokenize drops detached apostrophes and quotes") {
  CHECK(tokenize("\"Stop,\" she said: now!") ==
        std::vector<std::string>{"stop", "she", "said", "now"});
  CHECK(tokenize("'em all") == std::vector<std::string>{"em", "all"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("   \t  ") == std::vector<std::string>{});
}

TEST_CASE("normalize_speaker uppercases, trims and strips parentheticals") {
  CHECK(normalize_speaker("  john  (V.O.) ") == "JOHN");
  CHECK(normalize_speaker("MARY (CONT'D) (O.S.)") == "MARY");
  CHECK(normalize_speaker("old   man") == "OLD MAN");
  CHECK(normalize_speaker("COP 2") == "COP 2");
}

TEST_CASE("parse_screenplay extracts ordered speaker/utterance pairs") {
  const Screenplay play = parse_screenplay(kSampleScript, "m1");
  REQUIRE(play.movie_id == "m1");
  REQUIRE(play.utterances.size() == 3);

  CHECK(play.utterances[0].speaker_id == "JOHN");
  CHECK(play.utterances[0].text == "Put the gun down. I mean it.");
  CHECK(play.utterances[0].index == 0);
  CHECK(play.utterances[0].tokens ==
        std::vector<std::string>{"put", "the", "gun", "down", "i", "mean", "it"});

  CHECK(play.utterances[1].speaker_id == "MARY");
  CHECK(play.utterances[1].text == "You never mean it.");
  CHECK(play.utterances[1].index == 1);

  CHECK(play.utterances[2].speaker_id == "JOHN");
  CHECK(play.utterances[2].text == "Watch me.");
  CHECK(play.utterances[2].index == 2);
}

TEST_CASE("parse_screenplay ignores headings, action and long or lowercase lines") {
  const Screenplay play = parse_screenplay(
      "EXT. STREET - DAY\n\nNot a cue because lowercase.\n\n"
      "THIS LINE IS WAY TOO LONG TO BE A CHARACTER CUE BECAUSE IT KEEPS GOING\n\n"
      "BOB\nHello.\n",
      "m2");
  REQUIRE(play.utterances.size() == 1);
  CHECK(play.utterances[0].speaker_id == "BOB");
}

TEST_CASE("parse_screenplay rejects empty input") {
  CHECK_THROWS_WITH_AS(parse_screenplay("", "m1"), doctest::Contains("empty-screenplay"),
                       ValidationError);
  CHECK_THROWS_AS(parse_screenplay("   \n\n  ", "m1"), ValidationError);
}

TEST_CASE("parse_screenplay reports dialogue furniture without a cue") {
  try {
    parse_screenplay("INT. BAR - DAY\n\n(a parenthetical adrift)\nHello.\n", "m1");
    FAIL("expected malformed-script");
  } catch (const ValidationError& e) {
    const std::string message = e.what();
    CHECK(message.find("malformed-script") != std::string::npos);
    CHECK(message.find("line 3") != std::string::npos);
  }
}

TEST_CASE("load_manifest parses labels and pipe-separated genres") {
  std::istringstream in(
      "movie_id,title,genres,violence_label\n"
      "m1,Heat,Action|Crime,HIGH\n"
      "m2,Quiet Days,Drama,\n"
      "m3,Mid,Thriller,med\n");
  const auto manifest = load_manifest(in);
  REQUIRE(manifest.size() == 3);
  CHECK(manifest.at("m1").title == "Heat");
  CHECK(manifest.at("m1").genres == std::set<std::string>{"Action", "Crime"});
  CHECK(manifest.at("m1").violence_label == ViolenceLabel::High);
  CHECK_FALSE(manifest.at("m2").violence_label.has_value());
  CHECK(manifest.at("m3").violence_label == ViolenceLabel::Med);
}

TEST_CASE("load_manifest rejects bad headers, labels and duplicates") {
  {
    std::istringstream in("movie,title\n");
    CHECK_THROWS_AS(load_manifest(in), ValidationError);
  }
  {
    std::istringstream in("movie_id,title,genres,violence_label\nm1,X,,EXTREME\n");
    CHECK_THROWS_WITH_AS(load_manifest(in), doctest::Contains("unknown-label"), ValidationError);
  }
  {
    std::istringstream in("movie_id,title,genres,violence_label\nm1,X,,LOW\nm1,Y,,MED\n");
    CHECK_THROWS_WITH_AS(load_manifest(in), doctest::Contains("duplicate"), ValidationError);
  }
}

TEST_CASE("load_demographics maps unknown strings to UNKNOWN with warnings") {
  std::istringstream in(
      "movie_id,character_id,gender,race\n"
      "m1,JOHN,male,White\n"
      "m1,MARY,FEMALE,wookiee\n"
      "m2,ALEX,nb,UNKNOWN\n");
  const DemographicsFile file = load_demographics(in);
  REQUIRE(file.records.size() == 3);
  CHECK(file.records[0].gender == Gender::Male);
  CHECK(file.records[0].race == Race::White);
  CHECK(file.records[1].race == Race::Unknown);
  CHECK(file.records[2].gender == Gender::Unknown);
  CHECK(file.unknown_value_warnings == 2);

  const DemographicsIndex index = index_demographics(file.records);
  CHECK(index.at({"m1", "MARY"}).gender == Gender::Female);
  CHECK(index.count({"m9", "NOBODY"}) == 0);
}

TEST_CASE("load_demographics rejects duplicate characters") {
  std::istringstream in(
      "movie_id,character_id,gender,race\n"
      "m1,JOHN,MALE,WHITE\n"
      "m1,JOHN,MALE,WHITE\n");
  CHECK_THROWS_WITH_AS(load_demographics(in), doctest::Contains("duplicate"), ValidationError);
}

TEST_CASE("load_conllu reads aligned sentences and MISC annotations") {
  std::istringstream in(
      "# movie_id = m1\n"
      "# utt_index = 4\n"
      "1\tThey\tthey\tPRON\t_\t_\t2\tnsubj\t_\tCoref=GANG\n"
      "2\tattacked\tattack\tVERB\t_\t_\t0\troot\t_\t_\n"
      "3\ther\tshe\tPRON\t_\t_\t2\tobj\t_\t_\n"
      "\n"
      "# movie_id = m1\n"
      "# utt_index = 5\n"
      "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdo\tdo\tAUX\t_\t_\t2\taux\t_\t_\n"
      "2\tstop\tstop\tVERB\t_\t_\t0\troot\t_\t_\n");
  const std::vector<ParsedSentence> sentences = load_conllu(in);
  REQUIRE(sentences.size() == 2);
  CHECK(sentences[0].movie_id == "m1");
  CHECK(sentences[0].utt_index == 4);
  REQUIRE(sentences[0].tokens.size() == 3);
  CHECK(sentences[0].tokens[0].misc.at("Coref") == "GANG");
  CHECK(sentences[0].tokens[1].lemma == "attack");
  CHECK(sentences[0].tokens[1].head == 0);
  // the 1-2 multiword range line is skipped
  CHECK(sentences[1].tokens.size() == 2);
}

TEST_CASE("load_conllu rejects unaligned and malformed sentences") {
  {
    std::istringstream in("1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n");
    CHECK_THROWS_WITH_AS(load_conllu(in), doctest::Contains("unaligned-sentence"),
                         ValidationError);
  }
  {
    std::istringstream in("# movie_id = m1\n# utt_index = 0\n1\tHi\thi\tINTJ\t0\troot\n");
    CHECK_THROWS_WITH_AS(load_conllu(in), doctest::Contains("10"), ValidationError);
  }
  {
    std::istringstream in(
        "# movie_id = m1\n# utt_index = 0\n"
        "1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n"
        "2\tthere\tthere\tADV\t_\t_\t0\troot\t_\t_\n");
    CHECK_THROWS_WITH_AS(load_conllu(in), doctest::Contains("root"), ValidationError);
  }
  {
    std::istringstream in("# movie_id = m1\n# utt_index = 0\n1\tHi\thi\tINTJ\t_\t_\t7\tdep\t_\t_\n");
    CHECK_THROWS_WITH_AS(load_conllu(in), doctest::Contains("out of range"), ValidationError);
  }
}

TEST_CASE("dataset write then read reproduces a parsed screenplay") {
  const Screenplay play = parse_screenplay(kSampleScript, "m1");
  std::ostringstream out;
  write_dataset(out, {play});

  std::istringstream in(out.str());
  const std::vector<Screenplay> round = read_dataset(in);
  REQUIRE(round.size() == 1);
  CHECK(round[0].movie_id == play.movie_id);
  REQUIRE(round[0].utterances.size() == play.utterances.size());
  for (std::size_t i = 0; i < play.utterances.size(); ++i) {
    CHECK(round[0].utterances[i].speaker_id == play.utterances[i].speaker_id);
    CHECK(round[0].utterances[i].text == play.utterances[i].text);
    CHECK(round[0].utterances[i].index == play.utterances[i].index);
    CHECK(round[0].utterances[i].tokens == play.utterances[i].tokens);
  }
  CHECK(round[0].genres == play.genres);
  CHECK(round[0].violence_label == play.violence_label);
}

TEST_CASE("read_dataset checks utterance index continuity") {
  std::istringstream in(
      "{\"movie_id\":\"m1\",\"index\":0,\"speaker_id\":\"A\",\"text\":\"Hi.\"}\n"
      "{\"movie_id\":\"m1\",\"index\":2,\"speaker_id\":\"A\",\"text\":\"Bye.\"}\n");
  CHECK_THROWS_WITH_AS(read_dataset(in), doctest::Contains("non-consecutive"), ValidationError);
}

TEST_CASE("violence labels round-trip and reject unknowns") {
  for (const ViolenceLabel label : {ViolenceLabel::Low, ViolenceLabel::Med, ViolenceLabel::High}) {
    CHECK(label_from_string(to_string(label)) == label);
  }
  CHECK(label_from_string("low") == ViolenceLabel::Low);
  CHECK_THROWS_AS(label_from_string("SEVERE"), ValidationError);
}
