#pragma once

// Bundled English word lists. Changing any list changes its digest, which
// feeds the preprocessing config digest and invalidates cached artifacts.

#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rweet/digest.hpp"

namespace rweet::lexicon {

inline constexpr std::string_view kStopwordListId = "en-173-v1";

// Common English function words. Subject pronouns (i, we, you, he, she, they)
// are deliberately absent: they anchor request phrasing ("we need", "can you").
inline constexpr std::string_view kStopwordText = R"(
me my myself our ours ourselves you're you've you'll you'd your yours yourself
yourselves him his himself she's her hers herself it it's its itself them their
theirs themselves what which who whom this that that'll these those am is are
was were be been being have has had having do does did doing a an the and but
if or because as until while of at by for with about against between into
through during before after above below to from up down in out on off over
under again further then once here there when where why how all any both each
few more most other some such no nor not only own same so than too very s t can
will just don don't should should've now d ll m o re ve y ain aren aren't
couldn couldn't didn didn't doesn doesn't hadn hadn't hasn hasn't haven haven't
isn isn't ma mightn mightn't mustn mustn't needn needn't shan shan't shouldn
shouldn't wasn wasn't weren weren't won won't wouldn wouldn't
)";

// Irregular inflections. Every value is itself a base form (maps to itself).
inline constexpr std::string_view kIrregularText = R"(
am be are be is be was be were be been be being be
has have had have having have does do did do done do
goes go went go gone go
wrote write written write
made make gave give given give brought bring took take taken take came come
got get gotten get ran run sent send left leave lost lose knew know known know
saw see seen see said say found find thought think told tell felt feel kept keep
bought buy paid pay built build fed feed sold sell stood stand held hold
fell fall fallen fall flew fly flown fly stuck stick hurt hurt hit hit
children child men man women woman feet foot teeth tooth mice mouse people people
news news clothes clothes series series species species
began begin begun begin broke break broken break chose choose chosen choose
drove drive driven drive ate eat eaten eat drank drink drunk drink
spoke speak spoken speak woke wake woken wake wore wear worn wear
meant mean met meet lent lend spent spend slept sleep swept sweep
caught catch taught teach fought fight sought seek
lay lie lain lie rose rise risen rise shook shake shaken shake
froze freeze frozen freeze hid hide hidden hide bit bite bitten bite
led lead grew grow grown grow threw throw thrown throw blew blow blown blow
drew draw drawn draw became become
)";

// Base-form dictionary used to validate suffix stripping and as positive
// evidence of English in the language filter.
inline constexpr std::string_view kDictionaryText = R"(
i we you she they
a able about above accept accident account across act action add address adult
affect afraid after afternoon again against age agency ago agree aid air
airport alert alive all allow almost alone along already also always ambulance
among amount and animal another answer any anyone anything anywhere apartment
appeal apply area arm army around arrive art article ask assist assistance
attention auction available away baby back bad bag bandage bank base basic
bath battery be beach bear beautiful because become bed before begin behind
believe below best better between big bill bit black blanket blood blow blue
board boat body book boot both bottle bottom box boy brave bread break
breakfast bridge bring broken brother build building bus business but buy
call calm camp can cancer car card care carry case cash cat catch cause center
chance change charge charity check cheese child church city clean clear climb
clinic close cloth clothe clothes clothing coast coat cold collect college come
comfort community company contact continue cook cool corner cost could count
country county couple course cover crew crisis cross crowd cry cup cure current
cut damage danger dangerous dark date daughter day dead deal death decide deep
delay deliver delivery destroy detail diaper die different difficult dinner
direct disaster doctor dog dollar donate donation donor door down drink drive
drop drug dry during each early earth earthquake east easy eat effort elderly
electricity else emergency empty end enough entire equipment escape evacuate
evacuation even evening event ever every everyone everything everywhere exact
expect eye face facility fact fall family far farm fast father fear feed feel
fever few field fight fill final find fine fire first fix flashlight flood floor
flu fly follow food foot for force forecast forget form formula free fresh
friend from front fuel full fund funding further future game garden gas gear
generator get gift girl give glad glass go god good government great green
ground group grow guard guy hair half hall hand happen happy hard have he head
health hear heart heat heavy hello help here high highway hold holiday home
hope hospital hot hotel hour house household housing how hungry hurricane hurt
husband ice idea if ill important in include information injure injury inside
instead insulin insurance into island it item jacket job join just keep kid
kind kit kitchen know lack land large last late later learn least leave left
less let letter level life light like line list listen little live local
location lock long look lose loss lot love low lunch machine mail main make man
many map mask matter may meal mean medic medical medication medicine meet
member message middle might mile milk million mind minute miss missing moment
money month more morning most mother move much must name near nearby necessary
need neighbor neighborhood never new news next nice night no none north not
note nothing notice now number nurse of off offer office official often oil
okay old on once one only open or order other out outside over own pack page
pain pants paper parent park part party pass past patient pay people per
person pet phone pick picture piece place plan plant play please plenty point
police pool poor possible post power pray prayer prepare present pretty price
problem provide public pull put quick quiet radio rain raise ready real really
reason receive recover recovery red relief remain remember rent repair report
request rescue resident resource rest restore return right rise risk river
road roof room run safe safety same save say school sea search season second
see seem sell send senior serve service set shelter shirt shoe shop short
should show shower sick side sign simple since sister sit situation size sleep
small snow so soap sock some someone something sometimes son soon sorry south
space speak special spend staff stand start state station stay still stock stop
storm story street strong struggle student stuff such suffer sugar supply
support sure survive survivor system table take talk team tell tent than thank
thanks that the then there thing think thirsty this those though thought
through time tired to today together toilet tomorrow tonight too tool top
total touch toward town traffic trap trash tree trip truck true try turn type
under understand until up update urgent us use useful van very victim view
village visit volunteer wait walk wall want war warm wash watch water way wear
weather week welcome well west wet what wheelchair when where which while white
who whole why wife will wind window winter with without woman word work worker
world worry would write wrong yard year yes yesterday yet young
)";

inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

inline const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> set = [] {
    auto words = split_words(kStopwordText);
    return std::unordered_set<std::string>(words.begin(), words.end());
  }();
  return set;
}

inline const std::unordered_map<std::string, std::string>& irregular_forms() {
  static const std::unordered_map<std::string, std::string> map = [] {
    auto words = split_words(kIrregularText);
    std::unordered_map<std::string, std::string> m;
    for (std::size_t i = 0; i + 1 < words.size(); i += 2)
      m.emplace(words[i], words[i + 1]);
    return m;
  }();
  return map;
}

inline const std::unordered_set<std::string>& dictionary() {
  static const std::unordered_set<std::string> set = [] {
    auto words = split_words(kDictionaryText);
    std::unordered_set<std::string> s(words.begin(), words.end());
    for (const auto& [form, base] : irregular_forms()) s.insert(base);
    return s;
  }();
  return set;
}

inline std::size_t stopword_count() { return split_words(kStopwordText).size(); }

// Digest over every bundled list; part of the preprocessing config digest.
inline std::string lexicon_digest() {
  static const std::string hex = [] {
    Digest d;
    d.add(kStopwordListId).add(kStopwordText).add(kIrregularText).add(kDictionaryText);
    return d.hex();
  }();
  return hex;
}

}  // namespace rweet::lexicon
