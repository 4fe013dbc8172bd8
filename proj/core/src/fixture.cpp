// SPDX-License-Identifier: Apache-2.0
#include "lidlab/fixture.hpp"

#include <algorithm>
#include <random>
#include <string_view>

#include "lidlab/error.hpp"
#include "lidlab/unicode.hpp"

namespace lidlab {

namespace {

struct WordList {
  std::string_view code;
  std::vector<std::string_view> words;  // most frequent first
};

// clang-format off
const std::vector<WordList>& word_lists() {
  static const std::vector<WordList> lists = {
    {"ar", {"في", "من", "على", "إلى", "أن", "هذا", "هذه", "التي", "الذي", "مع", "كان", "عن", "ما", "لا",
            "هو", "هي", "نحن", "أنا", "أنت", "كل", "بعد", "قبل", "عند", "بين", "حتى", "لكن", "أو", "ثم",
            "قد", "لم", "لن", "إن", "اليوم", "غدا", "يوم", "سنة", "وقت", "بيت", "مدينة", "عمل", "رجل",
            "امرأة", "طفل", "عالم", "حياة", "ماء", "كبير", "صغير", "جميل", "جديد", "شكرا", "نعم", "كيف",
            "لماذا", "أين", "يريد", "يذهب", "يقول", "الناس", "كتاب", "مدرسة"}},
    {"da", {"og", "i", "at", "det", "er", "en", "til", "på", "de", "som", "af", "for", "med", "den", "har",
            "ikke", "et", "han", "jeg", "men", "var", "sig", "fra", "vi", "så", "kan", "man", "når", "år",
            "siger", "hun", "under", "også", "efter", "eller", "nu", "sin", "der", "ved", "mod", "skal",
            "skulle", "kommer", "ud", "får", "findes", "være", "havde", "alle", "andre", "meget", "end",
            "her", "siden", "over", "kun", "hvad", "dette", "mange", "dag", "børn", "hus", "tak", "gang",
            "by", "hvor", "hvorfor"}},
    {"de", {"der", "die", "das", "und", "ist", "nicht", "ein", "eine", "zu", "den", "mit", "von", "sich",
            "des", "auf", "für", "im", "dem", "es", "sie", "er", "wir", "ihr", "auch", "an", "als", "nach",
            "wie", "noch", "aber", "bei", "aus", "wenn", "nur", "oder", "so", "schon", "mehr", "gut",
            "heute", "immer", "wieder", "jahr", "zeit", "haus", "welt", "mann", "frau", "kind", "machen",
            "gehen", "sehen", "sagen", "über", "müssen", "können", "groß", "klein", "straße", "schön",
            "weil"}},
    {"el", {"και", "το", "να", "η", "της", "την", "ο", "του", "με", "σε", "που", "για", "τα", "από",
            "δεν", "είναι", "θα", "οι", "στο", "τον", "ένα", "των", "στην", "τι", "μια", "αλλά", "ότι",
            "όταν", "πολύ", "εγώ", "εσύ", "αυτός", "αυτή", "εμείς", "σήμερα", "αύριο", "καλά", "ευχαριστώ",
            "σπίτι", "χρόνος", "μέρα", "άνθρωπος", "παιδί", "πόλη", "δουλειά", "κόσμος", "ζωή", "νερό",
            "πάντα", "ποτέ", "εδώ", "εκεί", "γιατί", "πώς", "μεγάλο", "μικρό", "ωραίο", "καινούργιο",
            "έχει", "έχω", "ήταν"}},
    {"en", {"the", "of", "and", "to", "in", "is", "you", "that", "it", "he", "was", "for", "on", "are",
            "as", "with", "his", "they", "at", "be", "this", "have", "from", "or", "one", "had", "by",
            "word", "but", "not", "what", "all", "were", "we", "when", "your", "can", "said", "there",
            "use", "each", "which", "she", "do", "how", "their", "if", "will", "up", "other", "about",
            "out", "many", "then", "them", "these", "some", "her", "would", "make", "like", "him", "into",
            "time", "has", "look", "two", "more", "write", "go", "see", "people", "water", "day"}},
    {"es", {"el", "la", "los", "las", "de", "del", "que", "y", "en", "un", "una", "es", "por", "con",
            "no", "para", "se", "lo", "como", "más", "pero", "sus", "le", "ya", "o", "este", "sí",
            "porque", "esta", "entre", "cuando", "muy", "sin", "sobre", "también", "me", "hasta", "hay",
            "donde", "quien", "desde", "todo", "nos", "durante", "todos", "uno", "les", "ni", "contra",
            "otros", "ese", "eso", "ante", "ellos", "niño", "año", "señor", "mañana", "ciudad", "trabajo",
            "hacer", "tiene", "bueno"}},
    {"fr", {"le", "la", "les", "de", "des", "un", "une", "et", "est", "en", "que", "qui", "dans", "pour",
            "pas", "sur", "avec", "ce", "il", "elle", "nous", "vous", "ils", "sont", "mais", "ou", "donc",
            "plus", "tout", "bien", "très", "fait", "être", "avoir", "comme", "aussi", "leur", "sans",
            "peut", "entre", "deux", "jour", "temps", "homme", "femme", "maison", "monde", "vie",
            "aujourd'hui", "toujours", "rien", "encore", "après", "avant", "où", "là", "ça", "même",
            "petit", "grand", "beaucoup", "français", "année", "enfant", "chose"}},
    {"hi", {"है", "का", "की", "के", "में", "और", "को", "से", "यह", "वह", "एक", "पर", "भी", "नहीं", "हैं",
            "था", "थी", "कि", "जो", "कर", "तो", "ही", "हो", "इस", "उस", "लिए", "साथ", "बहुत", "अब", "जब",
            "क्या", "कैसे", "क्यों", "कहाँ", "मैं", "तुम", "आप", "हम", "वे", "आज", "कल", "दिन", "साल",
            "समय", "घर", "शहर", "काम", "आदमी", "औरत", "बच्चा", "दुनिया", "जीवन", "पानी", "बड़ा", "छोटा",
            "अच्छा", "नया", "धन्यवाद", "हाँ", "जाना", "करना", "कहना"}},
    {"it", {"il", "lo", "la", "i", "gli", "le", "di", "del", "della", "che", "e", "è", "un", "una", "per",
            "non", "con", "in", "si", "sono", "ma", "come", "anche", "più", "questo", "quello", "tutto",
            "molto", "essere", "fare", "ha", "ho", "hanno", "dove", "quando", "perché", "cosa", "sempre",
            "ancora", "già", "oggi", "domani", "bene", "grazie", "casa", "tempo", "anno", "giorno", "uomo",
            "donna", "bambino", "città", "lavoro", "mondo", "vita", "nostro", "loro", "mio", "suo",
            "dopo", "prima"}},
    {"kn", {"ಒಂದು", "ಈ", "ಆ", "ಎಂದು", "ಆಗಿದೆ", "ಇಲ್ಲ", "ಇದೆ", "ಅವನು", "ಅವಳು", "ನಾನು", "ನೀನು", "ನೀವು",
            "ನಾವು", "ಅವರು", "ಏನು", "ಹೇಗೆ", "ಎಲ್ಲಿ", "ಯಾವಾಗ", "ಏಕೆ", "ಇಂದು", "ನಾಳೆ", "ನಿನ್ನೆ", "ದಿನ",
            "ವರ್ಷ", "ಸಮಯ", "ಮನೆ", "ನಗರ", "ಕೆಲಸ", "ಮನುಷ್ಯ", "ಹೆಣ್ಣು", "ಮಗು", "ಜಗತ್ತು", "ಜೀವನ", "ನೀರು",
            "ದೊಡ್ಡ", "ಸಣ್ಣ", "ಒಳ್ಳೆಯ", "ಹೊಸ", "ಧನ್ಯವಾದ", "ಹೌದು", "ಹೋಗು", "ಮಾಡು", "ಹೇಳು", "ಕನ್ನಡ", "ಆದರೆ",
            "ಜೊತೆ", "ಗಾಗಿ", "ಹಾಗೆ", "ಮಾತ್ರ", "ಎಲ್ಲಾ", "ತುಂಬಾ", "ಹೆಚ್ಚು"}},
    {"ml", {"ഒരു", "ഈ", "ആ", "എന്ന്", "ആണ്", "ഇല്ല", "ഉണ്ട്", "അവൻ", "അവൾ", "ഞാൻ", "നീ", "നിങ്ങൾ",
            "ഞങ്ങൾ", "അവർ", "എന്ത്", "എങ്ങനെ", "എവിടെ", "എപ്പോൾ", "എന്തുകൊണ്ട്", "ഇന്ന്", "നാളെ",
            "ഇന്നലെ", "ദിവസം", "വർഷം", "സമയം", "വീട്", "നഗരം", "ജോലി", "മനുഷ്യൻ", "സ്ത്രീ", "കുട്ടി",
            "ലോകം", "ജീവിതം", "വെള്ളം", "വലിയ", "ചെറിയ", "നല്ല", "പുതിയ", "നന്ദി", "അതെ", "പോകുക",
            "ചെയ്യുക", "പറയുക", "കേരളം", "മലയാളം", "പക്ഷേ", "കൂടെ", "വേണ്ടി", "പോലെ", "മാത്രം", "എല്ലാം",
            "വളരെ", "കൂടുതൽ"}},
    {"nl", {"de", "het", "een", "en", "van", "ik", "te", "dat", "die", "in", "is", "niet", "je", "hij",
            "zijn", "op", "aan", "met", "voor", "er", "maar", "om", "hem", "dan", "zou", "wat", "mijn",
            "men", "dit", "zo", "door", "over", "ze", "zich", "bij", "ook", "tot", "kan", "hebben",
            "wordt", "naar", "nog", "worden", "als", "goed", "nu", "heel", "jaar", "tijd", "huis",
            "wereld", "mensen", "kinderen", "vandaag", "morgen", "altijd", "waar", "waarom", "niets",
            "veel", "weg", "gaan", "doen", "zeggen"}},
    {"pt", {"o", "a", "os", "as", "de", "do", "da", "dos", "das", "que", "e", "em", "um", "uma", "é",
            "por", "com", "não", "para", "se", "no", "na", "como", "mais", "mas", "seu", "sua", "ou",
            "ser", "quando", "muito", "há", "nos", "já", "está", "eu", "também", "só", "pelo", "pela",
            "até", "isso", "ela", "entre", "depois", "sem", "mesmo", "aos", "ter", "seus", "quem", "nas",
            "me", "esse", "eles", "você", "essa", "num", "nem", "suas", "meu", "às", "minha", "têm",
            "numa", "coisa", "trabalho", "cidade", "ano", "obrigado", "hoje", "ação", "informação"}},
    {"ru", {"и", "в", "не", "на", "я", "быть", "он", "с", "что", "а", "по", "это", "она", "этот", "к",
            "но", "они", "мы", "как", "из", "у", "который", "то", "за", "свой", "весь", "год", "от", "так",
            "о", "для", "ты", "же", "все", "тот", "мочь", "вы", "человек", "такой", "его", "сказать",
            "только", "или", "еще", "бы", "себя", "один", "уже", "до", "время", "если", "сам", "когда",
            "другой", "вот", "говорить", "наш", "мой", "знать", "стать", "при", "чтобы", "дело", "жизнь",
            "сегодня", "хорошо", "спасибо", "дом", "город"}},
    {"sv", {"och", "i", "att", "det", "som", "en", "på", "är", "av", "för", "med", "till", "den", "har",
            "de", "inte", "om", "ett", "han", "men", "var", "jag", "sig", "från", "vi", "så", "kan", "man",
            "när", "år", "säger", "hon", "under", "också", "efter", "eller", "nu", "sin", "där", "vid",
            "mot", "ska", "skulle", "kommer", "ut", "får", "finns", "vara", "hade", "alla", "andra",
            "mycket", "än", "här", "då", "sedan", "över", "bara", "vad", "detta", "många", "dag", "barn",
            "hus", "tack", "gång", "stad"}},
    {"ta", {"ஒரு", "இந்த", "அந்த", "என்று", "ஆகும்", "இல்லை", "உள்ளது", "அவன்", "அவள்", "நான்", "நீ",
            "நீங்கள்", "நாங்கள்", "அவர்கள்", "என்ன", "எப்படி", "எங்கே", "எப்போது", "ஏன்", "இன்று", "நாளை",
            "நேற்று", "நாள்", "ஆண்டு", "நேரம்", "வீடு", "நகரம்", "வேலை", "மனிதன்", "பெண்", "குழந்தை",
            "உலகம்", "வாழ்க்கை", "தண்ணீர்", "பெரிய", "சிறிய", "நல்ல", "புதிய", "நன்றி", "ஆம்", "போ",
            "செய்", "சொல்", "தமிழ்", "ஆனால்", "உடன்", "போல", "மட்டும்", "எல்லாம்", "மிகவும்", "அதிகம்"}},
    {"tr", {"bir", "ve", "bu", "da", "de", "için", "ile", "çok", "ne", "ama", "gibi", "daha", "var", "yok",
            "olan", "ben", "sen", "o", "biz", "siz", "onlar", "her", "şey", "kadar", "sonra", "önce",
            "zaman", "gün", "yıl", "ev", "iş", "su", "insan", "çocuk", "büyük", "küçük", "güzel", "iyi",
            "kötü", "yeni", "eski", "şimdi", "bugün", "yarın", "neden", "nasıl", "nerede", "evet", "hayır",
            "teşekkürler", "lütfen", "oldu", "olarak", "değil", "ise", "bile", "mi", "göre", "kendi",
            "istiyorum", "geliyor", "gidiyor"}},
  };
  return lists;
}

const std::vector<std::string_view>& loanwords() {
  static const std::vector<std::string_view> words = {
      "ok", "internet", "hotel", "taxi", "pizza", "email", "google", "wifi", "video", "online",
      "radio", "facebook", "youtube", "netflix", "2020", "19", "100", "covid", "bitcoin", "instagram"};
  return words;
}
// clang-format on

}  // namespace

std::vector<std::string> fixture_languages() {
  std::vector<std::string> codes;
  for (const auto& list : word_lists()) codes.emplace_back(list.code);
  return codes;
}

Corpus generate_fixture(const FixtureSpec& spec) {
  const auto& lists = word_lists();
  if (spec.languages < 2 || spec.languages > lists.size()) {
    fail(ErrorKind::config, "fixture languages must lie in [2, " + std::to_string(lists.size()) + "]");
  }
  if (spec.min_words < 1 || spec.min_words > spec.max_words) {
    fail(ErrorKind::config, "fixture word bounds must satisfy 1 <= min_words <= max_words");
  }
  if (spec.docs_per_language < 1) fail(ErrorKind::config, "fixture needs at least one document per language");

  std::vector<std::string> codes;
  std::vector<std::discrete_distribution<std::size_t>> word_dists;
  for (std::size_t l = 0; l < spec.languages; ++l) {
    codes.emplace_back(lists[l].code);
    std::vector<double> weights(lists[l].words.size());
    for (std::size_t r = 0; r < weights.size(); ++r) weights[r] = 1.0 / static_cast<double>(r + 1);
    word_dists.emplace_back(weights.begin(), weights.end());
  }

  Corpus corpus;
  corpus.labels = LabelMap(codes);
  corpus.documents.reserve(spec.languages * spec.docs_per_language);

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> length_dist(spec.min_words, spec.max_words);
  std::uniform_int_distribution<std::size_t> loan_dist(0, loanwords().size() - 1);
  std::bernoulli_distribution loan_coin(spec.loanword_rate);

  for (std::size_t d = 0; d < spec.docs_per_language; ++d) {
    for (std::size_t l = 0; l < spec.languages; ++l) {
      const std::size_t length = length_dist(rng);
      std::string sentence;
      for (std::size_t w = 0; w < length; ++w) {
        if (w) sentence.push_back(' ');
        if (loan_coin(rng)) {
          sentence += loanwords()[loan_dist(rng)];
        } else {
          sentence += lists[l].words[word_dists[l](rng)];
        }
      }
      sentence.push_back('.');
      corpus.documents.push_back({normalize_text(sentence), *corpus.labels.find(codes[l])});
    }
  }
  return corpus;
}

}  // namespace lidlab
