#include "hearth/voice_command.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hearth/error.hpp"

namespace hearth::voice {

namespace {

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        auto start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

Binding parse_binding(std::string_view text) {
    // [channel,on|off]
    text = trim(text);
    if (text.size() < 5 || text.front() != '[' || text.back() != ']') {
        throw Error(Errc::parse_error, "binding must look like [channel,on|off]");
    }
    auto body = text.substr(1, text.size() - 2);
    auto comma = body.find(',');
    if (comma == std::string_view::npos) {
        throw Error(Errc::parse_error, "binding must look like [channel,on|off]");
    }
    auto ch_text = trim(body.substr(0, comma));
    int channel = -1;
    auto [ptr, ec] = std::from_chars(ch_text.data(), ch_text.data() + ch_text.size(), channel);
    if (ch_text.empty() || ec != std::errc{} || ptr != ch_text.data() + ch_text.size() || channel < 0) {
        throw Error(Errc::parse_error, "bad binding channel '" + std::string(ch_text) + "'");
    }
    auto state_text = trim(body.substr(comma + 1));
    PowerState state;
    try {
        state = parse_power_state(state_text);
    } catch (const Error&) {
        throw Error(Errc::parse_error, "bad binding state '" + std::string(state_text) + "'");
    }
    return Binding{channel, state};
}

}  // namespace

const std::array<std::string_view, 39>& phoneme_inventory() {
    static constexpr std::array<std::string_view, 39> kInventory{
        "AA", "AE", "AH", "AO", "AW", "AY", "B",  "CH", "D",  "DH", "EH", "ER", "EY",
        "F",  "G",  "HH", "IH", "IY", "JH", "K",  "L",  "M",  "N",  "NG", "OW", "OY",
        "P",  "R",  "S",  "SH", "T",  "TH", "UH", "UW", "V",  "W",  "Y",  "Z",  "ZH",
    };
    return kInventory;
}

Phoneme Phoneme::from_symbol(std::string_view symbol) {
    auto sym = upper(symbol);
    if (sym.size() > 1 && (sym.back() == '0' || sym.back() == '1' || sym.back() == '2')) {
        sym.pop_back();
    }
    const auto& inv = phoneme_inventory();
    auto it = std::find(inv.begin(), inv.end(), sym);
    if (it == inv.end()) {
        throw Error(Errc::unknown_phoneme, "unknown phoneme '" + std::string(symbol) + "'");
    }
    return Phoneme(static_cast<std::uint8_t>(it - inv.begin()));
}

PhonemeSeq parse_phonemes(std::string_view text) {
    PhonemeSeq out;
    for (auto tok : split_ws(text)) out.push_back(Phoneme::from_symbol(tok));
    return out;
}

std::string format_phonemes(std::span<const Phoneme> seq) {
    std::string out;
    for (const auto& p : seq) {
        if (!out.empty()) out += ' ';
        out += p.symbol();
    }
    return out;
}

Lexicon Lexicon::parse(std::istream& in, std::string_view source) {
    Lexicon lex;
    std::string line;
    int lineno = 0;
    auto fail = [&](Errc code, const std::string& what) {
        throw Error(code, std::string(source) + ":" + std::to_string(lineno) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        if (trim(view).empty()) continue;

        std::vector<std::string_view> cols;
        std::size_t pos = 0;
        while (true) {
            auto tab = view.find('\t', pos);
            cols.push_back(view.substr(pos, tab == std::string_view::npos ? tab : tab - pos));
            if (tab == std::string_view::npos) break;
            pos = tab + 1;
        }
        if (cols.size() < 2 || cols.size() > 3) {
            fail(Errc::parse_error, "expected word<TAB>phonemes[<TAB>[channel,state]]");
        }

        LexiconEntry entry;
        entry.word = std::string(trim(cols[0]));
        if (entry.word.empty()) fail(Errc::parse_error, "empty word");
        if (lex.find(entry.word)) fail(Errc::parse_error, "duplicate word '" + entry.word + "'");
        try {
            entry.phonemes = parse_phonemes(cols[1]);
        } catch (const Error& e) {
            fail(e.code(), e.what());
        }
        if (entry.phonemes.empty()) fail(Errc::parse_error, "word '" + entry.word + "' has no phonemes");
        if (cols.size() == 3 && !trim(cols[2]).empty()) {
            try {
                entry.binding = parse_binding(cols[2]);
            } catch (const Error& e) {
                fail(e.code(), e.what());
            }
        }
        lex.entries_.push_back(std::move(entry));
    }
    return lex;
}

Lexicon Lexicon::parse(std::string_view text, std::string_view source) {
    std::istringstream in{std::string(text)};
    return parse(in, source);
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::parse_error, "cannot open lexicon " + path.string());
    return parse(in, path.string());
}

const Lexicon& Lexicon::builtin() {
    static const Lexicon lex = parse(builtin_lexicon_text(), "builtin lexicon");
    return lex;
}

const LexiconEntry* Lexicon::find(std::string_view word) const {
    for (const auto& e : entries_) {
        if (iequals(e.word, word)) return &e;
    }
    return nullptr;
}

std::size_t Lexicon::command_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.binding.has_value(); }));
}

std::set<std::string> Lexicon::command_words() const {
    std::set<std::string> out;
    for (const auto& e : entries_) {
        if (e.binding) out.insert(e.word);
    }
    return out;
}

int phoneme_distance(std::span<const Phoneme> a, std::span<const Phoneme> b) {
    // Two-row dynamic program.
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double match_confidence(int distance, std::size_t utterance_len, std::size_t entry_len) {
    auto longest = std::max(utterance_len, entry_len);
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(distance) / static_cast<double>(longest);
}

std::vector<CommandMatch> recognize(std::span<const Phoneme> utterance, const Lexicon& lexicon) {
    if (utterance.empty()) throw Error(Errc::empty_utterance, "utterance has no phonemes");
    std::vector<CommandMatch> out;
    out.reserve(lexicon.entries().size());
    for (const auto& e : lexicon.entries()) {
        CommandMatch m;
        m.word = e.word;
        m.distance = phoneme_distance(utterance, e.phonemes);
        m.confidence = match_confidence(m.distance, utterance.size(), e.phonemes.size());
        m.binding = e.binding;
        out.push_back(std::move(m));
    }
    std::sort(out.begin(), out.end(), [](const CommandMatch& a, const CommandMatch& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.word < b.word;
    });
    return out;
}

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::OutOfGrammar: return "out-of-grammar";
        case RejectReason::LowConfidence: return "low-confidence";
        case RejectReason::UnknownWord: return "unknown-word";
        case RejectReason::NotACommand: return "not-a-command";
    }
    return "out-of-grammar";
}

Decision disambiguate(std::span<const CommandMatch> ranked, const std::set<std::string>& grammar,
                      double threshold) {
    Decision d;
    for (const auto& m : ranked) {
        if (!grammar.contains(m.word)) continue;
        if (m.confidence >= threshold) {
            d.match = m;
            d.match->accepted = m.binding.has_value();
            if (!m.binding) d.rejection = RejectReason::NotACommand;
            return d;
        }
        if (!d.nearest) d.nearest = m;
    }
    // A confident top match that the grammar refuses is out of grammar; a weak
    // top match is low confidence whatever the grammar says.
    if (ranked.empty() || ranked.front().confidence < threshold) {
        d.rejection = RejectReason::LowConfidence;
        if (!d.nearest && !ranked.empty()) d.nearest = ranked.front();
    } else {
        d.rejection = RejectReason::OutOfGrammar;
        d.nearest = ranked.front();
    }
    return d;
}

Binding interpret_word(std::string_view text, const Lexicon& lexicon) {
    const auto* e = lexicon.find(trim(text));
    if (!e) throw Error(Errc::unknown_word, "unknown command word '" + std::string(text) + "'");
    if (!e->binding) {
        throw Error(Errc::unknown_word, "'" + e->word + "' is not a command word");
    }
    return *e->binding;
}

StateChange execute(const Binding& binding, ApplianceRegistry& registry) {
    if (!registry.has_channel(binding.channel)) {
        throw Error(Errc::unknown_channel,
                    "no appliance on channel " + std::to_string(binding.channel));
    }
    return registry.set_state(binding.channel, binding.state, Source::Voice);
}

}  // namespace hearth::voice
