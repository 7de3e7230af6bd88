#pragma once

// Text-level stand-in for a speech pipeline: phonemes -> words (nearest
// lexicon entries by phoneme edit distance) -> grammar filter -> command.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hearth/appliance_registry.hpp"

namespace hearth::voice {

/// The 39 ARPAbet phonemes (stress markers are not part of the inventory).
const std::array<std::string_view, 39>& phoneme_inventory();

class Phoneme {
public:
    /// Accepts an inventory symbol, case-insensitive, with an optional CMU
    /// stress digit ("AY1"). Throws Errc::unknown_phoneme.
    static Phoneme from_symbol(std::string_view symbol);

    std::string_view symbol() const { return phoneme_inventory()[index_]; }
    std::uint8_t index() const { return index_; }

    friend bool operator==(Phoneme, Phoneme) = default;

private:
    explicit Phoneme(std::uint8_t index) : index_(index) {}

    std::uint8_t index_;
};

using PhonemeSeq = std::vector<Phoneme>;

/// Whitespace-separated symbols. Throws Errc::unknown_phoneme.
PhonemeSeq parse_phonemes(std::string_view text);
std::string format_phonemes(std::span<const Phoneme> seq);

struct Binding {
    int channel = 0;
    PowerState state = PowerState::On;

    friend bool operator==(const Binding&, const Binding&) = default;
};

struct LexiconEntry {
    std::string word;
    PhonemeSeq phonemes;
    std::optional<Binding> binding;
};

/// Line format: `word<TAB>PH PH PH[<TAB>[channel,on|off]]`, `#` starts a comment.
class Lexicon {
public:
    /// Throws Errc::parse_error (with line number) or Errc::unknown_phoneme.
    static Lexicon parse(std::istream& in, std::string_view source = "lexicon");
    static Lexicon parse(std::string_view text, std::string_view source = "lexicon");
    static Lexicon load(const std::filesystem::path& path);
    /// The lexicon compiled into the binary (data/default_lexicon.tsv).
    static const Lexicon& builtin();

    const std::vector<LexiconEntry>& entries() const { return entries_; }
    /// Case-insensitive.
    const LexiconEntry* find(std::string_view word) const;
    std::size_t command_count() const;
    /// Words that carry a binding.
    std::set<std::string> command_words() const;

private:
    std::vector<LexiconEntry> entries_;
};

std::string_view builtin_lexicon_text();

struct CommandMatch {
    std::string word;
    int distance = 0;
    double confidence = 0.0;
    bool accepted = false;
    std::optional<Binding> binding;
};

/// Unit-cost Levenshtein distance over phoneme symbols.
int phoneme_distance(std::span<const Phoneme> a, std::span<const Phoneme> b);

/// 1 - distance / max(|a|, |b|).
double match_confidence(int distance, std::size_t utterance_len, std::size_t entry_len);

/// Every entry scored, ascending by (distance, word). Throws Errc::empty_utterance.
std::vector<CommandMatch> recognize(std::span<const Phoneme> utterance, const Lexicon& lexicon);

enum class RejectReason { OutOfGrammar, LowConfidence, UnknownWord, NotACommand };

std::string_view to_string(RejectReason r);

struct Decision {
    /// The selected word. Its `accepted` flag is set only if it carries a binding.
    std::optional<CommandMatch> match;
    std::optional<RejectReason> rejection;
    /// When nothing was selected: the refused top match for OutOfGrammar, the
    /// best in-grammar candidate (else the top match) for LowConfidence.
    std::optional<CommandMatch> nearest;

    bool accepted() const { return match && match->accepted; }
};

inline constexpr double kDefaultThreshold = 0.6;

/// Selects the first match in `grammar` with confidence >= threshold.
/// Nothing selected: LowConfidence if the top-ranked match is below threshold,
/// otherwise OutOfGrammar. Selected word without binding: NotACommand.
Decision disambiguate(std::span<const CommandMatch> ranked, const std::set<std::string>& grammar,
                      double threshold = kDefaultThreshold);

/// Exact, case-insensitive lookup of a command word. Throws Errc::unknown_word,
/// including for lexicon words that carry no binding.
Binding interpret_word(std::string_view text, const Lexicon& lexicon);

/// Applies a binding through the registry with Source::Voice and returns the
/// new latch of the affected port. Throws Errc::unknown_channel.
StateChange execute(const Binding& binding, ApplianceRegistry& registry);

}  // namespace hearth::voice
