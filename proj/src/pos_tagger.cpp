#include "relevancy/pos_tagger.hpp"

#include <array>
#include <cctype>
#include <string>
#include <unordered_map>

namespace relevancy {

namespace {

// The 36 Penn Treebank word-level tags.
constexpr std::array<std::string_view, 36> kPennTags = {
    "CC", "CD",  "DT",  "EX",  "FW",  "IN",  "JJ",  "JJR", "JJS", "LS",  "MD",  "NN",
    "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM",
    "TO", "UH",  "VB",  "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP",  "WP$", "WRB"};

const std::unordered_map<std::string_view, std::string_view>& lexicon() {
    static const std::unordered_map<std::string_view, std::string_view> lex = {
        {"the", "DT"},   {"a", "DT"},      {"an", "DT"},    {"this", "DT"},  {"that", "DT"},
        {"these", "DT"}, {"those", "DT"},  {"no", "DT"},    {"every", "DT"}, {"each", "DT"},
        {"some", "DT"},  {"any", "DT"},
        {"all", "PDT"},  {"both", "PDT"},  {"half", "PDT"},
        {"and", "CC"},   {"or", "CC"},     {"but", "CC"},   {"nor", "CC"},   {"yet", "CC"},
        {"in", "IN"},    {"on", "IN"},     {"at", "IN"},    {"of", "IN"},    {"for", "IN"},
        {"with", "IN"},  {"from", "IN"},   {"by", "IN"},    {"about", "IN"}, {"into", "IN"},
        {"over", "IN"},  {"under", "IN"},  {"after", "IN"}, {"before", "IN"},
        {"between", "IN"}, {"during", "IN"}, {"against", "IN"}, {"through", "IN"},
        {"if", "IN"},    {"because", "IN"}, {"while", "IN"}, {"as", "IN"},
        {"to", "TO"},
        {"is", "VBZ"},   {"was", "VBD"},   {"are", "VBP"},  {"were", "VBD"}, {"am", "VBP"},
        {"be", "VB"},    {"been", "VBN"},  {"being", "VBG"},
        {"has", "VBZ"},  {"have", "VBP"},  {"had", "VBD"},  {"having", "VBG"},
        {"does", "VBZ"}, {"do", "VBP"},    {"did", "VBD"},  {"done", "VBN"},
        {"will", "MD"},  {"would", "MD"},  {"can", "MD"},   {"could", "MD"}, {"may", "MD"},
        {"might", "MD"}, {"must", "MD"},   {"shall", "MD"}, {"should", "MD"},
        {"i", "PRP"},    {"you", "PRP"},   {"he", "PRP"},   {"she", "PRP"},  {"it", "PRP"},
        {"we", "PRP"},   {"they", "PRP"},  {"me", "PRP"},   {"him", "PRP"},  {"her", "PRP"},
        {"us", "PRP"},   {"them", "PRP"},
        {"my", "PRP$"},  {"your", "PRP$"}, {"his", "PRP$"}, {"its", "PRP$"},
        {"our", "PRP$"}, {"their", "PRP$"},
        {"not", "RB"},   {"never", "RB"},  {"very", "RB"},  {"too", "RB"},   {"also", "RB"},
        {"just", "RB"},  {"then", "RB"},   {"now", "RB"},   {"here", "RB"},  {"so", "RB"},
        {"there", "EX"},
        {"who", "WP"},   {"whom", "WP"},   {"what", "WP"},  {"whose", "WP$"},
        {"which", "WDT"},
        {"when", "WRB"}, {"where", "WRB"}, {"why", "WRB"},  {"how", "WRB"},
        {"oh", "UH"},    {"hey", "UH"},    {"wow", "UH"},   {"yes", "UH"},   {"ok", "UH"},
        {"up", "RP"},    {"out", "RP"},    {"off", "RP"},   {"down", "RP"},
        {"more", "JJR"}, {"less", "JJR"},  {"most", "JJS"}, {"least", "JJS"},
        {"good", "JJ"},  {"new", "JJ"},    {"old", "JJ"},   {"same", "JJ"},  {"other", "JJ"},
    };
    return lex;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

class RuleTagger final : public PosTagger {
public:
    std::string_view tag(std::string_view token, std::string_view, std::string_view) const override {
        if (token.empty()) return "SYM";

        std::string lower(token);
        for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (auto it = lexicon().find(lower); it != lexicon().end()) return it->second;

        bool any_alnum = false;
        bool any_alpha = false;
        bool any_digit = false;
        for (char c : token) {
            unsigned char u = static_cast<unsigned char>(c);
            any_alnum |= std::isalnum(u) != 0;
            any_alpha |= std::isalpha(u) != 0;
            any_digit |= std::isdigit(u) != 0;
        }
        if (!any_alnum) return "SYM";
        if (any_digit && !any_alpha) return "CD";

        const std::string_view w = lower;
        if (ends_with(w, "'s")) return "POS";
        if (w.size() > 4 && ends_with(w, "ing")) return "VBG";
        if (w.size() > 4 && ends_with(w, "ed")) return "VBD";
        if (w.size() > 3 && ends_with(w, "ly")) return "RB";
        if (w.size() > 4 && ends_with(w, "est")) return "JJS";
        if (w.size() > 4 && ends_with(w, "ize")) return "VB";
        if (w.size() > 4 && ends_with(w, "ise")) return "VB";
        if (ends_with(w, "ous") || ends_with(w, "ful") || ends_with(w, "ive") ||
            ends_with(w, "able") || ends_with(w, "ible") || ends_with(w, "ish") ||
            ends_with(w, "ic") || ends_with(w, "al"))
            return "JJ";
        if (ends_with(w, "tion") || ends_with(w, "sion") || ends_with(w, "ment") ||
            ends_with(w, "ness") || ends_with(w, "ship") || ends_with(w, "ity"))
            return "NN";
        if (w.size() > 4 && ends_with(w, "er")) return "JJR";
        if (std::isupper(static_cast<unsigned char>(token.front())))
            return ends_with(w, "s") ? "NNPS" : "NNP";
        if (w.size() > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us"))
            return "NNS";
        return "NN";
    }

    std::span<const std::string_view> tagset() const override {
        return {kPennTags.data(), kPennTags.size()};
    }
};

}  // namespace

std::unique_ptr<PosTagger> default_tagger() { return std::make_unique<RuleTagger>(); }

}  // namespace relevancy
