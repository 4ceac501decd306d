#include "relevancy/transform.hpp"

#include <algorithm>

#include "relevancy/errors.hpp"

namespace relevancy {

namespace {

bool is_mask_composite(std::string_view token) {
    return token.size() > kMaskPrefix.size() && token.substr(0, kMaskPrefix.size()) == kMaskPrefix;
}

uint32_t distinct_tokens(const Corpus& corpus) {
    std::unordered_set<std::string_view> seen;
    for (const Document& doc : corpus.documents)
        for (const std::string& t : doc.tokens) seen.insert(t);
    return static_cast<uint32_t>(seen.size());
}

}  // namespace

std::unordered_set<std::string> selected_terms(const Vocabulary& vocab,
                                               std::span<const uint32_t> selected_ids) {
    std::unordered_set<std::string> out;
    out.reserve(selected_ids.size());
    for (uint32_t id : selected_ids) {
        if (id >= vocab.size()) throw ValidationError("selected feature id out of range");
        out.insert(vocab.terms[id]);
    }
    return out;
}

std::pair<Corpus, TransformReport> rewrite_selected(const Corpus& corpus,
                                                    const std::unordered_set<std::string>& selected) {
    TransformReport report;
    report.method = 1;
    report.vocab_before = distinct_tokens(corpus);

    Corpus out = corpus;
    for (Document& doc : out.documents) {
        std::vector<std::string> kept;
        kept.reserve(doc.tokens.size());
        for (std::string& t : doc.tokens) {
            if (selected.count(t))
                kept.push_back(std::move(t));
            else
                ++report.tokens_removed_or_masked;
        }
        doc.tokens = std::move(kept);
        doc.empty = doc.tokens.empty();
    }
    report.vocab_after = distinct_tokens(out);
    return {std::move(out), report};
}

std::pair<Corpus, TransformReport> mask_low_rank(const Corpus& corpus,
                                                 const std::unordered_set<std::string>& selected,
                                                 const PosTagger& tagger) {
    TransformReport report;
    report.method = 2;
    report.vocab_before = distinct_tokens(corpus);

    std::unordered_set<std::string> composites;
    Corpus out = corpus;
    for (Document& doc : out.documents) {
        for (size_t i = 0; i < doc.tokens.size(); ++i) {
            const std::string& t = doc.tokens[i];
            if (selected.count(t) || is_mask_composite(t)) continue;
            std::string_view left = i > 0 ? std::string_view(doc.tokens[i - 1]) : std::string_view();
            std::string_view right =
                i + 1 < doc.tokens.size() ? std::string_view(doc.tokens[i + 1]) : std::string_view();
            std::string_view tag = tagger.tag(t, left, right);
            if (tag.empty()) throw ValidationError("tagger produced no tag for token '" + t + "'");
            std::string composite = std::string(kMaskPrefix) + std::string(tag);
            composites.insert(composite);
            doc.tokens[i] = std::move(composite);
            ++report.tokens_removed_or_masked;
        }
        doc.empty = doc.tokens.empty();
    }
    report.mask_tags_added = static_cast<uint32_t>(composites.size());
    report.vocab_after = distinct_tokens(out);
    return {std::move(out), report};
}

}  // namespace relevancy
