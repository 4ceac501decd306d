#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace relevancy {

/// Assigns every token exactly one tag from a fixed, enumerable tagset.
/// Implementations must be deterministic and total.
class PosTagger {
public:
    virtual ~PosTagger() = default;
    virtual std::string_view tag(std::string_view token, std::string_view left_context,
                                 std::string_view right_context) const = 0;
    virtual std::span<const std::string_view> tagset() const = 0;
};

/// Lexicon + suffix-rule tagger over the 36-tag Penn Treebank tagset with
/// fallback NN. Context arguments are accepted but unused by the rules.
std::unique_ptr<PosTagger> default_tagger();

}  // namespace relevancy
