#include "relevancy/synthetic.hpp"

#include <fstream>

#include "relevancy/errors.hpp"
#include "relevancy/rng.hpp"
#include "relevancy/serialize.hpp"

namespace relevancy {

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
    if (spec.num_classes < 2) throw ValidationError("synthetic corpus needs at least 2 classes");
    if (spec.predictive_per_class < 1)
        throw ValidationError("need at least 1 predictive token per class");
    if (spec.noise_tokens < 1) throw ValidationError("need at least 1 noise token");
    if (spec.doc_len < 2) throw ValidationError("document length must be at least 2");
    if (spec.docs_per_class < 1) throw ValidationError("need at least 1 document per class");
    if (spec.emission_prob < 0.0 || spec.emission_prob > 1.0)
        throw ValidationError("emission probability must lie in [0, 1]");

    SyntheticCorpus out;
    std::vector<std::vector<std::string>> predictive(spec.num_classes);
    for (uint32_t c = 0; c < spec.num_classes; ++c) {
        out.corpus.intern_label("class" + std::to_string(c));
        predictive[c].reserve(spec.predictive_per_class);
        for (uint32_t p = 0; p < spec.predictive_per_class; ++p) {
            predictive[c].push_back("key" + std::to_string(c) + "x" + std::to_string(p));
            out.planted.push_back(predictive[c].back());
        }
    }
    std::vector<std::string> noise;
    noise.reserve(spec.noise_tokens);
    for (uint32_t z = 0; z < spec.noise_tokens; ++z) noise.push_back("fill" + std::to_string(z));

    Rng rng(derive_seed(spec.seed, 0x5f17));
    uint32_t doc_id = 0;
    for (uint32_t c = 0; c < spec.num_classes; ++c) {
        for (uint32_t d = 0; d < spec.docs_per_class; ++d) {
            Document doc;
            doc.id = doc_id++;
            doc.label = c;
            doc.tokens.reserve(spec.doc_len);
            for (uint32_t pos = 0; pos < spec.doc_len; ++pos) {
                if (rng.next_double() < spec.emission_prob)
                    doc.tokens.push_back(predictive[c][rng.next_below(predictive[c].size())]);
                else
                    doc.tokens.push_back(noise[rng.next_below(noise.size())]);
            }
            out.corpus.documents.push_back(std::move(doc));
        }
    }
    return out;
}

void write_corpus_tsv(const Corpus& corpus, const std::string& path) {
    AtomicWriter writer(path);
    std::ofstream& os = writer.stream();
    for (const Document& doc : corpus.documents) {
        os << corpus.label_names[doc.label] << '\t';
        for (size_t i = 0; i < doc.tokens.size(); ++i) {
            if (i) os << ' ';
            os << doc.tokens[i];
        }
        os << '\n';
    }
    writer.commit();
}

}  // namespace relevancy
