#pragma once

// Hand-built datasets and embedding models for evaluation tests.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "wsd/corpus.hpp"
#include "wsd/embeddings.hpp"

namespace testutil {

// Builds datasets instance by instance with full control over the contexts.
struct DatasetBuilder {
    wsd::Dataset d;
    int next_citation = 0;

    void add_term(const std::string& term, int n_senses, const std::string& word_type = "T") {
        wsd::InventoryEntry e;
        for (int s = 0; s < n_senses; ++s) e.senses.push_back(term + ".s" + std::to_string(s));
        e.word_type = word_type;
        d.inventory.entries[term] = std::move(e);
    }

    // Inserts the term itself into `context` at `pos` and records the instance.
    std::size_t add_instance(const std::string& term, int sense,
                             std::vector<std::string> context, int pos = 0) {
        pos = std::min<int>(pos, static_cast<int>(context.size()));
        context.insert(context.begin() + pos, term);
        wsd::Citation c;
        c.id = "c" + std::to_string(next_citation++);
        std::string abstract;
        for (std::size_t w = 0; w < context.size(); ++w) {
            if (w) abstract.push_back(' ');
            abstract += context[w];
        }
        c.abstract = std::move(abstract);
        d.citations.push_back(std::move(c));
        d.instances.push_back(
            {d.citations.back().id, term, pos, term + ".s" + std::to_string(sense)});
        return d.instances.size() - 1;
    }

    wsd::Dataset finish() {
        wsd::validate(d);
        return d;
    }
};

inline wsd::EmbeddingModel toy_model(
    const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
    wsd::EmbeddingModel m;
    m.meta.d = static_cast<int>(rows.front().second.size());
    m.meta.min_count = 1;
    for (const auto& [word, v] : rows) {
        m.vocab.push_back(word);
        m.counts.push_back(1);
        m.vectors.insert(m.vectors.end(), v.begin(), v.end());
    }
    m.rebuild_index();
    return m;
}

// fish/music pseudo-sense data with disjoint context vocabularies
inline wsd::Dataset disjoint_vocab_dataset(int per_sense) {
    static const std::vector<std::string> kFish = {"river", "water", "lake", "fin"};
    static const std::vector<std::string> kMusic = {"guitar", "chord", "player", "stage"};
    DatasetBuilder b;
    b.add_term("bass", 2, "AT");
    for (int s = 0; s < 2; ++s) {
        const auto& pool = s == 0 ? kFish : kMusic;
        for (int n = 0; n < per_sense; ++n) {
            std::vector<std::string> ctx = {pool[n % 4], pool[(n + 1) % 4], pool[(n + 2) % 4]};
            b.add_instance("bass", s, ctx, n % 3);
        }
    }
    return b.finish();
}

}  // namespace testutil
