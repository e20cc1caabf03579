#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsd/corpus.hpp"
#include "wsd/errors.hpp"
#include "wsd/tokenize.hpp"

namespace wsd {

// Namespaced feature keys: uni:, bi:, pos:, col:, cui:, st: (and wea:/wes:
// for dense embedding blocks downstream). Values are counts for bag families
// and 1.0 for indicator slots.
using SparseFeatures = std::map<std::string, double>;

inline constexpr const char* kNullTag = "NULL";

// Bag of stems over the whole citation, skipping the target occurrence only.
inline SparseFeatures extract_unigrams(const TokenStream& ts, int target) {
    SparseFeatures f;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (static_cast<int>(i) == target) continue;
        f["uni:" + ts[i].stem] += 1.0;
    }
    return f;
}

// Adjacent same-sentence stem pairs, plus the unigram family (bigram runs are
// defined in combination with unigrams). Pairs touching the target are skipped.
inline SparseFeatures extract_bigrams(const TokenStream& ts, int target) {
    SparseFeatures f = extract_unigrams(ts, target);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        if (static_cast<int>(i) == target || static_cast<int>(i + 1) == target) continue;
        if (ts[i].sentence != ts[i + 1].sentence) continue;
        f["bi:" + ts[i].stem + "_" + ts[i + 1].stem] += 1.0;
    }
    return f;
}

// Most-frequent-tag lookup tagger for tests and synthetic data; production
// runs are expected to carry ingested pos annotations on citations.
class LookupPosTagger {
  public:
    LookupPosTagger() {
        static const std::pair<const char*, const char*> kLexicon[] = {
            {"a", "det"},      {"an", "det"},      {"the", "det"},
            {"and", "conj"},   {"or", "conj"},     {"but", "conj"},   {"nor", "conj"},
            {"of", "prep"},    {"in", "prep"},     {"on", "prep"},    {"at", "prep"},
            {"by", "prep"},    {"for", "prep"},    {"with", "prep"},  {"from", "prep"},
            {"to", "prep"},    {"into", "prep"},   {"during", "prep"},{"between", "prep"},
            {"after", "prep"}, {"before", "prep"}, {"under", "prep"}, {"over", "prep"},
            {"is", "aux"},     {"are", "aux"},     {"was", "aux"},    {"were", "aux"},
            {"be", "aux"},     {"been", "aux"},    {"being", "aux"},  {"has", "aux"},
            {"have", "aux"},   {"had", "aux"},     {"do", "aux"},     {"does", "aux"},
            {"did", "aux"},    {"can", "aux"},     {"could", "aux"},  {"may", "aux"},
            {"might", "aux"},  {"shall", "aux"},   {"should", "aux"}, {"will", "aux"},
            {"would", "aux"},  {"must", "aux"},
            {"it", "pron"},    {"its", "pron"},    {"this", "pron"},  {"that", "pron"},
            {"these", "pron"}, {"those", "pron"},  {"we", "pron"},    {"they", "pron"},
            {"he", "pron"},    {"she", "pron"},    {"who", "pron"},   {"which", "pron"},
            {"not", "adv"},    {"also", "adv"},    {"very", "adv"},   {"more", "adv"},
            {"most", "adv"},   {"less", "adv"},    {"only", "adv"},   {"however", "adv"},
        };
        for (const auto& [w, t] : kLexicon) lexicon_[w] = t;
    }

    std::string tag(const std::string& lowercase_surface) const {
        auto it = lexicon_.find(lowercase_surface);
        return it == lexicon_.end() ? "noun" : it->second;
    }

  private:
    std::unordered_map<std::string, std::string> lexicon_;
};

namespace detail {

// POS tag for an absolute token index: annotation layer first, tagger
// fallback; throws when neither source is available.
struct PosSource {
    const std::vector<std::pair<int, std::string>>* annotations = nullptr;
    const LookupPosTagger* tagger = nullptr;

    std::string tag_at(const TokenStream& ts, int idx) const {
        if (annotations && !annotations->empty()) {
            for (const auto& [i, t] : *annotations)
                if (i == idx) return t;
            // gap in an annotated citation: fall back to the tagger or the default tag
        }
        if (tagger) return tagger->tag(ts[static_cast<std::size_t>(idx)].surface);
        if (annotations && !annotations->empty()) return "noun";
        throw DataError("no POS available: citation has no pos annotations and no tagger given");
    }

    bool available() const { return (annotations && !annotations->empty()) || tagger; }
};

inline std::string offset_label(int off) {
    return off < 0 ? std::to_string(off) : "+" + std::to_string(off);
}

}  // namespace detail

// POS of the three words before and after the target; offsets that leave the
// target's sentence contribute the NULL tag. Exactly 6 features.
inline SparseFeatures extract_pos_window(const TokenStream& ts, int target,
                                         const detail::PosSource& src) {
    if (!src.available())
        throw DataError("no POS available: citation has no pos annotations and no tagger given");
    SparseFeatures f;
    const int n = static_cast<int>(ts.size());
    const int sent = ts[static_cast<std::size_t>(target)].sentence;
    for (int off : {-3, -2, -1, 1, 2, 3}) {
        int idx = target + off;
        std::string tag = kNullTag;
        if (idx >= 0 && idx < n && ts[static_cast<std::size_t>(idx)].sentence == sent)
            tag = src.tag_at(ts, idx);
        f["pos:" + detail::offset_label(off) + ":" + tag] = 1.0;
    }
    return f;
}

inline SparseFeatures extract_pos_window(const TokenStream& ts, const Citation& c, int target,
                                         const LookupPosTagger* tagger = nullptr) {
    detail::PosSource src;
    if (!c.pos.empty()) src.annotations = &c.pos;
    src.tagger = tagger;
    return extract_pos_window(ts, target, src);
}

// The 11 local collocation slots: the ordered word sequence from offset i to
// offset j around the target, inside its sentence; position 0 is skipped and
// out-of-sentence positions contribute NULL. Exactly 11 features.
inline SparseFeatures extract_collocations(const TokenStream& ts, int target) {
    static constexpr std::pair<int, int> kSlots[11] = {
        {-2, -2}, {-1, -1}, {1, 1}, {2, 2}, {-2, -1}, {-1, 1},
        {1, 2},   {-3, -1}, {-2, 1}, {-1, 2}, {1, 3},
    };
    SparseFeatures f;
    const int n = static_cast<int>(ts.size());
    const int sent = ts[static_cast<std::size_t>(target)].sentence;
    for (const auto& [i, j] : kSlots) {
        std::string words;
        for (int off = i; off <= j; ++off) {
            if (off == 0) continue;
            if (!words.empty()) words.push_back('_');
            int idx = target + off;
            if (idx >= 0 && idx < n && ts[static_cast<std::size_t>(idx)].sentence == sent)
                words += ts[static_cast<std::size_t>(idx)].surface;
            else
                words += kNullTag;
        }
        f["col:" + detail::offset_label(i) + "," + detail::offset_label(j) + ":" + words] = 1.0;
    }
    return f;
}

namespace detail {
inline SparseFeatures count_spans(const std::vector<Span>& spans, const char* prefix,
                                  const char* layer, bool strict) {
    if (spans.empty() && strict) throw DataError(std::string("missing annotations: ") + layer);
    SparseFeatures f;
    for (const Span& s : spans) f[std::string(prefix) + s.label] += 1.0;
    return f;
}
}  // namespace detail

// Bag of concept ids over the citation.
inline SparseFeatures extract_concepts(const Citation& c, bool strict = true) {
    return detail::count_spans(c.concepts, "cui:", "concepts", strict);
}

// Bag of semantic-type codes over the citation.
inline SparseFeatures extract_semtypes(const Citation& c, bool strict = true) {
    return detail::count_spans(c.semtypes, "st:", "semtypes", strict);
}

// Key-wise union; a collision within a namespace sums values.
inline SparseFeatures combine(const std::vector<SparseFeatures>& feature_sets) {
    SparseFeatures out;
    for (const SparseFeatures& f : feature_sets)
        for (const auto& [k, v] : f) out[k] += v;
    return out;
}

// One instance per line: `instance-id TAB sense TAB key:value ...`, keys in
// sorted order (map iteration), for diff-based regression testing.
inline void write_feature_line(std::ostream& out, const std::string& instance_id,
                               const std::string& sense, const SparseFeatures& f) {
    out << instance_id << '\t' << sense << '\t';
    bool first = true;
    for (const auto& [k, v] : f) {
        if (!first) out << ' ';
        first = false;
        out << k << ':' << v;
    }
    out << '\n';
}

}  // namespace wsd
