#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsd/errors.hpp"
#include "wsd/rng.hpp"
#include "wsd/tokenize.hpp"

namespace wsd {

using json = nlohmann::json;

inline constexpr int kDatasetSchemaVersion = 1;

// Annotation over [start, end) token indices of the citation's token stream.
struct Span {
    int start = 0;
    int end = 0;
    std::string label;

    bool operator==(const Span&) const = default;
};

struct Citation {
    std::string id;
    std::string title;
    std::string abstract;
    std::vector<Span> concepts;                       // label = concept id (CUI)
    std::vector<Span> semtypes;                       // label = semantic-type code
    std::vector<std::pair<int, std::string>> pos;     // token index -> tag

    std::string text() const { return citation_text(title, abstract); }

    bool operator==(const Citation&) const = default;
};

struct Instance {
    std::string citation_id;
    std::string term;
    int position = 0;  // token index of the ambiguous word
    std::string sense;

    bool operator==(const Instance&) const = default;
};

struct InventoryEntry {
    std::vector<std::string> senses;  // ordered; index is the class index
    std::string word_type;            // T, A, or AT

    bool operator==(const InventoryEntry&) const = default;
};

struct SenseInventory {
    std::map<std::string, InventoryEntry> entries;  // term -> entry, ordered

    bool operator==(const SenseInventory&) const = default;
};

struct Dataset {
    std::vector<Citation> citations;
    std::vector<Instance> instances;
    SenseInventory inventory;

    const Citation* find_citation(const std::string& id) const {
        auto it = citation_index_.find(id);
        return it == citation_index_.end() ? nullptr : &citations[it->second];
    }

    void rebuild_index() {
        citation_index_.clear();
        for (std::size_t i = 0; i < citations.size(); ++i)
            citation_index_[citations[i].id] = i;
    }

    bool operator==(const Dataset& o) const {
        return citations == o.citations && instances == o.instances && inventory == o.inventory;
    }

  private:
    std::unordered_map<std::string, std::size_t> citation_index_;
};

namespace detail {
inline void check_span(const Span& s, std::size_t n_tokens, const std::string& cid,
                       const char* layer) {
    if (s.start < 0 || s.end < s.start || static_cast<std::size_t>(s.end) > n_tokens)
        throw DataError("citation " + cid + ": " + layer + " span [" +
                        std::to_string(s.start) + "," + std::to_string(s.end) +
                        ") outside token bounds (" + std::to_string(n_tokens) + " tokens)");
}
}  // namespace detail

// Checks every dataset invariant; throws DataError naming the offender.
inline void validate(Dataset& d) {
    d.rebuild_index();
    std::unordered_set<std::string> ids;
    std::unordered_map<std::string, std::size_t> token_counts;
    for (const Citation& c : d.citations) {
        if (c.id.empty()) throw DataError("citation with empty id");
        if (!ids.insert(c.id).second) throw DataError("duplicate citation id: " + c.id);
        std::size_t n = tokenize(c.text()).size();
        token_counts[c.id] = n;
        for (const Span& s : c.concepts) detail::check_span(s, n, c.id, "concept");
        for (const Span& s : c.semtypes) detail::check_span(s, n, c.id, "semtype");
        for (const auto& [idx, tag] : c.pos) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= n)
                throw DataError("citation " + c.id + ": pos annotation index " +
                                std::to_string(idx) + " outside token bounds");
            if (tag.empty()) throw DataError("citation " + c.id + ": empty pos tag");
        }
    }
    for (const auto& [term, entry] : d.inventory.entries) {
        if (entry.senses.size() < 2)
            throw DataError("term " + term + ": needs at least 2 senses");
        std::set<std::string> uniq(entry.senses.begin(), entry.senses.end());
        if (uniq.size() != entry.senses.size())
            throw DataError("term " + term + ": duplicate sense ids");
        if (entry.word_type != "T" && entry.word_type != "A" && entry.word_type != "AT")
            throw DataError("term " + term + ": word_type must be T, A, or AT");
    }
    std::map<std::pair<std::string, std::string>, int> sense_counts;
    for (const Instance& inst : d.instances) {
        auto tc = token_counts.find(inst.citation_id);
        if (tc == token_counts.end())
            throw DataError("instance references unknown citation: " + inst.citation_id);
        auto inv = d.inventory.entries.find(inst.term);
        if (inv == d.inventory.entries.end())
            throw DataError("instance term not in inventory: " + inst.term);
        const auto& senses = inv->second.senses;
        if (std::find(senses.begin(), senses.end(), inst.sense) == senses.end())
            throw DataError("unknown sense " + inst.sense + " for term " + inst.term);
        if (inst.position < 0 || static_cast<std::size_t>(inst.position) >= tc->second)
            throw DataError("instance position " + std::to_string(inst.position) +
                            " outside citation " + inst.citation_id + " (" +
                            std::to_string(tc->second) + " tokens)");
        sense_counts[{inst.term, inst.sense}]++;
    }
    for (const auto& [term, entry] : d.inventory.entries)
        for (const std::string& s : entry.senses)
            if (sense_counts.find({term, s}) == sense_counts.end())
                throw DataError("term " + term + ": sense " + s + " has no instances");
}

// ---- JSONL serialization -------------------------------------------------

namespace detail {

inline json span_list_to_json(const std::vector<Span>& spans) {
    json arr = json::array();
    for (const Span& s : spans) arr.push_back({s.start, s.end, s.label});
    return arr;
}

inline std::vector<Span> span_list_from_json(const json& arr) {
    std::vector<Span> out;
    for (const json& e : arr) {
        if (!e.is_array() || e.size() != 3)
            throw DataError("annotation span must be [start, end, label]");
        out.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<std::string>()});
    }
    return out;
}

}  // namespace detail

inline json citation_to_json(const Citation& c) {
    json j{{"kind", "citation"}, {"id", c.id}, {"title", c.title}, {"abstract", c.abstract}};
    if (!c.concepts.empty()) j["concepts"] = detail::span_list_to_json(c.concepts);
    if (!c.semtypes.empty()) j["semtypes"] = detail::span_list_to_json(c.semtypes);
    if (!c.pos.empty()) {
        json arr = json::array();
        for (const auto& [idx, tag] : c.pos) arr.push_back({idx, tag});
        j["pos"] = arr;
    }
    return j;
}

inline json instance_to_json(const Instance& i) {
    return json{{"kind", "instance"},
                {"citation", i.citation_id},
                {"term", i.term},
                {"position", i.position},
                {"sense", i.sense}};
}

inline json inventory_entry_to_json(const std::string& term, const InventoryEntry& e) {
    return json{{"kind", "inventory"},
                {"term", term},
                {"senses", e.senses},
                {"word_type", e.word_type}};
}

inline void save_jsonl(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& [term, entry] : d.inventory.entries)
        out << inventory_entry_to_json(term, entry).dump() << '\n';
    for (const Citation& c : d.citations) out << citation_to_json(c).dump() << '\n';
    for (const Instance& i : d.instances) out << instance_to_json(i).dump() << '\n';
    if (!out) throw DataError("write failed: " + path.string());
    out.close();

    json manifest{{"schema_version", kDatasetSchemaVersion},
                  {"tokenizer", kTokenizerFingerprint},
                  {"data", path.filename().string()},
                  {"citations", d.citations.size()},
                  {"instances", d.instances.size()},
                  {"terms", d.inventory.entries.size()}};
    std::ofstream m(path.parent_path() / "dataset.json");
    if (m) m << manifest.dump(2) << '\n';
}

inline Dataset load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());

    auto manifest_path = path.parent_path() / "dataset.json";
    if (std::filesystem::exists(manifest_path)) {
        std::ifstream m(manifest_path);
        json mj;
        try {
            m >> mj;
        } catch (const json::exception& e) {
            throw DataError("bad manifest " + manifest_path.string() + ": " + e.what());
        }
        if (mj.value("data", path.filename().string()) == path.filename().string()) {
            if (mj.value("schema_version", kDatasetSchemaVersion) != kDatasetSchemaVersion)
                throw DataError("unsupported dataset schema version in manifest");
            std::string fp = mj.value("tokenizer", kTokenizerFingerprint);
            if (fp != kTokenizerFingerprint)
                throw DataError("tokenizer fingerprint mismatch: dataset indexed under '" + fp +
                                "', this build uses '" + kTokenizerFingerprint + "'");
        }
    }

    Dataset d;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
        }
        try {
            const std::string kind = j.at("kind").get<std::string>();
            if (kind == "citation") {
                Citation c;
                c.id = j.at("id").get<std::string>();
                c.title = j.at("title").get<std::string>();
                c.abstract = j.at("abstract").get<std::string>();
                if (j.contains("concepts"))
                    c.concepts = detail::span_list_from_json(j["concepts"]);
                if (j.contains("semtypes"))
                    c.semtypes = detail::span_list_from_json(j["semtypes"]);
                if (j.contains("pos"))
                    for (const json& e : j["pos"])
                        c.pos.emplace_back(e.at(0).get<int>(), e.at(1).get<std::string>());
                d.citations.push_back(std::move(c));
            } else if (kind == "instance") {
                Instance inst;
                inst.citation_id = j.at("citation").get<std::string>();
                inst.term = j.at("term").get<std::string>();
                inst.position = j.at("position").get<int>();
                inst.sense = j.at("sense").get<std::string>();
                d.instances.push_back(std::move(inst));
            } else if (kind == "inventory") {
                InventoryEntry e;
                e.senses = j.at("senses").get<std::vector<std::string>>();
                e.word_type = j.at("word_type").get<std::string>();
                d.inventory.entries[j.at("term").get<std::string>()] = std::move(e);
            } else {
                throw DataError("unknown record kind: " + kind);
            }
        } catch (const json::exception& e) {
            throw DataError("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    validate(d);
    return d;
}

// ---- synthetic pseudo-word generation -------------------------------------

struct TopicParams {
    int topic_vocab = 50;    // distinct words per sense topic
    int shared_vocab = 100;  // pool shared by all topics
    double overlap = 0.0;    // probability a context word is drawn from the shared pool
    int ctx_min = 15;
    int ctx_max = 40;
};

namespace detail {
inline std::string topic_word(int term, int sense, int k) {
    return "t" + std::to_string(term) + "s" + std::to_string(sense) + "w" + std::to_string(k);
}
inline std::string shared_word(int k) { return "shw" + std::to_string(k); }
}  // namespace detail

// Contexts are bags of words: each token comes from the sense's own topic
// vocabulary or, with probability `overlap`, from the shared pool; the
// ambiguous token is inserted exactly once at a recorded position.
inline Dataset generate_pseudoword_dataset(std::uint64_t seed, int n_terms, int senses_per_term,
                                           int instances_per_sense, const TopicParams& topic,
                                           std::vector<std::string>* warnings = nullptr) {
    if (senses_per_term < 2) throw UsageError("senses_per_term must be >= 2");
    if (n_terms < 1) throw UsageError("n_terms must be >= 1");
    if (instances_per_sense < 1) throw UsageError("instances_per_sense must be >= 1");
    if (topic.topic_vocab < 1) throw UsageError("topic_vocab must be >= 1");
    if (topic.overlap < 0.0 || topic.overlap > 1.0)
        throw UsageError("overlap must be in [0,1]");
    if (topic.ctx_min < 1 || topic.ctx_max < topic.ctx_min)
        throw UsageError("context length range invalid");
    if (topic.overlap > 0.0 && topic.shared_vocab < 1)
        throw UsageError("overlap > 0 requires shared_vocab >= 1");
    if (warnings && topic.overlap >= 1.0)
        warnings->push_back(
            "degenerate topics: overlap >= 1 makes all sense distributions identical");

    Rng root(seed);
    Dataset d;
    for (int t = 0; t < n_terms; ++t) {
        const std::string term = "term" + std::to_string(t);
        InventoryEntry entry;
        static const char* kTypes[3] = {"T", "A", "AT"};
        entry.word_type = kTypes[t % 3];
        for (int s = 0; s < senses_per_term; ++s)
            entry.senses.push_back(term + ".s" + std::to_string(s));
        d.inventory.entries[term] = entry;

        for (int s = 0; s < senses_per_term; ++s) {
            for (int n = 0; n < instances_per_sense; ++n) {
                Rng rng = root.substream("gen/" + term + "/s" + std::to_string(s) + "/i" +
                                         std::to_string(n));
                int len = topic.ctx_min +
                          static_cast<int>(rng.below(
                              static_cast<std::uint64_t>(topic.ctx_max - topic.ctx_min + 1)));
                std::vector<std::string> words;
                words.reserve(static_cast<std::size_t>(len) + 1);
                for (int w = 0; w < len; ++w) {
                    if (topic.overlap > 0.0 && rng.uniform() < topic.overlap)
                        words.push_back(detail::shared_word(
                            static_cast<int>(rng.below(topic.shared_vocab))));
                    else
                        words.push_back(detail::topic_word(
                            t, s, static_cast<int>(rng.below(topic.topic_vocab))));
                }
                int pos = static_cast<int>(rng.below(static_cast<std::uint64_t>(len) + 1));
                words.insert(words.begin() + pos, term);

                Citation c;
                c.id = "pw" + std::to_string(t) + ".s" + std::to_string(s) + "." +
                       std::to_string(n);
                std::string abstract;
                for (std::size_t w = 0; w < words.size(); ++w) {
                    if (w) abstract.push_back(' ');
                    abstract += words[w];
                }
                c.abstract = std::move(abstract);
                d.citations.push_back(std::move(c));

                d.instances.push_back({d.citations.back().id, term, pos, entry.senses[s]});
            }
        }
    }
    validate(d);
    return d;
}

// Documents drawn from the same topic distributions but without the ambiguous
// token; used to train embeddings on text disjoint from the evaluation
// citations, mirroring the corpus-exclusion protocol.
inline std::vector<std::string> generate_background_corpus(std::uint64_t seed, int n_terms,
                                                           int senses_per_term,
                                                           int docs_per_topic,
                                                           const TopicParams& topic) {
    if (docs_per_topic < 1) throw UsageError("docs_per_topic must be >= 1");
    Rng root(seed);
    std::vector<std::string> docs;
    for (int t = 0; t < n_terms; ++t) {
        for (int s = 0; s < senses_per_term; ++s) {
            for (int n = 0; n < docs_per_topic; ++n) {
                Rng rng = root.substream("bg/t" + std::to_string(t) + "/s" + std::to_string(s) +
                                         "/d" + std::to_string(n));
                int len = topic.ctx_min +
                          static_cast<int>(rng.below(
                              static_cast<std::uint64_t>(topic.ctx_max - topic.ctx_min + 1)));
                std::string doc;
                for (int w = 0; w < len; ++w) {
                    if (w) doc.push_back(' ');
                    if (topic.overlap > 0.0 && rng.uniform() < topic.overlap)
                        doc += detail::shared_word(
                            static_cast<int>(rng.below(topic.shared_vocab)));
                    else
                        doc += detail::topic_word(
                            t, s, static_cast<int>(rng.below(topic.topic_vocab)));
                }
                docs.push_back(std::move(doc));
            }
        }
    }
    return docs;
}

// ---- groupings -------------------------------------------------------------

inline std::map<int, std::vector<std::string>> group_by_senses(const Dataset& d) {
    std::map<int, std::vector<std::string>> groups;
    for (const auto& [term, entry] : d.inventory.entries)
        groups[static_cast<int>(entry.senses.size())].push_back(term);
    return groups;
}

inline std::map<std::string, std::vector<std::string>> group_by_type(const Dataset& d) {
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& [term, entry] : d.inventory.entries)
        groups[entry.word_type].push_back(term);
    return groups;
}

}  // namespace wsd
