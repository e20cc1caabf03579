#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "wsd/rng.hpp"
#include "wsd/textproc.hpp"

using wsd::SparseFeatures;
using wsd::TokenStream;

TEST_CASE("tokenize basics") {
    CHECK(wsd::tokenize("").empty());

    TokenStream ts = wsd::tokenize("Charting by exception:");
    REQUIRE(ts.size() == 3);
    CHECK(ts[0].surface == "charting");
    CHECK(ts[1].surface == "by");
    CHECK(ts[2].surface == "exception");
    CHECK(ts[0].stem == "chart");
    CHECK(ts[1].stem == "by");
    CHECK(ts[2].stem == "except");
    CHECK(ts[2].sentence == 0);

    TokenStream single = wsd::tokenize("chart");
    REQUIRE(single.size() == 1);
    CHECK(single[0].surface == "chart");
}

TEST_CASE("sentence boundaries need punctuation, whitespace, then uppercase") {
    TokenStream ts = wsd::tokenize("Cells grow. The end? Yes! and on. next stays");
    REQUIRE(ts.size() == 9);
    CHECK(ts[0].sentence == 0);  // cells
    CHECK(ts[1].sentence == 0);  // grow
    CHECK(ts[2].sentence == 1);  // the
    CHECK(ts[3].sentence == 1);  // end
    CHECK(ts[4].sentence == 2);  // yes
    CHECK(ts[5].sentence == 2);  // "! and" lowercase -> no boundary
    CHECK(ts[6].sentence == 2);  // on
    CHECK(ts[7].sentence == 2);  // ". next" lowercase -> no boundary
    CHECK(ts[8].sentence == 2);

    // title/abstract join: terminal punctuation + newline + uppercase splits
    TokenStream joined = wsd::tokenize(wsd::citation_text("A title.", "The abstract"));
    REQUIRE(joined.size() == 4);
    CHECK(joined[1].sentence == 0);
    CHECK(joined[2].sentence == 1);
}

TEST_CASE("mixed alphanumeric tokens keep surface as stem") {
    TokenStream ts = wsd::tokenize("IL-2 and CD4+ cells");
    REQUIRE(ts.size() == 5);
    CHECK(ts[0].surface == "il");
    CHECK(ts[1].surface == "2");
    CHECK(ts[1].stem == "2");
    CHECK(ts[2].surface == "and");
    CHECK(ts[3].surface == "cd4");
    CHECK(ts[3].stem == "cd4");
    CHECK(ts[4].stem == "cell");
}

TEST_CASE("token stream invariants on assorted text") {
    wsd::Rng rng(31);
    std::vector<std::string> pieces = {"Word", "cells.",  "Try?",  "IL-2", "x",
                                       "End!", "beta,",   "Gamma", "42",   "mid-dose"};
    for (int round = 0; round < 50; ++round) {
        std::string text;
        for (int i = 0; i < 30; ++i) {
            text += pieces[rng.below(pieces.size())];
            text += (rng.below(5) == 0) ? "\n" : " ";
        }
        TokenStream ts = wsd::tokenize(text);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (i) CHECK(ts[i].sentence >= ts[i - 1].sentence);
            for (char c : ts[i].stem) CHECK_FALSE((c >= 'A' && c <= 'Z'));
            CHECK_FALSE(ts[i].surface.empty());
        }
    }
}

static int count_tokens(const SparseFeatures& f, const std::string& prefix) {
    int total = 0;
    for (const auto& [k, v] : f)
        if (k.rfind(prefix, 0) == 0) total += static_cast<int>(v);
    return total;
}

TEST_CASE("unigrams count stems and exclude only the target occurrence") {
    TokenStream ts = wsd::tokenize("a b a nutrition");
    SparseFeatures f = wsd::extract_unigrams(ts, 3);
    REQUIRE(f.size() == 2);
    CHECK(f.at("uni:a") == 2.0);
    CHECK(f.at("uni:b") == 1.0);

    // another occurrence of the same surface stays
    TokenStream ts2 = wsd::tokenize("a b a");
    SparseFeatures f2 = wsd::extract_unigrams(ts2, 0);
    CHECK(f2.at("uni:a") == 1.0);
    CHECK(f2.at("uni:b") == 1.0);
}

TEST_CASE("unigram totals equal token count minus one") {
    wsd::Rng rng(17);
    const std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "alpha"};
    for (int round = 0; round < 30; ++round) {
        int n = 5 + static_cast<int>(rng.below(20));
        std::string text;
        for (int i = 0; i < n; ++i) {
            if (i) text += ' ';
            text += words[rng.below(words.size())];
        }
        TokenStream ts = wsd::tokenize(text);
        int target = static_cast<int>(rng.below(ts.size()));
        SparseFeatures f = wsd::extract_unigrams(ts, target);
        CHECK(count_tokens(f, "uni:") == static_cast<int>(ts.size()) - 1);
    }
}

TEST_CASE("bigrams stay within sentences, skip the target, and include unigrams") {
    TokenStream ts = wsd::tokenize("a b a nutrition");
    SparseFeatures f = wsd::extract_bigrams(ts, 3);
    CHECK(f.at("bi:a_b") == 1.0);
    CHECK(f.at("bi:b_a") == 1.0);
    CHECK(f.count("bi:a_nutrit") == 0);
    CHECK(f.at("uni:a") == 2.0);

    TokenStream sent = wsd::tokenize("one two. Three four nutrition");
    SparseFeatures g = wsd::extract_bigrams(sent, 4);
    CHECK(g.count("bi:two_three") == 0);
    CHECK(g.at("bi:three_four") == 1.0);
}

TEST_CASE("pos window matches the worked nutrition example") {
    TokenStream ts = wsd::tokenize("Patients at risk or with nutrition education needs are identified");
    REQUIRE(ts[5].surface == "nutrition");
    wsd::LookupPosTagger tagger;
    SparseFeatures f = wsd::extract_pos_window(ts, 5, {nullptr, &tagger});
    REQUIRE(f.size() == 6);
    CHECK(f.count("pos:-3:noun") == 1);
    CHECK(f.count("pos:-2:conj") == 1);
    CHECK(f.count("pos:-1:prep") == 1);
    CHECK(f.count("pos:+1:noun") == 1);
    CHECK(f.count("pos:+2:noun") == 1);
    CHECK(f.count("pos:+3:aux") == 1);
}

TEST_CASE("pos window uses NULL outside the sentence") {
    TokenStream ts = wsd::tokenize("Grow up. Nutrition helps always here now");
    REQUIRE(ts[2].surface == "nutrition");
    wsd::LookupPosTagger tagger;
    SparseFeatures f = wsd::extract_pos_window(ts, 2, {nullptr, &tagger});
    CHECK(f.count("pos:-1:NULL") == 1);
    CHECK(f.count("pos:-2:NULL") == 1);
    CHECK(f.count("pos:-3:NULL") == 1);
    CHECK(f.count("pos:+1:noun") == 1);
}

TEST_CASE("pos window prefers citation annotations and errors without any source") {
    TokenStream ts = wsd::tokenize("alpha beta gamma");
    wsd::Citation c;
    c.pos = {{0, "verb"}, {1, "noun"}, {2, "adj"}};
    SparseFeatures f = wsd::extract_pos_window(ts, c, 1);
    CHECK(f.count("pos:-1:verb") == 1);
    CHECK(f.count("pos:+1:adj") == 1);

    wsd::Citation bare;
    CHECK_THROWS_AS(wsd::extract_pos_window(ts, bare, 1), wsd::DataError);
}

TEST_CASE("pos window never crosses sentence boundaries") {
    wsd::Rng rng(23);
    for (int round = 0; round < 40; ++round) {
        std::string text;
        int sentences = 2 + static_cast<int>(rng.below(3));
        for (int s = 0; s < sentences; ++s) {
            int len = 1 + static_cast<int>(rng.below(6));
            for (int i = 0; i < len; ++i) text += (i ? " w" : "Start");
            text += ". ";
        }
        TokenStream ts = wsd::tokenize(text);
        wsd::LookupPosTagger tagger;
        int target = static_cast<int>(rng.below(ts.size()));
        SparseFeatures f = wsd::extract_pos_window(ts, target, {nullptr, &tagger});
        REQUIRE(f.size() == 6);
        for (int off : {-3, -2, -1, 1, 2, 3}) {
            int idx = target + off;
            bool in_sent = idx >= 0 && idx < static_cast<int>(ts.size()) &&
                           ts[idx].sentence == ts[target].sentence;
            std::string key = "pos:" + std::string(off < 0 ? "" : "+") + std::to_string(off) + ":";
            bool has_null = f.count(key + "NULL") == 1;
            CHECK(has_null == !in_sent);
        }
    }
}

TEST_CASE("collocations match the worked nutrition example") {
    TokenStream ts = wsd::tokenize("Patients at risk or with nutrition education needs are identified");
    SparseFeatures f = wsd::extract_collocations(ts, 5);
    REQUIRE(f.size() == 11);
    CHECK(f.count("col:-2,-1:or_with") == 1);
    CHECK(f.count("col:-1,+1:with_education") == 1);
    CHECK(f.count("col:+1,+2:education_needs") == 1);
    CHECK(f.count("col:-3,-1:risk_or_with") == 1);
    CHECK(f.count("col:+1,+3:education_needs_are") == 1);
    CHECK(f.count("col:-1,-1:with") == 1);
    CHECK(f.count("col:+2,+2:education") == 0);
    CHECK(f.count("col:+2,+2:needs") == 1);
}

TEST_CASE("collocations pad with NULL at sentence start") {
    TokenStream ts = wsd::tokenize("nutrition education needs are next");
    SparseFeatures f = wsd::extract_collocations(ts, 0);
    CHECK(f.count("col:-2,-2:NULL") == 1);
    CHECK(f.count("col:-2,-1:NULL_NULL") == 1);
    CHECK(f.count("col:-1,+1:NULL_education") == 1);
    CHECK(f.count("col:+1,+3:education_needs_are") == 1);
}

TEST_CASE("collocation slots agree with index-arithmetic reconstruction") {
    static const std::pair<int, int> slots[11] = {{-2, -2}, {-1, -1}, {1, 1},  {2, 2},
                                                  {-2, -1}, {-1, 1},  {1, 2},  {-3, -1},
                                                  {-2, 1},  {-1, 2},  {1, 3}};
    wsd::Rng rng(41);
    const std::vector<std::string> words = {"aa", "bb", "cc", "dd", "ee"};
    for (int round = 0; round < 40; ++round) {
        std::string text = "Top";
        int n = 4 + static_cast<int>(rng.below(12));
        for (int i = 0; i < n; ++i) {
            text += rng.below(6) == 0 ? ". Next " : " ";
            text += words[rng.below(words.size())];
        }
        TokenStream ts = wsd::tokenize(text);
        int target = static_cast<int>(rng.below(ts.size()));
        SparseFeatures f = wsd::extract_collocations(ts, target);
        REQUIRE(f.size() == 11);
        for (const auto& [i, j] : slots) {
            std::string expect;
            for (int off = i; off <= j; ++off) {
                if (off == 0) continue;
                if (!expect.empty()) expect += "_";
                int idx = target + off;
                if (idx < 0 || idx >= static_cast<int>(ts.size()) ||
                    ts[idx].sentence != ts[target].sentence)
                    expect += "NULL";
                else
                    expect += ts[idx].surface;
            }
            std::string key = "col:" + std::string(i < 0 ? "" : "+") + std::to_string(i) + "," +
                              std::string(j < 0 ? "" : "+") + std::to_string(j) + ":" + expect;
            INFO(key);
            CHECK(f.count(key) == 1);
        }
    }
}

TEST_CASE("concept and semtype bags") {
    wsd::Citation c;
    c.concepts = {{0, 2, "C0684240"}, {5, 6, "C0037633"}, {7, 8, "C0684240"}};
    c.semtypes = {{0, 2, "inpr"}, {5, 6, "orgf"}};
    SparseFeatures cf = wsd::extract_concepts(c);
    CHECK(cf.at("cui:C0684240") == 2.0);
    CHECK(cf.at("cui:C0037633") == 1.0);
    SparseFeatures sf = wsd::extract_semtypes(c);
    CHECK(sf.at("st:inpr") == 1.0);
    CHECK(sf.at("st:orgf") == 1.0);

    wsd::Citation bare;
    CHECK_THROWS_AS(wsd::extract_concepts(bare), wsd::DataError);
    CHECK(wsd::extract_concepts(bare, false).empty());
}

TEST_CASE("combine unions keys and is order-independent") {
    CHECK(wsd::combine({{}, {}}).empty());
    SparseFeatures a{{"uni:a", 1.0}};
    SparseFeatures b{{"cui:C1", 1.0}};
    SparseFeatures both = wsd::combine({a, b});
    CHECK(both.size() == 2);

    SparseFeatures c{{"uni:a", 2.0}, {"bi:a_b", 1.0}};
    CHECK(wsd::combine({a, c}).at("uni:a") == 3.0);

    wsd::Rng rng(53);
    std::vector<SparseFeatures> sets;
    for (int i = 0; i < 5; ++i) {
        SparseFeatures f;
        for (int k = 0; k < 6; ++k)
            f["uni:w" + std::to_string(rng.below(10))] += 1.0 + static_cast<double>(rng.below(3));
        sets.push_back(f);
    }
    SparseFeatures base = wsd::combine(sets);
    for (int round = 0; round < 5; ++round) {
        rng.shuffle(sets);
        CHECK(wsd::combine(sets) == base);
    }
}

TEST_CASE("feature line format") {
    std::ostringstream out;
    wsd::write_feature_line(out, "inst1", "term0.s1", {{"bi:a_b", 1.0}, {"uni:a", 2.0}});
    CHECK(out.str() == "inst1\tterm0.s1\tbi:a_b:1 uni:a:2\n");
}
