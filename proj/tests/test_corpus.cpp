#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "wsd/corpus.hpp"

using testutil::TempDir;

TEST_CASE("empty file loads as empty dataset") {
    TempDir tmp;
    testutil::write_file(tmp.file("empty.jsonl"), "");
    wsd::Dataset d = wsd::load_jsonl(tmp.file("empty.jsonl"));
    CHECK(d.citations.empty());
    CHECK(d.instances.empty());
    CHECK(d.inventory.entries.empty());
}

TEST_CASE("unknown sense is rejected with the line's term named") {
    TempDir tmp;
    std::string lines =
        R"({"kind":"inventory","term":"cold","senses":["cold.s0","cold.s1"],"word_type":"T"})"
        "\n"
        R"({"kind":"citation","id":"c1","title":"","abstract":"a cold day indeed"})"
        "\n"
        R"({"kind":"instance","citation":"c1","term":"cold","position":1,"sense":"cold.s9"})"
        "\n";
    testutil::write_file(tmp.file("bad.jsonl"), lines);
    CHECK_THROWS_WITH(wsd::load_jsonl(tmp.file("bad.jsonl")),
                      Catch::Matchers::ContainsSubstring("unknown sense"));
}

TEST_CASE("malformed json reports the line number") {
    TempDir tmp;
    testutil::write_file(tmp.file("bad.jsonl"), "{\"kind\":\"citation\"\n");
    CHECK_THROWS_WITH(wsd::load_jsonl(tmp.file("bad.jsonl")),
                      Catch::Matchers::ContainsSubstring("line 1"));
}

TEST_CASE("dangling citation reference is rejected") {
    TempDir tmp;
    std::string lines =
        R"({"kind":"inventory","term":"cold","senses":["cold.s0","cold.s1"],"word_type":"T"})"
        "\n"
        R"({"kind":"instance","citation":"nope","term":"cold","position":0,"sense":"cold.s0"})"
        "\n";
    testutil::write_file(tmp.file("bad.jsonl"), lines);
    CHECK_THROWS_WITH(wsd::load_jsonl(tmp.file("bad.jsonl")),
                      Catch::Matchers::ContainsSubstring("unknown citation"));
}

static wsd::Dataset decorated_dataset(std::uint64_t seed) {
    wsd::TopicParams topic;
    topic.topic_vocab = 12;
    topic.shared_vocab = 8;
    topic.overlap = 0.3;
    topic.ctx_min = 5;
    topic.ctx_max = 12;
    wsd::Dataset d = wsd::generate_pseudoword_dataset(seed, 3, 2, 4, topic);
    // decorate with annotation layers to exercise serialization fully
    for (std::size_t i = 0; i < d.citations.size(); i += 2) {
        wsd::Citation& c = d.citations[i];
        std::size_t n = wsd::tokenize(c.text()).size();
        c.concepts = {{0, 1, "C000" + std::to_string(i % 7)},
                      {static_cast<int>(n) - 1, static_cast<int>(n), "C1554961"}};
        c.semtypes = {{0, static_cast<int>(n), "inpr"}};
        c.pos = {{0, "noun"}, {1, "prep"}};
    }
    wsd::validate(d);
    return d;
}

TEST_CASE("save/load round-trip is structurally identical") {
    TempDir tmp;
    for (std::uint64_t seed : {3u, 11u, 29u}) {
        wsd::Dataset d = decorated_dataset(seed);
        auto path = tmp.file("ds" + std::to_string(seed) + ".jsonl");
        wsd::save_jsonl(d, path);
        wsd::Dataset back = wsd::load_jsonl(path);
        CHECK(back == d);

        // and a second save emits identical bytes
        auto path2 = tmp.file("ds" + std::to_string(seed) + "b.jsonl");
        wsd::save_jsonl(back, path2);
        CHECK(testutil::read_file(path) == testutil::read_file(path2));
    }
}

TEST_CASE("manifest fingerprint mismatch is a data error") {
    TempDir tmp;
    wsd::Dataset d = decorated_dataset(5);
    auto path = tmp.file("ds.jsonl");
    wsd::save_jsonl(d, path);
    CHECK_NOTHROW(wsd::load_jsonl(path));

    wsd::json manifest;
    {
        std::ifstream in(tmp.file("dataset.json"));
        in >> manifest;
    }
    manifest["tokenizer"] = "something-else.v0";
    testutil::write_file(tmp.file("dataset.json"), manifest.dump());
    CHECK_THROWS_WITH(wsd::load_jsonl(path),
                      Catch::Matchers::ContainsSubstring("fingerprint mismatch"));
}

TEST_CASE("pseudo-word generation is deterministic and well-formed") {
    wsd::TopicParams topic;
    wsd::Dataset a = wsd::generate_pseudoword_dataset(7, 1, 2, 5, topic);
    wsd::Dataset b = wsd::generate_pseudoword_dataset(7, 1, 2, 5, topic);
    CHECK(a == b);
    CHECK(a.instances.size() == 10);
    REQUIRE(a.inventory.entries.count("term0") == 1);
    CHECK(a.inventory.entries.at("term0").senses.size() == 2);

    wsd::Dataset c = wsd::generate_pseudoword_dataset(8, 1, 2, 5, topic);
    CHECK_FALSE(a == c);

    // the ambiguous token sits exactly at the recorded position, once
    for (const wsd::Instance& inst : a.instances) {
        const wsd::Citation* cit = a.find_citation(inst.citation_id);
        REQUIRE(cit != nullptr);
        wsd::TokenStream ts = wsd::tokenize(cit->text());
        REQUIRE(inst.position < static_cast<int>(ts.size()));
        CHECK(ts[inst.position].surface == inst.term);
        int occurrences = 0;
        for (std::size_t i = 0; i < ts.size(); ++i)
            if (ts[i].surface == inst.term) ++occurrences;
        CHECK(occurrences == 1);
    }
}

TEST_CASE("zero overlap draws context words only from the sense's own topic") {
    wsd::TopicParams topic;
    topic.overlap = 0.0;
    wsd::Dataset d = wsd::generate_pseudoword_dataset(13, 2, 2, 6, topic);
    for (const wsd::Instance& inst : d.instances) {
        const wsd::Citation* cit = d.find_citation(inst.citation_id);
        wsd::TokenStream ts = wsd::tokenize(cit->text());
        std::string term_no = inst.term.substr(4);
        std::string sense_no = inst.sense.substr(inst.sense.find(".s") + 2);
        std::string prefix = "t" + term_no + "s" + sense_no + "w";
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (static_cast<int>(i) == inst.position) continue;
            INFO(ts[i].surface);
            CHECK(ts[i].surface.rfind(prefix, 0) == 0);
        }
    }
}

TEST_CASE("generator preconditions and degenerate warning") {
    wsd::TopicParams topic;
    CHECK_THROWS_AS(wsd::generate_pseudoword_dataset(1, 1, 1, 5, topic), wsd::UsageError);
    CHECK_THROWS_AS(wsd::generate_pseudoword_dataset(1, 1, 2, 0, topic), wsd::UsageError);

    topic.overlap = 1.0;
    std::vector<std::string> warnings;
    wsd::Dataset d = wsd::generate_pseudoword_dataset(1, 1, 2, 3, topic, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("degenerate") != std::string::npos);
    CHECK(d.instances.size() == 6);
}

TEST_CASE("background corpus is deterministic and never contains ambiguous tokens") {
    wsd::TopicParams topic;
    topic.overlap = 0.2;
    auto docs1 = wsd::generate_background_corpus(9, 2, 2, 5, topic);
    auto docs2 = wsd::generate_background_corpus(9, 2, 2, 5, topic);
    CHECK(docs1 == docs2);
    CHECK(docs1.size() == 2 * 2 * 5);
    for (const std::string& doc : docs1) {
        CHECK(doc.find("term0") == std::string::npos);
        CHECK(doc.find("term1") == std::string::npos);
    }
}

TEST_CASE("groupings partition the inventory") {
    wsd::Dataset d;
    d.inventory.entries["t1"] = {{"t1.a", "t1.b"}, "T"};
    d.inventory.entries["t2"] = {{"t2.a", "t2.b", "t2.c"}, "A"};
    auto by_senses = wsd::group_by_senses(d);
    REQUIRE(by_senses.size() == 2);
    CHECK(by_senses.at(2) == std::vector<std::string>{"t1"});
    CHECK(by_senses.at(3) == std::vector<std::string>{"t2"});

    auto by_type = wsd::group_by_type(d);
    CHECK(by_type.at("T") == std::vector<std::string>{"t1"});
    CHECK(by_type.at("A") == std::vector<std::string>{"t2"});

    CHECK(wsd::group_by_senses(wsd::Dataset{}).empty());
}

TEST_CASE("benchmark-shaped inventory groups by sense count") {
    wsd::Dataset d;
    int id = 0;
    auto add_terms = [&](int count, int senses) {
        for (int i = 0; i < count; ++i, ++id) {
            wsd::InventoryEntry e;
            for (int s = 0; s < senses; ++s)
                e.senses.push_back("w" + std::to_string(id) + ".s" + std::to_string(s));
            e.word_type = "T";
            d.inventory.entries["w" + std::to_string(id)] = e;
        }
    };
    add_terms(189, 2);
    add_terms(12, 3);
    add_terms(1, 4);
    add_terms(1, 5);
    auto groups = wsd::group_by_senses(d);
    CHECK(groups.at(2).size() == 189);
    CHECK(groups.at(3).size() == 12);
    CHECK(groups.at(4).size() == 1);
    CHECK(groups.at(5).size() == 1);
    std::size_t total = 0;
    for (const auto& [k, v] : groups) total += v.size();
    CHECK(total == d.inventory.entries.size());
}

TEST_CASE("validate rejects broken datasets") {
    wsd::TopicParams topic;
    wsd::Dataset d = wsd::generate_pseudoword_dataset(2, 1, 2, 3, topic);

    wsd::Dataset dup = d;
    dup.citations.push_back(dup.citations.front());
    CHECK_THROWS_WITH(wsd::validate(dup), Catch::Matchers::ContainsSubstring("duplicate"));

    wsd::Dataset bad_pos = d;
    bad_pos.instances.front().position = 10000;
    CHECK_THROWS_WITH(wsd::validate(bad_pos),
                      Catch::Matchers::ContainsSubstring("outside citation"));

    wsd::Dataset bad_span = d;
    bad_span.citations.front().concepts = {{-1, 2, "C1"}};
    CHECK_THROWS_WITH(wsd::validate(bad_span),
                      Catch::Matchers::ContainsSubstring("span"));

    wsd::Dataset missing = d;
    missing.inventory.entries["term0"].senses.push_back("term0.s9");
    CHECK_THROWS_WITH(wsd::validate(missing),
                      Catch::Matchers::ContainsSubstring("no instances"));
}
