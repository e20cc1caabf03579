#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "dataset_util.hpp"
#include "test_util.hpp"
#include "wsd/reporting.hpp"

namespace {

using namespace wsd;
using testutil::DatasetBuilder;

// two-term report with known numbers: apple 10/10, bank 15/30
EvalReport sample_report(const std::string& fingerprint = "features=unigrams learner=nb") {
    DatasetBuilder b;
    b.add_term("apple", 2, "T");
    b.add_term("bank", 3, "A");
    b.add_instance("apple", 0, {"pad"});
    b.add_instance("apple", 1, {"pad"});
    b.add_instance("bank", 0, {"pad"});
    b.add_instance("bank", 1, {"pad"});
    b.add_instance("bank", 2, {"pad"});
    Dataset d = b.finish();

    std::vector<PredictionRecord> log;
    for (int i = 0; i < 10; ++i) log.push_back({"apple", i % 10, 0, 0, 0});
    for (int i = 0; i < 30; ++i) log.push_back({"bank", i % 10, 2, 0, i < 15 ? 0 : 1});
    return assemble_report(d, log, fingerprint, 7);
}

}  // namespace

TEST_CASE("reports round-trip through JSON") {
    EvalReport r = sample_report();
    EvalReport back = report_from_json(report_to_json(r));

    CHECK(back.fingerprint == r.fingerprint);
    CHECK(back.seed == r.seed);
    CHECK(back.macro == r.macro);
    CHECK(back.micro == r.micro);
    CHECK(back.ci == r.ci);
    CHECK(back.per_term == r.per_term);
    CHECK(back.per_term_counts == r.per_term_counts);
    REQUIRE(back.predictions.size() == r.predictions.size());
    for (std::size_t i = 0; i < r.predictions.size(); ++i) {
        CHECK(back.predictions[i].term == r.predictions[i].term);
        CHECK(back.predictions[i].fold == r.predictions[i].fold);
        CHECK(back.predictions[i].instance == r.predictions[i].instance);
        CHECK(back.predictions[i].gold == r.predictions[i].gold);
        CHECK(back.predictions[i].predicted == r.predictions[i].predicted);
    }
    REQUIRE(back.by_sense_count.size() == 2);
    CHECK(back.by_sense_count.at(3).macro == r.by_sense_count.at(3).macro);
    CHECK(back.by_sense_count.at(3).total == 30);
    CHECK(back.by_word_type.at("T").micro == 1.0);
}

TEST_CASE("report files save and load") {
    testutil::TempDir tmp;
    EvalReport r = sample_report();
    save_report(tmp.file("report.json"), r);
    EvalReport back = load_report(tmp.file("report.json"));
    CHECK(back.macro == r.macro);
    CHECK(back.per_term == r.per_term);

    CHECK_THROWS_AS(load_report(tmp.file("missing.json")), DataError);

    testutil::write_file(tmp.file("garbage.json"), "{not json");
    CHECK_THROWS_AS(load_report(tmp.file("garbage.json")), DataError);

    testutil::write_file(tmp.file("short.json"), "{\"version\": 1}");
    CHECK_THROWS_AS(load_report(tmp.file("short.json")), DataError);

    json wrong = report_to_json(r);
    wrong["version"] = 9;
    testutil::write_file(tmp.file("wrong.json"), wrong.dump());
    CHECK_THROWS_AS(load_report(tmp.file("wrong.json")), DataError);

    CHECK_THROWS_AS(write_text_file(tmp.path() / "no" / "such" / "dir.txt", "x"), DataError);
}

TEST_CASE("CSV output carries config comments and per-term rows") {
    std::string csv = report_csv(sample_report());
    CHECK(csv.find("# config: features=unigrams learner=nb\n") == 0);
    CHECK(csv.find("# seed: 7\n") != std::string::npos);
    CHECK(csv.find("term,correct,total,accuracy\n") != std::string::npos);
    CHECK(csv.find("apple,10,10,1.0000\n") != std::string::npos);
    CHECK(csv.find("bank,15,30,0.5000\n") != std::string::npos);
    CHECK(csv.find("# macro: 0.7500\n") != std::string::npos);
    CHECK(csv.find("# micro: 0.6250\n") != std::string::npos);
    CHECK(csv.find("# ci95: ") != std::string::npos);
}

TEST_CASE("markdown summarizes one or many experiment cells") {
    EvalReport nb = sample_report();
    std::string single = report_markdown({&nb});
    CHECK(single.find("| features | learner | terms | macro | micro | 95% CI |") !=
          std::string::npos);
    CHECK(single.find("| unigrams | nb | 2 | 0.7500 | 0.6250 |") != std::string::npos);
    CHECK(single.find("## Breakdown by sense count") != std::string::npos);
    CHECK(single.find("## Breakdown by word type") != std::string::npos);
    CHECK(single.find("| apple | 10 | 10 | 1.0000 |") != std::string::npos);
    CHECK(single.find("8d^2+9d+2") == std::string::npos);

    EvalReport lstm = sample_report("features=none learner=lstm folds=10");
    std::string multi = report_markdown({&nb, &lstm});
    CHECK(multi.find("| unigrams | nb |") != std::string::npos);
    CHECK(multi.find("| none | lstm |") != std::string::npos);
    // per-term tables only appear for a single report
    CHECK(multi.find("## Per-term accuracy") == std::string::npos);
    // the parameter-count footnote accompanies recurrent results
    CHECK(multi.find("80,902") != std::string::npos);
    CHECK(multi.find("8d^2+9d+2") != std::string::npos);
    CHECK(multi.find("81,002") != std::string::npos);

    CHECK_THROWS_AS(report_markdown({}), UsageError);
}

TEST_CASE("fingerprint fields parse back out") {
    const std::string fp = "features=bigrams+pos learner=knn3 folds=10 seed=42";
    CHECK(fingerprint_field(fp, "features") == "bigrams+pos");
    CHECK(fingerprint_field(fp, "learner") == "knn3");
    CHECK(fingerprint_field(fp, "seed") == "42");
    CHECK(fingerprint_field(fp, "missing") == "");
    // "seed" must not match inside "fold-seed"
    CHECK(fingerprint_field("fold-seed=1 seed=2", "seed") == "2");
}

TEST_CASE("mean-plus-halfwidth strings use four decimals") {
    CHECK(format_pm(0.4024, 0.313) == "0.4024 \xc2\xb1 0.3130");
    CHECK(format_pm(-0.05, 0.0) == "-0.0500 \xc2\xb1 0.0000");
    CHECK(format4(0.62499999999) == "0.6250");
}

TEST_CASE("difference tables serialize to CSV and SVG") {
    std::vector<DiffEntry> diffs = {{"alpha", 0.9, 0.6, 0.3},
                                    {"gamma", 0.7, 0.7, 0.0},
                                    {"beta", 0.5, 0.8, -0.3}};
    std::string csv = diff_csv(diffs, "run-a", "run-b");
    CHECK(csv.find("# a: run-a\n") == 0);
    CHECK(csv.find("term,accuracy_a,accuracy_b,difference\n") != std::string::npos);
    CHECK(csv.find("alpha,0.9000,0.6000,0.3000\n") != std::string::npos);
    CHECK(csv.find("beta,0.5000,0.8000,-0.3000\n") != std::string::npos);

    std::string svg = diff_svg(diffs, "A vs B");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("A vs B") != std::string::npos);
    CHECK(svg.find("#3366cc") != std::string::npos);  // positive bar
    CHECK(svg.find("#cc3333") != std::string::npos);  // negative bar
    CHECK(svg.find(">alpha<") != std::string::npos);  // axis labels for small charts
    CHECK(svg.find("alpha: +0.3000") != std::string::npos);  // tooltip

    // labels disappear on crowded charts, bars remain
    std::vector<DiffEntry> many;
    for (int i = 0; i < 40; ++i)
        many.push_back({"t" + std::to_string(i), 0.5, 0.4, 0.1});
    std::string crowded = diff_svg(many, "many");
    CHECK(crowded.find(">t17<") == std::string::npos);
    CHECK(crowded.find("<rect") != std::string::npos);
}

TEST_CASE("report comparison pairs per-term accuracies") {
    EvalReport a, b;
    a.per_term = {{"t1", 1.0}, {"t2", 1.0}, {"t3", 1.0}};
    b.per_term = {{"t1", 0.0}, {"t2", 0.0}, {"t3", 0.0}};
    CompareResult res = compare_reports(a, b);
    CHECK(res.p_value == 0.25);  // three positive unit differences
    CHECK(res.mean_diff == 1.0);
    CHECK(res.diffs.size() == 3);

    CompareResult same = compare_reports(a, a);
    CHECK(same.p_value == 1.0);
    CHECK(same.mean_diff == 0.0);
    CHECK(same.ci_half == 0.0);

    // the interval halfwidth matches the confidence interval of the diffs
    EvalReport c, e;
    c.per_term = {{"t1", 0.9}, {"t2", 0.7}, {"t3", 0.8}, {"t4", 0.6}};
    e.per_term = {{"t1", 0.8}, {"t2", 0.75}, {"t3", 0.6}, {"t4", 0.65}};
    CompareResult mixed = compare_reports(c, e);
    auto [lo, hi] = ci95({0.1, -0.05, 0.2, -0.05});
    CHECK(mixed.ci_half == Catch::Approx((hi - lo) / 2.0).margin(1e-12));
    CHECK(mixed.mean_diff == Catch::Approx(0.05).margin(1e-12));
}

TEST_CASE("report comparison can pair individual predictions") {
    EvalReport a, b;
    a.per_term = b.per_term = {{"t1", 0.5}};
    for (int i = 0; i < 12; ++i) {
        // a correct on even instances, b correct on the first half
        a.predictions.push_back({"t1", 0, static_cast<std::size_t>(i), 0, i % 2 == 0 ? 0 : 1});
        b.predictions.push_back({"t1", 0, static_cast<std::size_t>(i), 0, i < 6 ? 0 : 1});
    }
    CompareResult res = compare_reports(a, b, 100000, 3, true);
    CHECK(res.p_value > 0.0);
    CHECK(res.p_value <= 1.0);
    CHECK(res.mean_diff == 0.0);  // both are correct on exactly six

    // mismatched instance sets are rejected
    b.predictions.pop_back();
    CHECK_THROWS_AS(compare_reports(a, b, 1000, 3, true), DataError);
    b.predictions.push_back({"t1", 0, 99, 0, 0});
    CHECK_THROWS_AS(compare_reports(a, b, 1000, 3, true), DataError);
}
