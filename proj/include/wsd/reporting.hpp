#pragma once

// Report artifacts: JSON serialization, per-term CSV, markdown summary tables,
// SVG difference charts, and report-vs-report significance comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsd/errors.hpp"
#include "wsd/eval.hpp"

namespace wsd {

using json = nlohmann::json;

// ---- small formatting helpers ---------------------------------------------

inline std::string format4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// "0.4024 ± 0.3130" style mean-plus-halfwidth string.
inline std::string format_pm(double mean, double half) {
    return format4(mean) + " \xc2\xb1 " + format4(half);
}

// Pulls one "key=value" field out of a report fingerprint; empty if absent.
inline std::string fingerprint_field(const std::string& fingerprint, const std::string& key) {
    const std::string needle = key + "=";
    std::size_t at = 0;
    while ((at = fingerprint.find(needle, at)) != std::string::npos) {
        if (at == 0 || fingerprint[at - 1] == ' ') {
            const std::size_t start = at + needle.size();
            const std::size_t end = fingerprint.find(' ', start);
            return fingerprint.substr(start, end == std::string::npos ? end : end - start);
        }
        at += needle.size();
    }
    return "";
}

// ---- JSON serialization ------------------------------------------------------

inline json report_to_json(const EvalReport& r) {
    json j;
    j["version"] = 1;
    j["fingerprint"] = r.fingerprint;
    j["seed"] = r.seed;
    j["macro"] = r.macro;
    j["micro"] = r.micro;
    j["ci"] = {r.ci.first, r.ci.second};
    json terms = json::object();
    for (const auto& [term, acc] : r.per_term) {
        const auto& ct = r.per_term_counts.at(term);
        terms[term] = {{"accuracy", acc}, {"correct", ct.first}, {"total", ct.second}};
    }
    j["per_term"] = std::move(terms);
    auto groups_to_json = [](const auto& groups) {
        json out = json::object();
        for (const auto& [key, g] : groups) {
            json jg = {{"terms", g.terms},
                       {"correct", g.correct},
                       {"total", g.total},
                       {"macro", g.macro},
                       {"micro", g.micro}};
            if constexpr (std::is_same_v<std::decay_t<decltype(key)>, int>)
                out[std::to_string(key)] = std::move(jg);
            else
                out[key] = std::move(jg);
        }
        return out;
    };
    j["by_sense_count"] = groups_to_json(r.by_sense_count);
    j["by_word_type"] = groups_to_json(r.by_word_type);
    json preds = json::array();
    for (const PredictionRecord& p : r.predictions)
        preds.push_back({p.term, p.fold, p.instance, p.gold, p.predicted});
    j["predictions"] = std::move(preds);
    return j;
}

inline EvalReport report_from_json(const json& j) {
    try {
        if (j.at("version").get<int>() != 1) throw DataError("unsupported report version");
        EvalReport r;
        r.fingerprint = j.at("fingerprint").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.macro = j.at("macro").get<double>();
        r.micro = j.at("micro").get<double>();
        r.ci = {j.at("ci").at(0).get<double>(), j.at("ci").at(1).get<double>()};
        for (const auto& [term, tj] : j.at("per_term").items()) {
            r.per_term[term] = tj.at("accuracy").get<double>();
            r.per_term_counts[term] = {tj.at("correct").get<int>(), tj.at("total").get<int>()};
        }
        auto groups_from_json = [](const json& src, auto& dst) {
            for (const auto& [key, gj] : src.items()) {
                const json& gv = gj;
                GroupStats g;
                g.terms = gv.at("terms").get<int>();
                g.correct = gv.at("correct").get<int>();
                g.total = gv.at("total").get<int>();
                g.macro = gv.at("macro").get<double>();
                g.micro = gv.at("micro").get<double>();
                if constexpr (std::is_same_v<typename std::decay_t<decltype(dst)>::key_type,
                                             int>)
                    dst[std::stoi(key)] = g;
                else
                    dst[key] = g;
            }
        };
        groups_from_json(j.at("by_sense_count"), r.by_sense_count);
        groups_from_json(j.at("by_word_type"), r.by_word_type);
        for (const json& pj : j.at("predictions")) {
            PredictionRecord p;
            p.term = pj.at(0).get<std::string>();
            p.fold = pj.at(1).get<int>();
            p.instance = pj.at(2).get<std::size_t>();
            p.gold = pj.at(3).get<int>();
            p.predicted = pj.at(4).get<int>();
            r.predictions.push_back(std::move(p));
        }
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path.string());
    out << content;
    if (!out) throw DataError("write failed: " + path.string());
}

inline void save_report(const std::filesystem::path& path, const EvalReport& r) {
    write_text_file(path, report_to_json(r).dump(2) + "\n");
}

inline EvalReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open report: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("report is not valid JSON: " + path.string());
    return report_from_json(j);
}

// ---- CSV ------------------------------------------------------------------------

// Per-term rows with the resolved config embedded as leading comment lines.
inline std::string report_csv(const EvalReport& r) {
    std::string out;
    out += "# config: " + r.fingerprint + "\n";
    out += "# seed: " + std::to_string(r.seed) + "\n";
    out += "term,correct,total,accuracy\n";
    for (const auto& [term, acc] : r.per_term) {
        const auto& ct = r.per_term_counts.at(term);
        out += term + "," + std::to_string(ct.first) + "," + std::to_string(ct.second) + "," +
               format4(acc) + "\n";
    }
    out += "# macro: " + format4(r.macro) + "\n";
    out += "# micro: " + format4(r.micro) + "\n";
    out += "# ci95: " + format4(r.ci.first) + ".." + format4(r.ci.second) + "\n";
    return out;
}

inline std::string diff_csv(const std::vector<DiffEntry>& diffs, const std::string& label_a,
                            const std::string& label_b) {
    std::string out = "# a: " + label_a + "\n# b: " + label_b + "\n";
    out += "term,accuracy_a,accuracy_b,difference\n";
    for (const DiffEntry& e : diffs)
        out += e.term + "," + format4(e.a) + "," + format4(e.b) + "," + format4(e.diff) + "\n";
    return out;
}

// ---- markdown summary ----------------------------------------------------------------

inline constexpr const char* kLstmParamFootnote =
    "LSTM parameter accounting: with diagonal peepholes a 2-sense classifier has "
    "8d^2+9d+2 parameters (80,902 at d=100; 2,004,502 at d=500). The occasionally "
    "quoted 81,002 at d=100 corresponds to 8d^2+10d+2; the extra d term does not "
    "arise in this gate layout.";

// Summary table over one or more experiment cells (feature set x learner ->
// macro/micro), with group breakdowns and the per-term table when a single
// report is given.
inline std::string report_markdown(const std::vector<const EvalReport*>& reports) {
    if (reports.empty()) throw UsageError("no reports to render");
    std::string out = "# Disambiguation results\n\n";
    out += "| features | learner | terms | macro | micro | 95% CI |\n";
    out += "|---|---|---:|---:|---:|---|\n";
    bool any_lstm = false;
    for (const EvalReport* r : reports) {
        const std::string features = fingerprint_field(r->fingerprint, "features");
        const std::string learner = fingerprint_field(r->fingerprint, "learner");
        if (learner == "lstm") any_lstm = true;
        out += "| " + (features.empty() ? "?" : features) + " | " +
               (learner.empty() ? "?" : learner) + " | " +
               std::to_string(r->per_term.size()) + " | " + format4(r->macro) + " | " +
               format4(r->micro) + " | " + format4(r->ci.first) + " .. " +
               format4(r->ci.second) + " |\n";
    }
    if (reports.size() == 1) {
        const EvalReport& r = *reports.front();
        out += "\n## Breakdown by sense count\n\n";
        out += "| senses | terms | macro | micro |\n|---:|---:|---:|---:|\n";
        for (const auto& [senses, g] : r.by_sense_count)
            out += "| " + std::to_string(senses) + " | " + std::to_string(g.terms) + " | " +
                   format4(g.macro) + " | " + format4(g.micro) + " |\n";
        out += "\n## Breakdown by word type\n\n";
        out += "| type | terms | macro | micro |\n|---|---:|---:|---:|\n";
        for (const auto& [type, g] : r.by_word_type)
            out += "| " + type + " | " + std::to_string(g.terms) + " | " + format4(g.macro) +
                   " | " + format4(g.micro) + " |\n";
        out += "\n## Per-term accuracy\n\n";
        out += "| term | correct | total | accuracy |\n|---|---:|---:|---:|\n";
        for (const auto& [term, acc] : r.per_term) {
            const auto& ct = r.per_term_counts.at(term);
            out += "| " + term + " | " + std::to_string(ct.first) + " | " +
                   std::to_string(ct.second) + " | " + format4(acc) + " |\n";
        }
        out += "\nconfig: `" + r.fingerprint + "`\n";
    }
    if (any_lstm) out += std::string("\n") + kLstmParamFootnote + "\n";
    return out;
}

// ---- SVG difference chart ---------------------------------------------------------------

// Self-contained bar chart of per-term accuracy differences, sorted as given
// (descending when produced by diff_report). Each bar carries a tooltip.
inline std::string diff_svg(const std::vector<DiffEntry>& diffs, const std::string& title) {
    const int n = std::max<std::size_t>(diffs.size(), 1);
    const double bar_w = std::clamp(760.0 / n, 4.0, 48.0);
    const double width = 60.0 + bar_w * n + 20.0;
    const double height = 380.0;
    const double axis_y = 200.0;
    double max_abs = 1e-9;
    for (const DiffEntry& e : diffs) max_abs = std::max(max_abs, std::abs(e.diff));
    const double scale = 150.0 / max_abs;

    std::string svg;
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n",
                  width, height, width, height);
    svg += buf;
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.0f\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  width / 2.0, title.c_str());
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"50\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\" "
                  "stroke-width=\"1\"/>\n",
                  axis_y, width - 15.0, axis_y);
    svg += buf;
    for (double tick : {max_abs, -max_abs}) {
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"46\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\" "
                      "text-anchor=\"end\">%+.3f</text>\n",
                      axis_y - tick * scale + 3.0, tick);
        svg += buf;
    }
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        const DiffEntry& e = diffs[i];
        const double x = 55.0 + bar_w * static_cast<double>(i);
        const double h = std::abs(e.diff) * scale;
        const double y = e.diff >= 0.0 ? axis_y - h : axis_y;
        const char* fill = e.diff >= 0.0 ? "#3366cc" : "#cc3333";
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                      "fill=\"%s\"><title>%s: %+.4f</title></rect>\n",
                      x, y, std::max(bar_w - 2.0, 1.0), std::max(h, 0.5), fill,
                      e.term.c_str(), e.diff);
        svg += buf;
        if (diffs.size() <= 30) {
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" "
                          "font-size=\"9\" text-anchor=\"start\" "
                          "transform=\"rotate(60 %.1f %.1f)\">%s</text>\n",
                          x + bar_w / 2.0, 362.0, x + bar_w / 2.0, 362.0, e.term.c_str());
            svg += buf;
        }
    }
    svg += "</svg>\n";
    return svg;
}

// ---- report comparison --------------------------------------------------------------------

struct CompareResult {
    double p_value = 1.0;
    double mean_diff = 0.0;  // mean paired difference (a - b)
    double ci_half = 0.0;    // 1.96 sigma/sqrt(N) of the paired differences
    std::vector<DiffEntry> diffs;
};

// Paired significance between two reports: per-term accuracies by default, or
// per-instance 0/1 outcomes when per_instance is set (requires both reports to
// log predictions for identical instance sets).
inline CompareResult compare_reports(const EvalReport& a, const EvalReport& b,
                                     int iterations = 100000, std::uint64_t seed = 0,
                                     bool per_instance = false) {
    CompareResult out;
    out.diffs = diff_report(a, b);

    std::vector<double> va, vb;
    if (per_instance) {
        auto outcome_map = [](const EvalReport& r) {
            std::map<std::pair<std::string, std::size_t>, double> m;
            for (const PredictionRecord& p : r.predictions)
                m[{p.term, p.instance}] = p.gold == p.predicted ? 1.0 : 0.0;
            return m;
        };
        auto ma = outcome_map(a), mb = outcome_map(b);
        if (ma.size() != mb.size() || ma.empty())
            throw DataError("reports do not log matching prediction sets");
        for (const auto& [key, correct] : ma) {
            auto it = mb.find(key);
            if (it == mb.end())
                throw DataError("reports do not log matching prediction sets");
            va.push_back(correct);
            vb.push_back(it->second);
        }
    } else {
        for (const auto& [term, acc] : a.per_term) {
            va.push_back(acc);
            vb.push_back(b.per_term.at(term));
        }
    }

    out.p_value = randomization_test(va, vb, iterations, seed);
    std::vector<double> diffs(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) diffs[i] = va[i] - vb[i];
    out.mean_diff = mean_of(diffs);
    if (diffs.size() >= 2) {
        auto [lo, hi] = ci95(diffs);
        out.ci_half = (hi - lo) / 2.0;
    }
    return out;
}

}  // namespace wsd
