#include "curator/quality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>

#include "curator/jsonl.hpp"
#include "curator/unicode.hpp"

namespace curator {

void QualityReport::add_score(double score) {
    int bin = int(score * 20.0);
    bin = std::clamp(bin, 0, 19);
    ++score_histogram[size_t(bin)];
}

std::pair<std::vector<Document>, QualityReport> quality_filter(
    const std::vector<Document>& docs, const LinearTextClassifier& model,
    const QualityPolicy& policy) {
    if (policy.min_score.has_value() == policy.keep_fraction.has_value())
        throw std::invalid_argument("policy must set exactly one of min_score/keep_fraction");
    if (policy.keep_fraction &&
        !(*policy.keep_fraction > 0.0 && *policy.keep_fraction <= 1.0))
        throw std::invalid_argument("keep_fraction must be in (0,1]");

    QualityReport report;
    report.docs_in = docs.size();

    std::vector<double> scores(docs.size());
    for (size_t i = 0; i < docs.size(); ++i) {
        scores[i] = model.score(docs[i].text);
        report.add_score(scores[i]);
    }

    std::vector<char> keep(docs.size(), 0);
    if (policy.min_score) {
        for (size_t i = 0; i < docs.size(); ++i) keep[i] = scores[i] >= *policy.min_score;
    } else if (!docs.empty()) {
        size_t want = size_t(std::ceil(*policy.keep_fraction * double(docs.size())));
        std::vector<size_t> order(docs.size());
        std::iota(order.begin(), order.end(), size_t(0));
        // Stable: equal scores resolve to earlier input position.
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return scores[a] > scores[b]; });
        for (size_t i = 0; i < want && i < order.size(); ++i) keep[order[i]] = 1;
    }

    std::vector<Document> kept;
    for (size_t i = 0; i < docs.size(); ++i) {
        if (keep[i]) kept.push_back(docs[i]);
    }
    report.docs_kept = kept.size();
    return {std::move(kept), report};
}

std::vector<AnnotatedDoc> annotation_ingest(const std::string& path) {
    LineReader reader(path);
    std::vector<AnnotatedDoc> out;
    std::string line;
    while (reader.next(line)) {
        rapidjson::Document d;
        d.ParseInsitu(line.data());
        if (d.HasParseError())
            throw JsonlError(path, reader.line_number(),
                             rapidjson::GetParseError_En(d.GetParseError()));
        if (!d.IsObject()) throw JsonlError(path, reader.line_number(), "not a JSON object");

        AnnotatedDoc rec;
        auto id = d.FindMember("id");
        if (id == d.MemberEnd() || !id->value.IsString())
            throw JsonlError(path, reader.line_number(), "missing 'id'");
        rec.doc.id = id->value.GetString();

        auto text = d.FindMember("text");
        if (text == d.MemberEnd() || !text->value.IsString())
            throw AnnotationError(rec.doc.id, "missing 'text'");
        rec.doc.text.assign(text->value.GetString(), text->value.GetStringLength());

        auto score = d.FindMember("score");
        if (score == d.MemberEnd() || !score->value.IsInt())
            throw AnnotationError(rec.doc.id, "missing integer 'score'");
        rec.score = score->value.GetInt();
        if (rec.score < 0 || rec.score > 5)
            throw AnnotationError(rec.doc.id,
                                  "score " + std::to_string(rec.score) + " outside 0..5");
        out.push_back(std::move(rec));
    }
    return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_by_score(
    const std::vector<AnnotatedDoc>& records, int pos_min_score, int neg_max_score) {
    std::vector<std::string> positives;
    std::vector<std::string> negatives;
    for (const auto& rec : records) {
        if (rec.score >= pos_min_score)
            positives.push_back(rec.doc.text);
        else if (rec.score <= neg_max_score)
            negatives.push_back(rec.doc.text);
    }
    return {std::move(positives), std::move(negatives)};
}

double hangul_letter_fraction(std::string_view text) {
    size_t letters = 0;
    size_t hangul = 0;
    for (size_t i = 0; i < text.size();) {
        auto dc = utf8_decode(text, i);
        if (!dc) {
            ++i;
            continue;
        }
        if (is_letter(dc->cp)) {
            ++letters;
            if (is_hangul(dc->cp)) ++hangul;
        }
        i += dc->len;
    }
    if (letters == 0) return 0.0;
    return double(hangul) / double(letters);
}

bool lang_gate_keep(const Document& doc, const LangGateConfig& cfg) {
    const std::string field = cfg.field_name();
    auto it = doc.meta.find(field);
    double p;
    if (it != doc.meta.end()) {
        size_t pos = 0;
        try {
            p = std::stod(it->second, &pos);
        } catch (const std::exception&) {
            pos = 0;
            p = -1.0;
        }
        if (pos != it->second.size() || !(p >= 0.0 && p <= 1.0))
            throw AnnotationError(doc.id, "meta '" + field + "' is not a probability: " +
                                              it->second);
    } else if (cfg.hangul_fallback && cfg.target_lang == "ko") {
        p = hangul_letter_fraction(doc.text);
    } else {
        throw AnnotationError(doc.id, "missing language probability meta '" + field + "'");
    }
    return p >= cfg.threshold;
}

std::pair<std::vector<Document>, LangGateReport> lang_gate(const std::vector<Document>& docs,
                                                           const LangGateConfig& cfg) {
    std::vector<Document> kept;
    LangGateReport report;
    report.docs_in = docs.size();
    for (const auto& doc : docs) {
        if (lang_gate_keep(doc, cfg)) kept.push_back(doc);
    }
    report.docs_kept = kept.size();
    return {std::move(kept), report};
}

}  // namespace curator
