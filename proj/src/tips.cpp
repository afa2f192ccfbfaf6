#include "driveframe/tips.hpp"

#include "driveframe/prompts.hpp"
#include "driveframe/textscan.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

namespace driveframe {

const CodeSection* CodeCorpus::find(std::string_view section_id) const {
    for (const auto& s : sections)
        if (s.section_id == section_id) return &s;
    return nullptr;
}

CodeCorpus load_corpus(std::string_view bytes) {
    nlohmann::json j = nlohmann::json::parse(bytes, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ValidationError("corpus: file is not valid JSON");

    CodeCorpus corpus;
    try {
        corpus.version = j.at("version").get<int>();
        for (const auto& sj : j.at("sections")) {
            CodeSection s;
            s.section_id = sj.at("id").get<std::string>();
            s.title = sj.at("title").get<std::string>();
            s.text = sj.at("text").get<std::string>();
            s.keywords = sj.at("keywords").get<std::vector<std::string>>();
            corpus.sections.push_back(std::move(s));
        }
        const auto& bm = j.at("behaviour_map");
        for (auto it = bm.begin(); it != bm.end(); ++it)
            corpus.behaviour_map[event_kind_from_string(it.key())] =
                it.value().get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("corpus: schema violation: ") + e.what());
    }

    std::set<std::string> seen;
    for (const auto& s : corpus.sections) {
        if (s.section_id.empty())
            throw ValidationError("corpus: section with empty id");
        if (!seen.insert(s.section_id).second)
            throw ValidationError("corpus: duplicate section id '" + s.section_id + "'");
        if (s.text.empty())
            throw ValidationError("corpus: section '" + s.section_id + "' has empty text");
        if (s.keywords.empty())
            throw ValidationError("corpus: section '" + s.section_id + "' has no keywords");
    }
    for (EventKind kind : kAllEventKinds) {
        auto it = corpus.behaviour_map.find(kind);
        if (it == corpus.behaviour_map.end())
            throw ValidationError("corpus: behaviour_map is missing " +
                                  std::string(to_string(kind)));
        if (!corpus.find(it->second))
            throw ValidationError("corpus: behaviour_map target '" + it->second +
                                  "' for " + std::string(to_string(kind)) +
                                  " does not exist");
    }
    return corpus;
}

RetrievedSection retrieve(const CodeCorpus& corpus, EventKind kind,
                          const std::vector<std::string>& context_terms) {
    if (auto it = corpus.behaviour_map.find(kind); it != corpus.behaviour_map.end()) {
        if (const CodeSection* s = corpus.find(it->second))
            return RetrievedSection(*s);
    }
    // Keyword fallback for corpora without a mapping for this kind.
    const CodeSection* best = nullptr;
    std::size_t best_overlap = 0;
    for (const auto& s : corpus.sections) {
        std::size_t overlap = 0;
        for (const auto& term : context_terms)
            if (std::find(s.keywords.begin(), s.keywords.end(), term) != s.keywords.end())
                ++overlap;
        if (overlap > best_overlap) {
            best = &s;
            best_overlap = overlap;
        }
    }
    if (!best)
        throw NoGroundingError("corpus: no grounding for " +
                               std::string(to_string(kind)) +
                               "; refusing to generate an ungrounded tip");
    return RetrievedSection(*best);
}

std::string citation_marker(std::string_view section_id) {
    return "(Highway Code \xC2\xA7" + std::string(section_id) + ")";
}

std::string build_tip_prompt(const RetrievedSection& retrieved, const UnsafeEvent& event) {
    const CodeSection& s = retrieved.section();
    std::ostringstream p;
    p << kTipPromptVersion << "\n"
      << "You are a road-safety assistant. Using only the provision below, write a\n"
      << "concise safety tip of at most sixty words. The tip must end with the exact\n"
      << "citation marker given below and must not introduce any number that does not\n"
      << "appear in the provision text.\n"
      << "Detected behaviour: " << to_string(event.kind) << "\n"
      << "Severity: " << to_string(event.severity) << "\n"
      << kMarkerLinePrefix << citation_marker(s.section_id) << "\n"
      << "Provision " << s.section_id << " (" << s.title << "):\n"
      << s.text << "\n";
    return p.str();
}

bool verify_grounding(std::string_view tip_text, const CodeSection& section) {
    std::string trimmed(tip_text);
    while (!trimmed.empty() &&
           (trimmed.back() == ' ' || trimmed.back() == '\n' || trimmed.back() == '\r' ||
            trimmed.back() == '\t'))
        trimmed.pop_back();

    const std::string marker = citation_marker(section.section_id);
    if (trimmed.size() < marker.size() ||
        trimmed.compare(trimmed.size() - marker.size(), marker.size(), marker) != 0)
        return false;

    if (word_count(trimmed) > kTipMaxWords) return false;

    // Numbers must come from the provision. The marker itself is excluded,
    // section ids routinely contain digits.
    std::string body = trimmed;
    for (std::size_t pos; (pos = body.find(marker)) != std::string::npos;)
        body.erase(pos, marker.size());

    std::set<std::string> allowed;
    for (const auto& tok : extract_number_tokens(section.text)) allowed.insert(tok);
    for (const auto& tok : extract_number_tokens(body)) {
        if (allowed.count(tok)) continue;
        const double v = std::strtod(tok.c_str(), nullptr);
        bool matched = false;
        for (const auto& a : allowed)
            if (std::fabs(std::strtod(a.c_str(), nullptr) - v) <= 1e-9) {
                matched = true;
                break;
            }
        if (!matched) return false;
    }
    return true;
}

namespace {

std::string first_sentence(const std::string& text) {
    for (std::size_t i = 0; i < text.size(); ++i)
        if (text[i] == '.' || text[i] == '!' || text[i] == '?')
            return text.substr(0, i + 1);
    return text;
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::istringstream in(text);
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

// Deterministic tip straight from the provision; trimmed to the word limit
// and stripped of any token that would fail the numeral check.
Tip fallback_tip(const CodeSection& s) {
    const std::string marker = citation_marker(s.section_id);
    const std::size_t marker_words = word_count(marker);

    auto assemble = [&](const std::vector<std::string>& words) {
        std::string text;
        std::size_t budget = kTipMaxWords > marker_words ? kTipMaxWords - marker_words : 0;
        for (const auto& w : words) {
            if (budget == 0) break;
            text += w;
            text += ' ';
            --budget;
        }
        text += marker;
        return text;
    };

    std::vector<std::string> words = split_words("Follow " + s.title + ": " +
                                                 first_sentence(s.text));
    Tip tip;
    tip.section_id = s.section_id;
    tip.text = assemble(words);
    if (!verify_grounding(tip.text, s)) {
        // A title numeral that never occurs in the provision text; drop
        // every word carrying an alien digit and rebuild.
        std::set<std::string> allowed;
        for (const auto& tok : extract_number_tokens(s.text)) allowed.insert(tok);
        std::vector<std::string> safe;
        for (const auto& w : words) {
            bool ok = true;
            for (const auto& tok : extract_number_tokens(w))
                if (!allowed.count(tok)) ok = false;
            if (ok) safe.push_back(w);
        }
        tip.text = assemble(safe);
    }
    tip.grounded = verify_grounding(tip.text, s);
    return tip;
}

} // namespace

Tip generate_tip(GenerationBackend& backend, const std::string& model_id,
                 const RetrievedSection& retrieved, const UnsafeEvent& event) {
    const CodeSection& section = retrieved.section();
    const std::string prompt = build_tip_prompt(retrieved, event);

    std::string corrective =
        prompt + "\nYour previous answer failed verification. Answer again: at most "
                 "sixty words, end with the exact citation marker, and use no number "
                 "that is absent from the provision text.\n";

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string text;
        try {
            text = backend.generate(model_id, attempt == 0 ? prompt : corrective);
        } catch (const BackendError&) {
            continue;
        }
        if (verify_grounding(text, section)) {
            Tip tip;
            tip.text = std::move(text);
            tip.section_id = section.section_id;
            tip.grounded = true;
            return tip;
        }
    }

    Tip tip = fallback_tip(section);
    tip.degraded = true;
    return tip;
}

} // namespace driveframe
