#pragma once

#include "driveframe/backend.hpp"
#include "driveframe/events.hpp"

#include <map>
#include <string>
#include <vector>

namespace driveframe {

// One Highway Code provision.
struct CodeSection {
    std::string section_id;  // e.g. "HC-12.3"
    std::string title;
    std::string text;  // verbatim provision
    std::vector<std::string> keywords;
};

struct CodeCorpus {
    int version = 1;
    std::vector<CodeSection> sections;
    std::map<EventKind, std::string> behaviour_map;

    const CodeSection* find(std::string_view section_id) const;
};

// Validates schema, id uniqueness and behaviour_map completeness; errors
// name the offending section or kind.
CodeCorpus load_corpus(std::string_view bytes);

class NoGroundingError : public Error {
public:
    explicit NoGroundingError(const std::string& msg) : Error(msg) {}
};

// Proof that a section came out of retrieval. Tip generation only accepts
// this wrapper, so there is no way to prompt from an unretrieved section.
class RetrievedSection {
public:
    const CodeSection& section() const { return *section_; }

private:
    friend RetrievedSection retrieve(const CodeCorpus&, EventKind,
                                     const std::vector<std::string>&);
    explicit RetrievedSection(const CodeSection& s) : section_(&s) {}
    const CodeSection* section_;
};

// Deterministic retrieval: the behaviour map wins outright; without a
// mapping, sections are scored by keyword overlap with the context terms
// and ties break in corpus order. Zero overlap everywhere is an error —
// generating without grounding is not allowed.
RetrievedSection retrieve(const CodeCorpus& corpus, EventKind kind,
                          const std::vector<std::string>& context_terms = {});

struct Tip {
    std::string text;  // at most 60 words, ends with the citation marker
    std::string section_id;
    bool grounded = false;
    bool degraded = false;  // fallback path was taken
};

inline constexpr std::size_t kTipMaxWords = 60;

std::string citation_marker(std::string_view section_id);

// Prompt carrying the provision verbatim plus the event context; the
// template is versioned (kTipPromptVersion).
std::string build_tip_prompt(const RetrievedSection& retrieved, const UnsafeEvent& event);

// True iff the text ends with the exact citation marker, every numeric
// token also occurs in the provision text, and the word count is within
// the limit.
bool verify_grounding(std::string_view tip_text, const CodeSection& section);

// One backend call, verification, one corrective retry, then the
// deterministic fallback tip built from the provision itself. Always
// returns a grounded tip; `degraded` reports that the fallback fired.
Tip generate_tip(GenerationBackend& backend, const std::string& model_id,
                 const RetrievedSection& retrieved, const UnsafeEvent& event);

} // namespace driveframe
