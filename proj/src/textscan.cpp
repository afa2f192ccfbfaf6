#include "driveframe/textscan.hpp"

#include <cctype>

namespace driveframe {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

} // namespace

std::vector<std::string> extract_number_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_digit(text[i])) {
            ++i;
            continue;
        }
        const bool attached = i > 0 && (is_word(text[i - 1]) || text[i - 1] == '.');
        std::size_t j = i;
        while (j < text.size() && is_digit(text[j])) ++j;
        if (j < text.size() && text[j] == '.' && j + 1 < text.size() && is_digit(text[j + 1])) {
            ++j;
            while (j < text.size() && is_digit(text[j])) ++j;
        }
        if (!attached && !(j < text.size() && text[j] == '.' && j + 1 < text.size() &&
                           is_digit(text[j + 1])))
            tokens.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return tokens;
}

bool contains_phrase(std::string_view text, std::string_view phrase) {
    if (phrase.empty() || phrase.size() > text.size()) return false;
    for (std::size_t i = 0; i + phrase.size() <= text.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < phrase.size(); ++k) {
            if (lower(text[i + k]) != lower(phrase[k])) {
                match = false;
                break;
            }
        }
        if (match) return true;
    }
    return false;
}

std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

std::string strip_rate_units(std::string_view text) {
    static constexpr std::string_view variants[] = {"per 100 km", "per 100km",
                                                    "per-100km", "per-100 km", "/100km",
                                                    "/100 km", "per 100-km"};
    std::string out(text);
    for (std::string_view v : variants) {
        for (std::size_t pos = 0;;) {
            std::size_t hit = std::string::npos;
            for (std::size_t i = pos; i + v.size() <= out.size(); ++i) {
                bool match = true;
                for (std::size_t k = 0; k < v.size(); ++k) {
                    if (lower(out[i + k]) != lower(v[k])) {
                        match = false;
                        break;
                    }
                }
                if (match) {
                    hit = i;
                    break;
                }
            }
            if (hit == std::string::npos) break;
            out.erase(hit, v.size());
            pos = hit;
        }
    }
    return out;
}

} // namespace driveframe
