#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace driveframe {

// Standalone numeric tokens in free text: digits with an optional single
// decimal part. A token may be followed by letters ("52.3km") but not
// preceded by them, so identifiers like "v1" or "driver42" don't count.
std::vector<std::string> extract_number_tokens(std::string_view text);

// Case-insensitive substring search.
bool contains_phrase(std::string_view text, std::string_view phrase);

// Whitespace-separated word count.
std::size_t word_count(std::string_view text);

// Removes every occurrence of "per 100 km" (and the usual spelling
// variants) so rate units don't register as numerals.
std::string strip_rate_units(std::string_view text);

} // namespace driveframe
