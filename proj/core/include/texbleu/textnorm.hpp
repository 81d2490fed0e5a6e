#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace texbleu {

// A string in canonical spacing form: single spaces only, no leading or
// trailing space, braces / sub- and superscript markers / backslash commands
// delimited by spaces. Produced by normalize_spacing(); normalizing the text
// field again yields itself.
struct NormalizedText {
    std::string text;
    std::size_t original_len = 0;  // byte length of the raw input

    bool operator==(const NormalizedText&) const = default;
};

// Canonical spacing pass applied to every string before tokenization.
// In order:
//   1. collapse each maximal whitespace run (space, tab, CR, LF) to one space
//   2. put one space on both sides of '{', '}', '^', '_'
//   3. delimit each backslash command with single spaces; a command is '\'
//      plus a maximal ASCII letter run, or '\' plus exactly one non-letter
//      character (so "\%" and "\{" stay intact as two-character units)
//   4. re-collapse doubled spaces introduced by 2-3
//   5. trim
// Total function; never throws.
NormalizedText normalize_spacing(std::string_view raw);

}  // namespace texbleu
