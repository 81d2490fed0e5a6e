#include "texbleu/textnorm.hpp"

namespace texbleu {

namespace {

bool is_space_byte(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
}

bool is_ascii_letter(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Byte length of the UTF-8 sequence introduced by `lead`; 1 for invalid leads.
std::size_t utf8_len(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead & 0xE0) == 0xC0) return 2;
    if ((lead & 0xF0) == 0xE0) return 3;
    if ((lead & 0xF8) == 0xF0) return 4;
    return 1;
}

}  // namespace

NormalizedText normalize_spacing(std::string_view raw) {
    std::string out;
    out.reserve(raw.size() + raw.size() / 2);
    // Appends one separating space unless we are at the start or just wrote one,
    // which collapses whitespace runs and doubled separators in a single pass.
    auto separate = [&out] {
        if (!out.empty() && out.back() != ' ') out.push_back(' ');
    };

    const std::size_t n = raw.size();
    std::size_t i = 0;
    while (i < n) {
        const char c = raw[i];
        if (is_space_byte(c)) {
            separate();
            ++i;
            continue;
        }
        if (c == '\\') {
            std::size_t j = i + 1;
            if (j < n && is_ascii_letter(raw[j])) {
                while (j < n && is_ascii_letter(raw[j])) ++j;
            } else if (j < n && !is_space_byte(raw[j])) {
                // One-character escape such as "\%" or "\{"; take the whole
                // code point so multi-byte characters are not split.
                j += utf8_len(static_cast<unsigned char>(raw[j]));
                if (j > n) j = n;
            }
            // A backslash before whitespace or at the end stands alone.
            separate();
            out.append(raw.substr(i, j - i));
            separate();
            i = j;
            continue;
        }
        if (c == '{' || c == '}' || c == '^' || c == '_') {
            separate();
            out.push_back(c);
            separate();
            ++i;
            continue;
        }
        out.push_back(c);
        ++i;
    }
    if (!out.empty() && out.back() == ' ') out.pop_back();
    return {std::move(out), raw.size()};
}

}  // namespace texbleu
