#include "texbleu/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "texbleu/errors.hpp"

namespace texbleu {

namespace {

// Structural UTF-8 repair: invalid sequences become U+FFFD. Returns whether
// anything was replaced.
bool sanitize_utf8(std::string& s) {
    static constexpr char kReplacement[] = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(s.size());
    bool repaired = false;
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        const auto b = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        if (b < 0x80) len = 1;
        else if ((b & 0xE0) == 0xC0) len = 2;
        else if ((b & 0xF0) == 0xE0) len = 3;
        else if ((b & 0xF8) == 0xF0) len = 4;
        bool ok = len > 0 && i + len <= n;
        for (std::size_t k = 1; ok && k < len; ++k) {
            ok = (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
        }
        if (ok) {
            out.append(s, i, len);
            i += len;
        } else {
            out.append(kReplacement);
            ++i;
            repaired = true;
        }
    }
    if (repaired) s = std::move(out);
    return repaired;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

}  // namespace

std::string strip_comments(std::string_view tex) {
    std::string out;
    out.reserve(tex.size());
    std::size_t i = 0;
    while (i < tex.size()) {
        const char c = tex[i];
        if (c == '%' && (i == 0 || tex[i - 1] != '\\')) {
            // Drop up to (not including) the next newline.
            while (i < tex.size() && tex[i] != '\n') ++i;
            continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

std::vector<std::string> extract_math_segments(std::string_view tex,
                                               std::size_t* dropped) {
    static constexpr std::string_view kBeginEq = "\\begin{equation}";
    static constexpr std::string_view kEndEq = "\\end{equation}";

    std::vector<std::string> segments;
    std::size_t local_dropped = 0;
    std::size_t i = 0;
    const std::size_t n = tex.size();

    auto take_span = [&](std::size_t content_start, std::string_view closer) {
        const std::size_t end = tex.find(closer, content_start);
        if (end == std::string_view::npos) {
            ++local_dropped;
            i = n;  // unbalanced span: stop scanning
            return;
        }
        segments.emplace_back(tex.substr(content_start, end - content_start));
        i = end + closer.size();
    };

    while (i < n) {
        const char c = tex[i];
        if (c == '\\') {
            if (tex.substr(i).starts_with(kBeginEq)) {
                take_span(i + kBeginEq.size(), kEndEq);
            } else if (i + 1 < n && tex[i + 1] == '[') {
                take_span(i + 2, "\\]");
            } else {
                i += 2;  // escaped character (covers "\$"), or trailing '\'
            }
            continue;
        }
        if (c == '$') {
            take_span(i + 1, "$");
            continue;
        }
        ++i;
    }
    if (dropped) *dropped += local_dropped;
    return segments;
}

CorpusStats ingest_corpus(const std::filesystem::path& root, IngestMode mode,
                          const std::function<void(CorpusLine&&)>& sink) {
    namespace fs = std::filesystem;

    std::error_code ec;
    if (!fs::is_directory(root, ec) || ec) {
        throw io_error("corpus root is not a readable directory: " +
                       root.string());
    }

    std::vector<fs::path> files;
    std::vector<fs::path> unreadable;
    fs::recursive_directory_iterator it(
        root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw io_error("cannot open corpus root: " + root.string());
    for (const auto& entry : it) {
        if (entry.path().extension() != ".tex") continue;
        if (entry.is_regular_file(ec) && !ec) {
            files.push_back(entry.path());
        } else if (!entry.is_directory(ec)) {
            unreadable.push_back(entry.path());  // e.g. dangling symlink
        }
    }
    // Lexicographic path order keeps downstream BPE training reproducible.
    const auto by_path = [](const fs::path& a, const fs::path& b) {
        return a.generic_string() < b.generic_string();
    };
    std::sort(files.begin(), files.end(), by_path);
    std::sort(unreadable.begin(), unreadable.end(), by_path);

    CorpusStats stats;
    for (const auto& path : unreadable) {
        stats.skipped.emplace_back(path.generic_string(), "not a regular file");
    }
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            stats.skipped.emplace_back(path.generic_string(), "unreadable");
            continue;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        if (in.bad()) {
            stats.skipped.emplace_back(path.generic_string(), "read error");
            continue;
        }
        std::string content = std::move(buf).str();
        if (sanitize_utf8(content)) ++stats.lenient_decoded_files;
        content = strip_comments(content);

        auto emit = [&](std::string_view raw, std::size_t index) {
            NormalizedText norm = normalize_spacing(raw);
            if (norm.text.empty()) return;
            stats.line_count += 1;
            stats.char_count += norm.text.size();
            sink(CorpusLine{std::move(norm), path.generic_string(), index});
        };

        if (mode == IngestMode::whole_file) {
            const auto lines = split_lines(content);
            for (std::size_t li = 0; li < lines.size(); ++li) {
                emit(lines[li], li + 1);
            }
        } else {
            const auto segments =
                extract_math_segments(content, &stats.dropped_math_spans);
            for (std::size_t si = 0; si < segments.size(); ++si) {
                emit(segments[si], si + 1);
            }
        }
        stats.file_count += 1;
    }
    return stats;
}

std::pair<std::vector<CorpusLine>, CorpusStats> ingest_corpus(
    const std::filesystem::path& root, IngestMode mode) {
    std::vector<CorpusLine> lines;
    CorpusStats stats =
        ingest_corpus(root, mode, [&](CorpusLine&& line) {
            lines.push_back(std::move(line));
        });
    return {std::move(lines), std::move(stats)};
}

}  // namespace texbleu
