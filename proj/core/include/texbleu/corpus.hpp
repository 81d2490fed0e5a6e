#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "texbleu/textnorm.hpp"

namespace texbleu {

// One normalized, non-empty corpus line plus where it came from.
struct CorpusLine {
    NormalizedText text;
    std::string source_file;
    std::size_t source_index = 0;  // 1-based line number (whole-file mode) or
                                   // math-segment ordinal (math-only mode)
};

struct CorpusStats {
    std::size_t file_count = 0;  // successfully ingested files
    std::size_t line_count = 0;  // emitted normalized lines
    std::size_t char_count = 0;  // total bytes across emitted lines
    std::size_t lenient_decoded_files = 0;  // files with invalid UTF-8 repaired
    std::size_t dropped_math_spans = 0;     // unbalanced math delimiters
    std::vector<std::pair<std::string, std::string>> skipped;  // path, reason

    std::size_t skipped_files() const { return skipped.size(); }
};

enum class IngestMode { whole_file, math_only };

// Removes LaTeX comments: every '%' not immediately preceded by a backslash
// discards the rest of its line ('%' included); "\%" is kept verbatim.
// Newlines are preserved, so line numbering survives.
std::string strip_comments(std::string_view tex);

// Returns the contents of $...$, \[...\] and \begin{equation}...\end{equation}
// spans in document order. An unclosed span is dropped (and counted via
// `dropped` when given) and ends the scan.
std::vector<std::string> extract_math_segments(std::string_view tex,
                                               std::size_t* dropped = nullptr);

// Walks all *.tex files under `root` in lexicographic path order and streams
// normalized non-empty lines through `sink`. Per file: repair invalid UTF-8,
// strip comments, optionally keep only math segments, normalize spacing,
// drop empty lines. Unreadable files are recorded in stats.skipped and
// ingestion continues; an unreadable root throws io_error.
CorpusStats ingest_corpus(const std::filesystem::path& root, IngestMode mode,
                          const std::function<void(CorpusLine&&)>& sink);

// Convenience form collecting the stream into a vector.
std::pair<std::vector<CorpusLine>, CorpusStats> ingest_corpus(
    const std::filesystem::path& root, IngestMode mode);

}  // namespace texbleu
