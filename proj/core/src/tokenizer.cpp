#include "texbleu/tokenizer.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "texbleu/errors.hpp"
#include "texbleu/textnorm.hpp"

namespace texbleu {

namespace {

constexpr std::size_t kByteAlphabet = 256;

std::string merge_key(std::string_view left, std::string_view right) {
    std::string key;
    key.reserve(left.size() + right.size() + 1);
    key.append(left);
    key.push_back('\0');
    key.append(right);
    return key;
}

std::vector<std::string_view> split_words(std::string_view line) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) words.push_back(line.substr(i, j - i));
        i = j;
    }
    return words;
}

struct WordEntry {
    std::vector<std::uint32_t> syms;
    std::uint64_t count = 0;
};

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Runs the merge loop over a word-frequency table and returns the ordered
// merge list. Symbol ids follow the final vocab numbering: bytes 0..255,
// then merge products in creation order (duplicates reuse their first id).
std::vector<Vocab::MergePair> run_bpe(
    const std::unordered_map<std::string, std::uint64_t>& word_freq,
    std::size_t vocab_size, std::size_t min_pair_freq) {
    if (word_freq.empty()) throw data_error("train_bpe: empty corpus");
    if (vocab_size < kByteAlphabet) {
        throw data_error("train_bpe: vocab_size " + std::to_string(vocab_size) +
                         " is below the byte alphabet size (256)");
    }

    std::vector<std::string> sym_text(kByteAlphabet);
    std::unordered_map<std::string, std::uint32_t> sym_id;
    sym_id.reserve(vocab_size);
    for (std::size_t b = 0; b < kByteAlphabet; ++b) {
        sym_text[b] = std::string(1, static_cast<char>(b));
        sym_id.emplace(sym_text[b], static_cast<std::uint32_t>(b));
    }

    std::vector<WordEntry> words;
    words.reserve(word_freq.size());
    for (const auto& [word, count] : word_freq) {
        WordEntry entry;
        entry.count = count;
        entry.syms.reserve(word.size());
        for (const char c : word) {
            entry.syms.push_back(static_cast<unsigned char>(c));
        }
        words.push_back(std::move(entry));
    }
    // The map above iterates in unspecified order; selection below uses a
    // total order, so only the word list contents matter, not their order.

    std::unordered_map<std::uint64_t, std::uint64_t> pair_counts;
    std::unordered_map<std::uint64_t, std::unordered_set<std::uint32_t>> pair_words;
    for (std::uint32_t w = 0; w < words.size(); ++w) {
        const auto& entry = words[w];
        for (std::size_t i = 0; i + 1 < entry.syms.size(); ++i) {
            const auto key = pair_key(entry.syms[i], entry.syms[i + 1]);
            pair_counts[key] += entry.count;
            pair_words[key].insert(w);
        }
    }

    std::vector<Vocab::MergePair> merges;
    std::size_t token_count = kByteAlphabet;

    while (token_count < vocab_size && !pair_counts.empty()) {
        // Best pair: highest count, ties by smallest merged string, then
        // smallest left operand (which pins down the pair).
        std::uint64_t best_key = 0;
        std::uint64_t best_count = 0;
        std::string best_concat;
        for (const auto& [key, count] : pair_counts) {
            if (count < min_pair_freq || count < best_count) continue;
            const auto a = static_cast<std::uint32_t>(key >> 32);
            const auto b = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
            std::string concat = sym_text[a] + sym_text[b];
            const auto best_a = static_cast<std::uint32_t>(best_key >> 32);
            if (count > best_count || concat < best_concat ||
                (concat == best_concat && sym_text[a] < sym_text[best_a])) {
                best_key = key;
                best_count = count;
                best_concat = std::move(concat);
            }
        }
        if (best_count == 0) break;  // nothing reaches min_pair_freq

        const auto left_id = static_cast<std::uint32_t>(best_key >> 32);
        const auto right_id = static_cast<std::uint32_t>(best_key & 0xFFFFFFFFu);
        merges.emplace_back(sym_text[left_id], sym_text[right_id]);

        std::uint32_t product_id;
        if (const auto it = sym_id.find(best_concat); it != sym_id.end()) {
            // Same string formed by an earlier merge; reuse its id.
            product_id = it->second;
        } else {
            product_id = static_cast<std::uint32_t>(sym_text.size());
            sym_text.push_back(best_concat);
            sym_id.emplace(best_concat, product_id);
            ++token_count;
        }

        pair_counts.erase(best_key);
        auto affected_it = pair_words.find(best_key);
        if (affected_it == pair_words.end()) continue;
        const auto affected = std::move(affected_it->second);
        pair_words.erase(affected_it);

        for (const std::uint32_t w : affected) {
            auto& entry = words[w];
            const auto& syms = entry.syms;

            // Retract this word's old pair contributions.
            for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
                const auto key = pair_key(syms[i], syms[i + 1]);
                if (key == best_key) continue;  // already erased wholesale
                auto pc = pair_counts.find(key);
                if (pc != pair_counts.end()) {
                    pc->second -= entry.count;
                    if (pc->second == 0) pair_counts.erase(pc);
                }
                auto pw = pair_words.find(key);
                if (pw != pair_words.end()) pw->second.erase(w);
            }

            // Merge occurrences left to right.
            std::vector<std::uint32_t> merged;
            merged.reserve(syms.size());
            for (std::size_t i = 0; i < syms.size();) {
                if (i + 1 < syms.size() && syms[i] == left_id &&
                    syms[i + 1] == right_id) {
                    merged.push_back(product_id);
                    i += 2;
                } else {
                    merged.push_back(syms[i]);
                    ++i;
                }
            }
            entry.syms = std::move(merged);

            for (std::size_t i = 0; i + 1 < entry.syms.size(); ++i) {
                const auto key = pair_key(entry.syms[i], entry.syms[i + 1]);
                pair_counts[key] += entry.count;
                pair_words[key].insert(w);
            }
        }
    }
    return merges;
}

std::string escape_token(std::string_view token) {
    std::string out;
    out.reserve(token.size());
    for (const char c : token) {
        const auto b = static_cast<unsigned char>(c);
        if (c == '\\') {
            out += "\\\\";
        } else if (b <= 0x20 || b >= 0x7F) {
            char buf[5];
            std::snprintf(buf, sizeof(buf), "\\x%02x", b);
            out += buf;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string unescape_token(std::string_view escaped, std::size_t line_no) {
    std::string out;
    out.reserve(escaped.size());
    std::size_t i = 0;
    while (i < escaped.size()) {
        const char c = escaped[i];
        if (c != '\\') {
            out.push_back(c);
            ++i;
            continue;
        }
        if (i + 1 < escaped.size() && escaped[i + 1] == '\\') {
            out.push_back('\\');
            i += 2;
            continue;
        }
        if (i + 3 < escaped.size() && escaped[i + 1] == 'x') {
            unsigned value = 0;
            const auto* first = escaped.data() + i + 2;
            const auto [ptr, ec] = std::from_chars(first, first + 2, value, 16);
            if (ec == std::errc() && ptr == first + 2) {
                out.push_back(static_cast<char>(value));
                i += 4;
                continue;
            }
        }
        throw data_error("vocab file: bad escape sequence at line " +
                         std::to_string(line_no));
    }
    return out;
}

}  // namespace

Vocab Vocab::byte_level() {
    return from_merges({});
}

Vocab Vocab::from_merges(std::vector<MergePair> merges) {
    Vocab v;
    v.id_to_token_.reserve(kByteAlphabet + merges.size());
    v.token_to_id_.reserve(kByteAlphabet + merges.size());
    for (std::size_t b = 0; b < kByteAlphabet; ++b) {
        v.id_to_token_.emplace_back(1, static_cast<char>(b));
        v.token_to_id_.emplace(v.id_to_token_.back(),
                               static_cast<std::uint32_t>(b));
    }
    for (std::size_t m = 0; m < merges.size(); ++m) {
        const auto& [left, right] = merges[m];
        if (!v.token_to_id_.contains(left) || !v.token_to_id_.contains(right)) {
            throw data_error("vocab merge " + std::to_string(m) +
                             " references an unknown operand");
        }
        std::string product = left + right;
        v.merge_rank_.emplace(merge_key(left, right),
                              static_cast<std::uint32_t>(m));
        if (!v.token_to_id_.contains(product)) {
            const auto id = static_cast<std::uint32_t>(v.id_to_token_.size());
            v.token_to_id_.emplace(product, id);
            v.id_to_token_.push_back(std::move(product));
        }
    }
    v.merges_ = std::move(merges);
    return v;
}

std::optional<std::uint32_t> Vocab::token_id(std::string_view token) const {
    const auto it = token_to_id_.find(std::string(token));
    if (it == token_to_id_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocab::token(std::uint32_t id) const {
    if (id >= id_to_token_.size()) {
        throw data_error("token id " + std::to_string(id) +
                         " outside vocab of size " +
                         std::to_string(id_to_token_.size()));
    }
    return id_to_token_[id];
}

std::optional<std::uint32_t> Vocab::merge_rank(std::string_view left,
                                               std::string_view right) const {
    const auto it = merge_rank_.find(merge_key(left, right));
    if (it == merge_rank_.end()) return std::nullopt;
    return it->second;
}

Vocab train_bpe(std::span<const CorpusLine> corpus, std::size_t vocab_size,
                std::size_t min_pair_freq) {
    std::unordered_map<std::string, std::uint64_t> word_freq;
    for (const auto& line : corpus) {
        for (const auto word : split_words(line.text.text)) {
            word_freq[std::string(word)] += 1;
        }
    }
    return Vocab::from_merges(run_bpe(word_freq, vocab_size, min_pair_freq));
}

Vocab train_bpe(std::span<const std::string> lines, std::size_t vocab_size,
                std::size_t min_pair_freq) {
    std::unordered_map<std::string, std::uint64_t> word_freq;
    for (const auto& line : lines) {
        for (const auto word : split_words(line)) {
            word_freq[std::string(word)] += 1;
        }
    }
    return Vocab::from_merges(run_bpe(word_freq, vocab_size, min_pair_freq));
}

TokenSeq encode(const Vocab& vocab, std::string_view text) {
    const NormalizedText norm = normalize_spacing(text);
    TokenSeq seq;
    for (const auto word : split_words(norm.text)) {
        std::vector<std::uint32_t> syms;
        syms.reserve(word.size());
        for (const char c : word) {
            syms.push_back(static_cast<unsigned char>(c));
        }
        // Repeatedly apply the earliest-ranked merge present in the word;
        // equivalent to replaying the merges in training order. Bytes with no
        // applicable merge stay as base symbols, so every word encodes.
        while (syms.size() > 1) {
            std::uint32_t best_rank = std::numeric_limits<std::uint32_t>::max();
            std::uint32_t best_left = 0;
            std::uint32_t best_right = 0;
            for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
                const auto rank =
                    vocab.merge_rank(vocab.token(syms[i]), vocab.token(syms[i + 1]));
                if (rank && *rank < best_rank) {
                    best_rank = *rank;
                    best_left = syms[i];
                    best_right = syms[i + 1];
                }
            }
            if (best_rank == std::numeric_limits<std::uint32_t>::max()) break;

            const std::string product =
                vocab.token(best_left) + vocab.token(best_right);
            const auto product_id = vocab.token_id(product);
            std::vector<std::uint32_t> merged;
            merged.reserve(syms.size());
            for (std::size_t i = 0; i < syms.size();) {
                if (i + 1 < syms.size() && syms[i] == best_left &&
                    syms[i + 1] == best_right) {
                    merged.push_back(*product_id);
                    i += 2;
                } else {
                    merged.push_back(syms[i]);
                    ++i;
                }
            }
            syms = std::move(merged);
        }

        for (std::size_t i = 0; i < syms.size(); ++i) {
            seq.tokens.push_back(vocab.token(syms[i]));
            seq.ids.push_back(syms[i]);
            seq.word_begin.push_back(i == 0 ? 1 : 0);
        }
    }
    return seq;
}

std::string decode(const Vocab& vocab, const TokenSeq& seq) {
    if (seq.ids.size() != seq.tokens.size() ||
        seq.word_begin.size() != seq.tokens.size()) {
        throw data_error("decode: token sequence field lengths differ");
    }
    std::string out;
    for (std::size_t i = 0; i < seq.ids.size(); ++i) {
        if (i > 0 && seq.word_begin[i]) out.push_back(' ');
        out += vocab.token(seq.ids[i]);
    }
    return out;
}

void save_vocab(const Vocab& vocab, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write vocab file: " + path.string());
    out << "texbleu-vocab v1 " << vocab.size() << "\n";
    for (const auto& [left, right] : vocab.merges()) {
        out << escape_token(left) << '\t' << escape_token(right) << "\n";
    }
    out << "\n";
    for (std::uint32_t id = 0; id < vocab.size(); ++id) {
        out << id << '\t' << escape_token(vocab.token(id)) << "\n";
    }
    out.flush();
    if (!out) throw io_error("write failed: " + path.string());
}

Vocab load_vocab(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read vocab file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = std::move(buf).str();

    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= content.size()) {
        const std::size_t nl = content.find('\n', start);
        if (nl == std::string::npos) {
            lines.emplace_back(content.substr(start));
            break;
        }
        lines.emplace_back(content.substr(start, nl - start));
        start = nl + 1;
    }
    if (!lines.empty() && lines.back().empty()) lines.pop_back();

    if (lines.empty()) throw data_error("vocab file is empty: " + path.string());

    std::istringstream header(lines[0]);
    std::string magic, version;
    std::size_t declared_size = 0;
    header >> magic >> version >> declared_size;
    if (magic != "texbleu-vocab") {
        throw data_error("not a texbleu vocab file (line 1): " + path.string());
    }
    if (version != "v1") {
        throw data_error("unsupported vocab version '" + version +
                         "' (expected v1): " + path.string());
    }
    if (!header || declared_size == 0) {
        throw data_error("malformed vocab header (line 1): " + path.string());
    }

    std::vector<Vocab::MergePair> merges;
    std::size_t i = 1;
    for (; i < lines.size() && !lines[i].empty(); ++i) {
        const auto& line = lines[i];
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw data_error("vocab file: merge line " + std::to_string(i + 1) +
                             " lacks a tab separator");
        }
        merges.emplace_back(unescape_token(line.substr(0, tab), i + 1),
                            unescape_token(line.substr(tab + 1), i + 1));
    }
    if (i >= lines.size()) {
        throw data_error("vocab file truncated: missing token section: " +
                         path.string());
    }
    ++i;  // skip the blank separator

    Vocab vocab = Vocab::from_merges(std::move(merges));
    if (vocab.size() != declared_size) {
        throw data_error("vocab file declares " + std::to_string(declared_size) +
                         " tokens but merges produce " +
                         std::to_string(vocab.size()));
    }

    std::size_t checked = 0;
    for (; i < lines.size(); ++i, ++checked) {
        const auto& line = lines[i];
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw data_error("vocab file: token line " + std::to_string(i + 1) +
                             " lacks a tab separator");
        }
        std::size_t id = 0;
        const auto* first = line.data();
        const auto [ptr, ec] = std::from_chars(first, first + tab, id);
        if (ec != std::errc() || ptr != first + tab || id != checked) {
            throw data_error("vocab file: token ids not dense at line " +
                             std::to_string(i + 1));
        }
        const std::string token = unescape_token(line.substr(tab + 1), i + 1);
        if (id >= vocab.size() || vocab.token(static_cast<std::uint32_t>(id)) != token) {
            throw data_error("vocab file: token line " + std::to_string(i + 1) +
                             " disagrees with the merge list");
        }
    }
    if (checked != declared_size) {
        throw data_error("vocab file truncated: expected " +
                         std::to_string(declared_size) + " token lines, found " +
                         std::to_string(checked));
    }
    return vocab;
}

}  // namespace texbleu
