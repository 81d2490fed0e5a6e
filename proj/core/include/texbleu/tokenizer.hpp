#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "texbleu/corpus.hpp"

namespace texbleu {

// Byte-pair-encoding vocabulary: all 256 single-byte symbols form the base
// layer (ids 0..255), merged tokens follow in merge order. Merges never cross
// whitespace word boundaries, so no token contains a space.
class Vocab {
public:
    using MergePair = std::pair<std::string, std::string>;

    // Merge-free vocabulary over the 256 byte symbols.
    static Vocab byte_level();

    // Rebuilds the full vocabulary (maps, ids) from an ordered merge list.
    // Throws data_error if a merge's operands are not base symbols or the
    // products of earlier merges.
    static Vocab from_merges(std::vector<MergePair> merges);

    std::size_t size() const { return id_to_token_.size(); }
    const std::vector<MergePair>& merges() const { return merges_; }

    std::optional<std::uint32_t> token_id(std::string_view token) const;
    const std::string& token(std::uint32_t id) const;  // throws data_error

    // Training-order rank of a merge pair, if it is one.
    std::optional<std::uint32_t> merge_rank(std::string_view left,
                                            std::string_view right) const;

    bool operator==(const Vocab& other) const {
        return merges_ == other.merges_ && id_to_token_ == other.id_to_token_;
    }

private:
    Vocab() = default;

    std::vector<MergePair> merges_;
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, std::uint32_t> token_to_id_;
    // (left, right) joined with '\0' -> rank; used by encode.
    std::unordered_map<std::string, std::uint32_t> merge_rank_;
};

// Token sequence with global 0-based positions. `word_begin[i]` marks tokens
// that start a new whitespace-delimited word, which is what decode() needs to
// re-insert the single spaces textnorm guarantees.
struct TokenSeq {
    std::vector<std::string> tokens;
    std::vector<std::uint32_t> ids;
    std::vector<std::uint8_t> word_begin;

    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }
};

// Trains a BPE vocabulary on normalized corpus lines. Pre-tokenizes each line
// into whitespace words, starts from single bytes, and repeatedly merges the
// most frequent adjacent pair until `vocab_size` tokens exist or no pair
// reaches `min_pair_freq`. Ties are broken by the lexicographically smallest
// merged string (then smallest left operand). Deterministic.
Vocab train_bpe(std::span<const CorpusLine> corpus, std::size_t vocab_size,
                std::size_t min_pair_freq = 2);
Vocab train_bpe(std::span<const std::string> lines, std::size_t vocab_size,
                std::size_t min_pair_freq = 2);

// Normalizes `text` (via normalize_spacing), splits it into words, and applies
// the vocab's merges in training order within each word. Bytes outside any
// merge stay as base byte tokens, so encoding is total.
TokenSeq encode(const Vocab& vocab, std::string_view text);

// Reconstructs the normalized text; single spaces at word boundaries.
// Throws data_error for ids outside the vocab.
std::string decode(const Vocab& vocab, const TokenSeq& seq);

// Text format, UTF-8:
//   texbleu-vocab v1 <vocab_size>
//   <left>\t<right>        one line per merge, in order
//   <blank line>
//   <id>\t<token>          one line per token, ascending id
// Token bytes <= 0x20, >= 0x7f and '\' are escaped (\xNN, \\).
void save_vocab(const Vocab& vocab, const std::filesystem::path& path);
Vocab load_vocab(const std::filesystem::path& path);

}  // namespace texbleu
