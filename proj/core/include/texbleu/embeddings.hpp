#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "texbleu/tokenizer.hpp"

namespace texbleu {

// Dense vocab_size x dim matrix of 32-bit floats; one row per token id.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t vocab_size, std::size_t dim)
        : rows_(vocab_size), dim_(dim), data_(vocab_size * dim, 0.0f) {}
    static EmbeddingTable from_data(std::size_t vocab_size, std::size_t dim,
                                    std::vector<float> data);

    std::size_t vocab_size() const { return rows_; }
    std::size_t dim() const { return dim_; }
    std::span<const float> row(std::size_t id) const;
    std::span<float> row_mut(std::size_t id);

    // First n rows as a new table. The byte tokens always occupy ids 0..255,
    // so head_rows(256) pairs a trained table with Vocab::byte_level().
    EmbeddingTable head_rows(std::size_t n) const;

    bool operator==(const EmbeddingTable&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<float> data_;
};

// Dense max_len x dim positional-encoding matrix. Positions at or beyond
// max_len clamp to the last row.
class PositionalTable {
public:
    PositionalTable() = default;
    static PositionalTable from_data(std::size_t max_len, std::size_t dim,
                                     std::vector<float> data);

    std::size_t max_len() const { return rows_; }
    std::size_t dim() const { return dim_; }
    std::span<const float> row(std::size_t pos) const;  // clamps

    bool operator==(const PositionalTable&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<float> data_;
};

struct SgnsParams {
    std::size_t dim = 128;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    std::uint64_t seed = 42;
    float learning_rate = 0.05f;
};

// Skip-gram with negative sampling over token ids; the stand-in for a large
// pretrained embedding model. Single-threaded and fully determined by the
// seed. Every row is randomly initialized, so ids unseen in the corpus still
// get a usable nonzero vector. Throws data_error for an empty corpus, fewer
// than two distinct tokens, or dim < 2.
EmbeddingTable train_embeddings(std::span<const TokenSeq> corpus,
                                const Vocab& vocab, const SgnsParams& params);

// Deterministic positional table:
//   row[pos][2k]   = sin(pos / 10000^(2k/dim))
//   row[pos][2k+1] = cos(pos / 10000^(2k/dim))
// Throws data_error for odd dim or max_len == 0.
PositionalTable sinusoidal_positions(std::size_t max_len, std::size_t dim);

// Binary table format: magic "TXBL", u16 version = 1, u8 kind (0 embedding,
// 1 positional), u32 rows, u32 dim, then rows*dim little-endian f32.
void save_table(const EmbeddingTable& table, const std::filesystem::path& path);
void save_table(const PositionalTable& table, const std::filesystem::path& path);
EmbeddingTable load_embedding_table(const std::filesystem::path& path);
PositionalTable load_positional_table(const std::filesystem::path& path);

// 1 - cosine similarity, clamped to [0,1]; a zero vector on either side is
// distance 1 by definition. Throws data_error on dimension mismatch.
double cos_dist(std::span<const float> a, std::span<const float> b);

// Element-wise absolute-difference sum.
double l1_dist(std::span<const float> a, std::span<const float> b);

}  // namespace texbleu
