#include "texbleu/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "texbleu/errors.hpp"

namespace texbleu {

namespace {

constexpr char kMagic[4] = {'T', 'X', 'B', 'L'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kKindEmbedding = 0;
constexpr std::uint8_t kKindPositional = 1;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<char>((v >> shift) & 0xFF));
    }
}

void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u32(out, bits);
}

class ByteReader {
public:
    ByteReader(const std::string& data, const std::filesystem::path& path)
        : data_(data), path_(path) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }

    std::uint16_t u16() {
        const auto* p = take(2);
        return static_cast<std::uint16_t>(static_cast<unsigned char>(p[0]) |
                                          (static_cast<unsigned char>(p[1]) << 8));
    }

    std::uint32_t u32() {
        const auto* p = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        }
        return v;
    }

    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::size_t remaining() const { return data_.size() - pos_; }

private:
    const char* take(std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw data_error("table file truncated: " + path_.string());
        }
        const char* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }

    const std::string& data_;
    const std::filesystem::path& path_;
    std::size_t pos_ = 0;
};

void write_table(const std::filesystem::path& path, std::uint8_t kind,
                 std::size_t rows, std::size_t dim,
                 std::span<const float> data) {
    std::string payload;
    payload.reserve(4 + 2 + 1 + 4 + 4 + data.size() * 4);
    payload.append(kMagic, 4);
    put_u16(payload, kVersion);
    payload.push_back(static_cast<char>(kind));
    put_u32(payload, static_cast<std::uint32_t>(rows));
    put_u32(payload, static_cast<std::uint32_t>(dim));
    for (const float v : data) put_f32(payload, v);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write table file: " + path.string());
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    out.flush();
    if (!out) throw io_error("write failed: " + path.string());
}

std::vector<float> read_table(const std::filesystem::path& path,
                              std::uint8_t expected_kind, std::size_t& rows,
                              std::size_t& dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read table file: " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    if (in.bad()) throw io_error("read failed: " + path.string());

    ByteReader reader(content, path);
    char magic[4];
    for (auto& c : magic) c = static_cast<char>(reader.u8());
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw data_error("not a texbleu table file: " + path.string());
    }
    const auto version = reader.u16();
    if (version != kVersion) {
        throw data_error("unsupported table version " + std::to_string(version) +
                         " (expected 1): " + path.string());
    }
    const auto kind = reader.u8();
    if (kind != expected_kind) {
        throw data_error(std::string("table kind mismatch: expected ") +
                         (expected_kind == kKindEmbedding ? "embedding"
                                                          : "positional") +
                         ": " + path.string());
    }
    rows = reader.u32();
    dim = reader.u32();
    const std::uint64_t count =
        static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(dim);
    std::vector<float> data;
    data.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const float v = reader.f32();
        if (!std::isfinite(v)) {
            throw data_error("non-finite value in table: " + path.string());
        }
        data.push_back(v);
    }
    if (reader.remaining() != 0) {
        throw data_error("table file has trailing bytes: " + path.string());
    }
    return data;
}

}  // namespace

EmbeddingTable EmbeddingTable::from_data(std::size_t vocab_size,
                                         std::size_t dim,
                                         std::vector<float> data) {
    if (data.size() != vocab_size * dim) {
        throw data_error("embedding table data size does not match " +
                         std::to_string(vocab_size) + "x" + std::to_string(dim));
    }
    EmbeddingTable t;
    t.rows_ = vocab_size;
    t.dim_ = dim;
    t.data_ = std::move(data);
    return t;
}

std::span<const float> EmbeddingTable::row(std::size_t id) const {
    if (id >= rows_) {
        throw data_error("embedding row " + std::to_string(id) +
                         " out of range (vocab_size " + std::to_string(rows_) + ")");
    }
    return {data_.data() + id * dim_, dim_};
}

std::span<float> EmbeddingTable::row_mut(std::size_t id) {
    if (id >= rows_) {
        throw data_error("embedding row " + std::to_string(id) + " out of range");
    }
    return {data_.data() + id * dim_, dim_};
}

EmbeddingTable EmbeddingTable::head_rows(std::size_t n) const {
    if (n > rows_) {
        throw data_error("head_rows(" + std::to_string(n) +
                         ") exceeds table rows " + std::to_string(rows_));
    }
    return from_data(n, dim_,
                     std::vector<float>(data_.begin(),
                                        data_.begin() + static_cast<std::ptrdiff_t>(n * dim_)));
}

PositionalTable PositionalTable::from_data(std::size_t max_len, std::size_t dim,
                                           std::vector<float> data) {
    if (max_len == 0) throw data_error("positional table needs max_len >= 1");
    if (data.size() != max_len * dim) {
        throw data_error("positional table data size does not match " +
                         std::to_string(max_len) + "x" + std::to_string(dim));
    }
    PositionalTable t;
    t.rows_ = max_len;
    t.dim_ = dim;
    t.data_ = std::move(data);
    return t;
}

std::span<const float> PositionalTable::row(std::size_t pos) const {
    const std::size_t clamped = std::min(pos, rows_ - 1);
    return {data_.data() + clamped * dim_, dim_};
}

EmbeddingTable train_embeddings(std::span<const TokenSeq> corpus,
                                const Vocab& vocab, const SgnsParams& params) {
    if (params.dim < 2) throw data_error("train_embeddings: dim must be >= 2");
    if (params.window == 0) throw data_error("train_embeddings: window must be >= 1");

    const std::size_t vocab_size = vocab.size();
    std::vector<std::uint64_t> counts(vocab_size, 0);
    std::uint64_t total_tokens = 0;
    for (const auto& seq : corpus) {
        for (const auto id : seq.ids) {
            counts.at(id) += 1;
            ++total_tokens;
        }
    }
    if (total_tokens == 0) throw data_error("train_embeddings: empty corpus");

    std::size_t distinct = 0;
    for (const auto c : counts) distinct += (c > 0);
    if (distinct < 2) {
        throw data_error("train_embeddings: corpus is degenerate "
                         "(fewer than two distinct tokens)");
    }

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<float> init(-0.5f / params.dim,
                                               0.5f / params.dim);

    EmbeddingTable input(vocab_size, params.dim);
    std::vector<float> output(vocab_size * params.dim, 0.0f);
    for (std::size_t id = 0; id < vocab_size; ++id) {
        for (auto& v : input.row_mut(id)) v = init(rng);
    }

    // Noise distribution proportional to count^0.75, the usual SGNS choice.
    std::vector<double> noise_cdf(vocab_size, 0.0);
    double acc = 0.0;
    for (std::size_t id = 0; id < vocab_size; ++id) {
        if (counts[id] > 0) acc += std::pow(static_cast<double>(counts[id]), 0.75);
        noise_cdf[id] = acc;
    }
    std::uniform_real_distribution<double> noise_pick(0.0, acc);
    auto sample_noise = [&] {
        const double u = noise_pick(rng);
        const auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
        return static_cast<std::uint32_t>(
            std::min<std::size_t>(vocab_size - 1,
                                  static_cast<std::size_t>(it - noise_cdf.begin())));
    };

    const std::uint64_t total_steps =
        std::max<std::uint64_t>(1, params.epochs * total_tokens);
    std::uint64_t step = 0;
    std::vector<float> grad(params.dim);

    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        for (const auto& seq : corpus) {
            const auto len = seq.ids.size();
            for (std::size_t center = 0; center < len; ++center, ++step) {
                const float lr =
                    params.learning_rate *
                    std::max(1.0f - static_cast<float>(step) / total_steps, 1e-4f);
                const std::size_t b =
                    1 + static_cast<std::size_t>(rng() % params.window);
                const std::size_t lo = center >= b ? center - b : 0;
                const std::size_t hi = std::min(len, center + b + 1);
                const std::uint32_t center_id = seq.ids[center];
                auto in_row = input.row_mut(center_id);

                for (std::size_t ctx = lo; ctx < hi; ++ctx) {
                    if (ctx == center) continue;
                    const std::uint32_t ctx_id = seq.ids[ctx];
                    std::fill(grad.begin(), grad.end(), 0.0f);

                    for (std::size_t k = 0; k <= params.negatives; ++k) {
                        std::uint32_t target;
                        float label;
                        if (k == 0) {
                            target = ctx_id;
                            label = 1.0f;
                        } else {
                            target = sample_noise();
                            if (target == ctx_id) continue;
                            label = 0.0f;
                        }
                        float* out_row = output.data() + target * params.dim;
                        double dot = 0.0;
                        for (std::size_t d = 0; d < params.dim; ++d) {
                            dot += in_row[d] * out_row[d];
                        }
                        const float f =
                            static_cast<float>(1.0 / (1.0 + std::exp(-dot)));
                        const float g = (label - f) * lr;
                        for (std::size_t d = 0; d < params.dim; ++d) {
                            grad[d] += g * out_row[d];
                            out_row[d] += g * in_row[d];
                        }
                    }
                    for (std::size_t d = 0; d < params.dim; ++d) {
                        in_row[d] += grad[d];
                    }
                }
            }
        }
    }
    return input;
}

PositionalTable sinusoidal_positions(std::size_t max_len, std::size_t dim) {
    if (dim == 0 || dim % 2 != 0) {
        throw data_error("sinusoidal_positions: dim must be even and positive");
    }
    if (max_len == 0) {
        throw data_error("sinusoidal_positions: max_len must be >= 1");
    }
    std::vector<float> data(max_len * dim);
    for (std::size_t pos = 0; pos < max_len; ++pos) {
        for (std::size_t k = 0; 2 * k < dim; ++k) {
            const double divisor =
                std::pow(10000.0, static_cast<double>(2 * k) / static_cast<double>(dim));
            const double angle = static_cast<double>(pos) / divisor;
            data[pos * dim + 2 * k] = static_cast<float>(std::sin(angle));
            data[pos * dim + 2 * k + 1] = static_cast<float>(std::cos(angle));
        }
    }
    return PositionalTable::from_data(max_len, dim, std::move(data));
}

void save_table(const EmbeddingTable& table, const std::filesystem::path& path) {
    std::vector<float> flat;
    flat.reserve(table.vocab_size() * table.dim());
    for (std::size_t id = 0; id < table.vocab_size(); ++id) {
        const auto r = table.row(id);
        flat.insert(flat.end(), r.begin(), r.end());
    }
    write_table(path, kKindEmbedding, table.vocab_size(), table.dim(), flat);
}

void save_table(const PositionalTable& table, const std::filesystem::path& path) {
    std::vector<float> flat;
    flat.reserve(table.max_len() * table.dim());
    for (std::size_t pos = 0; pos < table.max_len(); ++pos) {
        const auto r = table.row(pos);
        flat.insert(flat.end(), r.begin(), r.end());
    }
    write_table(path, kKindPositional, table.max_len(), table.dim(), flat);
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
    std::size_t rows = 0, dim = 0;
    auto data = read_table(path, kKindEmbedding, rows, dim);
    return EmbeddingTable::from_data(rows, dim, std::move(data));
}

PositionalTable load_positional_table(const std::filesystem::path& path) {
    std::size_t rows = 0, dim = 0;
    auto data = read_table(path, kKindPositional, rows, dim);
    return PositionalTable::from_data(rows, dim, std::move(data));
}

double cos_dist(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw data_error("cos_dist: dimension mismatch (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 1.0;
    const double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(d, 0.0, 1.0);
}

double l1_dist(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw data_error("l1_dist: dimension mismatch (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += std::abs(static_cast<double>(a[i]) - b[i]);
    }
    return sum;
}

}  // namespace texbleu
