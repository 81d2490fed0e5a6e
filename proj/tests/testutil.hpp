#pragma once

#include <sys/wait.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testutil {

// Self-cleaning unique directory under the system temp path.
class TempDir {
public:
    explicit TempDir(const std::string& hint) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (hint + "-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const {
        return path_ / name;
    }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs `cli args` through the shell, capturing stdout/stderr under `scratch`.
// An `env_prefix` like "TEXBLEU_HOME=/x " rides in front of the command.
inline CliResult run_cli(const std::string& cli, const std::string& args,
                         const std::filesystem::path& scratch,
                         const std::string& env_prefix = "") {
    static int counter = 0;
    const auto out_path = scratch / ("cli-out-" + std::to_string(counter) + ".txt");
    const auto err_path = scratch / ("cli-err-" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = env_prefix + cli + " " + args + " > " +
                            out_path.string() + " 2> " + err_path.string();
    const int rc = std::system(cmd.c_str());
    CliResult result;
    if (rc >= 0 && WIFEXITED(rc)) result.exit_code = WEXITSTATUS(rc);
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    return result;
}

// Seeded generator of LaTeX-looking token streams ("\\frac { a } { b } + x ^ 2").
class LatexGen {
public:
    explicit LatexGen(std::uint64_t seed) : rng_(seed) {}

    std::string token() {
        static const std::vector<std::string> commands = {
            "\\frac", "\\sqrt", "\\alpha", "\\beta", "\\gamma", "\\cdot",
            "\\sum",  "\\int",  "\\sin",   "\\cos",  "\\log",   "\\pi"};
        static const std::string vars = "abcdxyznkt";
        static const std::vector<std::string> ops = {"+", "-", "=", "<", ">"};
        switch (rng_() % 6) {
            case 0: return commands[rng_() % commands.size()];
            case 1: return std::string(1, vars[rng_() % vars.size()]);
            case 2: return std::string(1, static_cast<char>('0' + rng_() % 10));
            case 3: return ops[rng_() % ops.size()];
            case 4: return rng_() % 2 ? "{" : "}";
            default: return rng_() % 2 ? "^" : "_";
        }
    }

    // min_tokens..max_tokens tokens joined by single spaces; already in
    // canonical spacing form.
    std::string expr(std::size_t min_tokens, std::size_t max_tokens) {
        const std::size_t count =
            min_tokens + rng_() % (max_tokens - min_tokens + 1);
        std::string out;
        for (std::size_t i = 0; i < count; ++i) {
            if (i > 0) out.push_back(' ');
            out += token();
        }
        return out;
    }

    // Corpus of brace-grouped command expressions, e.g. "\\sqrt { x + 1 }".
    std::vector<std::string> corpus_lines(std::size_t lines) {
        std::vector<std::string> out;
        out.reserve(lines);
        for (std::size_t i = 0; i < lines; ++i) {
            out.push_back(expr(4, 14));
        }
        return out;
    }

    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace testutil
