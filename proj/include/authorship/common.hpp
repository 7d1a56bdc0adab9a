#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace authorship {

enum class ErrorCode {
  kIo,
  kMalformedRecord,
  kDuplicateId,
  kEmptyInput,
  kIndivisibleCorpus,
  kAnnotationRequired,
  kKindMismatch,
  kSingleClass,
  kInvalidArgument,
  kDocMismatch,
  kClassOrderMismatch,
  kUnknownMember,
  kUnknownLabel,
  kDegenerateSample,
  kRowSum,
  kConfig,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; `code()` identifies the
// contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 protected:
  struct Verbatim {};
  // what() is `message` as given, without the code prefix.
  Error(Verbatim, ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

 private:
  ErrorCode code_;
};

// Seeded generator whose draws do not depend on the standard library's
// distribution implementations, so artifacts are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  // Uniform real in [0, 1).
  double uniform();
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// Strict whole-field parses; throw kMalformedRecord.
double parse_double(std::string_view text);
std::size_t parse_size(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
std::string sha256_hex(std::string_view data);

namespace csv {
std::string escape(std::string_view field);
std::vector<std::string> split_line(std::string_view line);
std::string join(const std::vector<std::string>& fields);
}  // namespace csv

}  // namespace authorship
