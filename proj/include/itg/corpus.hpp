#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "itg/document.hpp"

namespace itg {

class FileUnreadable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class EmptyAfterFilter : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IngestOptions {
  std::size_t max_tokens = 64;  // keep sentences with fewer tokens than this
  std::uint64_t seed = 0;       // split hash seed
  double valid_fraction = 0.05;
  double test_fraction = 0.05;
  std::size_t capacity = kDefaultCapacity;
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t blank = 0;
  std::size_t too_long = 0;
  std::size_t duplicates = 0;
};

struct CorpusSplit {
  std::vector<Document> train, valid, test;
  IngestStats stats;
};

// One sentence per line, whitespace tokenized. Filtering and deduplication
// happen before the split; a sentence's split depends only on its text and
// the seed.
CorpusSplit ingest_corpus(const std::filesystem::path& path, const IngestOptions& opt = {});
CorpusSplit ingest_corpus(std::istream& in, const IngestOptions& opt = {});

// Plain sentence list, no filtering or splitting.
std::vector<Document> read_sentences(const std::filesystem::path& path, std::size_t capacity = kDefaultCapacity);
void write_sentences(const std::filesystem::path& path, const std::vector<Document>& docs);

// "split<TAB>sentence" per line, train then valid then test.
void write_manifest(std::ostream& out, const CorpusSplit& split);

}  // namespace itg
