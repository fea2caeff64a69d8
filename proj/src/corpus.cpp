#include "itg/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "itg/rng.hpp"
#include "itg/tokenizer.hpp"

namespace itg {

namespace {

constexpr std::uint64_t kBuckets = 10000;

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileUnreadable("cannot read '" + path.string() + "'");
  return in;
}

}  // namespace

CorpusSplit ingest_corpus(std::istream& in, const IngestOptions& opt) {
  if (!(opt.valid_fraction >= 0 && opt.test_fraction >= 0 && opt.valid_fraction + opt.test_fraction < 1)) {
    throw std::invalid_argument("split fractions must be non-negative and leave room for train");
  }
  const WhitespaceTokenizer tok;
  const auto train_cut = static_cast<std::uint64_t>((1.0 - opt.valid_fraction - opt.test_fraction) * kBuckets + 0.5);
  const auto valid_cut = static_cast<std::uint64_t>((1.0 - opt.test_fraction) * kBuckets + 0.5);
  const std::size_t limit = std::min(opt.max_tokens, opt.capacity + 1);

  CorpusSplit out;
  std::unordered_set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    ++out.stats.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tokens = tok.tokenize(line);
    if (tokens.empty()) {
      ++out.stats.blank;
      continue;
    }
    if (tokens.size() >= limit) {
      ++out.stats.too_long;
      continue;
    }
    Document d(std::move(tokens), opt.capacity);
    std::string key = d.to_text();
    if (!seen.insert(key).second) {
      ++out.stats.duplicates;
      continue;
    }
    const std::uint64_t bucket = stable_hash(key, opt.seed) % kBuckets;
    (bucket < train_cut ? out.train : bucket < valid_cut ? out.valid : out.test).push_back(std::move(d));
  }
  if (out.train.empty() && out.valid.empty() && out.test.empty()) {
    throw EmptyAfterFilter("no sentences left after filtering (" + std::to_string(out.stats.lines) + " lines read)");
  }
  return out;
}

CorpusSplit ingest_corpus(const std::filesystem::path& path, const IngestOptions& opt) {
  auto in = open_or_throw(path);
  return ingest_corpus(in, opt);
}

std::vector<Document> read_sentences(const std::filesystem::path& path, std::size_t capacity) {
  auto in = open_or_throw(path);
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Document d = make_document(line, WhitespaceTokenizer{}, capacity);
    if (!d.empty()) docs.push_back(std::move(d));
  }
  return docs;
}

void write_sentences(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::ofstream out(path);
  if (!out) throw FileUnreadable("cannot write '" + path.string() + "'");
  for (const auto& d : docs) out << d.to_text() << '\n';
}

void write_manifest(std::ostream& out, const CorpusSplit& split) {
  for (const auto& d : split.train) out << "train\t" << d.to_text() << '\n';
  for (const auto& d : split.valid) out << "valid\t" << d.to_text() << '\n';
  for (const auto& d : split.test) out << "test\t" << d.to_text() << '\n';
}

}  // namespace itg
