#include "itg/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace itg {

namespace {

std::vector<std::uint32_t> trigrams(std::string_view w) {
  std::string padded;
  padded.reserve(w.size() + 2);
  padded += '\x01';
  padded += w;
  padded += '\x02';
  std::vector<std::uint32_t> out;
  if (padded.size() < 3) return out;
  out.reserve(padded.size() - 2);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const auto b0 = static_cast<unsigned char>(padded[i]);
    const auto b1 = static_cast<unsigned char>(padded[i + 1]);
    const auto b2 = static_cast<unsigned char>(padded[i + 2]);
    out.push_back((std::uint32_t{b0} << 16) | (std::uint32_t{b1} << 8) | b2);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Squared norm of a sorted multiset viewed as a count vector.
double squared_norm(const std::vector<std::uint32_t>& v) {
  double total = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const double c = static_cast<double>(j - i);
    total += c * c;
    i = j;
  }
  return total;
}

}  // namespace

double TrigramSimilarity::cosine(std::string_view a, std::string_view b) {
  const auto ta = trigrams(a);
  const auto tb = trigrams(b);
  if (ta.empty() || tb.empty()) return 0.0;

  double dot = 0;
  std::size_t i = 0, j = 0;
  while (i < ta.size() && j < tb.size()) {
    if (ta[i] < tb[j]) {
      ++i;
    } else if (tb[j] < ta[i]) {
      ++j;
    } else {
      const auto key = ta[i];
      std::size_t ci = 0, cj = 0;
      while (i < ta.size() && ta[i] == key) ++i, ++ci;
      while (j < tb.size() && tb[j] == key) ++j, ++cj;
      dot += static_cast<double>(ci * cj);
    }
  }
  return dot / std::sqrt(squared_norm(ta) * squared_norm(tb));
}

double TrigramSimilarity::score(const Token& wx, const Token& wy, const AlignContext&) const {
  if (wx == wy) return 1.0;
  return std::max(0.0, cosine(wx, wy));
}

EmbeddingSimilarity::EmbeddingSimilarity(std::istream& tsv, double gap_baseline) : baseline_(gap_baseline) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(tsv, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    Token word;
    if (!std::getline(fields, word, '\t')) continue;
    std::vector<double> vec;
    std::string cell;
    while (fields >> cell) vec.push_back(std::stod(cell));
    if (vec.empty()) throw std::runtime_error("embedding line " + std::to_string(lineno) + " has no components");
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_) {
      throw std::runtime_error("embedding line " + std::to_string(lineno) + " has dimension " +
                               std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
    }
    table_[word] = std::move(vec);
  }
}

EmbeddingSimilarity EmbeddingSimilarity::from_file(const std::filesystem::path& path, double gap_baseline) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding table " + path.string());
  return EmbeddingSimilarity(in, gap_baseline);
}

double EmbeddingSimilarity::score(const Token& wx, const Token& wy, const AlignContext&) const {
  if (wx == wy) return 1.0;
  const auto a = table_.find(wx);
  const auto b = table_.find(wy);
  if (a == table_.end() || b == table_.end()) return 0.0;
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < dim_; ++i) {
    dot += a->second[i] * b->second[i];
    na += a->second[i] * a->second[i];
    nb += b->second[i] * b->second[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace itg
