#include "redge/random.hpp"

#include <vector>

namespace redge {

namespace {

std::vector<std::uint32_t> seed_words(std::uint64_t seed, StreamTag tag,
                                      std::initializer_list<std::uint64_t> indices) {
  std::vector<std::uint32_t> words;
  words.reserve(4 + 2 * indices.size());
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  push(static_cast<std::uint64_t>(tag));
  for (auto i : indices) push(i);
  return words;
}

}  // namespace

Rng make_stream(std::uint64_t seed, StreamTag tag,
                std::initializer_list<std::uint64_t> indices) {
  const auto words = seed_words(seed, tag, indices);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag,
                          std::initializer_list<std::uint64_t> indices) {
  const auto words = seed_words(seed, tag, indices);
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace redge
