#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mixcheck {

/// A bijection of {1, ..., n} stored as its 1-based images: entry i (1-based)
/// is sigma(i). Read as a deck, sigma(i) is the card found at position i.
class Permutation {
 public:
  static Permutation identity(int n);

  /// Throws ValidationError unless `images` is a permutation of 1..n, n >= 1.
  explicit Permutation(std::vector<int> images);

  int size() const noexcept { return static_cast<int>(images_.size()); }

  /// sigma(i) for 1 <= i <= n; unchecked.
  int operator()(int i) const noexcept { return images_[static_cast<std::size_t>(i - 1)]; }
  int at(int i) const;

  std::span<const int> images() const noexcept { return images_; }

  Permutation inverse() const;

  /// (this o other)(i) = this(other(i)).
  Permutation compose(const Permutation& other) const;

  /// Exchange the cards at positions l and r (1-based). l == r is a no-op.
  void swap_positions(int l, int r) noexcept {
    std::swap(images_[static_cast<std::size_t>(l - 1)],
              images_[static_cast<std::size_t>(r - 1)]);
  }

  bool is_identity() const noexcept;

  /// Space-separated images, the .perm line format.
  std::string to_string() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  struct Unchecked {};
  Permutation(std::vector<int> images, Unchecked) : images_(std::move(images)) {}

  std::vector<int> images_;
};

/// Lexicographic rank in 0..n!-1 (n <= 20).
std::uint64_t lehmer_rank(const Permutation& sigma);
Permutation lehmer_unrank(int n, std::uint64_t rank);

/// Calls f for every permutation of 1..n in lexicographic order (n <= 10).
void for_each_permutation(int n, const std::function<void(const Permutation&)>& f);

}  // namespace mixcheck
