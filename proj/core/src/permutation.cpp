#include "mixcheck/permutation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mixcheck/error.hpp"

namespace mixcheck {

Permutation Permutation::identity(int n) {
  if (n < 1) throw ValidationError("permutation size must be >= 1");
  std::vector<int> images(static_cast<std::size_t>(n));
  std::iota(images.begin(), images.end(), 1);
  return Permutation(std::move(images), Unchecked{});
}

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  const auto n = images_.size();
  if (n == 0) throw ValidationError("permutation must have at least one entry");
  std::vector<bool> seen(n + 1, false);
  for (int v : images_) {
    if (v < 1 || static_cast<std::size_t>(v) > n) {
      throw ValidationError("permutation entry " + std::to_string(v) + " outside 1.." +
                            std::to_string(n));
    }
    if (seen[static_cast<std::size_t>(v)]) {
      throw ValidationError("permutation repeats entry " + std::to_string(v));
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

int Permutation::at(int i) const {
  if (i < 1 || i > size()) throw ValidationError("permutation index out of range");
  return (*this)(i);
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) {
    inv[static_cast<std::size_t>(images_[i] - 1)] = static_cast<int>(i) + 1;
  }
  return Permutation(std::move(inv), Unchecked{});
}

Permutation Permutation::compose(const Permutation& other) const {
  if (other.size() != size()) throw ValidationError("cannot compose permutations of different sizes");
  std::vector<int> out(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) {
    out[i] = (*this)(other.images_[i]);
  }
  return Permutation(std::move(out), Unchecked{});
}

bool Permutation::is_identity() const noexcept {
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (images_[i] != static_cast<int>(i) + 1) return false;
  }
  return true;
}

std::string Permutation::to_string() const {
  std::string out;
  out.reserve(images_.size() * 3);
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(images_[i]);
  }
  return out;
}

std::uint64_t lehmer_rank(const Permutation& sigma) {
  const int n = sigma.size();
  if (n > 20) throw ValidationError("lehmer_rank supports n <= 20");
  std::uint64_t rank = 0;
  std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
  for (int i = 1; i <= n; ++i) {
    const int v = sigma(i);
    int smaller = 0;
    for (int u = 1; u < v; ++u) {
      if (!used[static_cast<std::size_t>(u)]) ++smaller;
    }
    used[static_cast<std::size_t>(v)] = true;
    rank = rank * static_cast<std::uint64_t>(n - i + 1) + static_cast<std::uint64_t>(smaller);
  }
  return rank;
}

Permutation lehmer_unrank(int n, std::uint64_t rank) {
  if (n < 1 || n > 20) throw ValidationError("lehmer_unrank supports 1 <= n <= 20");
  std::vector<int> digits(static_cast<std::size_t>(n));
  for (int i = n; i >= 1; --i) {
    const auto base = static_cast<std::uint64_t>(n - i + 1);
    digits[static_cast<std::size_t>(i - 1)] = static_cast<int>(rank % base);
    rank /= base;
  }
  if (rank != 0) throw ValidationError("lehmer rank out of range");
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 1);
  std::vector<int> images;
  images.reserve(static_cast<std::size_t>(n));
  for (int d : digits) {
    images.push_back(pool[static_cast<std::size_t>(d)]);
    pool.erase(pool.begin() + d);
  }
  return Permutation(std::move(images));
}

void for_each_permutation(int n, const std::function<void(const Permutation&)>& f) {
  if (n < 1 || n > 10) throw ValidationError("for_each_permutation supports 1 <= n <= 10");
  std::vector<int> images(static_cast<std::size_t>(n));
  std::iota(images.begin(), images.end(), 1);
  do {
    f(Permutation(images));
  } while (std::next_permutation(images.begin(), images.end()));
}

}  // namespace mixcheck
