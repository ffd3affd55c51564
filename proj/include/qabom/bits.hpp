// Bitstring helpers shared by the simulator, the Ising oracles and the data
// generators.
//
// Conventions used everywhere in this library:
//   - qubit/unit i is the i-th least significant bit of a basis-state index;
//   - character i of a bitstring refers to unit i (so "10" means unit 0 = 1);
//   - bit b carries spin (-1)^b, i.e. bit 0 is the Z = +1 eigenstate.
#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qabom {

inline int bit_of(std::uint64_t index, int pos) {
  return static_cast<int>((index >> pos) & 1ULL);
}

inline int spin_of_bit(int b) { return b == 0 ? 1 : -1; }

inline int spin_of(std::uint64_t index, int pos) { return spin_of_bit(bit_of(index, pos)); }

// (-1)^(number of set bits of index restricted to mask)
inline double z_product_sign(std::uint64_t index, std::uint64_t mask) {
  return (std::popcount(index & mask) & 1) ? -1.0 : 1.0;
}

inline std::string to_bitstring(std::uint64_t index, int n_bits) {
  std::string s(static_cast<std::size_t>(n_bits), '0');
  for (int i = 0; i < n_bits; ++i)
    if (bit_of(index, i)) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

inline std::uint64_t parse_bitstring(const std::string& s) {
  if (s.empty() || s.size() > 63)
    throw std::invalid_argument("parse_bitstring: length must be in [1, 63]");
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      index |= 1ULL << i;
    else if (s[i] != '0')
      throw std::invalid_argument("parse_bitstring: invalid character in \"" + s + "\"");
  }
  return index;
}

}  // namespace qabom
