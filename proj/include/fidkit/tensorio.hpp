#pragma once

#include <string>

#include "fidkit/tensor.hpp"

namespace fidkit {

// .tns1 binary format (all integers little-endian):
//   magic "TNS1" | version u32=1 | dtype u8=0 (float32) | rank u8=2 |
//   dims 2 x u64 | payload N*D float32 | id count u64 |
//   per id: length u32 + UTF-8 bytes.
// The id count is always written (0 when the set has default ids).
void write_tensor(const std::string& path, const TensorSet& t);
TensorSet read_tensor(const std::string& path);

// CSV fallback. A first line that does not parse as numbers is treated as
// a header; a leading "id" column supplies row identifiers.
TensorSet read_csv_matrix(const std::string& path);

// Reads .tns1 or .csv by file extension.
TensorSet read_any(const std::string& path);

// Atomic file write (temp file + rename), used for every artifact.
void atomic_write(const std::string& path, const std::string& bytes);

}  // namespace fidkit
