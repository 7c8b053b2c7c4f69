#pragma once

#include <iosfwd>
#include <string>

#include "subvec/tensor.hpp"

namespace subvec {

// Flat binary fixture: "QTEN" magic, then C, H, W, bits as little-endian
// uint32, then the row-major payload one byte per element.
void write_tensor(std::ostream& out, const QuantTensor& t);
QuantTensor read_tensor(std::istream& in);
void save_tensor(const std::string& path, const QuantTensor& t);
QuantTensor load_tensor(const std::string& path);

// Long-form CSV for small fixtures: header c,h,w,value then one row per
// element in row-major order.
void write_tensor_csv(std::ostream& out, const QuantTensor& t);
QuantTensor read_tensor_csv(std::istream& in, int bits);
void save_tensor_csv(const std::string& path, const QuantTensor& t);
QuantTensor load_tensor_csv(const std::string& path, int bits);

}  // namespace subvec
