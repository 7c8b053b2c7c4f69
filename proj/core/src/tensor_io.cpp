#include "subvec/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "subvec/errors.hpp"

namespace subvec {
namespace {

constexpr std::array<char, 4> kMagic = {'Q', 'T', 'E', 'N'};

void put_u32(std::ostream& out, uint32_t v) {
  std::array<char, 4> b = {static_cast<char>(v & 0xFF),
                           static_cast<char>((v >> 8) & 0xFF),
                           static_cast<char>((v >> 16) & 0xFF),
                           static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), b.size());
}

uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b;
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!in) throw IoError("tensor stream truncated in the header");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

int checked_dim(uint32_t v, const char* what) {
  if (v == 0 || v > (1u << 20)) {
    throw IoError(std::string("tensor header has an implausible ") + what);
  }
  return static_cast<int>(v);
}

}  // namespace

void write_tensor(std::ostream& out, const QuantTensor& t) {
  validate_tensor_range(t);
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<uint32_t>(t.channels));
  put_u32(out, static_cast<uint32_t>(t.height));
  put_u32(out, static_cast<uint32_t>(t.width));
  put_u32(out, static_cast<uint32_t>(t.bits));
  out.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size()));
  if (!out) throw IoError("tensor write failed");
}

QuantTensor read_tensor(std::istream& in) {
  std::array<char, 4> magic;
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) {
    throw IoError("not a tensor fixture: bad magic");
  }
  int c = checked_dim(get_u32(in), "channel count");
  int h = checked_dim(get_u32(in), "height");
  int w = checked_dim(get_u32(in), "width");
  uint32_t bits = get_u32(in);
  if (bits < 1 || bits > 8) {
    throw IoError("tensor header bits outside [1, 8]");
  }
  QuantTensor t(c, h, w, static_cast<int>(bits));
  in.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size()));
  if (static_cast<size_t>(in.gcount()) != t.data.size()) {
    throw IoError("tensor payload shorter than the header promises");
  }
  validate_tensor_range(t);
  return t;
}

void save_tensor(const std::string& path, const QuantTensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_tensor(out, t);
}

QuantTensor load_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_tensor(in);
}

void write_tensor_csv(std::ostream& out, const QuantTensor& t) {
  validate_tensor_range(t);
  out << "c,h,w,value\n";
  char buf[64];
  for (int c = 0; c < t.channels; ++c) {
    for (int h = 0; h < t.height; ++h) {
      for (int w = 0; w < t.width; ++w) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%u\n", c, h, w,
                      static_cast<unsigned>(t.at(c, h, w)));
        out << buf;
      }
    }
  }
  if (!out) throw IoError("tensor CSV write failed");
}

QuantTensor read_tensor_csv(std::istream& in, int bits) {
  std::string line;
  if (!std::getline(in, line) || line != "c,h,w,value") {
    throw IoError("tensor CSV must start with the header c,h,w,value");
  }
  struct Cell {
    int c, h, w;
    unsigned v;
  };
  std::vector<Cell> cells;
  int maxc = -1, maxh = -1, maxw = -1;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Cell cell;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%u", &cell.c, &cell.h, &cell.w,
                    &cell.v) != 4) {
      throw IoError("tensor CSV line " + std::to_string(lineno) +
                    " is not c,h,w,value");
    }
    if (cell.c < 0 || cell.h < 0 || cell.w < 0) {
      throw IoError("tensor CSV line " + std::to_string(lineno) +
                    " has a negative index");
    }
    maxc = std::max(maxc, cell.c);
    maxh = std::max(maxh, cell.h);
    maxw = std::max(maxw, cell.w);
    cells.push_back(cell);
  }
  if (cells.empty()) throw IoError("tensor CSV has no data rows");
  QuantTensor t(maxc + 1, maxh + 1, maxw + 1, bits);
  std::vector<char> seen(t.data.size(), 0);
  for (const Cell& cell : cells) {
    size_t idx = (static_cast<size_t>(cell.c) * t.height + cell.h) * t.width +
                 cell.w;
    if (seen[idx]) throw IoError("tensor CSV repeats an element");
    seen[idx] = 1;
    if (cell.v > static_cast<unsigned>(t.max_value())) {
      throw IoError("tensor CSV value exceeds the declared bit width");
    }
    t.data[idx] = static_cast<uint8_t>(cell.v);
  }
  for (char s : seen) {
    if (!s) throw IoError("tensor CSV leaves elements unset");
  }
  return t;
}

void save_tensor_csv(const std::string& path, const QuantTensor& t) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_tensor_csv(out, t);
}

QuantTensor load_tensor_csv(const std::string& path, int bits) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_tensor_csv(in, bits);
}

}  // namespace subvec
