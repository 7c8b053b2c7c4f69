#pragma once

#include <initializer_list>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace subvec {

// Flat `key = value` configuration text. '#' starts a comment, blank lines
// separate blocks, keys are unique within a block. Sweep files are lists of
// such blocks, one grid slice per block.
struct KvBlock {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& dflt) const;
  long get_int(const std::string& key) const;
  long get_int_or(const std::string& key, long dflt) const;
  bool get_bool_or(const std::string& key, bool dflt) const;
  // "3" -> (3, 3); "1..8" -> (1, 8)
  std::pair<long, long> get_range(const std::string& key) const;
  std::pair<long, long> get_range_or(const std::string& key, long lo,
                                     long hi) const;
};

std::vector<KvBlock> parse_kv_blocks(const std::string& text);
std::vector<KvBlock> load_kv_file(const std::string& path);

// Rejects keys outside `allowed`, naming the offender.
void require_known_keys(const KvBlock& block,
                        std::initializer_list<const char*> allowed);

}  // namespace subvec
