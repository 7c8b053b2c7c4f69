#include "subvec/kvconfig.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "subvec/errors.hpp"

namespace subvec {
namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long parse_long(const std::string& key, const std::string& text) {
  char* end = nullptr;
  long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0') {
    throw ConfigError("key '" + key + "' wants an integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

bool KvBlock::has(const std::string& key) const { return values.count(key) > 0; }

const std::string& KvBlock::get(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

std::string KvBlock::get_or(const std::string& key,
                            const std::string& dflt) const {
  auto it = values.find(key);
  return it == values.end() ? dflt : it->second;
}

long KvBlock::get_int(const std::string& key) const {
  return parse_long(key, get(key));
}

long KvBlock::get_int_or(const std::string& key, long dflt) const {
  return has(key) ? get_int(key) : dflt;
}

bool KvBlock::get_bool_or(const std::string& key, bool dflt) const {
  if (!has(key)) return dflt;
  const std::string& v = get(key);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("key '" + key + "' wants a boolean, got '" + v + "'");
}

std::pair<long, long> KvBlock::get_range(const std::string& key) const {
  const std::string& v = get(key);
  size_t dots = v.find("..");
  if (dots == std::string::npos) {
    long n = parse_long(key, v);
    return {n, n};
  }
  long lo = parse_long(key, trim(v.substr(0, dots)));
  long hi = parse_long(key, trim(v.substr(dots + 2)));
  if (lo > hi) {
    throw ConfigError("key '" + key + "' has an empty range '" + v + "'");
  }
  return {lo, hi};
}

std::pair<long, long> KvBlock::get_range_or(const std::string& key, long lo,
                                            long hi) const {
  return has(key) ? get_range(key) : std::pair<long, long>{lo, hi};
}

std::vector<KvBlock> parse_kv_blocks(const std::string& text) {
  std::vector<KvBlock> blocks;
  KvBlock current;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  auto flush = [&] {
    if (!current.values.empty()) {
      blocks.push_back(std::move(current));
      current = KvBlock{};
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) {
      flush();
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        " is not 'key = value': '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(lineno) +
                        " has an empty key or value");
    }
    if (!current.values.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(lineno) + " repeats key '" +
                        key + "'");
    }
  }
  flush();
  return blocks;
}

std::vector<KvBlock> load_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_kv_blocks(text.str());
}

void require_known_keys(const KvBlock& block,
                        std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : block.values) {
    bool ok = std::any_of(allowed.begin(), allowed.end(),
                          [&](const char* a) { return key == a; });
    if (!ok) throw ConfigError("unknown key '" + key + "'");
  }
}

}  // namespace subvec
