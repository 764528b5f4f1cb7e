#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "flame/numkit/types.hpp"

namespace flame::net {

/// Named float64 arrays plus string metadata, stored in one file:
///
///   FLAMECKPT 1\n
///   manifest <bytes>\n
///   <manifest: "meta <key> <value>" and "array <name> <rows> <cols> <offset>" lines>
///   <payload: little-endian doubles, row-major, offsets relative to payload start>
///
/// Names and metadata keys must not contain whitespace.
class Checkpoint {
 public:
  void put(const std::string& name, const Matrix& value);
  void put_scalar(const std::string& name, double value);
  const Matrix& get(const std::string& name) const;
  double get_scalar(const std::string& name) const;
  bool contains(const std::string& name) const { return arrays_.count(name) != 0; }

  void set_meta(const std::string& key, const std::string& value);
  const std::string& meta(const std::string& key) const;
  bool has_meta(const std::string& key) const { return meta_.count(key) != 0; }

  const std::map<std::string, Matrix>& arrays() const { return arrays_; }
  const std::map<std::string, std::string>& metadata() const { return meta_; }

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::map<std::string, Matrix> arrays_;
  std::map<std::string, std::string> meta_;
};

}  // namespace flame::net
