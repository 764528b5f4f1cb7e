#include "flame/netlib/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace flame::net {

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

namespace {

constexpr const char* kMagic = "FLAMECKPT 1";

void check_token(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_of(" \t\r\n") != std::string::npos) {
    throw std::invalid_argument(std::string("checkpoint: ") + what + " '" + s + "' must be non-empty without whitespace");
  }
}

}  // namespace

void Checkpoint::put(const std::string& name, const Matrix& value) {
  check_token(name, "array name");
  arrays_[name] = value;
}

void Checkpoint::put_scalar(const std::string& name, double value) { put(name, Matrix::Constant(1, 1, value)); }

const Matrix& Checkpoint::get(const std::string& name) const {
  auto it = arrays_.find(name);
  if (it == arrays_.end()) throw std::out_of_range("checkpoint: no array named '" + name + "'");
  return it->second;
}

double Checkpoint::get_scalar(const std::string& name) const {
  const Matrix& m = get(name);
  if (m.size() != 1) throw std::invalid_argument("checkpoint: array '" + name + "' is not a scalar");
  return m(0, 0);
}

void Checkpoint::set_meta(const std::string& key, const std::string& value) {
  check_token(key, "metadata key");
  if (value.find('\n') != std::string::npos) throw std::invalid_argument("checkpoint: metadata value contains newline");
  meta_[key] = value;
}

const std::string& Checkpoint::meta(const std::string& key) const {
  auto it = meta_.find(key);
  if (it == meta_.end()) throw std::out_of_range("checkpoint: no metadata key '" + key + "'");
  return it->second;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ostringstream manifest;
  for (const auto& [k, v] : meta_) manifest << "meta " << k << ' ' << v << '\n';
  std::size_t offset = 0;
  for (const auto& [name, m] : arrays_) {
    manifest << "array " << name << ' ' << m.rows() << ' ' << m.cols() << ' ' << offset << '\n';
    offset += static_cast<std::size_t>(m.size()) * sizeof(double);
  }
  const std::string text = manifest.str();

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open '" + tmp + "' for writing");
    out << kMagic << '\n' << "manifest " << text.size() << '\n' << text;
    for (const auto& [name, m] : arrays_) {
      out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("checkpoint: write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw std::runtime_error("checkpoint: '" + path.string() + "' has an unknown header");
  }
  std::size_t manifest_bytes = 0;
  {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint: truncated header");
    std::istringstream hs(line);
    std::string word;
    if (!(hs >> word >> manifest_bytes) || word != "manifest") throw std::runtime_error("checkpoint: bad manifest line");
  }
  std::string text(manifest_bytes, '\0');
  in.read(text.data(), static_cast<std::streamsize>(manifest_bytes));
  if (!in) throw std::runtime_error("checkpoint: truncated manifest");
  const std::streampos payload_start = in.tellg();

  Checkpoint ck;
  std::istringstream ms(text);
  while (std::getline(ms, line)) {
    std::istringstream ls(line);
    std::string kind, name;
    ls >> kind >> name;
    if (kind == "meta") {
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      ck.meta_[name] = value;
    } else if (kind == "array") {
      Index rows = 0, cols = 0;
      std::size_t offset = 0;
      if (!(ls >> rows >> cols >> offset) || rows < 0 || cols < 0) {
        throw std::runtime_error("checkpoint: bad array entry '" + line + "'");
      }
      Matrix m(rows, cols);
      in.seekg(payload_start + static_cast<std::streamoff>(offset));
      in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
      if (!in) throw std::runtime_error("checkpoint: truncated payload for '" + name + "'");
      ck.arrays_[name] = std::move(m);
    } else {
      throw std::runtime_error("checkpoint: unknown manifest entry '" + line + "'");
    }
  }
  return ck;
}

}  // namespace flame::net
