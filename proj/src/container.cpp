#include "nohgnn/container.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "nohgnn/errors.hpp"

namespace nohgnn {

namespace {

constexpr std::string_view kMagic = "NOHG";

template <typename U>
void write_le(std::string& out, U v) {
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename U>
  U read() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    }
    pos_ += sizeof(U);
    return v;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("container: truncated data");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t Record::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

void Container::put(Record r) {
  if (r.name.size() > 0xFFFF) throw FormatError("container: record name too long");
  if (r.dims.size() > 0xFF) throw FormatError("container: rank too large");
  const std::size_t have = r.dtype == DType::float64 ? r.f64.size() : r.i64.size();
  if (have != r.element_count()) throw ShapeError("container: payload size does not match dims for " + r.name);
  if (has(r.name)) throw FormatError("container: duplicate record '" + r.name + "'");
  records_.push_back(std::move(r));
}

void Container::put_tensor(const std::string& name, const Tensor3& t) {
  put_f64(name, {t.d1(), t.d2(), t.d3()}, std::vector<double>(t.values().begin(), t.values().end()));
}

void Container::put_f64(const std::string& name, std::vector<std::uint64_t> dims, std::vector<double> values) {
  Record r;
  r.name = name;
  r.dtype = DType::float64;
  r.dims = std::move(dims);
  r.f64 = std::move(values);
  put(std::move(r));
}

void Container::put_i64(const std::string& name, std::vector<std::uint64_t> dims,
                        std::vector<std::int64_t> values) {
  Record r;
  r.name = name;
  r.dtype = DType::int64;
  r.dims = std::move(dims);
  r.i64 = std::move(values);
  put(std::move(r));
}

bool Container::has(const std::string& name) const {
  for (const auto& r : records_) {
    if (r.name == name) return true;
  }
  return false;
}

const Record& Container::get(const std::string& name) const {
  for (const auto& r : records_) {
    if (r.name == name) return r;
  }
  throw FormatError("container: missing record '" + name + "'");
}

Tensor3 Container::tensor(const std::string& name) const {
  const Record& r = get(name);
  if (r.dtype != DType::float64 || r.dims.size() != 3) {
    throw FormatError("container: record '" + name + "' is not a rank-3 float64 tensor");
  }
  return Tensor3(r.dims[0], r.dims[1], r.dims[2], r.f64);
}

const std::vector<std::int64_t>& Container::ints(const std::string& name) const {
  const Record& r = get(name);
  if (r.dtype != DType::int64) throw FormatError("container: record '" + name + "' is not int64");
  return r.i64;
}

const std::vector<double>& Container::reals(const std::string& name) const {
  const Record& r = get(name);
  if (r.dtype != DType::float64) throw FormatError("container: record '" + name + "' is not float64");
  return r.f64;
}

std::string Container::serialize() const {
  std::string out(kMagic);
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(records_.size()));
  for (const auto& r : records_) {
    write_le<std::uint16_t>(out, static_cast<std::uint16_t>(r.name.size()));
    out += r.name;
    out.push_back(static_cast<char>(r.dtype));
    out.push_back(static_cast<char>(r.dims.size()));
    for (auto d : r.dims) write_le<std::uint64_t>(out, d);
    if (r.dtype == DType::float64) {
      for (double v : r.f64) write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    } else {
      for (auto v : r.i64) write_le<std::uint64_t>(out, static_cast<std::uint64_t>(v));
    }
  }
  return out;
}

Container Container::deserialize(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size()) != kMagic) throw FormatError("container: bad magic (expected NOHG)");
  const auto version = in.read<std::uint32_t>();
  if (version != kVersion) {
    throw FormatError("container: unsupported format version " + std::to_string(version) + " (supported: " +
                      std::to_string(kVersion) + ")");
  }
  const auto count = in.read<std::uint32_t>();
  Container c;
  for (std::uint32_t k = 0; k < count; ++k) {
    Record r;
    const auto len = in.read<std::uint16_t>();
    r.name = std::string(in.take(len));
    const auto tag = in.read<std::uint8_t>();
    if (tag > 1) throw FormatError("container: unknown dtype tag " + std::to_string(tag));
    r.dtype = static_cast<DType>(tag);
    const auto rank = in.read<std::uint8_t>();
    for (std::uint8_t d = 0; d < rank; ++d) r.dims.push_back(in.read<std::uint64_t>());
    const std::size_t n = r.element_count();
    if (n > bytes.size() / 8) throw FormatError("container: record '" + r.name + "' larger than file");
    if (r.dtype == DType::float64) {
      r.f64.resize(n);
      for (auto& v : r.f64) v = std::bit_cast<double>(in.read<std::uint64_t>());
    } else {
      r.i64.resize(n);
      for (auto& v : r.i64) v = static_cast<std::int64_t>(in.read<std::uint64_t>());
    }
    c.put(std::move(r));
  }
  if (!in.done()) throw FormatError("container: trailing bytes after last record");
  return c;
}

void Container::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  const std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

Container Container::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace nohgnn
