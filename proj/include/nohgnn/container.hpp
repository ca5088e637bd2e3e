#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nohgnn/tensor.hpp"

namespace nohgnn {

// Binary record container. Layout, all integers little-endian:
//   "NOHG" | u32 version | u32 record count |
//   per record: u16 name length, UTF-8 name, u8 dtype (0 = float64, 1 = int64),
//               u8 rank, rank x u64 dims, row-major payload.
enum class DType : std::uint8_t { float64 = 0, int64 = 1 };

struct Record {
  std::string name;
  DType dtype = DType::float64;
  std::vector<std::uint64_t> dims;
  std::vector<double> f64;
  std::vector<std::int64_t> i64;

  std::size_t element_count() const;
};

class Container {
 public:
  static constexpr std::uint32_t kVersion = 1;

  void put_tensor(const std::string& name, const Tensor3& t);
  void put_f64(const std::string& name, std::vector<std::uint64_t> dims, std::vector<double> values);
  void put_i64(const std::string& name, std::vector<std::uint64_t> dims, std::vector<std::int64_t> values);

  bool has(const std::string& name) const;
  const Record& get(const std::string& name) const;
  Tensor3 tensor(const std::string& name) const;
  const std::vector<std::int64_t>& ints(const std::string& name) const;
  const std::vector<double>& reals(const std::string& name) const;
  const std::vector<Record>& records() const { return records_; }

  std::string serialize() const;
  static Container deserialize(std::string_view bytes);

  void save(const std::filesystem::path& path) const;
  static Container load(const std::filesystem::path& path);

 private:
  void put(Record r);
  std::vector<Record> records_;
};

}  // namespace nohgnn
