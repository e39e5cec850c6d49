#include "feduhb/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "feduhb/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");
static_assert(sizeof(double) == 8, "checkpoint IO assumes IEEE-754 doubles");

namespace feduhb {

namespace {

void put_u64(std::string& buf, std::uint64_t v) {
  char bytes[8];
  std::memcpy(bytes, &v, 8);
  buf.append(bytes, 8);
}

void put_doubles(std::string& buf, const ParamVector& v) {
  buf.append(reinterpret_cast<const char*>(v.data()), v.dim() * sizeof(double));
}

class Reader {
 public:
  Reader(const std::string& data, const std::filesystem::path& path)
      : data_(data), path_(path) {}

  bool done() const { return pos_ >= data_.size(); }
  std::size_t pos() const { return pos_; }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, data_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }

  ParamVector doubles(std::uint64_t dim) {
    need(dim * sizeof(double));
    ParamVector v(dim);
    std::memcpy(v.data(), data_.data() + pos_, dim * sizeof(double));
    pos_ += dim * sizeof(double);
    return v;
  }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size()) {
      throw FormatError(path_.string() + ": truncated record at byte offset " +
                        std::to_string(pos_));
    }
  }
  const std::string& data_;
  std::filesystem::path path_;
  std::size_t pos_ = 0;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

void spit(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

void append_record(std::string& out, const std::string& payload) {
  put_u64(out, payload.size());
  out += payload;
}

}  // namespace

void write_model_records(const std::filesystem::path& path,
                         std::span<const ModelRecord> records) {
  std::string out;
  for (const ModelRecord& r : records) {
    std::string payload;
    put_u64(payload, r.round);
    put_u64(payload, r.model.dim());
    put_doubles(payload, r.model);
    append_record(out, payload);
  }
  spit(path, out);
}

std::vector<ModelRecord> read_model_records(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  Reader reader(data, path);
  std::vector<ModelRecord> records;
  while (!reader.done()) {
    const std::uint64_t len = reader.u64();
    const std::size_t start = reader.pos();
    ModelRecord r;
    r.round = reader.u64();
    const std::uint64_t dim = reader.u64();
    r.model = reader.doubles(dim);
    if (reader.pos() - start != len) {
      throw FormatError(path.string() + ": record length mismatch at byte offset " +
                        std::to_string(start));
    }
    records.push_back(std::move(r));
  }
  return records;
}

void save_model(const std::filesystem::path& path, std::size_t round,
                const ParamVector& model) {
  const ModelRecord record{round, model};
  write_model_records(path, std::span<const ModelRecord>(&record, 1));
}

ParamVector load_model(const std::filesystem::path& path) {
  const std::vector<ModelRecord> records = read_model_records(path);
  if (records.empty()) throw FormatError(path.string() + ": no model records");
  return records.back().model;
}

void save_history(const std::filesystem::path& path,
                  std::span<const RoundRecord> history) {
  std::string out;
  for (const RoundRecord& r : history) {
    std::string payload;
    put_u64(payload, r.round);
    put_u64(payload, r.global_model_before.dim());
    put_u64(payload, r.client_ids.size());
    put_doubles(payload, r.global_model_before);
    for (std::size_t i = 0; i < r.client_ids.size(); ++i) {
      put_u64(payload, r.client_ids[i]);
      put_u64(payload, r.client_weights[i]);
      put_doubles(payload, r.client_updates[i]);
    }
    put_doubles(payload, r.aggregate_update);
    append_record(out, payload);
  }
  spit(path, out);
}

std::vector<RoundRecord> load_history(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  Reader reader(data, path);
  std::vector<RoundRecord> history;
  while (!reader.done()) {
    const std::uint64_t len = reader.u64();
    const std::size_t start = reader.pos();
    RoundRecord r;
    r.round = reader.u64();
    const std::uint64_t dim = reader.u64();
    const std::uint64_t clients = reader.u64();
    r.global_model_before = reader.doubles(dim);
    for (std::uint64_t c = 0; c < clients; ++c) {
      r.client_ids.push_back(reader.u64());
      r.client_weights.push_back(reader.u64());
      r.client_updates.push_back(reader.doubles(dim));
    }
    r.aggregate_update = reader.doubles(dim);
    if (reader.pos() - start != len) {
      throw FormatError(path.string() + ": record length mismatch at byte offset " +
                        std::to_string(start));
    }
    history.push_back(std::move(r));
  }
  return history;
}

}  // namespace feduhb
