#include "hatelab/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace hatelab {

namespace {

constexpr char kMagic[4] = {'H', 'L', 'C', 'K'};
constexpr std::size_t kHeaderSize = 16;
constexpr std::size_t kCrcSize = 4;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw CheckpointFormatError("checkpoint body is inconsistent");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_++]} << (8 * i);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::uint32_t read_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
  return v;
}

std::uint64_t read_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

std::uint32_t crc_of(const std::uint8_t* p, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Classifier<float>& model) {
  Writer body;
  const nlohmann::json meta{{"config", config_to_json(model.config())},
                            {"vocab", model.vocab().corpus_tokens()}};
  body.str(meta.dump());
  const auto params = model.parameters();
  body.u32(static_cast<std::uint32_t>(params.size()));
  for (const Param<float>* p : params) {
    body.str(p->name);
    body.u32(static_cast<std::uint32_t>(p->value.rows()));
    body.u32(static_cast<std::uint32_t>(p->value.cols()));
    for (Eigen::Index r = 0; r < p->value.rows(); ++r)
      for (Eigen::Index c = 0; c < p->value.cols(); ++c)
        body.u32(std::bit_cast<std::uint32_t>(p->value(r, c)));
  }

  Writer out;
  out.bytes(kMagic, sizeof kMagic);
  out.u32(kCheckpointVersion);
  out.u64(body.buffer().size());
  out.bytes(body.buffer().data(), body.buffer().size());
  out.u32(crc_of(out.buffer().data(), out.buffer().size()));
  return std::move(out.buffer());
}

Classifier<float> deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw CheckpointTruncatedError("checkpoint shorter than its header");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw CheckpointFormatError("not a checkpoint (bad magic)");
  if (bytes.size() < kHeaderSize) throw CheckpointTruncatedError("checkpoint shorter than its header");
  const std::uint32_t version = read_u32(bytes.data() + 4);
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError("unsupported checkpoint version " + std::to_string(version) +
                                 " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint64_t body_len = read_u64(bytes.data() + 8);
  const std::size_t available = bytes.size() - kHeaderSize;
  if (available < kCrcSize || body_len > available - kCrcSize) {
    throw CheckpointTruncatedError("checkpoint truncated: header announces " +
                                   std::to_string(body_len) + " body bytes");
  }
  if (body_len != available - kCrcSize)
    throw CheckpointFormatError("checkpoint has trailing bytes");
  const std::size_t crc_pos = kHeaderSize + body_len;
  if (crc_of(bytes.data(), crc_pos) != read_u32(bytes.data() + crc_pos))
    throw CheckpointChecksumError("checkpoint checksum mismatch");

  Reader in(bytes.subspan(kHeaderSize, body_len));
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in.str());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointFormatError(std::string("checkpoint metadata: ") + e.what());
  }
  ModelConfig config;
  std::vector<std::string> tokens;
  try {
    config = config_from_json(meta.at("config"));
    tokens = meta.at("vocab").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointFormatError(std::string("checkpoint metadata: ") + e.what());
  }

  Classifier<float> model(std::move(config), Vocab(tokens), nullptr);
  auto params = model.parameters();
  const std::uint32_t count = in.u32();
  if (count != params.size()) {
    throw CheckpointFormatError("checkpoint holds " + std::to_string(count) +
                                " parameters, model expects " + std::to_string(params.size()));
  }
  for (Param<float>* p : params) {
    const std::string name = in.str();
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols()) {
      throw CheckpointFormatError("parameter " + name + " does not match model parameter " +
                                  p->name);
    }
    for (Eigen::Index r = 0; r < p->value.rows(); ++r)
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) p->value(r, c) = in.f32();
  }
  if (!in.done()) throw CheckpointFormatError("checkpoint body has unread bytes");
  return model;
}

void save_checkpoint(const Classifier<float>& model, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Classifier<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace hatelab
