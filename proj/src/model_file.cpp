#include "enhdc/model_file.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace enhdc {

namespace {

static_assert(std::endian::native == std::endian::little, "model I/O assumes little-endian");

constexpr char kMagic[4] = {'E', 'H', 'D', 'C'};
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 1 + 4 + 8;

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t>& bytes() noexcept { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] bool done() const noexcept { return pos_ == size_; }

 private:
  void need(std::size_t n) const {
    if (size_ - pos_ < n) {
      throw ModelFormatError(ModelFormatError::Kind::Corrupt, "model payload ends early");
    }
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::uint32_t crc(const std::uint8_t* data, std::size_t size) {
  uLong c = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large payloads in chunks.
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1U << 30));
    c = crc32(c, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(c);
}

void write_member(Writer& w, const BaseClassifier& m) {
  if (!m.finalized()) {
    throw std::logic_error("only finalized (width-clipped) models can be serialized");
  }
  const auto& c = m.config();
  w.put<std::uint64_t>(c.dim);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(bits(c.width)));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(c.encoder));
  w.put<std::int32_t>(c.levels);
  w.put<std::uint64_t>(c.window);
  w.put<std::uint64_t>(c.seed.value);
  w.put<std::int32_t>(c.retrain_epochs);
  w.put<std::uint8_t>(c.shuffle_retrain ? 1 : 0);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(c.storage));
  const auto& q = m.encoder().quantizer();
  w.put<std::uint64_t>(m.encoder().features());
  w.put<std::uint8_t>(q.per_feature() ? 1 : 0);
  for (const auto& r : q.ranges()) {
    w.put<double>(r.min);
    w.put<double>(r.max);
  }
  w.put<std::uint64_t>(m.classes());
  for (std::size_t k = 0; k < m.classes(); ++k) {
    w.put_string(k < m.label_names().size() ? m.label_names()[k] : std::to_string(k));
  }
  for (const auto& hv : m.memory().class_hvs()) {
    for (const auto v : hv.elements()) {
      if (c.width == DataWidth::Int8) {
        w.put<std::int8_t>(static_cast<std::int8_t>(v));
      } else {
        w.put<std::int16_t>(static_cast<std::int16_t>(v));
      }
    }
  }
}

BaseClassifier read_member(Reader& r) {
  BaseClassifierConfig c;
  c.dim = r.get<std::uint64_t>();
  try {
    c.width = data_width_from_bits(r.get<std::uint8_t>());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(ModelFormatError::Kind::Corrupt, e.what());
  }
  const auto encoder = r.get<std::uint8_t>();
  if (encoder > 1) {
    throw ModelFormatError(ModelFormatError::Kind::Corrupt, "unknown encoder tag");
  }
  c.encoder = static_cast<EncoderKind>(encoder);
  c.levels = r.get<std::int32_t>();
  c.window = r.get<std::uint64_t>();
  c.seed = Seed{r.get<std::uint64_t>()};
  c.retrain_epochs = r.get<std::int32_t>();
  c.shuffle_retrain = r.get<std::uint8_t>() != 0;
  const auto storage = r.get<std::uint8_t>();
  if (storage > 1) {
    throw ModelFormatError(ModelFormatError::Kind::Corrupt, "unknown storage mode tag");
  }
  c.storage = static_cast<StorageMode>(storage);
  const auto features = r.get<std::uint64_t>();
  const auto quantizer_kind = r.get<std::uint8_t>();
  if (quantizer_kind > 1) {
    throw ModelFormatError(ModelFormatError::Kind::Corrupt, "unknown quantizer tag");
  }
  c.per_feature_quantizer = quantizer_kind == 1;
  if (c.per_feature_quantizer && (features == 0 || features > (1ULL << 24))) {
    throw ModelFormatError(ModelFormatError::Kind::Corrupt, "implausible feature count");
  }
  std::vector<Quantizer::Range> ranges(c.per_feature_quantizer ? features : 1);
  for (auto& range : ranges) {
    range.min = r.get<double>();
    range.max = r.get<double>();
  }
  const auto classes = r.get<std::uint64_t>();
  if (c.dim == 0 || classes == 0 || c.dim > (1ULL << 32) || classes > (1ULL << 20)) {
    throw ModelFormatError(ModelFormatError::Kind::Corrupt, "implausible member shape");
  }
  std::vector<std::string> labels;
  for (std::uint64_t k = 0; k < classes; ++k) {
    labels.push_back(r.get_string());
  }
  AssociativeMemory memory(classes, c.dim);
  for (std::uint64_t k = 0; k < classes; ++k) {
    for (auto& v : memory[k].elements()) {
      v = c.width == DataWidth::Int8 ? r.get<std::int8_t>() : r.get<std::int16_t>();
    }
  }
  try {
    Quantizer quantizer = c.per_feature_quantizer
                              ? Quantizer(std::move(ranges), c.levels)
                              : Quantizer(ranges.front().min, ranges.front().max, c.levels);
    BaseClassifier model(c, std::move(quantizer), features, std::move(memory), std::move(labels));
    model.finalize();
    return model;
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(ModelFormatError::Kind::Corrupt,
                           std::string("invalid member configuration: ") + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const EnsembleModel& model) {
  Writer payload;
  for (const auto& m : model.members()) {
    write_member(payload, m);
  }
  Writer out;
  for (const char ch : kMagic) {
    out.put<char>(ch);
  }
  out.put<std::uint32_t>(kModelFormatVersion);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(model.size()));
  out.put<std::uint8_t>(static_cast<std::uint8_t>(model.voting()));
  out.put<std::uint32_t>(crc(payload.bytes().data(), payload.bytes().size()));
  out.put<std::uint64_t>(payload.bytes().size());
  auto bytes = std::move(out.bytes());
  bytes.insert(bytes.end(), payload.bytes().begin(), payload.bytes().end());
  return bytes;
}

std::uint32_t model_checksum(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderSize) {
    throw ModelFormatError(ModelFormatError::Kind::Checksum, "model header truncated");
  }
  std::uint32_t value;
  std::memcpy(&value, bytes.data() + 13, sizeof value);
  return value;
}

EnsembleModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ModelFormatError(ModelFormatError::Kind::BadMagic, "not an EHDC model file");
  }
  if (bytes.size() < kHeaderSize) {
    throw ModelFormatError(ModelFormatError::Kind::Checksum,
                           "model header truncated; checksum cannot be verified");
  }
  Reader header(bytes.data(), kHeaderSize);
  header.get<std::uint32_t>();  // magic
  const auto version = header.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw ModelFormatError(ModelFormatError::Kind::Version,
                           "unsupported model format version " + std::to_string(version) +
                               " (this build reads version " +
                               std::to_string(kModelFormatVersion) + ")");
  }
  const auto members = header.get<std::uint32_t>();
  const auto voting = header.get<std::uint8_t>();
  const auto checksum = header.get<std::uint32_t>();
  const auto length = header.get<std::uint64_t>();

  const std::size_t available = bytes.size() - kHeaderSize;
  if (available != length) {
    throw ModelFormatError(ModelFormatError::Kind::Checksum,
                           "checksum mismatch: payload is " + std::to_string(available) +
                               " bytes, header records " + std::to_string(length));
  }
  const std::uint8_t* payload = bytes.data() + kHeaderSize;
  if (crc(payload, available) != checksum) {
    throw ModelFormatError(ModelFormatError::Kind::Checksum, "checksum mismatch: model is corrupt");
  }
  if (voting > 1) {
    throw ModelFormatError(ModelFormatError::Kind::Corrupt, "unknown voting tag");
  }
  if (members == 0) {
    throw ModelFormatError(ModelFormatError::Kind::Corrupt, "model has no members");
  }
  Reader r(payload, available);
  std::vector<BaseClassifier> out;
  out.reserve(members);
  for (std::uint32_t i = 0; i < members; ++i) {
    out.push_back(read_member(r));
  }
  if (!r.done()) {
    throw ModelFormatError(ModelFormatError::Kind::Corrupt, "trailing bytes after last member");
  }
  return EnsembleModel(std::move(out), static_cast<VotingRule>(voting));
}

void save_model(const EnsembleModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ModelFormatError(ModelFormatError::Kind::Io, "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw ModelFormatError(ModelFormatError::Kind::Io, "failed writing " + path.string());
  }
}

EnsembleModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ModelFormatError(ModelFormatError::Kind::Io, "cannot open " + path.string());
  }
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return deserialize_model(bytes);
}

}  // namespace enhdc
