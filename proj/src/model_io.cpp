#include <zlib.h>

#include <bit>
#include <cstring>
#include <string>

#include "iaffect/error.hpp"
#include "iaffect/model.hpp"
#include "iaffect/text.hpp"

namespace iaffect::model {

namespace {

constexpr char kMagic[8] = {'I', 'A', 'F', 'M', 'O', 'D', 'E', 'L'};
constexpr std::size_t kHeaderSize = sizeof kMagic + 4 + 8;

static_assert(std::endian::native == std::endian::little, "model files are little-endian");

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
  }
  void put_doubles(const std::vector<double>& v) {
    put<std::uint64_t>(v.size());
    for (double x : v) put(x);
  }
  std::string out;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T get() {
    if (data_.size() - pos_ < sizeof(T)) throw CorruptFile("model payload ends early");
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::size_t count(std::size_t max) {
    const auto n = get<std::uint64_t>();
    if (n > max) throw CorruptFile("implausible length in model payload");
    return static_cast<std::size_t>(n);
  }
  std::vector<double> get_doubles() {
    const std::size_t n = count((data_.size() - pos_) / sizeof(double));
    std::vector<double> v(n);
    for (auto& x : v) x = get<double>();
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos), chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string serialize_model(const GroupedModel& model) {
  Writer w;
  const auto& c = model.config;
  w.put<std::int32_t>(c.epochs);
  w.put(c.class_weight_fussy);
  w.put(c.learning_rate);
  w.put(c.beta1);
  w.put(c.beta2);
  w.put(c.epsilon);
  w.put<std::int32_t>(c.batch_size);
  w.put<std::uint64_t>(c.seed);
  w.put<std::int32_t>(c.hidden);
  w.put<std::int32_t>(c.embedding);
  w.put<std::int32_t>(c.features_per_group);

  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.groups().size()));
  for (std::size_t g = 0; g < model.groups().size(); ++g) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(group_index(model.groups()[g])));
    w.put<std::uint64_t>(model.input_widths()[g]);
  }
  w.put<std::uint64_t>(model.hidden());
  w.put<std::uint64_t>(model.embedding());

  w.put<std::int32_t>(model.selection.fold_id);
  for (const auto& gs : model.selection.groups) {
    w.put<std::uint64_t>(gs.candidates);
    w.put<std::uint64_t>(gs.chosen.size());
    for (const auto& s : gs.chosen) {
      w.put<std::uint64_t>(s.index);
      w.put(s.t);
      w.put(s.df);
      w.put(s.p);
    }
  }
  for (const auto& s : model.standardization) {
    w.put_doubles(s.mean);
    w.put_doubles(s.scale);
  }
  const auto params = model.params();
  w.put<std::uint64_t>(params.size());
  for (double x : params) w.put(x);

  std::string out(kMagic, sizeof kMagic);
  Writer header;
  header.put<std::uint32_t>(kModelFormatVersion);
  header.put<std::uint64_t>(w.out.size());
  out += header.out;
  out += w.out;
  Writer tail;
  tail.put<std::uint32_t>(checksum(w.out));
  out += tail.out;
  return out;
}

GroupedModel deserialize_model(std::string_view bytes) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw CorruptFile("not a model file");
  }
  Reader header(bytes.substr(sizeof kMagic, 12));
  const auto version = header.get<std::uint32_t>();
  if (version > kModelFormatVersion) {
    throw VersionMismatch("model format version " + std::to_string(version) +
                          " is newer than supported version " +
                          std::to_string(kModelFormatVersion));
  }
  if (version == 0) throw CorruptFile("model format version 0");
  const auto size = header.get<std::uint64_t>();
  if (bytes.size() - kHeaderSize < 4 || size != bytes.size() - kHeaderSize - 4) {
    throw CorruptFile("model file truncated or padded");
  }
  const auto payload = bytes.substr(kHeaderSize, static_cast<std::size_t>(size));
  Reader crc_reader(bytes.substr(kHeaderSize + payload.size()));
  if (crc_reader.get<std::uint32_t>() != checksum(payload)) {
    throw CorruptFile("model checksum mismatch");
  }

  Reader r(payload);
  TrainConfig c;
  c.epochs = r.get<std::int32_t>();
  c.class_weight_fussy = r.get<double>();
  c.learning_rate = r.get<double>();
  c.beta1 = r.get<double>();
  c.beta2 = r.get<double>();
  c.epsilon = r.get<double>();
  c.batch_size = r.get<std::int32_t>();
  c.seed = r.get<std::uint64_t>();
  c.hidden = r.get<std::int32_t>();
  c.embedding = r.get<std::int32_t>();
  c.features_per_group = r.get<std::int32_t>();

  const auto n_groups = r.get<std::uint32_t>();
  if (n_groups == 0 || n_groups > 4) throw CorruptFile("bad group count");
  std::vector<FeatureGroupId> groups;
  std::vector<std::size_t> widths;
  for (std::uint32_t g = 0; g < n_groups; ++g) {
    const auto id = r.get<std::uint8_t>();
    if (id >= 4) throw CorruptFile("bad feature group id");
    groups.push_back(kAllGroups[id]);
    widths.push_back(r.count(1u << 20));
  }
  const std::size_t hidden = r.count(1u << 16);
  const std::size_t embedding = r.count(1u << 16);
  if (hidden == 0 || embedding == 0) throw CorruptFile("zero layer width");

  GroupedModel model(groups, widths, hidden, embedding);
  model.config = c;
  model.selection.fold_id = r.get<std::int32_t>();
  for (auto& gs : model.selection.groups) {
    gs.candidates = r.count(std::size_t{1} << 32);
    gs.chosen.resize(r.count(1u << 20));
    for (auto& s : gs.chosen) {
      s.index = r.count(std::size_t{1} << 32);
      s.t = r.get<double>();
      s.df = r.get<double>();
      s.p = r.get<double>();
    }
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (model.selection[groups[g]].chosen.size() != widths[g]) {
      throw CorruptFile("selection does not match branch width");
    }
    auto& s = model.standardization[g];
    s.mean = r.get_doubles();
    s.scale = r.get_doubles();
    if (s.mean.size() != widths[g] || s.scale.size() != widths[g]) {
      throw CorruptFile("standardization does not match branch width");
    }
  }
  const std::size_t n_params = r.count(payload.size());
  if (n_params != model.parameter_count()) throw CorruptFile("parameter count mismatch");
  for (double& x : model.params()) x = r.get<double>();
  if (!r.done()) throw CorruptFile("trailing bytes in model payload");
  return model;
}

void save_model(const GroupedModel& model, const std::filesystem::path& path) {
  text::write_file_atomic(path, serialize_model(model));
}

GroupedModel load_model(const std::filesystem::path& path) {
  return deserialize_model(text::read_file(path));
}

}  // namespace iaffect::model
