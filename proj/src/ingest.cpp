#include "matrust/ingest.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <unordered_map>
#include <vector>

#include <zlib.h>

namespace matrust {

static_assert(std::endian::native == std::endian::little,
              "model container assumes a little-endian host");

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_decimal(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

LevelMap LevelMap::advogato() {
  LevelMap m;
  m.set("Observer", 0.1);
  m.set("Apprentice", 0.4);
  m.set("Journeyer", 0.7);
  m.set("Master", 0.9);
  return m;
}

LevelMap LevelMap::parse(std::string_view spec) {
  LevelMap m;
  while (!spec.empty()) {
    auto comma = spec.find(',');
    auto item = trim(spec.substr(0, comma));
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("level spec item without '=': " + std::string(item));
    }
    auto label = trim(item.substr(0, eq));
    auto value = parse_decimal(trim(item.substr(eq + 1)));
    if (label.empty() || !value) {
      throw ValidationError("malformed level spec item: " + std::string(item));
    }
    m.set(label, *value);
  }
  if (m.levels_.empty()) throw ValidationError("empty level spec");
  return m;
}

void LevelMap::set(std::string_view label, double rating) {
  if (!(rating >= 0.0 && rating <= 1.0)) {
    throw ValidationError("level rating outside [0,1] for '" + std::string(label) + "'");
  }
  levels_[lower(label)] = rating;
}

std::optional<double> LevelMap::lookup(std::string_view label) const {
  auto it = levels_.find(lower(label));
  if (it == levels_.end()) return std::nullopt;
  return it->second;
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

SparseTrustMatrix parse_edge_list(std::istream& in, const std::optional<LevelMap>& levels) {
  std::unordered_map<std::string, UserIndex> index;
  std::vector<std::string> labels;
  std::vector<TrustObservation> obs;
  std::unordered_map<std::uint64_t, std::size_t> seen;

  auto intern = [&](std::string_view id) {
    auto [it, inserted] = index.try_emplace(std::string(id), static_cast<UserIndex>(labels.size()));
    if (inserted) labels.emplace_back(id);
    return it->second;
  };

  std::string raw;
  std::size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.push_back(trim(line.substr(start, tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (first_data_line) {
      first_data_line = false;
      if (!fields.empty() && lower(fields[0]) == "trustor") continue;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw ParseError(line_no, "expected trustor<TAB>trustee<TAB>value");
    }

    double rating = 0.0;
    if (auto v = parse_decimal(fields[2])) {
      rating = *v;
      if (!(rating >= 0.0 && rating <= 1.0)) {
        throw ParseError(line_no, "rating outside [0,1]: " + std::string(fields[2]));
      }
    } else if (auto lv = levels ? levels->lookup(fields[2]) : std::nullopt) {
      rating = *lv;
    } else {
      throw ParseError(line_no, "unknown trust level '" + std::string(fields[2]) + "'");
    }
    if (fields[0] == fields[1]) {
      throw ParseError(line_no, "self-rating by '" + std::string(fields[0]) + "'");
    }

    const UserIndex u = intern(fields[0]);
    const UserIndex v = intern(fields[1]);
    const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | v;
    if (auto [it, inserted] = seen.emplace(key, line_no); !inserted) {
      throw ParseError(line_no, "duplicate pair (" + std::string(fields[0]) + ", " +
                                    std::string(fields[1]) + "), first seen on line " +
                                    std::to_string(it->second));
    }
    obs.push_back({u, v, rating});
  }
  if (in.bad()) throw IoError("read error while parsing edge list");
  const std::size_t n = labels.size();
  return SparseTrustMatrix(n, std::move(obs), std::move(labels));
}

void write_edge_list(const SparseTrustMatrix& t, std::ostream& out) {
  const auto& labels = t.labels();
  auto name = [&](UserIndex u) { return labels.empty() ? std::to_string(u) : labels[u]; };
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& o : t.observations()) {
    out << name(o.trustor) << '\t' << name(o.trustee) << '\t' << o.rating << '\n';
  }
}

// --- model container -------------------------------------------------------

namespace {

class Writer {
 public:
  template <typename T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    buf_.insert(buf_.end(), p, p + size);
  }
  const std::vector<unsigned char>& bytes() const { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> data) : data_(data) {}

  template <typename T>
  T get() {
    T v;
    get_bytes(&v, sizeof(T));
    return v;
  }
  void get_bytes(void* dst, std::size_t size) {
    require(size);
    std::memcpy(dst, data_.data() + pos_, size);
    pos_ += size;
  }
  void require(std::size_t size) const {
    if (size > data_.size() - pos_) {
      throw ModelFormatError(ModelFormatError::Kind::kTruncated, "model stream is truncated");
    }
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const unsigned char> data_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(std::span<const unsigned char> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for large models.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const auto len = static_cast<uInt>(std::min(kChunk, bytes.size() - off));
    crc = crc32(crc, bytes.data() + off, len);
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void save_model(const FactorModel& model, std::ostream& out) {
  model.validate();
  const std::uint64_t n = model.n();
  const std::uint64_t r = model.r();
  Writer w;
  w.put_bytes(kModelMagic.data(), kModelMagic.size());
  w.put(kModelFormatVersion);
  w.put(n);
  w.put(r);
  for (int k = 0; k < 3; ++k) w.put(model.alpha[k]);
  w.put(model.bias.mu);
  w.put_bytes(model.bias.x.data(), n * sizeof(double));
  w.put_bytes(model.bias.y.data(), n * sizeof(double));
  w.put_bytes(model.F0.data(), n * r * sizeof(double));
  w.put_bytes(model.G0.data(), n * r * sizeof(double));
  w.put(static_cast<std::uint64_t>(model.labels.size()));
  for (const auto& label : model.labels) {
    w.put(static_cast<std::uint32_t>(label.size()));
    w.put_bytes(label.data(), label.size());
  }
  const std::uint32_t crc = checksum(w.bytes());
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.bytes().size()));
  out.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
  if (!out) throw IoError("failed to write model stream");
}

FactorModel load_model(std::istream& in) {
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error while loading model");
  Reader rd(data);

  char magic[kModelMagic.size()];
  if (data.size() < sizeof(magic)) {
    throw ModelFormatError(ModelFormatError::Kind::kTruncated, "model stream is truncated");
  }
  rd.get_bytes(magic, sizeof(magic));
  if (std::string_view(magic, sizeof(magic)) != kModelMagic) {
    throw ModelFormatError(ModelFormatError::Kind::kVersionMismatch,
                           "not a matrust model (bad magic)");
  }
  const auto version = rd.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw ModelFormatError(ModelFormatError::Kind::kVersionMismatch,
                           "unsupported model format version " + std::to_string(version));
  }
  const auto n = rd.get<std::uint64_t>();
  const auto r = rd.get<std::uint64_t>();
  // Bound the sizes by what is actually in the stream before allocating.
  if (r == 0) throw ModelFormatError(ModelFormatError::Kind::kInvalid, "model has r = 0");
  const std::uint64_t available = rd.remaining() / sizeof(double);
  if (n > available || r > available || (n != 0 && r > available / n)) {
    throw ModelFormatError(ModelFormatError::Kind::kTruncated, "model stream is truncated");
  }
  rd.require((4 + 2 * n + 2 * n * r) * sizeof(double));

  FactorModel m;
  for (int k = 0; k < 3; ++k) m.alpha[k] = rd.get<double>();
  m.bias.mu = rd.get<double>();
  m.bias.x.resize(static_cast<Eigen::Index>(n));
  m.bias.y.resize(static_cast<Eigen::Index>(n));
  rd.get_bytes(m.bias.x.data(), n * sizeof(double));
  rd.get_bytes(m.bias.y.data(), n * sizeof(double));
  m.F0.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r));
  m.G0.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r));
  rd.get_bytes(m.F0.data(), n * r * sizeof(double));
  rd.get_bytes(m.G0.data(), n * r * sizeof(double));

  const auto label_count = rd.get<std::uint64_t>();
  if (label_count != 0 && label_count != n) {
    throw ModelFormatError(ModelFormatError::Kind::kInvalid, "label count does not match n");
  }
  m.labels.reserve(label_count);
  for (std::uint64_t i = 0; i < label_count; ++i) {
    const auto len = rd.get<std::uint32_t>();
    std::string label(len, '\0');
    rd.get_bytes(label.data(), len);
    m.labels.push_back(std::move(label));
  }

  const std::size_t body = rd.pos();
  const auto stored = rd.get<std::uint32_t>();
  if (rd.remaining() != 0) {
    throw ModelFormatError(ModelFormatError::Kind::kInvalid, "trailing bytes after model");
  }
  if (stored != checksum(std::span<const unsigned char>(data).first(body))) {
    throw ModelFormatError(ModelFormatError::Kind::kChecksum, "model checksum mismatch");
  }
  m.validate();
  return m;
}

void save_model_file(const FactorModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  save_model(model, out);
}

FactorModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  return load_model(in);
}

}  // namespace matrust
