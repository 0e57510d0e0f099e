#include "enhdc/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>

#include "enhdc/random.hpp"

namespace enhdc {

namespace {

std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex;
  os.width(8);
  os.fill('0');
  os << v;
  return os.str();
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(DataError::Kind::Io, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (bytes.size() < offset + 4) {
    throw DataError(DataError::Kind::Truncated,
                    path.string() + ": truncated IDX header at offset " + std::to_string(offset));
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void expect_magic(const std::vector<std::uint8_t>& bytes, std::uint32_t expected,
                  const std::filesystem::path& path) {
  const auto magic = read_be32(bytes, 0, path);
  if (magic != expected) {
    throw DataError(DataError::Kind::BadMagic, path.string() + ": bad IDX magic " + hex32(magic) +
                                                   " at offset 0 (expected " + hex32(expected) +
                                                   ")");
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') {
    text.remove_prefix(1);
  }
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    return std::nullopt;
  }
  return value;
}

// RFC 4180 records: quoted fields may contain delimiters, doubled quotes and
// line breaks.
std::vector<std::vector<std::string>> parse_csv(const std::string& text, char delimiter,
                                                const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    const bool blank = row.size() == 1 && trim(row.front()).empty();
    if (!blank) {
      rows.push_back(std::move(row));
    }
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') {
          ++line;
        }
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == delimiter) {
      end_field();
    } else if (ch == '\n') {
      end_row();
      ++line;
    } else if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // CRLF: the '\n' ends the row.
    } else {
      field.push_back(ch);
      field_started = true;
    }
  }
  if (quoted) {
    throw DataError(DataError::Kind::Truncated,
                    path.string() + ": unterminated quoted field at line " + std::to_string(line));
  }
  if (field_started || !row.empty()) {
    end_row();
  }
  return rows;
}

std::optional<std::size_t> resolve_column(const std::string& column,
                                          const std::vector<std::string>& header) {
  const auto it = std::find_if(header.begin(), header.end(),
                               [&](const std::string& h) { return trim(h) == trim(column); });
  if (it != header.end()) {
    return static_cast<std::size_t>(it - header.begin());
  }
  std::size_t index = 0;
  const auto t = trim(column);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), index);
  if (!t.empty() && ec == std::errc() && ptr == t.data() + t.size()) {
    return index;
  }
  return std::nullopt;
}

std::vector<std::string> ordered_labels(const std::vector<std::string>& raw) {
  std::vector<std::string> labels(raw.begin(), raw.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const bool numeric = std::all_of(labels.begin(), labels.end(),
                                   [](const std::string& l) { return parse_number(l).has_value(); });
  if (numeric) {
    std::stable_sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      return *parse_number(a) < *parse_number(b);
    });
  }
  return labels;
}

Dataset load_csv_impl(const std::filesystem::path& path, const CsvOptions& options,
                      const std::vector<std::string>* fixed_labels) {
  const auto bytes = read_file(path);
  const auto rows = parse_csv(std::string(bytes.begin(), bytes.end()), options.delimiter, path);
  if (rows.empty() || (options.header && rows.size() == 1)) {
    throw DataError(DataError::Kind::Truncated, path.string() + ": no data rows");
  }
  const std::vector<std::string> header = options.header ? rows.front() : std::vector<std::string>{};
  const std::size_t width = rows.front().size();
  const std::size_t first = options.header ? 1 : 0;

  const auto label_col = resolve_column(options.label_column, header);
  if (!label_col || *label_col >= width) {
    throw DataError(DataError::Kind::UnknownColumn,
                    path.string() + ": unknown label column '" + options.label_column + "'");
  }
  std::vector<bool> keep(width, true);
  keep[*label_col] = false;
  for (const auto& drop : options.drop_columns) {
    const auto col = resolve_column(drop, header);
    if (!col || *col >= width) {
      throw DataError(DataError::Kind::UnknownColumn,
                      path.string() + ": unknown column '" + drop + "'");
    }
    keep[*col] = false;
  }

  Dataset data;
  data.name = path.stem().string();
  data.features = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  if (data.features == 0) {
    throw DataError(DataError::Kind::UnknownColumn, path.string() + ": no feature columns left");
  }
  std::vector<std::string> raw_labels;
  raw_labels.reserve(rows.size() - first);
  data.values.reserve((rows.size() - first) * data.features);
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != width) {
      throw DataError(DataError::Kind::RaggedRow,
                      path.string() + ": row " + std::to_string(r + 1) + " has " +
                          std::to_string(row.size()) + " fields, expected " + std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (!keep[c]) {
        continue;
      }
      const auto v = parse_number(row[c]);
      if (!v) {
        throw DataError(DataError::Kind::NonNumeric, path.string() + ": row " +
                                                         std::to_string(r + 1) + ", column " +
                                                         std::to_string(c) + ": '" + row[c] +
                                                         "' is not a number");
      }
      if (!std::isfinite(*v)) {
        throw DataError(DataError::Kind::NonFinite, path.string() + ": row " +
                                                        std::to_string(r + 1) + ", column " +
                                                        std::to_string(c) + " is not finite");
      }
      data.values.push_back(static_cast<float>(*v));
    }
    raw_labels.emplace_back(trim(row[*label_col]));
  }

  data.label_names = fixed_labels ? *fixed_labels : ordered_labels(raw_labels);
  std::map<std::string, std::int32_t> index;
  for (std::size_t c = 0; c < data.label_names.size(); ++c) {
    index.emplace(data.label_names[c], static_cast<std::int32_t>(c));
  }
  data.labels.reserve(raw_labels.size());
  for (const auto& l : raw_labels) {
    const auto it = index.find(l);
    if (it == index.end()) {
      throw DataError(DataError::Kind::BadLabel,
                      path.string() + ": label '" + l + "' is not in the training label set");
    }
    data.labels.push_back(it->second);
  }
  data.validate();
  return data;
}

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "cache I/O assumes little-endian");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw DataError(DataError::Kind::Truncated, path.string() + ": truncated dataset cache");
  }
  return value;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, const std::filesystem::path& path) {
  const auto n = get<std::uint32_t>(in, path);
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) {
    throw DataError(DataError::Kind::Truncated, path.string() + ": truncated dataset cache");
  }
  return s;
}

constexpr char kCacheMagic[4] = {'E', 'H', 'D', 'S'};
constexpr std::uint32_t kCacheVersion = 1;

}  // namespace

void Dataset::validate() const {
  if (features == 0) {
    throw DataError(DataError::Kind::CountMismatch, name + ": feature count must be positive");
  }
  if (values.size() != labels.size() * features) {
    throw DataError(DataError::Kind::CountMismatch,
                    name + ": " + std::to_string(values.size()) + " values for " +
                        std::to_string(labels.size()) + " rows of " + std::to_string(features));
  }
  for (const auto l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes()) {
      throw DataError(DataError::Kind::BadLabel,
                      name + ": label " + std::to_string(l) + " outside [0, " +
                          std::to_string(classes()) + ")");
    }
  }
  if (!std::all_of(values.begin(), values.end(), [](float v) { return std::isfinite(v); })) {
    throw DataError(DataError::Kind::NonFinite, name + ": non-finite feature value");
  }
}

const std::vector<DatasetSpec>& known_datasets() {
  static const std::vector<DatasetSpec> specs{
      {"mnist", SourceFormat::Idx, 50000, 10000, 10, 784},
      {"cardio", SourceFormat::Csv, 1913, 213, 10, 0},
      {"har", SourceFormat::Csv, 7767, 3162, 12, 561},
      {"isolet", SourceFormat::Csv, 6238, 1559, 26, 617},
  };
  return specs;
}

std::optional<DatasetSpec> find_dataset_spec(const std::string& name) {
  for (const auto& s : known_datasets()) {
    if (s.name == name) {
      return s;
    }
  }
  return std::nullopt;
}

void check_against_spec(const DatasetSpec& spec, const Dataset& train, const Dataset& test) {
  auto fail = [&](const std::string& what, std::size_t expected, std::size_t got) {
    throw DataError(DataError::Kind::SpecMismatch,
                    spec.name + ": expected " + std::to_string(expected) + " " + what + ", got " +
                        std::to_string(got));
  };
  if (train.size() != spec.train_count) {
    fail("training samples", spec.train_count, train.size());
  }
  if (test.size() != spec.test_count) {
    fail("test samples", spec.test_count, test.size());
  }
  if (train.classes() != spec.classes) {
    fail("classes", spec.classes, train.classes());
  }
  if (spec.features != 0 && train.features != spec.features) {
    fail("features", spec.features, train.features);
  }
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  expect_magic(img, 0x00000803U, images);
  expect_magic(lab, 0x00000801U, labels);

  const std::size_t n = read_be32(img, 4, images);
  const std::size_t rows = read_be32(img, 8, images);
  const std::size_t cols = read_be32(img, 12, images);
  const std::size_t n_labels = read_be32(lab, 4, labels);
  const std::size_t m = rows * cols;
  if (img.size() < 16 + n * m) {
    throw DataError(DataError::Kind::Truncated,
                    images.string() + ": truncated pixel data at offset " +
                        std::to_string(img.size()) + " (expected " + std::to_string(16 + n * m) +
                        " bytes)");
  }
  if (lab.size() < 8 + n_labels) {
    throw DataError(DataError::Kind::Truncated,
                    labels.string() + ": truncated label data at offset " +
                        std::to_string(lab.size()) + " (expected " + std::to_string(8 + n_labels) +
                        " bytes)");
  }
  if (n != n_labels) {
    throw DataError(DataError::Kind::CountMismatch,
                    images.string() + " holds " + std::to_string(n) + " images but " +
                        labels.string() + " holds " + std::to_string(n_labels) + " labels");
  }

  Dataset data;
  data.name = images.stem().string();
  data.features = m;
  data.values.assign(img.begin() + 16, img.begin() + 16 + static_cast<std::ptrdiff_t>(n * m));
  data.labels.reserve(n);
  std::int32_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = static_cast<std::int32_t>(lab[8 + i]);
    max_label = std::max(max_label, l);
    data.labels.push_back(l);
  }
  for (std::int32_t c = 0; c <= max_label; ++c) {
    data.label_names.push_back(std::to_string(c));
  }
  data.validate();
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  return load_csv_impl(path, options, nullptr);
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options,
                 const std::vector<std::string>& label_names) {
  return load_csv_impl(path, options, &label_names);
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.name = data.name;
  out.features = data.features;
  out.label_names = data.label_names;
  out.values.reserve(indices.size() * data.features);
  out.labels.reserve(indices.size());
  for (const auto i : indices) {
    const auto r = data.row(i);
    out.values.insert(out.values.end(), r.begin(), r.end());
    out.labels.push_back(data.labels.at(i));
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t train_count,
                                  std::size_t test_count, Seed seed) {
  if (train_count + test_count > data.size()) {
    throw std::invalid_argument("split of " + std::to_string(train_count) + " + " +
                                std::to_string(test_count) + " samples exceeds the " +
                                std::to_string(data.size()) + " available");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed, 0x5B117ULL);
  shuffle(std::span<std::size_t>(order), rng);
  const std::span<const std::size_t> all(order);
  return {subset(data, all.first(train_count)), subset(data, all.subspan(train_count, test_count))};
}

void standardize(Dataset& train, Dataset& test) {
  if (train.features != test.features) {
    throw std::invalid_argument("train and test feature counts differ");
  }
  const std::size_t m = train.features;
  const std::size_t n = train.size();
  if (n == 0) {
    return;
  }
  std::vector<double> mean(m, 0.0);
  std::vector<double> sq(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      mean[j] += r[j];
    }
  }
  for (auto& v : mean) {
    v /= static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      sq[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
    }
  }
  std::vector<double> scale(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double sd = std::sqrt(sq[j] / static_cast<double>(n));
    scale[j] = sd > 0.0 ? 1.0 / sd : 1.0;
  }
  for (Dataset* d : {&train, &test}) {
    for (std::size_t i = 0; i < d->values.size(); ++i) {
      const std::size_t j = i % m;
      d->values[i] = static_cast<float>((d->values[i] - mean[j]) * scale[j]);
    }
  }
}

void save_cache(const Dataset& data, const std::filesystem::path& path) {
  data.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError(DataError::Kind::Io, "cannot write " + path.string());
  }
  out.write(kCacheMagic, sizeof kCacheMagic);
  put<std::uint32_t>(out, kCacheVersion);
  put<std::uint64_t>(out, data.size());
  put<std::uint64_t>(out, data.features);
  put<std::uint64_t>(out, data.classes());
  out.write(reinterpret_cast<const char*>(data.values.data()),
            static_cast<std::streamsize>(data.values.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(data.labels.data()),
            static_cast<std::streamsize>(data.labels.size() * sizeof(std::int32_t)));
  put_string(out, data.name);
  for (const auto& l : data.label_names) {
    put_string(out, l);
  }
  if (!out) {
    throw DataError(DataError::Kind::Io, "failed writing " + path.string());
  }
}

Dataset load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(DataError::Kind::Io, "cannot open " + path.string());
  }
  char magic[4] = {};
  if (!in.read(magic, sizeof magic)) {
    throw DataError(DataError::Kind::Truncated, path.string() + ": truncated dataset cache");
  }
  if (std::memcmp(magic, kCacheMagic, sizeof magic) != 0) {
    throw DataError(DataError::Kind::BadMagic, path.string() + ": not a dataset cache (offset 0)");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCacheVersion) {
    throw DataError(DataError::Kind::BadMagic,
                    path.string() + ": unsupported cache version " + std::to_string(version));
  }
  const auto n = get<std::uint64_t>(in, path);
  const auto m = get<std::uint64_t>(in, path);
  const auto k = get<std::uint64_t>(in, path);
  Dataset data;
  data.features = m;
  data.values.resize(n * m);
  data.labels.resize(n);
  if (!in.read(reinterpret_cast<char*>(data.values.data()),
               static_cast<std::streamsize>(n * m * sizeof(float))) ||
      !in.read(reinterpret_cast<char*>(data.labels.data()),
               static_cast<std::streamsize>(n * sizeof(std::int32_t)))) {
    throw DataError(DataError::Kind::Truncated, path.string() + ": truncated dataset cache");
  }
  data.name = get_string(in, path);
  for (std::uint64_t c = 0; c < k; ++c) {
    data.label_names.push_back(get_string(in, path));
  }
  data.validate();
  return data;
}

}  // namespace enhdc
