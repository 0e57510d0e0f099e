#include "enhdc/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "enhdc/random.hpp"

namespace enhdc {

namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kDataKeys{
    "name",        "format",       "train_images", "train_labels", "test_images",
    "test_labels", "path",         "train_path",   "test_path",    "label_column",
    "header",      "delimiter",    "drop_columns", "train_count",  "test_count",
    "split",       "standardize"};

const std::set<std::string> kMemberKeys{"levels", "window", "retrain", "retrain_epochs",
                                        "shuffle_retrain", "storage", "quantizer"};

std::string trim_copy(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim_copy(item);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

// One INI section with strict key checking.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  void allow_only(const std::set<std::string>& keys) const {
    if (tree_ == nullptr) {
      return;
    }
    for (const auto& [key, value] : *tree_) {
      if (!keys.contains(key)) {
        throw ConfigError("unknown key '" + key + "' in section [" + name_ + "]");
      }
      if (!value.empty()) {
        throw ConfigError("nested value under '" + key + "' in section [" + name_ + "]");
      }
    }
  }

  [[nodiscard]] std::optional<std::string> raw(const std::string& key) const {
    if (tree_ == nullptr) {
      return std::nullopt;
    }
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) {
      return std::nullopt;
    }
    return trim_copy(it->second.data());
  }

  [[nodiscard]] std::string string(const std::string& key, const std::string& fallback) const {
    return raw(key).value_or(fallback);
  }

  template <typename T>
  [[nodiscard]] std::optional<T> number(const std::string& key) const {
    const auto text = raw(key);
    if (!text) {
      return std::nullopt;
    }
    return parse_number<T>(key, *text);
  }

  template <typename T>
  [[nodiscard]] T number(const std::string& key, T fallback) const {
    return number<T>(key).value_or(fallback);
  }

  [[nodiscard]] bool boolean(const std::string& key, bool fallback) const {
    const auto text = raw(key);
    if (!text) {
      return fallback;
    }
    if (*text == "true" || *text == "yes" || *text == "1" || *text == "on") {
      return true;
    }
    if (*text == "false" || *text == "no" || *text == "0" || *text == "off") {
      return false;
    }
    throw ConfigError(where(key) + ": expected a boolean, got '" + *text + "'");
  }

  template <typename T>
  [[nodiscard]] std::vector<T> number_list(const std::string& key, std::vector<T> fallback) const {
    const auto text = raw(key);
    if (!text) {
      return fallback;
    }
    std::vector<T> out;
    for (const auto& item : split_list(*text)) {
      out.push_back(parse_number<T>(key, item));
    }
    return out;
  }

  [[nodiscard]] std::vector<std::string> list(const std::string& key) const {
    const auto text = raw(key);
    return text ? split_list(*text) : std::vector<std::string>{};
  }

  [[nodiscard]] std::string where(const std::string& key) const {
    return "[" + name_ + "] " + key;
  }

 private:
  template <typename T>
  T parse_number(const std::string& key, const std::string& text) const {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      throw ConfigError(where(key) + ": '" + text + "' is not a valid number");
    }
    return value;
  }

  std::string name_;
  const pt::ptree* tree_;
};

struct IniFile {
  pt::ptree tree;
  // Every [section] header in file order, including empty sections, which
  // the Boost reader drops.
  std::vector<std::string> sections;
};

IniFile parse_ini(const std::string& text) {
  // Boost's INI reader only recognises ';' comments; treat '#' lines the same.
  IniFile ini;
  std::stringstream cleaned;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim_copy(line);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
      ini.sections.push_back(trim_copy(t.substr(1, t.size() - 2)));
    }
    cleaned << (!t.empty() && t.front() == '#' ? std::string() : line) << '\n';
  }
  try {
    pt::ini_parser::read_ini(cleaned, ini.tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return ini;
}

const pt::ptree* child(const pt::ptree& tree, const std::string& name) {
  const auto it = tree.find(name);
  return it == tree.not_found() ? nullptr : &it->second;
}

template <typename T, typename F>
T convert(const Section& s, const std::string& key, const std::string& text, F&& f) {
  try {
    return f(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.where(key) + ": " + e.what());
  }
}

DataConfig parse_data(const Section& s, const std::string& fallback_name) {
  s.allow_only(kDataKeys);
  DataConfig d;
  d.name = s.string("name", fallback_name);
  const auto format = s.string("format", "idx");
  if (format == "idx") {
    d.format = DataFormat::Idx;
  } else if (format == "csv") {
    d.format = DataFormat::Csv;
  } else if (format == "cache") {
    d.format = DataFormat::Cache;
  } else {
    throw ConfigError(s.where("format") + ": expected idx, csv or cache, got '" + format + "'");
  }
  d.train_images = s.string("train_images", "");
  d.train_labels = s.string("train_labels", "");
  d.test_images = s.string("test_images", "");
  d.test_labels = s.string("test_labels", "");
  d.path = s.string("path", "");
  d.train_path = s.string("train_path", "");
  d.test_path = s.string("test_path", "");
  d.csv.label_column = s.string("label_column", "");
  d.csv.header = s.boolean("header", true);
  const auto delimiter = s.string("delimiter", ",");
  if (delimiter.size() != 1) {
    throw ConfigError(s.where("delimiter") + ": must be a single character");
  }
  d.csv.delimiter = delimiter.front();
  d.csv.drop_columns = s.list("drop_columns");
  d.train_count = s.number<std::size_t>("train_count");
  d.test_count = s.number<std::size_t>("test_count");
  const auto split_mode = s.string("split", "sampled");
  if (split_mode != "sampled" && split_mode != "canonical") {
    throw ConfigError(s.where("split") + ": expected sampled or canonical, got '" + split_mode + "'");
  }
  d.canonical_split = split_mode == "canonical";
  d.standardize = s.boolean("standardize", false);

  if (d.format == DataFormat::Idx && (d.train_images.empty() || d.train_labels.empty())) {
    throw ConfigError(s.where("train_images") + ": IDX datasets need train_images and train_labels");
  }
  if (d.format != DataFormat::Idx && d.path.empty() && d.train_path.empty()) {
    throw ConfigError(s.where("path") + ": set path or train_path");
  }
  if (d.format == DataFormat::Csv && d.csv.label_column.empty()) {
    throw ConfigError(s.where("label_column") + ": CSV datasets need a label column");
  }
  return d;
}

void parse_member_settings(const Section& s, BaseClassifierConfig& base, bool& retrain) {
  base.levels = s.number<int>("levels", base.levels);
  base.window = s.number<std::size_t>("window", base.window);
  base.retrain_epochs = s.number<int>("retrain_epochs", base.retrain_epochs);
  base.shuffle_retrain = s.boolean("shuffle_retrain", base.shuffle_retrain);
  if (const auto storage = s.raw("storage")) {
    base.storage = convert<StorageMode>(s, "storage", *storage, storage_mode_from_string);
  }
  if (const auto quantizer = s.raw("quantizer")) {
    base.per_feature_quantizer = convert<bool>(s, "quantizer", *quantizer, [](const std::string& v) {
      if (v == "global") return false;
      if (v == "per_feature") return true;
      throw std::invalid_argument("expected global or per_feature");
    });
  }
  retrain = s.boolean("retrain", retrain);
}

MemberPreset parse_preset(const Section& s) {
  const auto preset = s.string("preset", "uniform");
  if (preset == "uniform") {
    return MemberPreset::Uniform;
  }
  if (preset == "diverse") {
    return MemberPreset::Diverse;
  }
  throw ConfigError(s.where("preset") + ": expected uniform or diverse, got '" + preset + "'");
}

std::vector<EncoderKind> parse_encoders(const Section& s, std::vector<EncoderKind> fallback) {
  const auto names = s.list("encoders");
  if (names.empty()) {
    return fallback;
  }
  std::vector<EncoderKind> out;
  for (const auto& n : names) {
    out.push_back(convert<EncoderKind>(s, "encoders", n, encoder_kind_from_string));
  }
  return out;
}

std::vector<DataWidth> parse_widths(const Section& s, std::vector<DataWidth> fallback) {
  const auto values = s.number_list<int>("widths", {});
  if (values.empty()) {
    return fallback;
  }
  std::vector<DataWidth> out;
  for (const int v : values) {
    out.push_back(convert<DataWidth>(s, "widths", std::to_string(v),
                                     [](const std::string& t) { return data_width_from_bits(std::stoi(t)); }));
  }
  return out;
}

void check_sections(const IniFile& ini, const std::set<std::string>& allowed,
                    const std::string& dynamic_prefix = "") {
  for (const auto& [name, section] : ini.tree) {
    if (section.empty() && !section.data().empty()) {
      throw ConfigError("key '" + name + "' outside any section");
    }
  }
  for (const auto& name : ini.sections) {
    const bool dynamic = !dynamic_prefix.empty() && name.rfind(dynamic_prefix, 0) == 0;
    if (!allowed.contains(name) && !dynamic) {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& root) {
  if (p.empty() || p.is_absolute()) {
    return p;
  }
  return root / p;
}

Dataset load_source(const DataConfig& c, const std::filesystem::path& file,
                    const std::vector<std::string>* labels) {
  if (c.format == DataFormat::Cache) {
    return load_cache(file);
  }
  return labels ? load_csv(file, c.csv, *labels) : load_csv(file, c.csv);
}

}  // namespace

EnsembleConfig EnsembleSettings::ensemble_config(Seed seed) const {
  EnsembleConfig config;
  config.voting = voting;
  if (preset == MemberPreset::Uniform) {
    BaseClassifierConfig member = base;
    member.encoder = axes.encoders.at(0);
    member.dim = axes.dims.at(0);
    member.width = axes.widths.at(0);
    config.members = uniform_members(members, member, seed);
  } else {
    config.members = diverse_members(members, axes, base, seed);
  }
  return config;
}

nlohmann::ordered_json RunConfig::to_json() const {
  using nlohmann::ordered_json;
  auto list = [](const auto& values, auto&& f) {
    ordered_json a = ordered_json::array();
    for (const auto& v : values) {
      a.push_back(f(v));
    }
    return a;
  };
  ordered_json d;
  d["name"] = data.name;
  d["format"] = data.format == DataFormat::Idx ? "idx" : data.format == DataFormat::Csv ? "csv" : "cache";
  for (const auto& [key, p] : {std::pair{"train_images", &data.train_images},
                               std::pair{"train_labels", &data.train_labels},
                               std::pair{"test_images", &data.test_images},
                               std::pair{"test_labels", &data.test_labels},
                               std::pair{"path", &data.path},
                               std::pair{"train_path", &data.train_path},
                               std::pair{"test_path", &data.test_path}}) {
    if (!p->empty()) {
      d[key] = p->generic_string();
    }
  }
  if (data.format == DataFormat::Csv) {
    d["label_column"] = data.csv.label_column;
    d["header"] = data.csv.header;
    d["delimiter"] = std::string(1, data.csv.delimiter);
    d["drop_columns"] = data.csv.drop_columns;
  }
  d["train_count"] = data.train_count ? ordered_json(*data.train_count) : ordered_json(nullptr);
  d["test_count"] = data.test_count ? ordered_json(*data.test_count) : ordered_json(nullptr);
  d["split"] = data.canonical_split ? "canonical" : "sampled";
  d["standardize"] = data.standardize;

  ordered_json e;
  e["members"] = ensemble.members;
  e["preset"] = ensemble.preset == MemberPreset::Uniform ? "uniform" : "diverse";
  e["encoders"] = list(ensemble.axes.encoders, [](EncoderKind k) { return std::string(to_string(k)); });
  e["dims"] = ensemble.axes.dims;
  e["widths"] = list(ensemble.axes.widths, [](DataWidth w) { return bits(w); });
  e["levels"] = ensemble.base.levels;
  e["window"] = ensemble.base.window;
  e["voting"] = std::string(to_string(ensemble.voting));
  e["retrain"] = ensemble.retrain;
  e["retrain_epochs"] = ensemble.base.retrain_epochs;
  e["shuffle_retrain"] = ensemble.base.shuffle_retrain;
  e["storage"] = to_string(ensemble.base.storage);
  e["quantizer"] = ensemble.base.per_feature_quantizer ? "per_feature" : "global";

  ordered_json o;
  o["model"] = output.model.generic_string();
  o["report"] = output.report.generic_string();
  o["test_cache"] = output.test_cache.generic_string();
  o["votes"] = output.votes;
  o["timing"] = output.timing;

  ordered_json j;
  j["name"] = name;
  j["seed"] = seed.value;
  j["dataset"] = d;
  j["ensemble"] = e;
  j["output"] = o;
  return j;
}

RunConfig parse_run_config(const std::string& text) {
  const auto ini = parse_ini(text);
  const auto& tree = ini.tree;
  check_sections(ini, {"run", "dataset", "ensemble", "output"});
  RunConfig c;

  const Section run("run", child(tree, "run"));
  run.allow_only({"name", "seed"});
  c.name = run.string("name", c.name);
  c.seed = Seed{run.number<std::uint64_t>("seed", c.seed.value)};

  const auto* dataset = child(tree, "dataset");
  if (dataset == nullptr) {
    throw ConfigError("missing [dataset] section");
  }
  c.data = parse_data(Section("dataset", dataset), "dataset");

  const Section ens("ensemble", child(tree, "ensemble"));
  std::set<std::string> ens_keys{"members", "preset", "encoders", "dims", "widths", "voting"};
  ens_keys.insert(kMemberKeys.begin(), kMemberKeys.end());
  ens.allow_only(ens_keys);
  c.ensemble.members = ens.number<std::size_t>("members", c.ensemble.members);
  c.ensemble.preset = parse_preset(ens);
  if (c.ensemble.preset == MemberPreset::Diverse) {
    c.ensemble.axes = DiversityAxes{};
  }
  c.ensemble.axes.encoders = parse_encoders(ens, c.ensemble.axes.encoders);
  c.ensemble.axes.dims = ens.number_list<std::size_t>("dims", c.ensemble.axes.dims);
  c.ensemble.axes.widths = parse_widths(ens, c.ensemble.axes.widths);
  c.ensemble.voting = convert<VotingRule>(ens, "voting", ens.string("voting", "hard"),
                                          voting_rule_from_string);
  parse_member_settings(ens, c.ensemble.base, c.ensemble.retrain);
  if (c.ensemble.members == 0) {
    throw ConfigError(ens.where("members") + ": must be at least 1");
  }
  if (c.ensemble.axes.encoders.empty() || c.ensemble.axes.dims.empty() ||
      c.ensemble.axes.widths.empty()) {
    throw ConfigError("[ensemble]: encoders, dims and widths must not be empty");
  }

  const Section out("output", child(tree, "output"));
  out.allow_only({"model", "report", "test_cache", "votes", "timing"});
  c.output.model = out.string("model", c.name + ".ehdc");
  c.output.report = out.string("report", c.name + ".report.json");
  c.output.test_cache = out.string("test_cache", "");
  c.output.votes = out.boolean("votes", false);
  c.output.timing = out.boolean("timing", false);

  try {
    c.ensemble_config().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[ensemble]: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text(path));
}

SweepConfig parse_sweep_config(const std::string& text) {
  const auto ini = parse_ini(text);
  const auto& tree = ini.tree;
  check_sections(ini, {"sweep", "output"}, "dataset.");
  SweepConfig c;
  const Section sweep("sweep", child(tree, "sweep"));
  std::set<std::string> keys{"name",    "seed",  "repeats", "datasets", "preset",
                             "dims",    "widths", "encoders", "sizes",  "votings"};
  keys.insert(kMemberKeys.begin(), kMemberKeys.end());
  sweep.allow_only(keys);
  c.name = sweep.string("name", c.name);
  c.seed = Seed{sweep.number<std::uint64_t>("seed", c.seed.value)};
  c.repeats = sweep.number<std::size_t>("repeats", c.repeats);
  if (c.repeats == 0) {
    throw ConfigError(sweep.where("repeats") + ": must be at least 1");
  }
  c.preset = parse_preset(sweep);
  c.dims = sweep.number_list<std::size_t>("dims", c.dims);
  c.widths = parse_widths(sweep, c.widths);
  c.encoders = parse_encoders(sweep, c.encoders);
  c.sizes = sweep.number_list<std::size_t>("sizes", c.sizes);
  c.votings.clear();
  for (const auto& v : sweep.list("votings")) {
    c.votings.push_back(convert<VotingRule>(sweep, "votings", v, voting_rule_from_string));
  }
  if (!sweep.raw("votings")) {
    c.votings = {VotingRule::Hard};
  }
  parse_member_settings(sweep, c.base, c.retrain);
  for (const auto s : c.sizes) {
    if (s == 0) {
      throw ConfigError(sweep.where("sizes") + ": ensemble sizes must be positive");
    }
  }

  for (const auto& name : sweep.list("datasets")) {
    const auto* section = child(tree, "dataset." + name);
    if (section == nullptr) {
      throw ConfigError("dataset '" + name + "' has no [dataset." + name + "] section");
    }
    c.datasets.push_back(parse_data(Section("dataset." + name, section), name));
  }
  for (const auto& name : ini.sections) {
    if (name.rfind("dataset.", 0) == 0) {
      const auto listed = sweep.list("datasets");
      if (std::find(listed.begin(), listed.end(), name.substr(8)) == listed.end()) {
        throw ConfigError("section [" + name + "] is not listed in [sweep] datasets");
      }
    }
  }

  const Section out("output", child(tree, "output"));
  out.allow_only({"csv"});
  c.csv = out.string("csv", c.name + ".csv");
  return c;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  return parse_sweep_config(read_text(path));
}

std::filesystem::path default_data_root() {
  if (const char* env = std::getenv("ENHDC_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return std::filesystem::current_path();
}

TrainTestData load_data(const DataConfig& c, Seed seed, const std::filesystem::path& data_root) {
  const auto spec = find_dataset_spec(c.name);
  const bool default_counts = !c.train_count && !c.test_count && !c.canonical_split;

  Dataset train_source;
  std::optional<Dataset> test_source;
  if (c.format == DataFormat::Idx) {
    train_source = load_idx(resolve(c.train_images, data_root), resolve(c.train_labels, data_root));
    if (!c.test_images.empty() || !c.test_labels.empty()) {
      test_source = load_idx(resolve(c.test_images, data_root), resolve(c.test_labels, data_root));
    }
  } else {
    const auto& first = c.path.empty() ? c.train_path : c.path;
    train_source = load_source(c, resolve(first, data_root), nullptr);
    if (c.path.empty() && !c.test_path.empty()) {
      test_source = load_source(c, resolve(c.test_path, data_root), &train_source.label_names);
    }
  }
  if (test_source && test_source->label_names != train_source.label_names) {
    // IDX label names come from the largest label present in each file.
    if (test_source->label_names.size() < train_source.label_names.size()) {
      test_source->label_names = train_source.label_names;
    } else {
      throw DataError(DataError::Kind::BadLabel, c.name + ": test labels outside the training label set");
    }
  }

  TrainTestData out;
  if (test_source) {
    if (c.canonical_split) {
      auto take_first = [](const Dataset& d, std::optional<std::size_t> count) {
        const std::size_t n = count ? *count : d.size();
        if (n > d.size()) {
          throw std::invalid_argument("requested " + std::to_string(n) + " samples but only " +
                                      std::to_string(d.size()) + " exist");
        }
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) {
          idx[i] = i;
        }
        return subset(d, idx);
      };
      out.train = take_first(train_source, c.train_count);
      out.test = take_first(*test_source, c.test_count);
    } else {
      const std::size_t tc = c.train_count.value_or(spec ? spec->train_count : train_source.size());
      const std::size_t sc = c.test_count.value_or(spec ? spec->test_count : test_source->size());
      out.train = split(train_source, tc, 0, derive_seed(seed, 1)).first;
      out.test = split(*test_source, sc, 0, derive_seed(seed, 2)).first;
    }
  } else {
    const std::optional<std::size_t> tc = c.train_count ? c.train_count
                                          : spec       ? std::optional(spec->train_count)
                                                       : std::nullopt;
    const std::optional<std::size_t> sc = c.test_count ? c.test_count
                                          : spec       ? std::optional(spec->test_count)
                                                       : std::nullopt;
    if (!tc || !sc) {
      throw ConfigError("dataset '" + c.name + "' is a single file: set train_count and test_count");
    }
    auto parts = split(train_source, *tc, *sc, derive_seed(seed, 0));
    out.train = std::move(parts.first);
    out.test = std::move(parts.second);
  }
  out.train.name = c.name;
  out.test.name = c.name;
  if (spec && default_counts) {
    check_against_spec(*spec, out.train, out.test);
  }
  if (c.standardize) {
    standardize(out.train, out.test);
  }
  return out;
}

}  // namespace enhdc
