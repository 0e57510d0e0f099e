#include "enhdc/commands.hpp"

#include <chrono>
#include <functional>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "enhdc/experiment.hpp"
#include "enhdc/model_file.hpp"
#include "enhdc/random.hpp"
#include "enhdc/run_config.hpp"

namespace enhdc {

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUser;
  } catch (const DataError& e) {
    err << "dataset error: " << e.what() << '\n';
    return kExitUser;
  } catch (const ModelFormatError& e) {
    err << "model error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
}

void write_json(const ordered_json& j, const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
}

std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(8) << std::setfill('0') << v;
  return os.str();
}

ordered_json member_json(std::size_t index, const BaseClassifierConfig& c, std::size_t classes) {
  ordered_json j;
  j["index"] = index;
  j["dim"] = c.dim;
  j["width"] = bits(c.width);
  j["encoder"] = std::string(to_string(c.encoder));
  j["levels"] = c.levels;
  j["window"] = c.window;
  j["seed"] = c.seed.value;
  j["storage"] = to_string(c.storage);
  j["quantizer"] = c.per_feature_quantizer ? "per_feature" : "global";
  j["size_bits"] = model_size_bits(static_cast<std::uint64_t>(bits(c.width)), c.dim, classes, 1).bits;
  return j;
}

ordered_json size_json(const ModelSize& size) {
  ordered_json j;
  j["bits"] = size.bits;
  j["kilobits"] = size.kilobits();
  j["bytes"] = size.bytes();
  return j;
}

ordered_json dataset_json(const Dataset& test, std::optional<std::size_t> train_size) {
  ordered_json j;
  j["name"] = test.name;
  if (train_size) {
    j["train_samples"] = *train_size;
  }
  j["test_samples"] = test.size();
  j["features"] = test.features;
  j["classes"] = test.classes();
  j["label_names"] = test.label_names;
  return j;
}

ordered_json votes_json(std::span<const VoteRecord> votes, const Dataset& test) {
  ordered_json a = ordered_json::array();
  for (std::size_t i = 0; i < votes.size(); ++i) {
    const auto& v = votes[i];
    ordered_json r;
    r["index"] = i;
    r["truth"] = test.labels[i];
    r["label"] = v.label;
    ordered_json members = ordered_json::array();
    for (const auto& p : v.members) {
      members.push_back(p.label);
    }
    r["member_labels"] = members;
    r["votes"] = v.votes;
    r["similarity_sums"] = v.similarity_sums;
    a.push_back(std::move(r));
  }
  return a;
}

std::vector<const MemberRun*> pointers(const std::vector<MemberRun>& runs) {
  std::vector<const MemberRun*> out;
  for (const auto& r : runs) {
    out.push_back(&r);
  }
  return out;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool has_magic(const std::filesystem::path& path, const char* magic, std::size_t n) {
  std::ifstream in(path, std::ios::binary);
  char buf[4] = {};
  return in.read(buf, static_cast<std::streamsize>(n)) && std::memcmp(buf, magic, n) == 0;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string q = "\"";
  for (const char ch : s) {
    q += ch == '"' ? "\"\"" : std::string(1, ch);
  }
  return q + "\"";
}

std::string fixed6(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

template <typename T, typename F>
std::string joined(const std::vector<T>& values, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += (i ? "|" : "") + f(values[i]);
  }
  return s;
}

}  // namespace

std::string format_kilobits(const ModelSize& size) {
  std::ostringstream os;
  if (size.bits % 1000 == 0) {
    os << size.bits / 1000;
  } else {
    os << std::setprecision(15) << size.kilobits();
  }
  os << " Kb";
  return os.str();
}

nlohmann::ordered_json read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open report " + path.string());
  }
  return ordered_json::parse(in);
}

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = Clock::now();
    RunConfig config = load_run_config(options.config);
    if (options.seed) {
      config.seed = Seed{*options.seed};
    }
    if (options.voting) {
      config.ensemble.voting = *options.voting;
    }
    if (options.retrain_epochs) {
      if (*options.retrain_epochs < 0) {
        throw ConfigError("--retrain-epochs must be non-negative");
      }
      config.ensemble.base.retrain_epochs = *options.retrain_epochs;
    }
    if (options.out_dir) {
      config.output.model = *options.out_dir / "model.ehdc";
      config.output.report = *options.out_dir / "report.json";
    }
    config.output.votes = config.output.votes || options.votes;
    config.output.timing = config.output.timing || options.timing;

    const EnsembleConfig ensemble_config = config.ensemble_config();
    const auto data = load_data(config.data, config.seed, default_data_root());
    const auto loaded = Clock::now();

    std::vector<MemberRun> runs;
    std::vector<BaseClassifier> models;
    auto trained_members =
        run_members(ensemble_config.members, data.train, data.test, config.ensemble.retrain);
    for (std::size_t i = 0; i < trained_members.size(); ++i) {
      auto& trained = trained_members[i];
      out << "member " << i << ": " << to_string(trained.run.config.encoder) << " D="
          << trained.run.config.dim << " INT" << bits(trained.run.config.width)
          << " accuracy=" << fixed6(trained.run.accuracy) << '\n';
      runs.push_back(std::move(trained.run));
      models.push_back(std::move(trained.model));
    }
    const auto trained_at = Clock::now();

    const EnsembleModel model(std::move(models), ensemble_config.voting);
    ensure_parent(config.output.model);
    save_model(model, config.output.model);
    const auto bytes = serialize_model(model);

    const auto members = pointers(runs);
    const auto final_eval = evaluate_members(members, model.voting(), data.test);
    const auto raw_eval = evaluate_members(members, model.voting(), data.test, true);
    const auto hard_eval = evaluate_members(members, VotingRule::Hard, data.test);
    const auto soft_eval = evaluate_members(members, VotingRule::Soft, data.test);

    ordered_json report;
    report["schema"] = kReportSchema;
    report["command"] = "train";
    report["config"] = config.to_json();
    report["dataset"] = dataset_json(data.test, data.train.size());
    ordered_json model_j;
    model_j["path"] = config.output.model.generic_string();
    model_j["format_version"] = kModelFormatVersion;
    model_j["checksum"] = hex32(model_checksum(bytes));
    model_j["file_bytes"] = bytes.size();
    report["model"] = model_j;
    report["model_size"] = size_json(model_size(model));
    ordered_json members_j = ordered_json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      auto m = member_json(i, runs[i].config, model.classes());
      m["raw_accuracy"] = runs[i].raw_accuracy;
      m["accuracy"] = runs[i].accuracy;
      m["retrain_updates"] = runs[i].retrain_updates;
      members_j.push_back(std::move(m));
    }
    report["members"] = members_j;
    ordered_json ens;
    ens["voting"] = std::string(to_string(model.voting()));
    ens["size"] = model.size();
    ens["accuracy"] = final_eval.accuracy;
    ens["raw_accuracy"] = raw_eval.accuracy;
    ens["mean_member_accuracy"] = final_eval.mean_member_accuracy;
    ens["mean_member_raw_accuracy"] = raw_eval.mean_member_accuracy;
    ens["hard_accuracy"] = hard_eval.accuracy;
    ens["soft_accuracy"] = soft_eval.accuracy;
    report["ensemble"] = ens;
    report["confusion_matrix"] = final_eval.confusion;
    if (config.output.votes) {
      report["votes"] = votes_json(final_eval.votes, data.test);
    }
    if (config.output.timing) {
      ordered_json t;
      t["load"] = std::chrono::duration<double>(loaded - start).count();
      t["train"] = std::chrono::duration<double>(trained_at - loaded).count();
      t["total"] = seconds_since(start);
      report["timing_seconds"] = t;
    }
    write_json(report, config.output.report);
    if (!config.output.test_cache.empty()) {
      ensure_parent(config.output.test_cache);
      save_cache(data.test, config.output.test_cache);
    }
    out << "ensemble (" << to_string(model.voting()) << ", " << model.size()
        << " members): accuracy=" << fixed6(final_eval.accuracy)
        << " mean member=" << fixed6(final_eval.mean_member_accuracy) << '\n'
        << "model: " << config.output.model.string() << " (" << format_kilobits(model_size(model))
        << ", checksum " << hex32(model_checksum(bytes)) << ")\n"
        << "report: " << config.output.report.string() << '\n';
    return kExitOk;
  });
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = Clock::now();
    EnsembleModel model = load_model(options.model);
    if (options.voting) {
      model.set_voting(*options.voting);
    }
    const auto& label_names = model.members().front().label_names();

    Dataset test;
    if (options.config) {
      const auto config = load_run_config(*options.config);
      test = load_data(config.data, config.seed, default_data_root()).test;
    } else if (options.dataset) {
      const auto& path = *options.dataset;
      if (!std::filesystem::exists(path)) {
        throw DataError(DataError::Kind::Io, "cannot open " + path.string());
      }
      if (has_magic(path, "EHDS", 4)) {
        test = load_cache(path);
      } else if (has_magic(path, "\0\0\x08\x03", 4)) {
        if (!options.labels) {
          throw ConfigError("IDX image files need --labels");
        }
        test = load_idx(path, *options.labels);
      } else {
        if (!options.label_column) {
          throw ConfigError("CSV datasets need --label-column");
        }
        CsvOptions csv;
        csv.label_column = *options.label_column;
        test = load_csv(path, csv, label_names);
      }
    } else {
      throw ConfigError("evaluate needs --dataset or --config");
    }
    if (test.features != model.members().front().encoder().features()) {
      throw DataError(DataError::Kind::CountMismatch,
                      "dataset has " + std::to_string(test.features) + " features, model expects " +
                          std::to_string(model.members().front().encoder().features()));
    }
    if (test.label_names.size() < label_names.size() &&
        std::equal(test.label_names.begin(), test.label_names.end(), label_names.begin())) {
      test.label_names = label_names;
    }
    if (test.label_names != label_names) {
      throw DataError(DataError::Kind::BadLabel, "dataset labels differ from the model's labels");
    }

    std::vector<MemberRun> runs(model.size());
    for (std::size_t m = 0; m < model.size(); ++m) {
      const auto& member = model.members()[m];
      runs[m].config = member.config();
      std::size_t correct = 0;
      for (std::size_t i = 0; i < test.size(); ++i) {
        runs[m].predictions.push_back(member.infer(test.row(i)));
        correct += runs[m].predictions.back().label == static_cast<std::size_t>(test.labels[i]);
      }
      runs[m].accuracy =
          test.size() ? static_cast<double>(correct) / static_cast<double>(test.size()) : 0.0;
    }
    const auto members = pointers(runs);
    const auto eval = evaluate_members(members, model.voting(), test);

    ordered_json report;
    report["schema"] = kReportSchema;
    report["command"] = "evaluate";
    report["dataset"] = dataset_json(test, std::nullopt);
    ordered_json model_j;
    model_j["path"] = options.model.generic_string();
    model_j["format_version"] = kModelFormatVersion;
    model_j["checksum"] = hex32(model_checksum(serialize_model(model)));
    report["model"] = model_j;
    report["model_size"] = size_json(model_size(model));
    ordered_json members_j = ordered_json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      auto m = member_json(i, runs[i].config, model.classes());
      m["accuracy"] = runs[i].accuracy;
      members_j.push_back(std::move(m));
    }
    report["members"] = members_j;
    ordered_json ens;
    ens["voting"] = std::string(to_string(model.voting()));
    ens["size"] = model.size();
    ens["accuracy"] = eval.accuracy;
    ens["mean_member_accuracy"] = eval.mean_member_accuracy;
    report["ensemble"] = ens;
    report["confusion_matrix"] = eval.confusion;
    if (options.votes) {
      report["votes"] = votes_json(eval.votes, test);
    }
    if (options.out) {
      write_json(report, *options.out);
    }
    out << "ensemble (" << to_string(model.voting()) << ", " << model.size()
        << " members): accuracy=" << fixed6(eval.accuracy) << " on " << test.size()
        << " samples (" << std::setprecision(3) << seconds_since(start) << " s)\n";
    return kExitOk;
  });
}

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SweepConfig config = load_sweep_config(options.config);
    if (options.seed) {
      config.seed = Seed{*options.seed};
    }
    if (options.out) {
      config.csv = *options.out;
    }
    ensure_parent(config.csv);
    std::ofstream csv(config.csv, std::ios::trunc);
    if (!csv) {
      throw ConfigError("cannot write " + config.csv.string());
    }
    csv << kSweepSchema << '\n' << kSweepHeader << '\n';

    struct Cell {
      std::string dim, width, encoder;
      std::size_t size;
      VotingRule voting;
      std::function<std::vector<BaseClassifierConfig>(Seed)> members;
    };
    std::vector<Cell> cells;
    if (config.preset == MemberPreset::Uniform) {
      for (const auto dim : config.dims) {
        for (const auto width : config.widths) {
          for (const auto encoder : config.encoders) {
            for (const auto size : config.sizes) {
              for (const auto voting : config.votings) {
                BaseClassifierConfig base = config.base;
                base.dim = dim;
                base.width = width;
                base.encoder = encoder;
                cells.push_back({std::to_string(dim), std::to_string(bits(width)),
                                 std::string(to_string(encoder)), size, voting,
                                 [base, size](Seed s) { return uniform_members(size, base, s); }});
              }
            }
          }
        }
      }
    } else {
      const DiversityAxes axes{config.encoders, config.dims, config.widths};
      for (const auto size : config.sizes) {
        for (const auto voting : config.votings) {
          cells.push_back(
              {joined(config.dims, [](std::size_t d) { return std::to_string(d); }),
               joined(config.widths, [](DataWidth w) { return std::to_string(bits(w)); }),
               joined(config.encoders, [](EncoderKind k) { return std::string(to_string(k)); }),
               size, voting,
               [axes, base = config.base, size](Seed s) {
                 return diverse_members(size, axes, base, s);
               }});
        }
      }
    }

    for (const auto& dataset : config.datasets) {
      std::optional<TrainTestData> data;
      std::string load_error;
      try {
        data = load_data(dataset, config.seed, default_data_root());
      } catch (const std::exception& e) {
        load_error = e.what();
        err << "dataset " << dataset.name << ": " << load_error << '\n';
      }
      std::optional<MemberCache> cache;
      if (data) {
        cache.emplace(data->train, data->test, config.retrain);
      }
      for (const auto& cell : cells) {
        std::string status = "ok";
        double accuracy = 0.0;
        double member_accuracy = 0.0;
        std::uint64_t size_bits = 0;
        if (!data) {
          status = "error: " + load_error;
        } else {
          try {
            for (std::size_t r = 0; r < config.repeats; ++r) {
              const auto members = cell.members(derive_seed(config.seed, r));
              std::vector<const MemberRun*> runs;
              for (const auto& m : members) {
                runs.push_back(&cache->get(m));
              }
              const auto eval = evaluate_members(runs, cell.voting, data->test);
              accuracy += eval.accuracy / static_cast<double>(config.repeats);
              member_accuracy += eval.mean_member_accuracy / static_cast<double>(config.repeats);
              if (r == 0) {
                for (const auto& m : members) {
                  size_bits += model_size_bits(static_cast<std::uint64_t>(bits(m.width)), m.dim,
                                               data->train.classes(), 1)
                                   .bits;
                }
              }
            }
          } catch (const std::exception& e) {
            status = std::string("error: ") + e.what();
          }
        }
        csv << csv_field(dataset.name) << ',' << csv_field(cell.dim) << ',' << csv_field(cell.width)
            << ',' << csv_field(cell.encoder) << ',' << cell.size << ',' << to_string(cell.voting)
            << ',' << fixed6(accuracy) << ',' << fixed6(member_accuracy) << ',' << size_bits << ','
            << config.repeats << ',' << csv_field(status) << '\n';
        out << dataset.name << " D=" << cell.dim << " INT" << cell.width << ' ' << cell.encoder
            << " n=" << cell.size << ' ' << to_string(cell.voting)
            << " accuracy=" << fixed6(accuracy) << ' ' << status << '\n';
      }
    }
    out << "sweep: " << config.csv.string() << '\n';
    return kExitOk;
  });
}

int cmd_size(std::uint64_t width_bits, std::uint64_t dim, std::uint64_t classes,
             std::uint64_t members, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (width_bits > 64) {
      throw std::invalid_argument("width must be 8 or 16 bits");
    }
    (void)data_width_from_bits(static_cast<int>(width_bits));
    const auto size = model_size_bits(width_bits, dim, classes, members);
    out << width_bits << " bits x " << dim << " dimensions x " << classes << " classes x "
        << members << (members == 1 ? " classifier" : " classifiers") << '\n'
        << "  " << size.bits << " bits\n"
        << "  " << format_kilobits(size) << " (kilobits)\n"
        << "  " << std::setprecision(15) << size.bytes() << " bytes\n";
    return kExitOk;
  });
}

}  // namespace enhdc
