#include "forefront/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "forefront/error.hpp"
#include "random.hpp"

namespace forefront::datagen {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kSignatureStream = 0x5167;
constexpr double kClassSpread = 0.2;
constexpr std::uint64_t kItemStream = 0x17e4;

const char* const kAnalytes[] = {"carbon_monoxide", "ammonia",  "methane", "acetaldehyde",
                                 "benzene",         "butanol",  "ethylene", "methanol",
                                 "toluene",         "acetone"};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_double(const std::string& tok, const fs::path& file, std::size_t row) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw FormatError(file.string() + ": row " + std::to_string(row) + ": bad number '" + tok +
                      "'");
  }
  return v;
}

}  // namespace

void GenConfig::validate() const {
  if (n_classes < 2) throw InvalidArgument("n_classes must be >= 2");
  if (n_channels < 1) throw InvalidArgument("n_channels must be >= 1");
  if (n_locations < 1) throw InvalidArgument("n_locations must be >= 1");
  if (series_per_class_location < 1) {
    throw InvalidArgument("series_per_class_location must be >= 1");
  }
  if (!(rate_hz > 0.0) || !(duration_s > 0.0)) {
    throw InvalidArgument("duration_s and rate_hz must be positive");
  }
  if (duration_s * rate_hz < 600.0) throw InvalidArgument("duration_s * rate_hz must be >= 600");
  if (!(noise_ar >= 0.0 && noise_ar < 1.0)) throw InvalidArgument("noise_ar must be in [0, 1)");
  if (!(noise_amplitude >= 0.0) || !std::isfinite(noise_amplitude)) {
    throw InvalidArgument("noise_amplitude must be finite and >= 0");
  }
  if (!(response_jitter >= 0.0) || !std::isfinite(response_jitter)) {
    throw InvalidArgument("response_jitter must be finite and >= 0");
  }
}

void Dataset::validate() const {
  if (items.empty()) throw EmptyDatasetError("dataset is empty");
  std::vector<bool> present(class_names.size(), false);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    if (!it.label) throw InvalidArgument("dataset item " + std::to_string(i) + " has no label");
    if (*it.label < 0 || static_cast<std::size_t>(*it.label) >= class_names.size()) {
      throw InvalidArgument("dataset item " + std::to_string(i) + " has label out of range");
    }
    if (it.n_channels() != items.front().n_channels()) {
      throw InvalidArgument("dataset items have unequal channel counts");
    }
    present[static_cast<std::size_t>(*it.label)] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw InvalidArgument("dataset must contain at least two classes");
  }
}

std::vector<std::string> default_class_names(int n_classes) {
  std::vector<std::string> names;
  for (int c = 0; c < n_classes; ++c) {
    names.push_back(n_classes <= 10 ? kAnalytes[c] : "class_" + std::to_string(c));
  }
  return names;
}

ClassSignature draw_signatures(const GenConfig& cfg) {
  cfg.validate();
  detail::Rng rng(detail::derive_seed(cfg.seed, kSignatureStream));
  ClassSignature sig;
  const auto nc = static_cast<std::size_t>(cfg.n_classes);
  const auto nch = static_cast<std::size_t>(cfg.n_channels);
  sig.amplitude.assign(nc, std::vector<double>(nch));
  sig.tau_s.assign(nc, std::vector<double>(nch));
  sig.t0_s.assign(nc, std::vector<double>(nch));
  // Each channel has a typical response; classes perturb it, so analytes
  // overlap the way similar gases do on broadly selective sensors.
  std::vector<double> proto_amp(nch), proto_tau(nch);
  for (std::size_t ch = 0; ch < nch; ++ch) {
    proto_amp[ch] = rng.uniform(0.5, 1.3);
    proto_tau[ch] = rng.uniform(1.0, 4.0);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t ch = 0; ch < nch; ++ch) {
      sig.amplitude[c][ch] = proto_amp[ch] * rng.uniform(1.0 - kClassSpread, 1.0 + kClassSpread);
      sig.tau_s[c][ch] = proto_tau[ch] * rng.uniform(1.0 - kClassSpread, 1.0 + kClassSpread);
      sig.t0_s[c][ch] = rng.uniform(0.0, 2.0);
    }
  }
  return sig;
}

double location_scale(int location, int n_locations) {
  if (n_locations <= 1) return 1.0;
  return 1.0 - 0.6 * static_cast<double>(location) / static_cast<double>(n_locations - 1);
}

signal::RawSeries generate_series(const GenConfig& cfg, const ClassSignature& sig, int label,
                                  int location, int replicate) {
  detail::Rng rng(detail::derive_seed(cfg.seed, kItemStream, label, location, replicate));
  const auto len = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.rate_hz));
  const double release_s = rng.uniform(15.0, 30.0);
  const double scale = location_scale(location, cfg.n_locations);
  const double innovation = cfg.noise_amplitude * std::sqrt(1.0 - cfg.noise_ar * cfg.noise_ar);
  const auto c = static_cast<std::size_t>(label);

  signal::RawSeries s;
  s.sample_rate_hz = cfg.rate_hz;
  s.label = label;
  s.location = location;
  s.channels.resize(static_cast<std::size_t>(cfg.n_channels));
  for (std::size_t ch = 0; ch < s.channels.size(); ++ch) {
    const double baseline = rng.uniform(2.0, 8.0);
    // Plume turbulence: each recording sees its own gain and speed per sensor.
    const double j = cfg.response_jitter;
    const double amp = sig.amplitude[c][ch] * scale * std::exp(j * rng.normal() - 0.5 * j * j);
    const double tau = sig.tau_s[c][ch] * std::exp(j * rng.normal() - 0.5 * j * j);
    const double start = release_s + sig.t0_s[c][ch];
    double noise = cfg.noise_amplitude * rng.normal();
    auto& out = s.channels[ch];
    out.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
      const double t = static_cast<double>(i) / cfg.rate_hz;
      const double response = t >= start ? amp * (1.0 - std::exp(-(t - start) / tau)) : 0.0;
      out[i] = baseline + response + noise;
      noise = cfg.noise_ar * noise + innovation * rng.normal();
    }
  }
  return s;
}

namespace {

template <typename Sink>
void for_each_item(const GenConfig& cfg, Sink&& sink) {
  const ClassSignature sig = draw_signatures(cfg);
  for (int c = 0; c < cfg.n_classes; ++c) {
    for (int loc = 0; loc < cfg.n_locations; ++loc) {
      for (int r = 0; r < cfg.series_per_class_location; ++r) {
        sink(generate_series(cfg, sig, c, loc, r));
      }
    }
  }
}

}  // namespace

Dataset generate_dataset(const GenConfig& cfg) {
  Dataset ds;
  ds.class_names = default_class_names(cfg.n_classes);
  for_each_item(cfg, [&](signal::RawSeries&& s) { ds.items.push_back(std::move(s)); });
  return ds;
}

std::vector<signal::Series> generate_downsampled(const GenConfig& cfg, std::size_t window) {
  std::vector<signal::Series> out;
  for_each_item(cfg, [&](signal::RawSeries&& s) { out.push_back(signal::downsample(s, window)); });
  return out;
}

std::vector<signal::Series> downsample_all(const Dataset& dataset, std::size_t window) {
  std::vector<signal::Series> out;
  out.reserve(dataset.items.size());
  for (const auto& item : dataset.items) out.push_back(signal::downsample(item, window));
  return out;
}

signal::RawSeries load_series_csv(const fs::path& path, double rate_hz) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open series file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");
  const auto header = split(trim_cr(line), ',');
  if (header.size() < 2 || header.front() != "t") {
    throw FormatError(path.string() + ": header must be t,ch0,...");
  }
  const std::size_t nch = header.size() - 1;
  signal::RawSeries s;
  s.sample_rate_hz = rate_hz;
  s.channels.assign(nch, {});
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " columns, expected " +
                        std::to_string(header.size()));
    }
    for (std::size_t ch = 0; ch < nch; ++ch) {
      s.channels[ch].push_back(parse_double(cells[ch + 1], path, row));
    }
  }
  if (s.length() == 0) throw FormatError(path.string() + ": no samples");
  return s;
}

Dataset load_csv_dataset(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest " + manifest_path.string());
  const fs::path root = manifest_path.parent_path();
  std::map<std::string, std::string> meta;
  std::string line;
  bool saw_header = false;
  Dataset ds;
  std::map<std::string, int> class_ids;
  std::size_t n_channels = 0;
  double rate_hz = 0.0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    line = trim_cr(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        auto key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        meta[key] = line.substr(eq + 1);
      }
      continue;
    }
    if (!saw_header) {
      if (line != "relative_path,label,location") {
        throw FormatError(manifest_path.string() + ": row " + std::to_string(row) +
                          ": expected header relative_path,label,location");
      }
      saw_header = true;
      if (!meta.count("channels") || !meta.count("rate_hz") || !meta.count("classes")) {
        throw FormatError(manifest_path.string() + ": missing channels/rate_hz/classes metadata");
      }
      n_channels = static_cast<std::size_t>(std::stoul(meta["channels"]));
      rate_hz = std::stod(meta["rate_hz"]);
      ds.class_names = split(meta["classes"], ';');
      for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
        class_ids[ds.class_names[c]] = static_cast<int>(c);
      }
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 3) {
      throw FormatError(manifest_path.string() + ": row " + std::to_string(row) +
                        ": expected 3 fields");
    }
    const auto it = class_ids.find(cells[1]);
    if (it == class_ids.end()) {
      throw FormatError(manifest_path.string() + ": row " + std::to_string(row) +
                        ": unknown label '" + cells[1] + "'");
    }
    const fs::path file = root / cells[0];
    if (!fs::exists(file)) throw IoError("missing series file " + file.string());
    signal::RawSeries s = load_series_csv(file, rate_hz);
    if (s.n_channels() != n_channels) {
      throw FormatError(file.string() + ": row 1: " + std::to_string(s.n_channels() + 1) +
                        " columns, manifest says " + std::to_string(n_channels) +
                        " channels + time");
    }
    s.label = it->second;
    if (!cells[2].empty()) s.location = std::stoi(cells[2]);
    ds.items.push_back(std::move(s));
  }
  if (ds.items.empty()) throw EmptyDatasetError(manifest_path.string() + ": manifest lists no series");
  return ds;
}

namespace {

// Streams a manifest plus one CSV per series into `dir`.
class CsvDatasetWriter {
 public:
  CsvDatasetWriter(const fs::path& dir, std::size_t n_channels, double rate_hz,
                   std::vector<std::string> class_names)
      : dir_(dir), manifest_(dir / "manifest.csv"), class_names_(std::move(class_names)) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    out_.open(manifest_, std::ios::binary);
    if (!out_) throw IoError("cannot write " + manifest_.string());
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", rate_hz);
    out_ << "# forefront-manifest v1\n# channels=" << n_channels << "\n# rate_hz=" << buf
         << "\n# classes=";
    for (std::size_t c = 0; c < class_names_.size(); ++c) out_ << (c ? ";" : "") << class_names_[c];
    out_ << "\nrelative_path,label,location\n";
  }

  void add(const signal::RawSeries& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "series_%05zu.csv", count_++);
    const std::string name = buf;
    out_ << name << ',' << class_names_.at(static_cast<std::size_t>(s.label.value())) << ','
         << (s.location ? std::to_string(*s.location) : "") << '\n';

    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw IoError("cannot write " + (dir_ / name).string());
    f << 't';
    for (std::size_t ch = 0; ch < s.n_channels(); ++ch) f << ",ch" << ch;
    f << '\n';
    std::string row;
    for (std::size_t t = 0; t < s.length(); ++t) {
      row.clear();
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(t) / s.sample_rate_hz);
      row += buf;
      for (const auto& ch : s.channels) {
        std::snprintf(buf, sizeof buf, ",%.9g", ch[t]);
        row += buf;
      }
      row += '\n';
      f << row;
    }
    if (!f) throw IoError("write failed for " + (dir_ / name).string());
  }

  fs::path finish() {
    out_.flush();
    if (!out_) throw IoError("write failed for " + manifest_.string());
    return manifest_;
  }

 private:
  fs::path dir_, manifest_;
  std::vector<std::string> class_names_;
  std::ofstream out_;
  std::size_t count_ = 0;
};

}  // namespace

fs::path write_csv_dataset(const Dataset& dataset, const fs::path& dir) {
  if (dataset.items.empty()) throw EmptyDatasetError("cannot write an empty dataset");
  const auto& first = dataset.items.front();
  CsvDatasetWriter writer(dir, first.n_channels(), first.sample_rate_hz, dataset.class_names);
  for (const auto& s : dataset.items) writer.add(s);
  return writer.finish();
}

fs::path write_generated_dataset(const GenConfig& cfg, const fs::path& dir) {
  cfg.validate();
  CsvDatasetWriter writer(dir, static_cast<std::size_t>(cfg.n_channels), cfg.rate_hz,
                          default_class_names(cfg.n_classes));
  for_each_item(cfg, [&](signal::RawSeries&& s) { writer.add(s); });
  return writer.finish();
}

}  // namespace forefront::datagen
