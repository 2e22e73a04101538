#include "forefront/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <type_traits>

#include "forefront/error.hpp"

namespace forefront::model_io {
namespace {

static_assert(std::endian::native == std::endian::little, "bundle format is little-endian");

constexpr char kMagic[8] = {'F', 'F', 'N', 'O', 'S', 'E', '\0', '\0'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  template <typename T>
  void put_all(std::span<const T> v) {
    out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in_) throw FormatError("model bundle is truncated");
    return v;
  }
  template <typename T>
  std::vector<T> get_vec(std::size_t n) {
    if (n > (std::size_t{1} << 34) / sizeof(T)) throw FormatError("model bundle size field is corrupt");
    std::vector<T> v(n);
    in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in_) throw FormatError("model bundle is truncated");
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (!in_) throw FormatError("model bundle is truncated");
    return s;
  }

 private:
  std::istream& in_;
};

// Union of both members' support rows, as indices into the members' shared
// training matrix.
struct RowTable {
  std::map<const double*, std::uint32_t> index;
  std::vector<std::span<const double>> rows;

  std::uint32_t add(std::span<const double> row) {
    auto [it, inserted] = index.emplace(row.data(), static_cast<std::uint32_t>(rows.size()));
    if (inserted) rows.push_back(row);
    return it->second;
  }
};

void collect_rows(const learners::TrainedClassifier& m, RowTable& table) {
  if (const auto* svm = std::get_if<learners::SvmModel>(&m.model)) {
    for (std::size_t j = 0; j < svm->n_support(); ++j) table.add(svm->support_vector(j));
  } else {
    const auto& knn = std::get<learners::KnnModel>(m.model);
    for (std::size_t i = 0; i < knn.labels.size(); ++i) table.add(knn.data->row(i));
  }
}

void write_member(Writer& w, const learners::TrainedClassifier& m, RowTable& table) {
  w.put<std::uint64_t>(m.id);
  w.put<double>(m.accuracy);
  if (const auto* svm = std::get_if<learners::SvmModel>(&m.model)) {
    w.put<std::uint8_t>(0);
    w.put<double>(svm->params.C);
    w.put<double>(svm->params.gamma);
    w.put<double>(svm->params.tol);
    w.put<std::int32_t>(svm->params.max_passes);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(svm->classes.size()));
    for (Label c : svm->classes) w.put<std::int32_t>(c);
    w.put<std::uint64_t>(svm->n_support());
    for (std::size_t j = 0; j < svm->n_support(); ++j) w.put<std::uint32_t>(table.add(svm->support_vector(j)));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(svm->machines.size()));
    for (const auto& mach : svm->machines) {
      w.put<std::uint32_t>(static_cast<std::uint32_t>(mach.positive));
      w.put<std::uint32_t>(static_cast<std::uint32_t>(mach.negative));
      w.put<double>(mach.rho);
      w.put<std::uint32_t>(static_cast<std::uint32_t>(mach.support.size()));
      w.put_all<std::uint32_t>(mach.support);
      w.put_all<double>(mach.coef);
    }
  } else {
    const auto& knn = std::get<learners::KnnModel>(m.model);
    w.put<std::uint8_t>(1);
    w.put<std::uint64_t>(knn.k);
    w.put<std::uint64_t>(knn.labels.size());
    for (std::size_t i = 0; i < knn.labels.size(); ++i) w.put<std::uint32_t>(table.add(knn.data->row(i)));
    for (Label l : knn.labels) w.put<std::int32_t>(l);
  }
}

learners::TrainedClassifier read_member(Reader& r, const std::shared_ptr<const Matrix>& rows) {
  learners::TrainedClassifier m;
  m.id = r.get<std::uint64_t>();
  m.accuracy = r.get<double>();
  const auto kind = r.get<std::uint8_t>();
  const auto check_row = [&](std::uint32_t row) {
    if (row >= rows->rows()) throw FormatError("model bundle row index out of range");
    return row;
  };
  if (kind == 0) {
    learners::SvmModel svm;
    svm.params.C = r.get<double>();
    svm.params.gamma = r.get<double>();
    svm.params.tol = r.get<double>();
    svm.params.max_passes = r.get<std::int32_t>();
    const auto nc = r.get<std::uint32_t>();
    for (std::uint32_t c = 0; c < nc; ++c) svm.classes.push_back(r.get<std::int32_t>());
    const auto ns = r.get<std::uint64_t>();
    for (std::uint64_t j = 0; j < ns; ++j) svm.support_rows.push_back(check_row(r.get<std::uint32_t>()));
    const auto nm = r.get<std::uint32_t>();
    for (std::uint32_t k = 0; k < nm; ++k) {
      learners::BinaryMachine mach;
      mach.positive = r.get<std::uint32_t>();
      mach.negative = r.get<std::uint32_t>();
      mach.rho = r.get<double>();
      const auto n = r.get<std::uint32_t>();
      mach.support = r.get_vec<std::uint32_t>(n);
      mach.coef = r.get_vec<double>(n);
      if (mach.positive >= nc || mach.negative >= nc) throw FormatError("machine class out of range");
      for (auto s : mach.support) {
        if (s >= ns) throw FormatError("machine support index out of range");
      }
      svm.machines.push_back(std::move(mach));
    }
    svm.dim = rows->cols();
    svm.data = rows;
    m.model = std::move(svm);
  } else if (kind == 1) {
    learners::KnnModel knn;
    knn.k = r.get<std::uint64_t>();
    const auto n = r.get<std::uint64_t>();
    auto own = std::make_shared<Matrix>();
    for (std::uint64_t i = 0; i < n; ++i) own->append_row(rows->row(check_row(r.get<std::uint32_t>())));
    for (std::uint64_t i = 0; i < n; ++i) knn.labels.push_back(r.get<std::int32_t>());
    knn.data = std::move(own);
    m.model = std::move(knn);
  } else {
    throw FormatError("unknown classifier kind in model bundle");
  }
  return m;
}

}  // namespace

void write_model(std::ostream& out, const cascade::ForefrontModel& model) {
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.class_names.size()));
  for (const auto& name : model.class_names) w.put_string(name);
  w.put<std::uint64_t>(model.n_channels);
  w.put<double>(model.plan.effective_rate_hz);
  w.put<std::uint64_t>(model.plan.size());
  w.put_all<double>(model.plan.stage_times_s);
  w.put<std::uint64_t>(model.prefix.onset.window);
  w.put<double>(model.prefix.onset.factor);
  w.put<std::uint64_t>(model.prefix.onset.baseline_len);
  w.put<std::uint8_t>(model.prefix.detect ? 1 : 0);
  w.put<std::uint8_t>(model.fallback == cascade::FallbackPolicy::kForced ? 0 : 1);
  w.put<std::uint64_t>(model.n_excluded);
  for (const auto& stage : model.stages) {
    const std::size_t dim = stage.stats.dim();
    w.put<std::uint64_t>(dim);
    w.put_all<double>(stage.stats.mean);
    w.put_all<double>(stage.stats.std);
    w.put<double>(stage.pair.df);
    RowTable table;
    collect_rows(stage.pair.first, table);
    collect_rows(stage.pair.second, table);
    w.put<std::uint64_t>(table.rows.size());
    for (const auto& row : table.rows) w.put_all<double>(row);
    write_member(w, stage.pair.first, table);
    write_member(w, stage.pair.second, table);
  }
  if (!out) throw IoError("failed writing model bundle");
}

cascade::ForefrontModel read_model(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a forefront model bundle");
  }
  Reader r(in);
  const auto version = r.get<std::uint32_t>();
  if (version != kFormatVersion) {
    throw FormatError("unsupported model bundle version " + std::to_string(version));
  }
  cascade::ForefrontModel model;
  const auto nc = r.get<std::uint32_t>();
  for (std::uint32_t c = 0; c < nc; ++c) model.class_names.push_back(r.get_string());
  model.n_channels = r.get<std::uint64_t>();
  model.plan.effective_rate_hz = r.get<double>();
  model.plan.stage_times_s = r.get_vec<double>(r.get<std::uint64_t>());
  model.prefix.onset.window = r.get<std::uint64_t>();
  model.prefix.onset.factor = r.get<double>();
  model.prefix.onset.baseline_len = r.get<std::uint64_t>();
  model.prefix.detect = r.get<std::uint8_t>() != 0;
  model.fallback = r.get<std::uint8_t>() == 0 ? cascade::FallbackPolicy::kForced
                                              : cascade::FallbackPolicy::kReject;
  model.n_excluded = r.get<std::uint64_t>();
  model.plan.validate();
  for (std::size_t s = 0; s < model.plan.size(); ++s) {
    cascade::ForefrontStage stage;
    const auto dim = r.get<std::uint64_t>();
    stage.stats.mean = r.get_vec<double>(dim);
    stage.stats.std = r.get_vec<double>(dim);
    stage.pair.df = r.get<double>();
    stage.pair.stage = s;
    const auto n_rows = r.get<std::uint64_t>();
    auto rows = std::make_shared<Matrix>(0, dim);
    const std::vector<double> flat = r.get_vec<double>(n_rows * dim);
    for (std::uint64_t i = 0; i < n_rows; ++i) {
      rows->append_row(std::span<const double>(flat).subspan(i * dim, dim));
    }
    const std::shared_ptr<const Matrix> shared = rows;
    stage.pair.first = read_member(r, shared);
    stage.pair.second = read_member(r, shared);
    model.stages.push_back(std::move(stage));
  }
  return model;
}

void save_model(const cascade::ForefrontModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path.string());
  write_model(out, model);
}

cascade::ForefrontModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  return read_model(in);
}

}  // namespace forefront::model_io
