#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "forefront/datagen.hpp"
#include "forefront/error.hpp"
#include "test_data.hpp"

namespace forefront::datagen {
namespace {

namespace fs = std::filesystem;

GenConfig tiny() {
  GenConfig g;
  g.n_classes = 3;
  g.n_channels = 2;
  g.n_locations = 2;
  g.duration_s = 8.0;
  g.rate_hz = 100.0;
  return g;
}

TEST(GenConfig, Validation) {
  GenConfig g;
  EXPECT_NO_THROW(g.validate());
  g.n_classes = 1;
  EXPECT_THROW(g.validate(), InvalidArgument);
  g = GenConfig{};
  g.n_channels = 0;
  EXPECT_THROW(g.validate(), InvalidArgument);
  g = GenConfig{};
  g.duration_s = 5.9;
  g.rate_hz = 100;
  EXPECT_THROW(g.validate(), InvalidArgument);
  g = GenConfig{};
  g.noise_ar = 1.0;
  EXPECT_THROW(g.validate(), InvalidArgument);
  g = GenConfig{};
  g.response_jitter = -1;
  EXPECT_THROW(g.validate(), InvalidArgument);
  EXPECT_THROW(generate_dataset(g), InvalidArgument);
}

TEST(Generate, DeterministicForSeed) {
  const Dataset a = generate_dataset(tiny());
  const Dataset b = generate_dataset(tiny());
  ASSERT_EQ(a.items.size(), b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    EXPECT_EQ(a.items[i].channels, b.items[i].channels);
    EXPECT_EQ(a.items[i].label, b.items[i].label);
  }
  GenConfig other = tiny();
  other.seed = 8;
  EXPECT_NE(generate_dataset(other).items[0].channels, a.items[0].channels);
}

TEST(Generate, DefaultCounts) {
  GenConfig g;
  g.duration_s = 6.0;  // shape only
  const Dataset d = generate_dataset(g);
  EXPECT_EQ(d.items.size(), 450u);
  EXPECT_EQ(d.class_names.size(), 10u);
  std::map<int, int> per_class;
  for (const auto& it : d.items) {
    ++per_class[*it.label];
    EXPECT_EQ(it.n_channels(), 8u);
    EXPECT_EQ(it.length(), 600u);
    ASSERT_TRUE(it.location.has_value());
    EXPECT_GE(*it.location, 0);
    EXPECT_LT(*it.location, 45);
  }
  for (const auto& [c, n] : per_class) EXPECT_EQ(n, 45) << c;
  EXPECT_NO_THROW(d.validate());
}

TEST(Generate, DownsampledMatchesFullPath) {
  const Dataset d = generate_dataset(tiny());
  const auto a = downsample_all(d, 10);
  const auto b = generate_downsampled(tiny(), 10);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].channels, b[i].channels);
}

TEST(Generate, LocationScaleDecreases) {
  EXPECT_DOUBLE_EQ(location_scale(0, 45), 1.0);
  for (int l = 1; l < 45; ++l) EXPECT_LT(location_scale(l, 45), location_scale(l - 1, 45));
  EXPECT_GT(location_scale(44, 45), 0.0);
  EXPECT_DOUBLE_EQ(location_scale(0, 1), 1.0);
}

TEST(Generate, NoiselessClassesSeparableByNearestCentroid) {
  GenConfig g = tiny();
  g.n_classes = 2;
  g.n_locations = 1;
  g.series_per_class_location = 1;
  g.duration_s = 60;
  g.noise_amplitude = 0.0;
  g.response_jitter = 0.0;
  const Dataset d = generate_dataset(g);
  // Full-length features, baseline removed via the first sample.
  auto feat = [](const signal::RawSeries& s) {
    std::vector<double> f;
    for (const auto& ch : s.channels)
      for (double v : ch) f.push_back(v - ch.front());
    return f;
  };
  const auto f0 = feat(d.items[0]);
  const auto f1 = feat(d.items[1]);
  // Centroids are the single items; each item is nearest its own centroid.
  double d01 = 0;
  for (std::size_t i = 0; i < f0.size(); ++i) d01 += (f0[i] - f1[i]) * (f0[i] - f1[i]);
  EXPECT_GT(d01, 0.0);
}

TEST(Generate, NoiselessFullLengthFeaturesPairwiseDistinct) {
  GenConfig g = tiny();
  g.n_classes = 5;
  g.n_locations = 1;
  g.duration_s = 60;
  g.noise_amplitude = 0.0;
  g.response_jitter = 0.0;
  const Dataset d = generate_dataset(g);
  for (std::size_t i = 0; i < d.items.size(); ++i) {
    for (std::size_t j = i + 1; j < d.items.size(); ++j) {
      bool differ = false;
      for (std::size_t c = 0; c < d.items[i].n_channels() && !differ; ++c) {
        const auto& a = d.items[i].channels[c];
        const auto& b = d.items[j].channels[c];
        for (std::size_t t = 0; t < a.size() && !differ; ++t) differ = (a[t] - a[0]) != (b[t] - b[0]);
      }
      EXPECT_TRUE(differ) << i << " vs " << j;
    }
  }
}

TEST(CsvDataset, RoundTrip) {
  const fs::path dir = testing::temp_dir("datagen_rt");
  const Dataset d = generate_dataset(tiny());
  const fs::path manifest = write_csv_dataset(d, dir);
  const Dataset back = load_csv_dataset(manifest);
  ASSERT_EQ(back.items.size(), d.items.size());
  EXPECT_EQ(back.class_names, d.class_names);
  for (std::size_t i = 0; i < d.items.size(); ++i) {
    EXPECT_EQ(back.items[i].label, d.items[i].label);
    EXPECT_EQ(back.items[i].location, d.items[i].location);
    ASSERT_EQ(back.items[i].n_channels(), d.items[i].n_channels());
    ASSERT_EQ(back.items[i].length(), d.items[i].length());
    EXPECT_DOUBLE_EQ(back.items[i].sample_rate_hz, 100.0);
    for (std::size_t c = 0; c < d.items[i].n_channels(); ++c)
      for (std::size_t t = 0; t < d.items[i].length(); ++t)
        EXPECT_NEAR(back.items[i].channels[c][t], d.items[i].channels[c][t], 1e-6);
  }
}

TEST(CsvDataset, StreamingWriterMatchesInMemoryWriter) {
  const fs::path a = testing::temp_dir("datagen_a");
  const fs::path b = testing::temp_dir("datagen_b");
  write_csv_dataset(generate_dataset(tiny()), a);
  write_generated_dataset(tiny(), b);
  for (const auto& e : fs::directory_iterator(a)) {
    std::ifstream fa(e.path()), fb(b / e.path().filename());
    const std::string sa((std::istreambuf_iterator<char>(fa)), {});
    const std::string sb((std::istreambuf_iterator<char>(fb)), {});
    EXPECT_EQ(sa, sb) << e.path().filename();
  }
}

TEST(CsvDataset, ManifestListsTenClasses) {
  GenConfig g = tiny();
  g.n_classes = 10;
  g.n_locations = 1;
  const fs::path dir = testing::temp_dir("datagen_ten");
  const fs::path manifest = write_csv_dataset(generate_dataset(g), dir);
  std::ifstream in(manifest);
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.rfind("# classes=", 0) == 0) {
      found = true;
      EXPECT_EQ(std::count(line.begin(), line.end(), ';'), 9);
    }
  }
  EXPECT_TRUE(found);
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p);
  f << s;
}

const char* kHeader = "# forefront-manifest v1\n# channels=2\n# rate_hz=100\n# classes=a;b\nrelative_path,label,location\n";

TEST(CsvDataset, ThreeFiles) {
  const fs::path dir = testing::temp_dir("datagen_three");
  std::string m = kHeader;
  for (int i = 0; i < 3; ++i) {
    const std::string name = "s" + std::to_string(i) + ".csv";
    write_text(dir / name, "t,ch0,ch1\n0,1,2\n0.01,1,2\n");
    m += name + "," + (i % 2 ? "b" : "a") + "," + std::to_string(i) + "\n";
  }
  write_text(dir / "manifest.csv", m);
  const Dataset d = load_csv_dataset(dir / "manifest.csv");
  EXPECT_EQ(d.items.size(), 3u);
  EXPECT_EQ(*d.items[1].label, 1);
}

TEST(CsvDataset, Errors) {
  const fs::path dir = testing::temp_dir("datagen_err");
  EXPECT_THROW(load_csv_dataset(dir / "nope.csv"), IoError);

  write_text(dir / "empty.csv", kHeader);
  EXPECT_THROW(load_csv_dataset(dir / "empty.csv"), EmptyDatasetError);

  write_text(dir / "wide.csv", "t,ch0,ch1,ch2\n0,1,2,3\n");
  write_text(dir / "m_wide.csv", std::string(kHeader) + "wide.csv,a,0\n");
  try {
    load_csv_dataset(dir / "m_wide.csv");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("row"), std::string::npos) << e.what();
  }

  write_text(dir / "ok.csv", "t,ch0,ch1\n0,1,2\n");
  write_text(dir / "m_label.csv", std::string(kHeader) + "ok.csv,zzz,0\n");
  EXPECT_THROW(load_csv_dataset(dir / "m_label.csv"), FormatError);

  write_text(dir / "m_missing.csv", std::string(kHeader) + "gone.csv,a,0\n");
  try {
    load_csv_dataset(dir / "m_missing.csv");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("gone.csv"), std::string::npos);
  }

  EXPECT_THROW(write_csv_dataset(Dataset{}, dir / "out"), EmptyDatasetError);
  write_text(dir / "blocker", "x");
  EXPECT_THROW(write_csv_dataset(generate_dataset(tiny()), dir / "blocker" / "sub"), IoError);
}

}  // namespace
}  // namespace forefront::datagen
