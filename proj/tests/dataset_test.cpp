#include "vsl/dataset.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "test_util.hpp"

namespace {

using namespace vsl;

TEST(PlanDataset, ProtocolCounts) {
  const Manifest m = plan_dataset(TaskKind::RotatedT, 1, 42);
  ASSERT_EQ(m.size(), 9600u);
  std::map<std::tuple<Split, int, bool>, int> cells;
  int test = 0, present = 0;
  for (const auto& r : m) {
    ++cells[{r.split, r.set_size, r.target_present}];
    test += r.split == Split::Test;
    present += r.target_present;
  }
  EXPECT_EQ(test, 3200);
  EXPECT_EQ(present, 4800);
  for (int n : kSetSizes)
    for (bool p : {true, false}) {
      EXPECT_EQ((cells[{Split::Test, n, p}]), 400) << n;
      EXPECT_EQ((cells[{Split::Train, n, p}]), 800) << n;
    }
}

TEST(PlanDataset, TestSplitOfLargestSetSize) {
  const Manifest m = plan_dataset(TaskKind::Luminance, 2, 5);
  int rows = 0, with_target = 0;
  for (const auto& r : m)
    if (r.split == Split::Test && r.set_size == 8) {
      ++rows;
      with_target += r.target_present;
    }
  EXPECT_EQ(rows, 800);
  EXPECT_EQ(with_target, 400);
}

TEST(PlanDataset, DeterministicAndSeedSensitive) {
  EXPECT_EQ(plan_dataset(TaskKind::Color, 3, 11), plan_dataset(TaskKind::Color, 3, 11));
  const Manifest a = plan_dataset(TaskKind::Color, 3, 11), b = plan_dataset(TaskKind::Color, 3, 12);
  int split_diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) split_diff += a[i].split != b[i].split;
  EXPECT_GT(split_diff, 0);
}

TEST(PlanDataset, UniqueIdsAndSeeds) {
  const Manifest m = plan_dataset(TaskKind::Length, 1, 3);
  std::set<std::string> ids;
  std::set<std::uint64_t> seeds;
  for (const auto& r : m) {
    ids.insert(r.trial_id);
    seeds.insert(r.seed);
    EXPECT_EQ(r.image_path, r.trial_id + ".png");
  }
  EXPECT_EQ(ids.size(), m.size());
  EXPECT_EQ(seeds.size(), m.size());
  EXPECT_EQ(m.front().trial_id, "length_d1_00000");
}

TEST(Manifest, WriteReadIdentity) {
  Manifest m = plan_dataset(TaskKind::Orientation, 2, 77);
  m.resize(500);
  m[3].seed = std::numeric_limits<std::uint64_t>::max();
  std::stringstream s;
  write_manifest(s, m);
  EXPECT_EQ(read_manifest(s), m);
}

TEST(Manifest, FieldOrderIsFixed) {
  ManifestRow r{"t_1", Split::Test, TaskKind::RotatedT, 2, 4, true, "t_1.png", 9};
  EXPECT_EQ(manifest_line(r),
            R"({"trial_id":"t_1","split":"test","task":"rotated_t","difficulty":2,"set_size":4,)"
            R"("target_present":true,"image_path":"t_1.png","seed":9})");
}

TEST(Manifest, ErrorsNameTheLine) {
  const ManifestRow r{"t_1", Split::Test, TaskKind::Color, 1, 2, false, "t_1.png", 1};
  auto expect_line = [](const std::string& text, const std::string& needle) {
    std::stringstream s(text);
    try {
      read_manifest(s, "m.jsonl");
      FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  const std::string good = manifest_line(r) + "\n";
  expect_line(good + R"({"trial_id":"x","split":"test"})" + "\n", "m.jsonl:2: missing field 'task'");
  expect_line(good + good + "{not json\n", "m.jsonl:3");
  expect_line(R"({"trial_id":"x","split":"dev","task":"color","difficulty":1,"set_size":2,"target_present":true,"image_path":"x.png","seed":1})",
              "m.jsonl:1: split");
  expect_line(R"({"trial_id":"x","split":"test","task":"shape","difficulty":1,"set_size":2,"target_present":true,"image_path":"x.png","seed":1})",
              "m.jsonl:1: unknown task");
  expect_line(R"({"trial_id":"x","split":"test","task":"color","difficulty":"hard","set_size":2,"target_present":true,"image_path":"x.png","seed":1})",
              "m.jsonl:1: bad field type");
}

TEST(GenerateDataset, WritesImagesAndManifest) {
  test_support::TempDir dir("gen");
  const Manifest m = generate_dataset(TaskKind::Luminance, 3, 9, dir.path());
  EXPECT_EQ(m.size(), 9600u);
  EXPECT_EQ(read_manifest(dir.path() / dataset_manifest_name(TaskKind::Luminance, 3)), m);
  std::size_t pngs = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) pngs += e.path().extension() == ".png";
  EXPECT_EQ(pngs, 9600u);
  // Spot-check that files decode to the planned display.
  for (std::size_t i : {0u, 4321u, 9599u}) {
    const auto& r = m[i];
    EXPECT_EQ(png::read_file(dir.path() / r.image_path),
              render_display(plan_display(r.task, r.difficulty, r.set_size, r.target_present, r.seed)));
  }
}

TEST(GenerateDataset, ThreadCountDoesNotChangeBytes) {
  test_support::TempDir a("gen_a"), b("gen_b");
  DatasetOptions one{true, 1}, four{true, 4};
  const auto ma = generate_dataset(TaskKind::RotatedT, 2, 5, a.path(), one);
  const auto mb = generate_dataset(TaskKind::RotatedT, 2, 5, b.path(), four);
  EXPECT_EQ(ma, mb);
  for (std::size_t i = 0; i < ma.size(); i += 97)
    ASSERT_EQ(test_support::slurp(a.path() / ma[i].image_path), test_support::slurp(b.path() / mb[i].image_path));
}

TEST(GenerateDataset, UnwritableDirectoryNamesPath) {
  test_support::TempDir dir("ro");
  const auto blocker = dir.path() / "file";
  std::ofstream(blocker) << "x";
  try {
    generate_dataset(TaskKind::Color, 1, 1, blocker / "sub", {false, 1});
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find((blocker / "sub").string()), std::string::npos);
  }
}

}  // namespace
