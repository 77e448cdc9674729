#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <istream>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "vsl/errors.hpp"
#include "vsl/png.hpp"
#include "vsl/rng.hpp"
#include "vsl/stimulus.hpp"
#include "vsl/text_io.hpp"

namespace vsl {

enum class Split { Train, Test };

inline std::string_view to_string(Split s) noexcept { return s == Split::Train ? "train" : "test"; }

/// One line of the JSON Lines manifest.
struct ManifestRow {
  std::string trial_id;
  Split split = Split::Train;
  TaskKind task = TaskKind::Luminance;
  int difficulty = 1;
  int set_size = 1;
  bool target_present = false;
  std::string image_path;
  std::uint64_t seed = 0;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

using Manifest = std::vector<ManifestRow>;

// Per-dataset protocol: 9600 trials, 1200 per (set size, presence) cell,
// 400 of each cell held out for testing.
inline constexpr int kTrialsPerCell = 1200;
inline constexpr int kTestPerCell = 400;
inline constexpr int kTrialsPerDataset =
    kTrialsPerCell * 2 * static_cast<int>(kSetSizes.size());

inline std::string make_trial_id(TaskKind task, int difficulty, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05d", index);
  return std::string(to_string(task)) + "_d" + std::to_string(difficulty) + "_" + buf;
}

inline std::string manifest_line(const ManifestRow& r) {
  nlohmann::ordered_json j;
  j["trial_id"] = r.trial_id;
  j["split"] = to_string(r.split);
  j["task"] = to_string(r.task);
  j["difficulty"] = r.difficulty;
  j["set_size"] = r.set_size;
  j["target_present"] = r.target_present;
  j["image_path"] = r.image_path;
  j["seed"] = r.seed;
  return j.dump();
}

inline void write_manifest(std::ostream& out, const Manifest& rows) {
  for (const auto& r : rows) out << manifest_line(r) << '\n';
}

inline void write_manifest(const std::filesystem::path& path, const Manifest& rows) {
  auto out = text::open_out(path);
  write_manifest(out, rows);
  if (!out) throw IoError("write failed", path.string());
}

/// Parses a JSON Lines manifest. Errors carry `source:line` (1-based).
inline Manifest read_manifest(std::istream& in, const std::string& source = "manifest") {
  Manifest rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string ctx = text::where(source, lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(ctx + ": invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw ValidationError(ctx + ": expected a JSON object");
    auto field = [&](const char* key) -> const nlohmann::json& {
      auto it = j.find(key);
      if (it == j.end()) throw ValidationError(ctx + ": missing field '" + key + "'");
      return *it;
    };
    try {
      ManifestRow r;
      r.trial_id = field("trial_id").get<std::string>();
      const auto split = field("split").get<std::string>();
      if (split == "train") r.split = Split::Train;
      else if (split == "test") r.split = Split::Test;
      else throw ValidationError(ctx + ": split must be train|test, got '" + split + "'");
      r.task = parse_task(field("task").get<std::string>());
      r.difficulty = field("difficulty").get<int>();
      r.set_size = field("set_size").get<int>();
      r.target_present = field("target_present").get<bool>();
      r.image_path = field("image_path").get<std::string>();
      r.seed = field("seed").get<std::uint64_t>();
      if (r.set_size < 1) throw ValidationError(ctx + ": set_size must be >= 1");
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(ctx + ": bad field type (" + e.what() + ")");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      if (msg.rfind(source, 0) == 0) throw;
      throw ValidationError(ctx + ": " + msg);
    }
  }
  return rows;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  auto in = text::open_in(path);
  return read_manifest(in, path.string());
}

/// Trial layout of a dataset without touching the filesystem: set size,
/// presence, split and per-trial seed for all 9600 trials.
inline Manifest plan_dataset(TaskKind task, int difficulty, std::uint64_t seed) {
  (void)feature_level(task, difficulty);
  Manifest rows;
  rows.reserve(kTrialsPerDataset);
  const std::uint64_t split_seed = derive_seed(seed, ~std::uint64_t{0});
  int index = 0;
  int cell = 0;
  for (int n : kSetSizes) {
    for (bool present : {true, false}) {
      // Choose the held-out trials of this cell by a seeded partial shuffle.
      std::vector<int> order(kTrialsPerCell);
      for (int k = 0; k < kTrialsPerCell; ++k) order[static_cast<std::size_t>(k)] = k;
      Xoshiro256 rng(derive_seed(split_seed, static_cast<std::uint64_t>(cell++)));
      for (int k = 0; k < kTestPerCell; ++k) {
        const auto pick = rng.uniform_int(k, kTrialsPerCell - 1);
        std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick)]);
      }
      std::vector<bool> is_test(kTrialsPerCell, false);
      for (int k = 0; k < kTestPerCell; ++k) is_test[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = true;

      for (int k = 0; k < kTrialsPerCell; ++k, ++index) {
        ManifestRow r;
        r.trial_id = make_trial_id(task, difficulty, index);
        r.split = is_test[static_cast<std::size_t>(k)] ? Split::Test : Split::Train;
        r.task = task;
        r.difficulty = difficulty;
        r.set_size = n;
        r.target_present = present;
        r.image_path = r.trial_id + ".png";
        r.seed = derive_seed(seed, static_cast<std::uint64_t>(index));
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

struct DatasetOptions {
  bool write_images = true;
  unsigned jobs = 1;  // worker threads for rendering; output is independent of this
};

/// Per-level manifest file name written by generate_dataset.
inline std::string dataset_manifest_name(TaskKind task, int difficulty) {
  return std::string(to_string(task)) + "_d" + std::to_string(difficulty) + ".jsonl";
}

/// Plans, renders and writes one (task, difficulty) dataset into `out_dir`,
/// plus its manifest `<task>_d<k>.jsonl`.
inline Manifest generate_dataset(TaskKind task, int difficulty, std::uint64_t seed,
                                 const std::filesystem::path& out_dir,
                                 const DatasetOptions& opts = {}) {
  Manifest rows = plan_dataset(task, difficulty, seed);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory (" + ec.message() + ")", out_dir.string());

  if (opts.write_images) {
    const unsigned jobs = std::max(1u, opts.jobs);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&](std::size_t begin, std::size_t step) {
      try {
        for (std::size_t i = begin; i < rows.size(); i += step) {
          const ManifestRow& r = rows[i];
          const DisplaySpec spec = plan_display(r.task, r.difficulty, r.set_size, r.target_present, r.seed);
          png::write_file(out_dir / r.image_path, render_display(spec));
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    };
    if (jobs == 1) {
      work(0, 1);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w, jobs);
    }
    if (failure) std::rethrow_exception(failure);
  }
  write_manifest(out_dir / dataset_manifest_name(task, difficulty), rows);
  return rows;
}

}  // namespace vsl
