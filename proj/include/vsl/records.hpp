#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vsl/errors.hpp"
#include "vsl/stimulus.hpp"
#include "vsl/text_io.hpp"

namespace vsl {

/// Counts for one (task, difficulty, set size) cell of an experiment.
struct CellStats {
  TaskKind task = TaskKind::Luminance;
  int difficulty = 1;
  int set_size = 1;
  long n_present = 0;
  long n_absent = 0;
  long hits = 0;
  long false_alarms = 0;
  double pc = 0.0;

  long trials() const noexcept { return n_present + n_absent; }
  long correct() const noexcept { return hits + (n_absent - false_alarms); }
  friend bool operator==(const CellStats&, const CellStats&) = default;
};

/// Recomputes pc from the counts; n_present + n_absent must be positive.
inline double proportion_correct(long hits, long false_alarms, long n_present, long n_absent) {
  return static_cast<double>(hits + (n_absent - false_alarms)) /
         static_cast<double>(n_present + n_absent);
}

inline CellStats make_cell(TaskKind task, int difficulty, int set_size, long n_present, long n_absent,
                           long hits, long false_alarms) {
  if (hits < 0 || false_alarms < 0 || hits > n_present || false_alarms > n_absent ||
      n_present + n_absent <= 0)
    throw ValidationError("inconsistent cell counts");
  return {task, difficulty, set_size, n_present, n_absent, hits, false_alarms,
          proportion_correct(hits, false_alarms, n_present, n_absent)};
}

enum class Response { Present, Absent };

inline std::string_view to_string(Response r) noexcept {
  return r == Response::Present ? "present" : "absent";
}

/// One observer answer, keyed by manifest trial id.
struct ResponseRecord {
  std::string trial_id;
  Response response = Response::Absent;
  std::optional<double> score;  // carried through, never used for fitting

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

using ResponseFile = std::vector<ResponseRecord>;

inline constexpr std::string_view kResponseHeader = "trial_id,response";

inline void write_responses(std::ostream& out, const ResponseFile& rows) {
  const bool with_score = !rows.empty() && rows.front().score.has_value();
  out << kResponseHeader << (with_score ? ",score" : "") << '\n';
  for (const auto& r : rows) {
    out << r.trial_id << ',' << to_string(r.response);
    if (with_score) out << ',' << text::format_double(r.score.value_or(0.0));
    out << '\n';
  }
}

inline void write_responses(const std::filesystem::path& path, const ResponseFile& rows) {
  auto out = text::open_out(path);
  write_responses(out, rows);
  if (!out) throw IoError("write failed", path.string());
}

/// Reads `trial_id,response[,score]`. Line numbers in errors are 1-based and
/// count the header.
inline ResponseFile read_responses(std::istream& in, const std::string& source = "responses") {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(source + ": empty response file");
  const auto header = text::split_csv(text::strip_cr(line));
  if (header.size() < 2 || header[0] != "trial_id" || header[1] != "response" ||
      (header.size() == 3 && header[2] != "score") || header.size() > 3)
    throw ValidationError(text::where(source, 1) + ": header must be 'trial_id,response[,score]'");
  const bool with_score = header.size() == 3;

  ResponseFile rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(line);
    if (line.empty()) continue;
    const std::string ctx = text::where(source, lineno);
    const auto f = text::split_csv(line);
    if (f.size() != header.size())
      throw ValidationError(ctx + ": expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(f.size()));
    if (f[0].empty()) throw ValidationError(ctx + ": empty trial_id");
    ResponseRecord r;
    r.trial_id = f[0];
    if (f[1] == "present") r.response = Response::Present;
    else if (f[1] == "absent") r.response = Response::Absent;
    else throw ValidationError(ctx + ": response must be present|absent, got '" + f[1] + "'");
    if (with_score) r.score = text::parse_double(f[2], ctx);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline ResponseFile read_responses(const std::filesystem::path& path) {
  auto in = text::open_in(path);
  return read_responses(in, path.string());
}

}  // namespace vsl
