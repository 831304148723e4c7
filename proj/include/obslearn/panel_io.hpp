#pragma once

// Panel CSV reader and writer.
//
// Layout: comment lines starting with '#', the first of which must carry
// "schema=<n>", then the fixed header row, then one row per record. Optional
// fields are written empty.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "obslearn/codes.hpp"
#include "obslearn/error.hpp"
#include "obslearn/record.hpp"
#include "obslearn/version.hpp"

namespace obslearn {

inline const std::vector<std::string> kPanelColumns = {
    "session_id",      "subject_id",         "treatment",
    "condition",       "condition_order",    "round",
    "white_in_x",      "black_in_y",         "true_state",
    "ball",            "ball_shown",         "neighbor_id",
    "neighbor_guess",  "choice",             "reported_posterior_pct",
    "gender",          "education_years",    "age",
    "prob_stat",       "neighbor_gender",    "neighbor_education_years",
    "neighbor_age",    "neighbor_prob_stat"};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline void check_field_text(const std::string& s) {
  if (s.find_first_of(",\"\n\r") != std::string::npos) {
    throw DataError("field contains a comma, quote or newline: " + s);
  }
}

}  // namespace detail

/// Comment header shared by every CSV the toolkit writes.
inline std::string csv_comment_header(const std::string& kind, std::optional<std::uint64_t> seed) {
  std::ostringstream os;
  os << "# obslearn " << kVersion << " " << kind << " schema=" << kPanelSchemaVersion
     << " master_seed=" << (seed ? std::to_string(*seed) : std::string("NA")) << "\n";
  return os.str();
}

inline void write_panel(const Panel& panel, std::ostream& os) {
  os << csv_comment_header("panel", panel.master_seed);
  for (std::size_t i = 0; i < kPanelColumns.size(); ++i) os << (i ? "," : "") << kPanelColumns[i];
  os << "\n";
  auto cov_fields = [&](const Covariates& c) {
    os << (c.female ? "F" : "M") << "," << c.education_years << "," << c.age << ","
       << (c.prob_stat ? 1 : 0);
  };
  for (const auto& r : panel.records) {
    detail::check_field_text(r.session_id);
    detail::check_field_text(r.subject_id);
    if (r.neighbor_id) detail::check_field_text(*r.neighbor_id);
    os << r.session_id << "," << r.subject_id << "," << to_code(r.treatment) << ","
       << to_code(r.condition) << "," << to_code(r.condition_order) << "," << r.round << ","
       << r.structure.white_in_x << "," << r.structure.black_in_y << "," << to_code(r.true_state)
       << "," << (r.ball ? to_code(*r.ball) : "") << "," << (r.ball_shown ? 1 : 0) << ","
       << r.neighbor_id.value_or("") << ","
       << (r.neighbor_guess ? to_code(*r.neighbor_guess) : "") << "," << to_code(r.choice) << ","
       << r.reported_posterior_pct << ",";
    cov_fields(r.subject);
    os << ",";
    if (r.neighbor) {
      cov_fields(*r.neighbor);
    } else {
      os << ",,,";
    }
    os << "\n";
  }
}

inline void write_panel(const Panel& panel, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  write_panel(panel, os);
  if (!os) throw DataError("write failed: " + path);
}

inline Panel read_panel(std::istream& is, const std::string& source = "<panel>") {
  Panel panel;
  std::string line;
  long line_no = 0;
  bool schema_seen = false;
  std::vector<std::size_t> column_of;  // kPanelColumns index -> file column
  std::size_t n_file_columns = 0;

  auto fail = [&](const std::string& why) -> void {
    throw DataError(source + ":" + std::to_string(line_no) + ": " + why);
  };

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!schema_seen) {
        const auto pos = line.find("schema=");
        if (pos == std::string::npos) fail("first comment line lacks a schema version");
        const int version = std::atoi(line.c_str() + pos + 7);
        if (version != kPanelSchemaVersion) {
          fail("schema version " + std::to_string(version) + " is not supported (expected " +
               std::to_string(kPanelSchemaVersion) + ")");
        }
        schema_seen = true;
      }
      const auto seed_pos = line.find("master_seed=");
      if (seed_pos != std::string::npos && line.compare(seed_pos + 12, 2, "NA") != 0) {
        panel.master_seed = std::stoull(line.substr(seed_pos + 12));
      }
      continue;
    }
    if (!schema_seen) fail("missing schema version comment before the header");

    const auto fields = detail::split_csv_line(line);
    if (column_of.empty()) {
      std::map<std::string, std::size_t> pos;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (!pos.emplace(fields[i], i).second) fail("duplicate column " + fields[i]);
      }
      for (const auto& name : fields) {
        if (std::find(kPanelColumns.begin(), kPanelColumns.end(), name) == kPanelColumns.end()) {
          fail("unknown column " + name);
        }
      }
      for (const auto& name : kPanelColumns) {
        auto it = pos.find(name);
        if (it == pos.end()) fail("missing required column " + name);
        column_of.push_back(it->second);
      }
      n_file_columns = fields.size();
      continue;
    }
    if (fields.size() != n_file_columns) {
      fail("expected " + std::to_string(n_file_columns) + " fields, found " +
           std::to_string(fields.size()));
    }

    auto field = [&](std::size_t col) -> const std::string& { return fields[column_of[col]]; };
    auto bad = [&](std::size_t col) {
      fail("bad value '" + field(col) + "' in column " + kPanelColumns[col]);
    };
    auto integer = [&](std::size_t col) {
      const std::string& s = field(col);
      int v = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) bad(col);
      return v;
    };
    auto required = [&](auto parsed, std::size_t col) {
      if (!parsed) bad(col);
      return *parsed;
    };
    auto flag = [&](std::size_t col) {
      if (field(col) == "1") return true;
      if (field(col) != "0") bad(col);
      return false;
    };
    auto gender = [&](std::size_t col) {
      if (field(col) == "F") return true;
      if (field(col) != "M") bad(col);
      return false;
    };

    TrialRecord r;
    r.session_id = field(0);
    r.subject_id = field(1);
    r.treatment = required(parse_treatment(field(2)), 2);
    r.condition = required(parse_condition(field(3)), 3);
    r.condition_order = required(parse_condition_order(field(4)), 4);
    r.round = integer(5);
    r.structure = {integer(6), integer(7)};
    r.true_state = required(parse_state(field(8)), 8);
    if (!field(9).empty()) r.ball = required(parse_signal(field(9)), 9);
    r.ball_shown = flag(10);
    if (!field(11).empty()) r.neighbor_id = field(11);
    if (!field(12).empty()) r.neighbor_guess = required(parse_state(field(12)), 12);
    r.choice = required(parse_state(field(13)), 13);
    r.reported_posterior_pct = integer(14);
    r.subject = {gender(15), integer(16), integer(17), flag(18)};
    const bool any_neighbor = !field(19).empty() || !field(20).empty() || !field(21).empty() ||
                              !field(22).empty();
    if (any_neighbor) r.neighbor = Covariates{gender(19), integer(20), integer(21), flag(22)};
    if (r.session_id.empty() || r.subject_id.empty()) fail("empty session or subject id");
    try {
      validate_record(r);
    } catch (const DataError& e) {
      fail(e.what());
    }
    panel.records.push_back(std::move(r));
  }
  if (!schema_seen) throw DataError(source + ": missing schema version comment");
  if (column_of.empty()) throw DataError(source + ": missing header row");
  return panel;
}

inline Panel read_panel(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  return read_panel(is, path);
}

}  // namespace obslearn
