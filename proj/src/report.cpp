#include "racegp/report.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <sstream>

#include "racegp/csv.hpp"
#include "racegp/errors.hpp"

namespace racegp {

namespace {

constexpr const char* kColumns =
    "track,scenario,size,combo,subset,test,seed,status,train_time_s,n_train,n_test,"
    "rmse_omega,rmse_beta,r2_omega,r2_beta,r2_mean,ev_omega,ev_beta,std_ratio,high_uncertainty,"
    "message";
constexpr std::size_t kColumnCount = 21;

std::string header_lines(const Provenance& prov) {
  return "# racegp " + prov.tool_version + "\n# seed=" + std::to_string(prov.seed) +
         " config_hash=" + prov.config_hash + "\n";
}

// JSON has no NaN; degenerate metrics become null
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string file_stem(const ExperimentConfig& c) {
  std::string s = c.id();
  for (char& ch : s) {
    if (ch == '/' || ch == ':') ch = '_';
    if (ch == '+') ch = 'p';
    if (ch == '*') ch = 'x';
  }
  return s;
}

}  // namespace

std::string records_to_csv(const std::vector<ExperimentRecord>& records, const Provenance& prov) {
  std::ostringstream out;
  out << header_lines(prov) << kColumns << '\n';
  for (const auto& r : records) {
    const auto& c = r.config;
    out << c.track << ',' << c.scenario.flag() << ',' << to_string(c.size) << ',' << c.combo << ','
        << c.subset << ',' << c.test << ',' << c.seed << ',' << to_string(r.status) << ','
        << format_double(r.train_time_s) << ',' << r.n_train << ',' << r.n_test << ','
        << format_double(r.rmse_omega) << ',' << format_double(r.rmse_beta) << ','
        << format_double(r.r2_omega) << ',' << format_double(r.r2_beta) << ','
        << format_double(r.r2_mean) << ',' << format_double(r.ev_omega) << ','
        << format_double(r.ev_beta) << ',' << format_double(r.std_ratio) << ','
        << (r.high_uncertainty ? 1 : 0) << ',' << r.message << '\n';
  }
  return out.str();
}

std::vector<ExperimentRecord> records_from_csv(const std::string& text) {
  std::vector<ExperimentRecord> out;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (const auto raw : split_lines(text)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kColumns) throw ParseError("records", line_no, "unexpected header");
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != kColumnCount) {
      throw ParseError("records", line_no,
                       "expected " + std::to_string(kColumnCount) + " fields, got " +
                           std::to_string(f.size()));
    }
    try {
      ExperimentRecord r;
      auto& c = r.config;
      c.track = std::string(f[0]);
      c.scenario = Scenario::parse(f[1]);
      c.size = size_fraction_from_string(f[2]);
      c.combo = std::string(f[3]);
      c.subset = std::string(f[4]);
      c.test = std::string(f[5]);
      c.seed = std::stoull(std::string(f[6]));
      r.status = cell_status_from_string(f[7]);
      r.train_time_s = parse_double(f[8]);
      r.n_train = std::stoull(std::string(f[9]));
      r.n_test = std::stoull(std::string(f[10]));
      r.rmse_omega = parse_double(f[11]);
      r.rmse_beta = parse_double(f[12]);
      r.r2_omega = parse_double(f[13]);
      r.r2_beta = parse_double(f[14]);
      r.r2_mean = parse_double(f[15]);
      r.ev_omega = parse_double(f[16]);
      r.ev_beta = parse_double(f[17]);
      r.std_ratio = parse_double(f[18]);
      r.high_uncertainty = f[19] == "1";
      r.message = std::string(f[20]);
      out.push_back(std::move(r));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError("records", line_no, e.what());
    }
  }
  if (!header_seen) throw ParseError("records", line_no, "missing header");
  return out;
}

std::vector<ExperimentRecord> read_records_csv(const std::filesystem::path& path) {
  try {
    return records_from_csv(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.line(), e.what());
  }
}

std::string summary_json(const std::vector<ExperimentRecord>& records, const Provenance& prov) {
  using nlohmann::json;
  json j;
  j["tool_version"] = prov.tool_version;
  j["seed"] = prov.seed;
  j["config_hash"] = prov.config_hash;
  j["records"] = records.size();
  std::map<std::string, int> status;
  std::map<std::string, std::pair<double, int>> by_size;
  int flagged = 0;
  for (const auto& r : records) {
    ++status[std::string(to_string(r.status))];
    if (r.high_uncertainty) ++flagged;
    if (r.status == CellStatus::ok) {
      auto& acc = by_size[std::string(to_string(r.config.size))];
      acc.first += r.r2_mean;
      ++acc.second;
    }
  }
  j["status"] = status;
  j["high_uncertainty"] = flagged;
  json sizes = json::object();
  for (const auto& [size, acc] : by_size) sizes[size] = number(acc.first / acc.second);
  j["mean_r2_by_size"] = sizes;

  try {
    json ranking = json::array();
    for (const auto& kr : rank_kernels(records)) {
      json row;
      row["track"] = kr.track;
      row["scenario"] = kr.scenario.name();
      row["size"] = std::string(to_string(kr.size));
      row["subset"] = kr.subset;
      row["test"] = kr.test;
      row["order"] = kr.order;
      json scores = json::array();
      for (double v : kr.r2_mean) scores.push_back(number(v));
      row["r2_mean"] = scores;
      ranking.push_back(std::move(row));
    }
    j["ranking"] = ranking;
  } catch (const IncompleteMatrix& e) {
    j["ranking"] = nullptr;
    j["ranking_note"] = e.what();
  }
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_report(const std::vector<ExperimentRecord>& records,
                                                const std::filesystem::path& dir,
                                                const Provenance& prov) {
  std::vector<std::filesystem::path> written;
  const auto csv = dir / "records.csv";
  write_text_file(csv, records_to_csv(records, prov));
  written.push_back(csv);
  const auto summary = dir / "summary.json";
  write_text_file(summary, summary_json(records, prov));
  written.push_back(summary);

  for (const auto& r : records) {
    if (!r.series) continue;
    const auto& s = *r.series;
    std::ostringstream out;
    out << header_lines(prov) << "# cell=" << r.config.id() << '\n'
        << "t,true_omega,mean_omega,std_omega,true_beta,mean_beta,std_beta\n";
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      out << format_double(s.t[i]) << ',' << format_double(s.true_omega[i]) << ','
          << format_double(s.mean_omega[i]) << ',' << format_double(s.std_omega[i]) << ','
          << format_double(s.true_beta[i]) << ',' << format_double(s.mean_beta[i]) << ','
          << format_double(s.std_beta[i]) << '\n';
    }
    const auto path = dir / "plots" / (file_stem(r.config) + ".csv");
    write_text_file(path, out.str());
    written.push_back(path);
  }
  return written;
}

}  // namespace racegp
