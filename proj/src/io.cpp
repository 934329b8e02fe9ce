#include "multibin/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "multibin/error.hpp"

namespace multibin {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  // "-0.00" reads badly in a table
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

std::vector<double> number_array(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw InvalidArgument(std::string("prior file needs array '") + key + "'");
  std::vector<double> v;
  for (const auto& x : j[key]) {
    if (!x.is_number()) throw InvalidArgument(std::string("'") + key + "' must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return in;
}

}  // namespace

ArmCounts parse_counts(std::istream& in, const std::string& source) {
  std::vector<std::int64_t> e;
  std::vector<std::int64_t> c;
  int outcomes = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string rec = trim(line);
    if (rec.empty() || rec[0] == '#') continue;
    auto fail = [&](const std::string& why) {
      throw InvalidArgument(source + ":" + std::to_string(line_no) + ": " + why + " ('" + rec + "')");
    };
    const auto f = split(rec);
    if (line_no == 1 || (e.empty() && c.empty())) {
      if (!f.empty() && (f[0] == "arm" || f[0] == "Arm")) continue;
    }
    if (f.size() != 2 && f.size() != 3) fail("expected arm,pattern,count or arm,bits");
    if (f[0] != "E" && f[0] != "C") fail("arm must be E or C");
    std::size_t q = 0;
    try {
      q = parse_pattern(f[1]);
    } catch (const Error&) {
      fail("bad pattern '" + f[1] + "'");
    }
    const int k = static_cast<int>(f[1].size());
    if (outcomes == 0) {
      outcomes = k;
      e.assign(pattern_count(k), 0);
      c.assign(pattern_count(k), 0);
    }
    if (k != outcomes) fail("pattern has " + std::to_string(k) + " bits, expected " + std::to_string(outcomes));
    std::int64_t count = 1;
    if (f.size() == 3) {
      std::size_t used = 0;
      try {
        count = std::stoll(f[2], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (f[2].empty() || used != f[2].size()) fail("count '" + f[2] + "' is not an integer");
      if (count < 0) fail("count must be nonnegative");
    }
    (f[0] == "E" ? e : c)[q] += count;
  }
  if (outcomes == 0) throw InvalidArgument(source + ": no count records");
  return {JointCounts(std::move(e)), JointCounts(std::move(c))};
}

ArmCounts read_counts_file(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_counts(in, path);
}

ArmPriors parse_prior_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument(std::string("prior file is not valid JSON: ") + ex.what());
  }
  if (!j.is_object()) throw InvalidArgument("prior file must hold a JSON object");
  if (j.contains("alpha_e") || j.contains("alpha_c")) {
    return {DirichletParams(number_array(j, "alpha_e")), DirichletParams(number_array(j, "alpha_c"))};
  }
  if (!j.contains("n0") || !j["n0"].is_number()) throw InvalidArgument("prior file needs a numeric 'n0'");
  const double n0 = j["n0"].get<double>();
  if (j.contains("phi0")) {
    auto p = prior_from_spec({n0, CellProbabilities(number_array(j, "phi0"))});
    return {p, p};
  }
  return {prior_from_spec({n0, CellProbabilities(number_array(j, "phi_e"))}),
          prior_from_spec({n0, CellProbabilities(number_array(j, "phi_c"))})};
}

ArmPriors read_prior_file(const std::string& path) {
  auto in = open_or_throw(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_prior_json(ss.str());
}

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "condition,dgm,rule,design,prior,n,reps,rate,mean_n,bias1,bias2,se\n";
  for (const auto& r : rows) {
    const auto& rep = r.report;
    out << rep.condition << ',' << r.dgm << ',' << r.rule << ',' << r.design << ',' << r.prior << ',' << r.n << ','
        << rep.reps << ',' << fixed(rep.rate, 3) << ',' << (rep.mean_n ? fixed(*rep.mean_n, 0) : "-");
    for (std::size_t k = 0; k < 2; ++k) out << ',' << (k < rep.bias.size() ? fixed(rep.bias[k], 2) : "");
    out << ',' << fixed(rep.se, 3) << '\n';
  }
}

void write_json(std::ostream& out, const std::vector<ReportRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    const auto& rep = r.report;
    nlohmann::json j;
    j["condition"] = rep.condition;
    j["dgm"] = r.dgm;
    j["rule"] = r.rule;
    j["design"] = r.design;
    j["prior"] = r.prior;
    j["n"] = r.n;
    j["reps"] = rep.reps;
    j["rate"] = rep.rate;
    j["mean_n"] = rep.mean_n ? nlohmann::json(*rep.mean_n) : nlohmann::json(nullptr);
    j["bias"] = rep.bias;
    j["bias_observed"] = rep.bias_observed;
    j["se"] = rep.se;
    j["mean_analyses"] = rep.mean_analyses;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

}  // namespace multibin
