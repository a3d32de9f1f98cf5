#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "levyip/errors.hpp"
#include "levyip/harness.hpp"

namespace levyip {

namespace {

using nlohmann::json;

// Non-finite doubles travel as strings so the JSON round trip is exact.
json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

json fit_json(const SlopeFit& f) {
  return {{"slope", number(f.slope)},
          {"intercept", number(f.intercept)},
          {"slope_stderr", number(f.slope_stderr)},
          {"ci_half_width", number(f.ci_half_width)},
          {"confidence", f.confidence},
          {"points", f.points},
          {"degenerate", f.degenerate},
          {"reason", f.reason},
          {"negative_with_confidence", f.negative_with_confidence()}};
}

SlopeFit fit_from_json(const json& j) {
  SlopeFit f;
  f.slope = number(j.at("slope"));
  f.intercept = number(j.at("intercept"));
  f.slope_stderr = number(j.at("slope_stderr"));
  f.ci_half_width = number(j.at("ci_half_width"));
  f.confidence = j.at("confidence").get<double>();
  f.points = j.at("points").get<std::size_t>();
  f.degenerate = j.at("degenerate").get<bool>();
  f.reason = j.at("reason").get<std::string>();
  return f;
}

json params_json(const ParamTuple& t) {
  return {{"d", t.d},         {"sigma", t.sigma}, {"p", t.p},         {"q", t.conjugate_p()},
          {"alpha", t.alpha}, {"lambda", t.lambda}, {"beta", t.beta}, {"delta", t.delta},
          {"kernel_case", to_string(t.kernel_case)}};
}

ParamTuple params_from_json(const json& j) {
  ParamTuple t;
  t.d = j.at("d").get<double>();
  t.sigma = j.at("sigma").get<double>();
  t.p = j.at("p").get<double>();
  t.alpha = j.at("alpha").get<double>();
  t.lambda = j.at("lambda").get<double>();
  t.beta = j.at("beta").get<double>();
  t.delta = j.at("delta").get<double>();
  t.kernel_case = j.at("kernel_case").get<std::string>() == "case2" ? KernelCase::case2 : KernelCase::case1;
  return t;
}

// Shortest representation that parses back to the same double.
std::string fmt(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

bool operator==(const SlopeFit& a, const SlopeFit& b) {
  return same(a.slope, b.slope) && same(a.intercept, b.intercept) && same(a.slope_stderr, b.slope_stderr) &&
         same(a.ci_half_width, b.ci_half_width) && a.confidence == b.confidence && a.points == b.points &&
         a.degenerate == b.degenerate && a.reason == b.reason;
}

bool operator==(const ParamTuple& a, const ParamTuple& b) {
  return a.d == b.d && a.sigma == b.sigma && a.p == b.p && a.alpha == b.alpha && a.lambda == b.lambda &&
         a.beta == b.beta && a.delta == b.delta && a.kernel_case == b.kernel_case;
}

bool operator==(const RateReport& a, const RateReport& b) {
  const bool stats_equal = std::equal(a.stats.begin(), a.stats.end(), b.stats.begin(), b.stats.end(),
                                      [](const ErrorStat& x, const ErrorStat& y) {
                                        return x.particles == y.particles && x.time == y.time &&
                                               x.norm_kind == y.norm_kind && same(x.mean, y.mean) &&
                                               same(x.std_error, y.std_error) && x.replicas == y.replicas;
                                      });
  return a.kernel == b.kernel && a.kernel_case == b.kernel_case && a.norm_kind == b.norm_kind &&
         a.params == b.params && same(a.rho, b.rho) && a.rho_branch == b.rho_branch && a.rho_hat == b.rho_hat &&
         a.corollary_failures == b.corollary_failures && same(a.clip_level, b.clip_level) &&
         same(a.kernel_constant, b.kernel_constant) && same(a.sup_x_norm, b.sup_x_norm) &&
         same(a.sup_kernel, b.sup_kernel) && a.clip_condition_ok == b.clip_condition_ok &&
         same(a.max_mass_deviation, b.max_mass_deviation) && a.particle_counts == b.particle_counts &&
         a.observation_times == b.observation_times && a.replicas == b.replicas && a.seed == b.seed &&
         stats_equal && a.primary_fit == b.primary_fit && a.negative_fit == b.negative_fit;
}

json to_json(const RateReport& r) {
  json stats = json::array();
  for (const auto& s : r.stats) {
    stats.push_back({{"N", s.particles},
                     {"t", s.time},
                     {"norm_kind", s.norm_kind},
                     {"mean", number(s.mean)},
                     {"stderr", number(s.std_error)},
                     {"replicas", s.replicas}});
  }
  return {{"kernel", r.kernel},
          {"kernel_case", r.kernel_case},
          {"norm_kind", r.norm_kind},
          {"params", params_json(r.params)},
          {"rho", number(r.rho)},
          {"rho_branch", r.rho_branch},
          {"rho_hat", r.rho_hat ? number(*r.rho_hat) : json(nullptr)},
          {"corollary_failures", r.corollary_failures},
          {"clip_level", number(r.clip_level)},
          {"kernel_constant", number(r.kernel_constant)},
          {"sup_x_norm", number(r.sup_x_norm)},
          {"sup_kernel", number(r.sup_kernel)},
          {"clip_condition_ok", r.clip_condition_ok},
          {"max_mass_deviation", number(r.max_mass_deviation)},
          {"N_list", r.particle_counts},
          {"observation_times", r.observation_times},
          {"replicas", r.replicas},
          {"seed", r.seed},
          {"stats", stats},
          {"primary_fit", fit_json(r.primary_fit)},
          {"negative_fit", fit_json(r.negative_fit)}};
}

RateReport report_from_json(const json& j) {
  try {
    RateReport r;
    r.kernel = j.at("kernel").get<std::string>();
    r.kernel_case = j.at("kernel_case").get<std::string>();
    r.norm_kind = j.at("norm_kind").get<std::string>();
    r.params = params_from_json(j.at("params"));
    r.rho = number(j.at("rho"));
    r.rho_branch = j.at("rho_branch").get<int>();
    if (!j.at("rho_hat").is_null()) r.rho_hat = number(j.at("rho_hat"));
    r.corollary_failures = j.at("corollary_failures").get<std::vector<std::string>>();
    r.clip_level = number(j.at("clip_level"));
    r.kernel_constant = number(j.at("kernel_constant"));
    r.sup_x_norm = number(j.at("sup_x_norm"));
    r.sup_kernel = number(j.at("sup_kernel"));
    r.clip_condition_ok = j.at("clip_condition_ok").get<bool>();
    r.max_mass_deviation = number(j.at("max_mass_deviation"));
    r.particle_counts = j.at("N_list").get<std::vector<std::size_t>>();
    r.observation_times = j.at("observation_times").get<std::vector<double>>();
    r.replicas = j.at("replicas").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("stats")) {
      r.stats.push_back({s.at("N").get<std::size_t>(), s.at("t").get<double>(), s.at("norm_kind").get<std::string>(),
                         number(s.at("mean")), number(s.at("stderr")), s.at("replicas").get<std::size_t>()});
    }
    r.primary_fit = fit_from_json(j.at("primary_fit"));
    r.negative_fit = fit_from_json(j.at("negative_fit"));
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed rate report JSON: ") + e.what());
  }
}

std::string report_csv(const RateReport& r) {
  std::ostringstream os;
  os << "N,t,norm_kind,mean,stderr,replicas\n";
  for (const auto& s : r.stats) {
    os << s.particles << ',' << fmt(s.time) << ',' << s.norm_kind << ',' << fmt(s.mean) << ',' << fmt(s.std_error)
       << ',' << s.replicas << '\n';
  }
  return os.str();
}

std::vector<ErrorStat> parse_report_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "N,t,norm_kind,mean,stderr,replicas") throw ConfigError("unexpected CSV header '" + line + "'");
  std::vector<ErrorStat> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw ConfigError("CSV line " + std::to_string(lineno) + " does not have 6 columns");
    try {
      rows.push_back({std::stoull(cells[0]), std::stod(cells[1]), cells[2], std::stod(cells[3]), std::stod(cells[4]),
                      std::stoull(cells[5])});
    } catch (const std::exception&) {
      throw ConfigError("CSV line " + std::to_string(lineno) + " has a non-numeric field");
    }
  }
  return rows;
}

std::string report_svg(const RateReport& r) {
  constexpr double W = 640, H = 420, ml = 70, mr = 20, mt = 30, mb = 50;
  std::vector<const ErrorStat*> pts;
  for (const auto& s : r.stats) {
    if (s.norm_kind == r.norm_kind && s.mean > 0.0 && s.particles > 0) pts.push_back(&s);
  }
  double x0 = 1.0, x1 = 10.0, y0 = 1e-3, y1 = 1.0;
  if (!pts.empty()) {
    x0 = y0 = std::numeric_limits<double>::infinity();
    x1 = y1 = -std::numeric_limits<double>::infinity();
    for (const auto* s : pts) {
      x0 = std::min(x0, std::log10(static_cast<double>(s->particles)));
      x1 = std::max(x1, std::log10(static_cast<double>(s->particles)));
      y0 = std::min(y0, std::log10(s->mean));
      y1 = std::max(y1, std::log10(s->mean));
    }
    x0 -= 0.1;
    x1 += 0.1;
    y0 -= 0.1;
    y1 += 0.1;
  } else {
    x0 = 0.0;
    x1 = 1.0;
    y0 = -3.0;
    y1 = 0.0;
  }
  auto px = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double ly) { return H - mb - (ly - y0) / (y1 - y0) * (H - mt - mb); };

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << r.kernel << ": "
     << r.norm_kind << " error vs N (log-log)</text>\n";
  os << "<line class=\"axis\" x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  os << "<line class=\"axis\" x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (W + ml) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">log10 N</text>\n";
  os << "<text x=\"16\" y=\"" << (H - mb + mt) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
     << (H - mb + mt) / 2 << ")\" text-anchor=\"middle\">log10 mean error</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double lx = x0 + (x1 - x0) * k / 4.0, ly = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << px(lx) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\" font-size=\"10\">" << lx
       << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << py(ly) + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << ly
       << "</text>\n";
  }
  for (const auto* s : pts) {
    os << "<circle class=\"point\" cx=\"" << px(std::log10(static_cast<double>(s->particles))) << "\" cy=\""
       << py(std::log10(s->mean)) << "\" r=\"4\" fill=\"steelblue\"><title>N=" << s->particles << " t=" << s->time
       << " mean=" << s->mean << "</title></circle>\n";
  }
  const auto& f = r.primary_fit;
  if (!pts.empty() && !f.degenerate && std::isfinite(f.slope)) {
    // log10 e = intercept/ln10 + slope log10 N
    const double ly0 = f.intercept / std::log(10.0) + f.slope * x0;
    const double ly1 = f.intercept / std::log(10.0) + f.slope * x1;
    os << "<line class=\"fit\" x1=\"" << px(x0) << "\" y1=\"" << py(ly0) << "\" x2=\"" << px(x1) << "\" y2=\""
       << py(ly1) << "\" stroke=\"firebrick\" stroke-width=\"1.5\"/>\n";
    const double anchor = 0.5 * (ly0 + ly1), mid = 0.5 * (x0 + x1);
    os << "<line class=\"reference\" x1=\"" << px(x0) << "\" y1=\"" << py(anchor - r.rho * (x0 - mid)) << "\" x2=\""
       << px(x1) << "\" y2=\"" << py(anchor - r.rho * (x1 - mid))
       << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }
  os << "<text x=\"" << W - mr << "\" y=\"" << mt + 12 << "\" text-anchor=\"end\" font-size=\"11\">fit slope "
     << f.slope << ", reference slope " << -r.rho << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::vector<std::string> emit(const RateReport& r, const std::vector<std::string>& formats, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  std::vector<std::string> written;
  for (const auto& f : formats) {
    const fs::path path = fs::path(dir) / ("rate_report." + f);
    if (f == "csv") {
      write_text(path, report_csv(r));
    } else if (f == "json") {
      write_text(path, to_json(r).dump(2) + "\n");
    } else if (f == "svg") {
      write_text(path, report_svg(r));
    } else {
      throw ConfigError("unknown output format '" + f + "'");
    }
    written.push_back(path.string());
  }
  return written;
}

}  // namespace levyip
