#include "vpchain/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace vpchain::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  // "a/b" is accepted so that tau = 4/7 can be written exactly.
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    return parse_real(field, t.substr(0, slash)) / parse_real(field, t.substr(slash + 1));
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw UsageError(field + ": expected a number, got '" + text + "'");
  return v;
}

std::uint64_t parse_count(const std::string& field, const std::string& text) {
  const double v = parse_real(field, text);
  if (!(v >= 0) || v != std::floor(v) || v > 1.8e19)
    throw UsageError(field + ": expected a nonnegative integer, got '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

int parse_int(const std::string& field, const std::string& text) {
  const double v = parse_real(field, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw UsageError(field + ": expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw UsageError(field + ": expected true or false, got '" + text + "'");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& field, const std::string& text, F item) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (trim(part).empty()) continue;
    out.push_back(item(field, part));
  }
  if (out.empty()) throw UsageError(field + ": expected a comma-separated list");
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::uint64_t ExperimentConfig::require_seed() const {
  if (!seed) throw UsageError("run.seed: a seed is required (set it in the config or pass --seed)");
  return *seed;
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError(std::string("config: ") + e.message() + " at line " + std::to_string(e.line()));
  }

  ExperimentConfig c;
  using Setter = void (*)(ExperimentConfig&, const std::string&, const std::string&);
  static const std::map<std::string, Setter> setters = {
      {"space.dim", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.dim = static_cast<std::size_t>(parse_count(f, v));
       }},
      {"space.norm", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         try {
           c.norm = parse_norm_kind(trim(v));
         } catch (const UsageError&) {
           throw UsageError(f + ": expected l1, l2 or linf, got '" + v + "'");
         }
       }},
      {"space.tau", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.tau = parse_real(f, v); }},
      {"body.kind", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         const auto t = trim(v);
         if (t == "ball") c.body.kind = BodySpec::Kind::UnitBall;
         else if (t == "cube" || t == "box") c.body.kind = BodySpec::Kind::Cube;
         else throw UsageError(f + ": expected ball or cube, got '" + v + "'");
       }},
      {"body.half_width", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.body.half_width = parse_real(f, v);
       }},
      {"run.seed", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.seed = parse_count(f, v); }},
      {"run.replicas", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.replicas = parse_count(f, v);
       }},
      {"run.out", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out_dir = trim(v); }},
      {"chain-run.steps", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.steps = parse_count(f, v);
       }},
      {"chain-run.force_origin", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.force_origin = parse_bool(f, v);
       }},
      {"regen-stats.blocks", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.blocks = parse_count(f, v);
       }},
      {"regen-stats.step_budget", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.step_budget = parse_count(f, v);
       }},
      {"regen-stats.volume_samples", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.volume_samples = parse_count(f, v);
       }},
      {"regen-stats.reciprocal_repetitions", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.reciprocal_repetitions = parse_count(f, v);
       }},
      {"lln.ns", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.lln_ns = parse_list<std::uint64_t>(f, v, parse_count);
       }},
      {"lln.rel_tol", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.lln_rel_tol = parse_real(f, v);
       }},
      {"duality.n", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.duality_n = parse_count(f, v);
       }},
      {"duality.alpha", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.alpha = parse_real(f, v);
       }},
      {"nn-bench.points", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.nn_points = parse_count(f, v);
       }},
      {"nn-bench.queries", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.nn_queries = parse_count(f, v);
       }},
      {"height-ratio.ns", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.height_ns = parse_list<std::uint64_t>(f, v, parse_count);
       }},
      {"theorem2.xs", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.xs = parse_list<double>(f, v, parse_real);
       }},
      {"theorem2.ss", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.ss = parse_list<int>(f, v, parse_int);
       }},
      {"theorem2.n", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.theorem2_n = parse_int(f, v);
       }},
      {"theorem2.tol", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.tol = parse_real(f, v); }},
      {"theorem2.warmup", [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.warmup = parse_count(f, v);
       }},
  };

  for (const auto& [section, body] : tree) {
    if (body.empty()) throw UsageError(section + ": keys must live inside a [section]");
    for (const auto& [key, value] : body) {
      const std::string field = section + "." + key;
      const auto it = setters.find(field);
      if (it == setters.end()) throw UsageError(field + ": unknown configuration key");
      it->second(c, field, value.data());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path.string() + "'");
  return parse_config(in);
}

void validate(const ExperimentConfig& c) {
  if (c.dim < 1 || c.dim > kMaxDim) throw UsageError("space.dim: must lie in [1, " + std::to_string(kMaxDim) + "]");
  if (!(c.tau > 0.0 && c.tau < 1.0)) throw UsageError("space.tau: must lie in (0, 1)");
  if (c.body.kind == BodySpec::Kind::Cube && !(c.body.half_width > 0.0))
    throw UsageError("body.half_width: must be positive");
  if (c.replicas && *c.replicas < 2) throw UsageError("run.replicas: must be >= 2");
  if (c.blocks < 2) throw UsageError("regen-stats.blocks: must be >= 2");
  if (c.volume_samples < 1) throw UsageError("regen-stats.volume_samples: must be >= 1");
  if (c.reciprocal_repetitions < 1) throw UsageError("regen-stats.reciprocal_repetitions: must be >= 1");
  for (std::size_t i = 0; i < c.lln_ns.size(); ++i) {
    if (c.lln_ns[i] < 2) throw UsageError("lln.ns: entries must be >= 2");
    if (i && c.lln_ns[i] <= c.lln_ns[i - 1]) throw UsageError("lln.ns: must be strictly increasing");
  }
  for (std::size_t i = 0; i < c.height_ns.size(); ++i) {
    if (c.height_ns[i] < 1) throw UsageError("height-ratio.ns: entries must be >= 1");
    if (i && c.height_ns[i] <= c.height_ns[i - 1]) throw UsageError("height-ratio.ns: must be strictly increasing");
  }
  if (!(c.lln_rel_tol > 0)) throw UsageError("lln.rel_tol: must be positive");
  if (c.duality_n < 1) throw UsageError("duality.n: must be >= 1");
  if (!(c.alpha > 0 && c.alpha < 1)) throw UsageError("duality.alpha: must lie in (0, 1)");
  if (c.nn_points < 1) throw UsageError("nn-bench.points: must be >= 1");
  for (double x : c.xs)
    if (!(x > 0)) throw UsageError("theorem2.xs: entries must be positive");
  if (c.theorem2_n < 0) throw UsageError("theorem2.n: must be >= 0");
  if (!(c.tol > 0)) throw UsageError("theorem2.tol: must be positive");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  return {
      {"space.dim", std::to_string(dim)},
      {"space.norm", std::string(to_string(norm))},
      {"space.tau", format_double(tau)},
      {"body.kind", body.kind == BodySpec::Kind::Cube ? "cube" : "ball"},
      {"body.half_width", format_double(body.half_width)},
      {"run.seed", seed ? std::to_string(*seed) : "none"},
      {"run.replicas", replicas ? std::to_string(*replicas) : "default"},
      {"run.out", out_dir.generic_string()},
      {"chain-run.steps", std::to_string(steps)},
      {"chain-run.force_origin", force_origin ? "true" : "false"},
      {"regen-stats.blocks", std::to_string(blocks)},
      {"regen-stats.step_budget", std::to_string(step_budget)},
      {"regen-stats.volume_samples", std::to_string(volume_samples)},
      {"regen-stats.reciprocal_repetitions", std::to_string(reciprocal_repetitions)},
      {"lln.ns", join(lln_ns)},
      {"lln.rel_tol", format_double(lln_rel_tol)},
      {"duality.n", std::to_string(duality_n)},
      {"duality.alpha", format_double(alpha)},
      {"nn-bench.points", std::to_string(nn_points)},
      {"nn-bench.queries", std::to_string(nn_queries)},
      {"height-ratio.ns", join(height_ns)},
      {"theorem2.xs", join(xs)},
      {"theorem2.ss", join(ss)},
      {"theorem2.n", std::to_string(theorem2_n)},
      {"theorem2.tol", format_double(tol)},
      {"theorem2.warmup", std::to_string(warmup)},
  };
}

}  // namespace vpchain::cli
