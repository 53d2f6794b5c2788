#include "swapcomb/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "swapcomb/error.hpp"
#include "swapcomb/master.hpp"

namespace swapcomb {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kConfig, where + ": " + what);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Drops "# ..." tails outside quotes so inline comments work.
std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    bool quoted = false;
    std::size_t cut = line.size();
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (!quoted && (line[i] == '#' || line[i] == ';')) {
        cut = i;
        break;
      }
    }
    out << line.substr(0, cut) << '\n';
  }
  return out.str();
}

class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }

  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  std::string str(const std::string& key) const {
    used_.insert(key);
    std::string v = trim(tree_->get<std::string>(key));
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return v;
  }

  std::size_t size(const std::string& key) const { return parse_size(str(key), where(key)); }

  double real(const std::string& key) const { return parse_real(str(key), where(key)); }

  bool flag(const std::string& key) const {
    const std::string v = str(key);
    if (v == "true") return true;
    if (v == "false") return false;
    config_error(where(key), "expected true or false, got '" + v + "'");
  }

  void check_unused() const {
    if (!tree_) return;
    for (const auto& [key, _] : *tree_) {
      if (!used_.count(key)) config_error(where(key), "unknown key");
    }
  }

  static std::size_t parse_size(const std::string& v, const std::string& where) {
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
      if (v.empty() || v.front() == '-') throw std::invalid_argument("negative");
      x = std::stoull(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) config_error(where, "expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(x);
  }

  static double parse_real(const std::string& v, const std::string& where) {
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(x)) {
      config_error(where, "expected a number, got '" + v + "'");
    }
    return x;
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
  mutable std::set<std::string> used_;
};

// "[a, b, c]" -> {"a", "b", "c"}; nested brackets are kept intact.
std::vector<std::string> split_list(const std::string& raw, const std::string& where) {
  const std::string v = trim(raw);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') config_error(where, "expected a [list]");
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const char c = v[i];
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (depth < 0) config_error(where, "unbalanced brackets");
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0) config_error(where, "unbalanced brackets");
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  for (const auto& s : out) {
    if (s.empty()) config_error(where, "empty list element");
  }
  return out;
}

Vector real_list(const std::string& raw, const std::string& where) {
  Vector out;
  for (const auto& s : split_list(raw, where)) out.push_back(Section::parse_real(s, where));
  return out;
}

std::vector<std::size_t> size_list(const std::string& raw, const std::string& where) {
  const std::string v = trim(raw);
  if (!v.empty() && v.front() != '[') return {Section::parse_size(v, where)};
  std::vector<std::size_t> out;
  for (const auto& s : split_list(v, where)) out.push_back(Section::parse_size(s, where));
  return out;
}

std::vector<std::uint64_t> seed_list(const std::string& raw, const std::string& where) {
  const std::string v = trim(raw);
  const auto dots = v.find("..");
  if (dots != std::string::npos && v.front() != '[') {
    const std::size_t a = Section::parse_size(trim(v.substr(0, dots)), where);
    const std::size_t b = Section::parse_size(trim(v.substr(dots + 2)), where);
    if (b < a) config_error(where, "empty seed range");
    std::vector<std::uint64_t> out;
    for (std::size_t s = a; s <= b; ++s) out.push_back(s);
    return out;
  }
  std::vector<std::uint64_t> out;
  for (std::size_t s : size_list(v, where)) out.push_back(s);
  return out;
}

// Quote values the comment stripper would otherwise cut.
std::string quoted(const std::string& v) {
  if (v.find_first_of("#;\"") == std::string::npos && trim(v) == v) return v;
  return '"' + v + '"';
}

// Shortest form that parses back to the same double.
std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string join_reals(const Vector& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << shortest(v[i]);
  os << ']';
  return os.str();
}

const std::set<std::string> kAlgorithms = {"swap_combcp", "swap_comband", "combexp_replica", "exp_weights_baseline"};
const std::set<std::string> kDomains = {"m_sets",         "shortcut",       "dag_file",
                                        "permutations",   "truncated_permutations",
                                        "spanning_trees", "k_forests"};
const std::set<std::string> kAdversaries = {"iid_stochastic", "piecewise_switching", "shortcut", "custom_file"};

}  // namespace

ExperimentConfig parse_config(std::istream& in, const fs::path& base_dir) {
  std::ostringstream raw;
  raw << in.rdbuf();
  std::istringstream cleaned(strip_comments(raw.str()));
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(cleaned, tree);
  } catch (const pt::ini_parser_error& e) {
    config_error("config line " + std::to_string(e.line()), e.message());
  }
  // Headers are checked on the text because the INI reader drops empty sections.
  {
    std::istringstream lines(strip_comments(raw.str()));
    std::string line;
    while (std::getline(lines, line)) {
      const std::string h = trim(line);
      if (h.size() < 2 || h.front() != '[' || h.back() != ']') continue;
      const std::string name = trim(h.substr(1, h.size() - 2));
      if (name != "run" && name != "domain" && name != "adversary" && name != "params") {
        config_error("[" + name + "]", "unknown section");
      }
    }
  }
  auto section = [&](const char* name) {
    auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? nullptr : &it->second);
  };

  ExperimentConfig cfg;
  const Section run = section("run");
  if (run.has("name")) cfg.name = run.str("name");
  if (run.has("algorithm")) cfg.algorithm = run.str("algorithm");
  if (!kAlgorithms.count(cfg.algorithm)) config_error(run.where("algorithm"), "unknown algorithm '" + cfg.algorithm + "'");
  if (!run.has("T")) config_error("[run] T", "missing");
  cfg.horizons = size_list(run.str("T"), run.where("T"));
  if (!run.has("seeds")) config_error("[run] seeds", "missing");
  cfg.seeds = seed_list(run.str("seeds"), run.where("seeds"));
  if (cfg.seeds.empty()) config_error(run.where("seeds"), "must not be empty");
  if (cfg.horizons.empty()) config_error(run.where("T"), "must not be empty");
  if (run.has("stride")) cfg.stride = run.size("stride");
  if (run.has("output")) cfg.output = run.str("output");
  if (run.has("dump_ledger")) cfg.dump_ledger = run.flag("dump_ledger");
  if (run.has("doubling")) cfg.doubling = run.flag("doubling");
  if (run.has("threads")) cfg.threads = run.size("threads");
  if (run.has("rng") && run.str("rng") != CounterRng::kAlgorithm) {
    config_error(run.where("rng"), "unsupported generator '" + run.str("rng") + "'");
  }
  if (run.has("rng_version") && run.str("rng_version") != CounterRng::kVersion) {
    config_error(run.where("rng_version"), "unsupported version '" + run.str("rng_version") + "'");
  }
  run.check_unused();

  const Section dom = section("domain");
  DomainSpec& d = cfg.domain;
  if (dom.has("kind")) d.kind = dom.str("kind");
  if (!kDomains.count(d.kind)) config_error(dom.where("kind"), "unknown domain '" + d.kind + "'");
  if (dom.has("d")) d.d = dom.size("d");
  if (dom.has("m")) d.m = dom.size("m");
  if (dom.has("n")) d.n = dom.size("n");
  if (dom.has("rows")) d.rows = dom.size("rows");
  if (dom.has("cols")) d.cols = dom.size("cols");
  if (dom.has("k")) d.k = dom.size("k");
  if (dom.has("vertices")) d.vertices = dom.size("vertices");
  if (dom.has("edges")) {
    for (const auto& e : split_list(dom.str("edges"), dom.where("edges"))) {
      const auto uv = size_list(e, dom.where("edges"));
      if (uv.size() != 2) config_error(dom.where("edges"), "each edge is [u, v]");
      d.edges.emplace_back(uv[0], uv[1]);
    }
  }
  if (dom.has("file")) {
    const fs::path p = dom.str("file");
    d.file = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
  }
  if (dom.has("equalize")) d.equalize = dom.flag("equalize");
  dom.check_unused();

  const Section adv = section("adversary");
  AdversarySpec& a = cfg.adversary;
  if (adv.has("kind")) a.kind = adv.str("kind");
  if (!kAdversaries.count(a.kind)) config_error(adv.where("kind"), "unknown adversary '" + a.kind + "'");
  if (adv.has("means")) a.means = real_list(adv.str("means"), adv.where("means"));
  if (adv.has("blocks")) {
    for (const auto& b : split_list(adv.str("blocks"), adv.where("blocks"))) {
      a.blocks.push_back(real_list(b, adv.where("blocks")));
    }
  }
  if (adv.has("block_length")) a.block_length = adv.size("block_length");
  if (adv.has("file")) {
    const fs::path p = adv.str("file");
    a.file = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
  }
  if (adv.has("seed")) a.seed = adv.size("seed");
  adv.check_unused();
  if (a.kind == "shortcut" && d.kind != "shortcut") {
    config_error(adv.where("kind"), "the shortcut adversary needs the shortcut domain");
  }
  if (a.kind == "iid_stochastic" && a.means.empty()) config_error(adv.where("means"), "missing");
  if (a.kind == "piecewise_switching" && a.blocks.empty()) config_error(adv.where("blocks"), "missing");
  if (a.kind == "custom_file" && a.file.empty()) config_error(adv.where("file"), "missing");

  const Section par = section("params");
  ParamSpec& p = cfg.params;
  if (par.has("mode")) {
    const std::string mode = par.str("mode");
    if (mode == "theory") {
      p.mode = ScheduleMode::kTheory;
    } else if (mode != "practical") {
      config_error(par.where("mode"), "expected theory or practical");
    }
  }
  if (par.has("H")) p.H = par.size("H");
  if (par.has("K")) p.K = par.size("K");
  if (par.has("gamma")) p.gamma = par.real("gamma");
  if (par.has("eta_c")) {
    p.eta_c = par.real("eta_c");
    p.eta_c_set = true;
  }
  if (par.has("eta_cap")) p.eta_cap = par.flag("eta_cap");
  if (par.has("spanner_C")) p.spanner_C = par.real("spanner_C");
  par.check_unused();
  if (p.mode == ScheduleMode::kTheory && (p.gamma || p.eta_c_set || p.eta_cap)) {
    config_error("[params]", "theory mode fixes gamma and eta; remove the overrides");
  }
  if (p.gamma && !(*p.gamma > 0.0 && *p.gamma <= 1.0)) config_error(par.where("gamma"), "must lie in (0, 1]");
  if (!(p.eta_c > 0.0)) config_error(par.where("eta_c"), "must be positive");
  if (!(p.spanner_C > 1.0)) config_error(par.where("spanner_C"), "must exceed 1");
  if (p.H && *p.H < 2) config_error(par.where("H"), "must be at least 2");
  if (p.K && *p.K < 1) config_error(par.where("K"), "must be at least 1");
  if (cfg.doubling && cfg.algorithm.rfind("swap_", 0) != 0) {
    config_error(run.where("doubling"), "only the swap_* algorithms run under the doubling trick");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "[run]\n";
  os << "name = " << quoted(cfg.name) << "\n";
  os << "algorithm = " << cfg.algorithm << "\n";
  os << "T = [";
  for (std::size_t i = 0; i < cfg.horizons.size(); ++i) os << (i ? ", " : "") << cfg.horizons[i];
  os << "]\n";
  const bool range = cfg.seeds.size() > 2 && cfg.seeds.back() - cfg.seeds.front() + 1 == cfg.seeds.size() &&
                     std::is_sorted(cfg.seeds.begin(), cfg.seeds.end());
  if (range) {
    os << "seeds = " << cfg.seeds.front() << ".." << cfg.seeds.back() << "\n";
  } else {
    os << "seeds = [";
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) os << (i ? ", " : "") << cfg.seeds[i];
    os << "]\n";
  }
  if (cfg.stride) os << "stride = " << cfg.stride << "\n";
  os << "output = " << quoted(cfg.output) << "\n";
  if (cfg.dump_ledger) os << "dump_ledger = true\n";
  if (cfg.doubling) os << "doubling = true\n";
  if (cfg.threads) os << "threads = " << cfg.threads << "\n";
  os << "rng = " << CounterRng::kAlgorithm << "\n";
  os << "rng_version = " << CounterRng::kVersion << "\n";

  const DomainSpec& d = cfg.domain;
  os << "\n[domain]\nkind = " << d.kind << "\n";
  if (d.d) os << "d = " << d.d << "\n";
  if (d.m) os << "m = " << d.m << "\n";
  if (d.n) os << "n = " << d.n << "\n";
  if (d.rows) os << "rows = " << d.rows << "\n";
  if (d.cols) os << "cols = " << d.cols << "\n";
  if (d.k) os << "k = " << d.k << "\n";
  if (d.vertices) os << "vertices = " << d.vertices << "\n";
  if (!d.edges.empty()) {
    os << "edges = [";
    for (std::size_t i = 0; i < d.edges.size(); ++i) {
      os << (i ? ", " : "") << "[" << d.edges[i].first << ", " << d.edges[i].second << "]";
    }
    os << "]\n";
  }
  if (!d.file.empty()) os << "file = " << quoted(d.file) << "\n";
  if (!d.equalize) os << "equalize = false\n";

  const AdversarySpec& a = cfg.adversary;
  os << "\n[adversary]\nkind = " << a.kind << "\n";
  if (!a.means.empty()) os << "means = " << join_reals(a.means) << "\n";
  if (!a.blocks.empty()) {
    os << "blocks = [";
    for (std::size_t i = 0; i < a.blocks.size(); ++i) os << (i ? ", " : "") << join_reals(a.blocks[i]);
    os << "]\n";
  }
  if (a.block_length) os << "block_length = " << a.block_length << "\n";
  if (!a.file.empty()) os << "file = " << quoted(a.file) << "\n";
  if (a.seed) os << "seed = " << a.seed << "\n";

  const ParamSpec& p = cfg.params;
  os << "\n[params]\nmode = " << to_string(p.mode) << "\n";
  if (p.H) os << "H = " << *p.H << "\n";
  if (p.K) os << "K = " << *p.K << "\n";
  if (p.gamma) os << "gamma = " << shortest(*p.gamma) << "\n";
  if (p.eta_c_set) os << "eta_c = " << shortest(p.eta_c) << "\n";
  if (p.eta_cap) os << "eta_cap = true\n";
  if (p.spanner_C != 2.0) os << "spanner_C = " << shortest(p.spanner_C) << "\n";
  return os.str();
}

ActionSet build_domain(const DomainSpec& s) {
  auto need = [](bool ok, const std::string& key) {
    if (!ok) config_error("[domain] " + key, "missing or zero");
  };
  auto graph = [&]() {
    need(s.vertices > 0, "vertices");
    UndirectedGraph g{s.vertices, s.edges};
    if (g.edges.empty()) {
      for (std::size_t u = 0; u < s.vertices; ++u) {
        for (std::size_t v = u + 1; v < s.vertices; ++v) g.edges.emplace_back(u, v);
      }
    }
    return g;
  };
  if (s.kind == "m_sets") {
    need(s.d > 0, "d");
    need(s.m > 0, "m");
    return ActionSet::m_sets(s.d, s.m);
  }
  if (s.kind == "shortcut") {
    need(s.n > 0, "n");
    return ActionSet::dag_paths(build_shortcut_dag(s.n), s.equalize);
  }
  if (s.kind == "dag_file") {
    need(!s.file.empty(), "file");
    std::ifstream in(s.file);
    if (!in) config_error("[domain] file", "cannot open " + s.file);
    return ActionSet::dag_paths(read_dag(in), s.equalize);
  }
  if (s.kind == "permutations") {
    need(s.n > 0, "n");
    return ActionSet::permutations(s.n);
  }
  if (s.kind == "truncated_permutations") {
    need(s.rows > 0, "rows");
    need(s.cols > 0, "cols");
    return ActionSet::truncated_permutations(s.rows, s.cols);
  }
  if (s.kind == "spanning_trees") return ActionSet::spanning_trees(graph());
  if (s.kind == "k_forests") {
    need(s.k > 0, "k");
    return ActionSet::k_forests(graph(), s.k);
  }
  config_error("[domain] kind", "unknown domain '" + s.kind + "'");
}

std::unique_ptr<RewardSequence> build_adversary(const AdversarySpec& adv, const ActionSet& set, std::size_t T,
                                                std::uint64_t run_seed) {
  if (adv.kind == "iid_stochastic") {
    return iid_stochastic(set, adv.means, CounterRng(adv.seed).derive({run_seed}).key());
  }
  if (adv.kind == "piecewise_switching") {
    std::size_t len = adv.block_length;
    if (len == 0) len = std::max<std::size_t>(1, (T + adv.blocks.size() - 1) / adv.blocks.size());
    return piecewise_switching(set, adv.blocks, len);
  }
  if (adv.kind == "shortcut") {
    std::size_t n = 0;
    if (const LeveledDag* lev = set.leveled()) {
      n = (lev->dag.num_vertices() - lev->padding_vertices - 2) / 2;
    } else if (const Dag* g = set.dag()) {
      n = (g->num_vertices() - 2) / 2;
    }
    return shortcut_adversary(set, n);
  }
  if (adv.kind == "custom_file") {
    std::ifstream in(adv.file);
    if (!in) config_error("[adversary] file", "cannot open " + adv.file);
    return custom_file(set, in);
  }
  config_error("[adversary] kind", "unknown adversary '" + adv.kind + "'");
}

ExperimentSetup::ExperimentSetup(const ExperimentConfig& cfg) : config(cfg), set(build_domain(cfg.domain)) {
  if (cfg.algorithm != "combexp_replica") {
    const bool enumerate = cfg.algorithm == "swap_comband" || cfg.algorithm == "exp_weights_baseline";
    context = make_learner_context(set, cfg.params.spanner_C, enumerate);
  }
}

ScheduleChoice choose_schedule(const ExperimentConfig& cfg, const ActionSet& set, std::size_t T) {
  ScheduleChoice out;
  const ParamSpec& p = cfg.params;
  if (p.mode == ScheduleMode::kPractical) {
    out.H = p.H.value_or(practical_base(T));
    out.K = p.K.value_or(practical_scale_count(T, out.H));
    return out;
  }
  if (p.H) {
    out.H = *p.H;
  } else {
    // 27 floor(log T)^3 d^9 m^{9/2} log^3 d, saturated.
    const double d = static_cast<double>(set.dim());
    const double m = static_cast<double>(set.weight());
    const double lt = std::floor(std::log(static_cast<double>(std::max<std::size_t>(T, 1))));
    const double h = 27.0 * lt * lt * lt * std::pow(d, 9.0) * std::pow(m, 4.5) * std::pow(std::log(d), 3.0);
    out.H = h >= 1e18 ? static_cast<std::size_t>(1e18) : std::max<std::size_t>(2, static_cast<std::size_t>(h));
  }
  out.K = p.K.value_or(theory_scale_count(T, out.H));
  if (saturating_pow(out.H, out.K) < T) {
    config_error("[params] K", "theory mode needs T <= H^K");
  }
  return out;
}

namespace {

std::unique_ptr<Master> make_master(const ExperimentSetup& setup, std::size_t T, CounterRng rng) {
  const auto& cfg = setup.config;
  const ScheduleChoice sc = choose_schedule(cfg, setup.set, T);
  const auto ctx = setup.context;
  const bool band = cfg.algorithm == "swap_comband";
  std::vector<ScheduleParams> per_scale;
  for (std::size_t k = 1; k <= sc.K; ++k) {
    if (cfg.params.mode == ScheduleMode::kTheory) {
      per_scale.push_back(band ? comband_theory_schedule(*ctx, sc.H, k) : combcp_theory_schedule(*ctx, sc.H, k));
    } else {
      per_scale.push_back(band ? comband_practical_schedule(*ctx, sc.H, k, cfg.params.gamma, cfg.params.eta_c,
                                                            cfg.params.eta_cap)
                               : combcp_practical_schedule(*ctx, sc.H, k, cfg.params.gamma, cfg.params.eta_c,
                                                           cfg.params.eta_cap));
    }
  }
  LearnerFactory factory = [ctx, per_scale, band](std::size_t k, std::size_t,
                                                  std::size_t planned) -> std::unique_ptr<LazyLearner> {
    if (band) return std::make_unique<LazyComBand>(ctx, per_scale[k - 1], planned);
    return std::make_unique<LazyComBCP>(ctx, per_scale[k - 1], planned);
  };
  return std::make_unique<Master>(setup.set, sc.H, sc.K, T, std::move(factory), rng);
}

}  // namespace

std::unique_ptr<BanditAlgorithm> make_algorithm(const ExperimentSetup& setup, std::size_t T, std::uint64_t seed) {
  const auto& cfg = setup.config;
  const CounterRng root(seed);
  if (cfg.algorithm == "combexp_replica") {
    return std::make_unique<CombExpReplica>(setup.set, T, root.derive("combexp_replica"));
  }
  if (cfg.algorithm == "exp_weights_baseline") {
    const double gamma = cfg.params.gamma.value_or(
        std::min(1.0, std::pow(static_cast<double>(std::max<std::size_t>(T, 1)), -1.0 / 3.0)));
    const double eta = cfg.params.eta_c * gamma * setup.context->lambda_mu / static_cast<double>(setup.set.weight());
    return std::make_unique<Exp2Baseline>(setup.context, gamma, eta, root.derive("exp_weights_baseline"));
  }
  if (cfg.doubling) {
    return std::make_unique<DoublingWrapper>([&setup, root](std::size_t epoch, std::size_t length) {
      return std::unique_ptr<BanditAlgorithm>(make_master(setup, length, root.derive({epoch})));
    });
  }
  return make_master(setup, T, root.derive("master"));
}

RunResult run_single(const ExperimentSetup& setup, std::size_t T, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = setup.config;
  RunResult out;
  out.T = T;
  out.seed = seed;
  auto adversary = build_adversary(cfg.adversary, setup.set, T, seed);
  auto alg = make_algorithm(setup, T, seed);
  RegretTracker tracker(setup.set);
  if (cfg.dump_ledger) out.ledger.emplace();
  const std::size_t stride = cfg.stride ? cfg.stride : std::max<std::size_t>(1, T / 500);
  for (std::size_t t = 1; t <= T; ++t) {
    DayOutcome day = play_day(*alg, *adversary, t);
    tracker.add(day.policy, day.reward, day.realized);
    if (out.ledger) out.ledger->record(day.policy, day.sampled, day.reward, day.realized);
    if (t % stride == 0 || t == T) {
      out.curve.push_back({t, tracker.cumulative_realized(), tracker.external(), tracker.swap()});
    }
  }
  out.realized = tracker.cumulative_realized();
  out.expected = tracker.cumulative_expected();
  out.external = T ? tracker.external() : 0.0;
  out.swap = T ? tracker.swap() : 0.0;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<RunResult> run_all(const ExperimentSetup& setup, const std::function<void(const RunResult&)>& progress) {
  const auto& cfg = setup.config;
  std::vector<std::pair<std::size_t, std::uint64_t>> jobs;
  for (std::size_t T : cfg.horizons) {
    for (std::uint64_t s : cfg.seeds) jobs.emplace_back(T, s);
  }
  std::vector<RunResult> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = run_single(setup, jobs[i].first, jobs[i].second);
        if (progress) {
          std::lock_guard<std::mutex> lock(report);
          progress(results[i]);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t n = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min(n, jobs.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::vector<SummaryRow> summarize(const std::vector<RunResult>& runs) {
  std::vector<std::size_t> horizons;
  for (const auto& r : runs) {
    if (std::find(horizons.begin(), horizons.end(), r.T) == horizons.end()) horizons.push_back(r.T);
  }
  auto stats = [](const Vector& v, double& mean, double& sd) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  };
  std::vector<SummaryRow> out;
  for (std::size_t T : horizons) {
    Vector realized, external, swap;
    for (const auto& r : runs) {
      if (r.T != T) continue;
      realized.push_back(r.realized);
      external.push_back(r.external);
      swap.push_back(r.swap);
    }
    SummaryRow row;
    row.T = T;
    row.seeds = realized.size();
    stats(realized, row.mean_realized, row.std_realized);
    stats(external, row.mean_external, row.std_external);
    stats(swap, row.mean_swap, row.std_swap);
    if (!out.empty()) row.swap_ratio = row.mean_swap / out.back().mean_swap;
    out.push_back(row);
  }
  return out;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

std::vector<fs::path> write_outputs(const ExperimentConfig& cfg, const std::vector<RunResult>& runs,
                                    const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  auto open = [&](const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::kConfig, "cannot write " + p.string());
    written.push_back(p);
    return f;
  };
  for (const auto& r : runs) {
    const std::string stem = cfg.name + "_T" + std::to_string(r.T) + "_seed" + std::to_string(r.seed);
    auto f = open(out_dir / (stem + ".csv"));
    f << "t,cum_realized_reward,external_regret_prefix,swap_regret_prefix\n";
    for (const auto& p : r.curve) {
      f << p.t << ',' << num(p.realized) << ',' << num(p.external) << ',' << num(p.swap) << '\n';
    }
    if (r.ledger) {
      auto g = open(out_dir / (stem + "_ledger.csv"));
      g << "t,sampled,realized_reward,reward,policy\n";
      const Ledger& l = *r.ledger;
      for (std::size_t t = 0; t < l.size(); ++t) {
        const auto& day = l.days()[t];
        g << t + 1 << ',' << l.action(day.sampled).to_string() << ',' << num(day.realized) << ',';
        for (std::size_t i = 0; i < day.reward.size(); ++i) g << (i ? ";" : "") << num(day.reward[i]);
        g << ',';
        for (std::size_t j = 0; j < day.policy.size(); ++j) {
          g << (j ? ";" : "") << l.action(day.policy[j].first).to_string() << ':' << num(day.policy[j].second);
        }
        g << '\n';
      }
    }
  }
  {
    auto f = open(out_dir / (cfg.name + "_finals.csv"));
    f << "T,seed,cum_realized_reward,expected_reward,external_regret,swap_regret\n";
    for (const auto& r : runs) {
      f << r.T << ',' << r.seed << ',' << num(r.realized) << ',' << num(r.expected) << ',' << num(r.external) << ','
        << num(r.swap) << '\n';
    }
  }
  {
    const auto rows = summarize(runs);
    const bool ratio = rows.size() >= 2;
    auto f = open(out_dir / (cfg.name + "_summary.csv"));
    f << "T,seeds,mean_realized_reward,std_realized_reward,mean_external_regret,std_external_regret,"
         "mean_swap_regret,std_swap_regret"
      << (ratio ? ",swap_ratio" : "") << '\n';
    for (const auto& row : rows) {
      f << row.T << ',' << row.seeds << ',' << num(row.mean_realized) << ',' << num(row.std_realized) << ','
        << num(row.mean_external) << ',' << num(row.std_external) << ',' << num(row.mean_swap) << ','
        << num(row.std_swap);
      if (ratio) f << ',' << (row.swap_ratio ? num(*row.swap_ratio) : "");
      f << '\n';
    }
  }
  return written;
}

AuditReport audit_single(const ExperimentSetup& setup, std::size_t T, std::uint64_t seed) {
  const auto& cfg = setup.config;
  if (cfg.algorithm.rfind("swap_", 0) != 0 || cfg.doubling) {
    throw Error(ErrorCode::kConfig, "the audit needs a swap_* algorithm without the doubling trick");
  }
  auto master = make_master(setup, T, CounterRng(seed).derive("master"));
  auto adversary = build_adversary(cfg.adversary, setup.set, T, seed);
  DecompositionRecorder rec(master->K());
  Ledger ledger;
  for (std::size_t t = 1; t <= T; ++t) {
    const Vector reward = adversary->at(t);
    DayOutcome day = play_day(*master, *adversary, t, [&] { rec.observe(*master, reward); });
    ledger.record(day.policy, day.sampled, std::move(day.reward), day.realized);
  }
  return decomposition_audit(ledger, setup.set, rec);
}

const std::vector<Scenario>& scenarios() {
  static const std::vector<Scenario> list = [] {
    std::vector<Scenario> out;
    auto seeds = [](std::uint64_t a, std::uint64_t b) {
      std::vector<std::uint64_t> s;
      for (auto x = a; x <= b; ++x) s.push_back(x);
      return s;
    };
    {
      ExperimentConfig c;
      c.name = "counterexample";
      c.algorithm = "combexp_replica";
      c.horizons = {2000};
      c.seeds = seeds(1, 50);
      c.output = "out/counterexample";
      c.domain.kind = "shortcut";
      c.domain.n = 8;
      c.adversary.kind = "shortcut";
      out.push_back({c.name, "single-learner CombEXP replica on the shortcut graph (n = 8), reward only on the "
                             "shortcut edge",
                     c});
      c.name = "counterexample-fixed";
      c.algorithm = "swap_combcp";
      c.output = "out/counterexample-fixed";
      c.params.gamma = 0.2;
      c.params.eta_c = 1000.0;
      c.params.eta_c_set = true;
      out.push_back({c.name, "multi-scale ComBCP with spanner exploration on the same instance", c});
    }
    {
      ExperimentConfig c;
      c.name = "trend";
      c.algorithm = "swap_combcp";
      c.horizons = {1000, 2000, 4000, 8000};
      c.seeds = seeds(1, 10);
      c.output = "out/trend";
      c.domain.kind = "m_sets";
      c.domain.d = 6;
      c.domain.m = 2;
      c.adversary.kind = "piecewise_switching";
      for (std::size_t b = 0; b < 4; ++b) {
        Vector v(6, 0.1);
        v[(2 * b) % 6] = 0.5;
        v[(2 * b + 1) % 6] = 0.5;
        c.adversary.blocks.push_back(v);
      }
      out.push_back({c.name, "swap regret growth under doubling horizons, 2-sets of 6, four switching blocks", c});
    }
    {
      ExperimentConfig c;
      c.name = "audit";
      c.algorithm = "swap_combcp";
      c.horizons = {81};
      c.seeds = seeds(1, 10);
      c.output = "out/audit";
      c.domain.kind = "m_sets";
      c.domain.d = 3;
      c.domain.m = 2;
      c.adversary.kind = "piecewise_switching";
      c.adversary.blocks = {{0.5, 0.5, 0.1}, {0.1, 0.5, 0.5}, {0.5, 0.1, 0.5}};
      c.adversary.block_length = 9;
      c.params.H = 3;
      c.params.K = 3;
      out.push_back({c.name, "instrumented run for the swap-regret decomposition audit", c});
    }
    {
      ExperimentConfig c;
      c.name = "anytime";
      c.algorithm = "swap_combcp";
      c.horizons = {1023};
      c.seeds = seeds(1, 5);
      c.output = "out/anytime";
      c.doubling = true;
      c.domain.kind = "m_sets";
      c.domain.d = 5;
      c.domain.m = 2;
      c.adversary.kind = "iid_stochastic";
      c.adversary.means = {0.8, 0.2, 0.6, 0.4, 0.3};
      c.adversary.seed = 17;
      out.push_back({c.name, "doubling-trick wrapper over stochastic rewards", c});
    }
    return out;
  }();
  return list;
}

const Scenario* find_scenario(const std::string& name) {
  for (const auto& s : scenarios()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

}  // namespace swapcomb
