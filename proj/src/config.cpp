#include "dembed/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "dembed/error.hpp"
#include "dembed/models.hpp"

namespace dembed {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

double to_double(const IniSection& s, const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)) != "" || !std::isfinite(v)) {
    fail("[" + s.name + "] " + key + ": not a number: '" + text + "'");
  }
  return v;
}

std::size_t to_count(const IniSection& s, const std::string& key, const std::string& text) {
  const double v = to_double(s, key, text);
  if (v < 0.0 || v != std::floor(v) || v > 1e18) fail("[" + s.name + "] " + key + ": expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

std::vector<double> to_list(const IniSection& s, const std::string& key, const std::string& text) {
  std::istringstream is(text);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(to_double(s, key, tok));
  if (out.empty()) fail("[" + s.name + "] " + key + ": empty list");
  return out;
}

bool to_bool(const IniSection& s, const std::string& key, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  fail("[" + s.name + "] " + key + ": expected true or false");
}

// Typed access that also records which keys were consumed.
class Reader {
 public:
  explicit Reader(const IniSection* s) : s_(s) {}

  bool present() const { return s_ != nullptr; }
  const std::string* raw(const std::string& key) {
    used_.insert(key);
    return s_ ? s_->find(key) : nullptr;
  }
  std::optional<double> number(const std::string& key) {
    const std::string* v = raw(key);
    return v ? std::optional<double>(to_double(*s_, key, *v)) : std::nullopt;
  }
  std::optional<std::size_t> count(const std::string& key) {
    const std::string* v = raw(key);
    return v ? std::optional<std::size_t>(to_count(*s_, key, *v)) : std::nullopt;
  }
  std::optional<std::vector<double>> list(const std::string& key) {
    const std::string* v = raw(key);
    return v ? std::optional<std::vector<double>>(to_list(*s_, key, *v)) : std::nullopt;
  }
  std::optional<bool> flag(const std::string& key) {
    const std::string* v = raw(key);
    return v ? std::optional<bool>(to_bool(*s_, key, *v)) : std::nullopt;
  }
  std::optional<std::string> text(const std::string& key) {
    const std::string* v = raw(key);
    return v ? std::optional<std::string>(*v) : std::nullopt;
  }
  void reject_unknown() const {
    if (!s_) return;
    for (const auto& [key, value] : s_->entries) {
      if (!used_.count(key)) fail("[" + s_->name + "] unknown key '" + key + "'");
    }
  }

 private:
  const IniSection* s_;
  std::set<std::string> used_;
};

BoxRegion bounds_box(Reader& r, const std::string& section, std::size_t k) {
  const auto lower = r.list("lower");
  const auto upper = r.list("upper");
  if (!lower || !upper) fail("[" + section + "] needs both lower and upper");
  if (lower->size() != k || upper->size() != k) fail("[" + section + "] bounds must have k = " + std::to_string(k) + " values");
  for (std::size_t i = 0; i < k; ++i) {
    if (!((*upper)[i] > (*lower)[i])) fail("[" + section + "] upper must exceed lower in every coordinate");
  }
  return BoxRegion::from_bounds(*lower, *upper);
}

}  // namespace

const std::string* IniSection::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

IniDocument IniDocument::parse(std::istream& is) {
  IniDocument doc;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("line " + std::to_string(lineno) + ": unterminated section header");
      doc.sections.push_back({trim(line.substr(1, line.size() - 2)), lineno, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("line " + std::to_string(lineno) + ": expected key = value");
    if (doc.sections.empty()) fail("line " + std::to_string(lineno) + ": key outside a section");
    std::string value = trim(line.substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
    const std::string key = trim(line.substr(0, eq));
    if (doc.sections.back().find(key)) fail("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    doc.sections.back().entries.emplace_back(key, value);
  }
  return doc;
}

std::vector<const IniSection*> IniDocument::all(const std::string& name) const {
  std::vector<const IniSection*> out;
  for (const IniSection& s : sections) {
    if (s.name == name) out.push_back(&s);
  }
  return out;
}

const IniSection* IniDocument::first(const std::string& name) const {
  const auto v = all(name);
  if (v.size() > 1) fail("section [" + name + "] given more than once");
  return v.empty() ? nullptr : v.front();
}

ExplicitMap synthetic_map(const std::string& name, std::size_t k, const IniSection& params) {
  Reader r(&params);
  if (name == "identity") {
    return [](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); };
  }
  if (name == "constant") {
    std::vector<double> c = r.list("value").value_or(std::vector<double>{0.0});
    if (c.size() == 1) c.assign(k, c[0]);
    if (c.size() != k) fail("[system] value must have 1 or k entries");
    return [c](std::span<const double>, std::span<double> y) { std::copy(c.begin(), c.end(), y.begin()); };
  }
  if (name == "contraction") {
    const double f = r.number("factor").value_or(0.5);
    return [f](std::span<const double> x, std::span<double> y) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = f * x[i];
    };
  }
  if (name == "hyperbolic") {
    std::vector<double> s = r.list("scales").value_or(std::vector<double>{0.5, 1.2});
    if (s.size() != k) fail("[system] scales must have k entries");
    return [s](std::span<const double> x, std::span<double> y) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = s[i] * x[i];
    };
  }
  if (name == "rotation") {
    if (k != 2) fail("[system] rotation needs dimension = 2");
    const double a = r.number("angle").value_or(1.0);
    const double c = std::cos(a), s = std::sin(a);
    return [c, s](std::span<const double> x, std::span<double> y) {
      y[0] = c * x[0] - s * x[1];
      y[1] = s * x[0] + c * x[1];
    };
  }
  fail("unknown synthetic map '" + name + "'");
}

RunSetup parse_config(std::istream& is) {
  std::stringstream buffer;
  buffer << is.rdbuf();
  RunSetup setup;
  setup.source = buffer.str();
  std::istringstream text(setup.source);
  const IniDocument doc = IniDocument::parse(text);

  static const std::set<std::string> known{"system", "embedding", "observable", "domain", "exclude", "run", "output", "simulate"};
  for (const IniSection& s : doc.sections) {
    if (!known.count(s.name)) fail("unknown section [" + s.name + "]");
  }

  const IniSection* sys_section = doc.first("system");
  if (!sys_section) fail("missing [system] section");
  Reader sys(sys_section);
  std::optional<ModelPreset> preset;
  if (const auto name = sys.text("preset")) {
    preset = find_preset(*name);
    if (!preset) fail("[system] unknown preset '" + *name + "'");
    setup.system_label = preset->name;
    setup.system = preset->system;
    setup.embedding = preset->embedding;
    setup.domain = preset->domain;
    setup.excluded = preset->excluded;
    setup.equilibria = preset->equilibria;
    setup.k = preset->embedding.layout.k();
  } else if (const auto rhs = sys.text("rhs")) {
    const double tau = sys.number("tau").value_or(1.0);
    if (!(tau > 0.0)) fail("[system] tau must be positive");
    if (*rhs == "wright") {
      setup.system = wright_system(sys.number("alpha").value_or(2.0));
      setup.system->tau = tau;
    } else if (*rhs == "arneodo") {
      setup.system = arneodo_system(sys.number("alpha").value_or(2.5), tau);
    } else if (*rhs == "mackey-glass") {
      setup.system = mackey_glass_system(sys.number("beta").value_or(2.0), sys.number("gamma").value_or(1.0),
                                         sys.number("eta").value_or(9.65), tau);
    } else if (*rhs == "linear") {
      setup.system = linear_system(sys.number("a").value_or(0.0), sys.number("b").value_or(-1.0), tau);
    } else {
      fail("[system] unknown rhs '" + *rhs + "'");
    }
    if (const auto n = sys.count("n"); n && *n != setup.system->n) fail("[system] n does not match the rhs");
    setup.system_label = *rhs;
  } else if (const auto synth = sys.text("synthetic")) {
    const auto k = sys.count("dimension");
    if (!k || *k == 0) fail("[system] synthetic maps need dimension >= 1");
    setup.k = *k;
    setup.synthetic = synthetic_map(*synth, *k, *sys_section);
    for (const char* key : {"value", "factor", "scales", "angle"}) sys.raw(key);
    setup.system_label = "synthetic:" + *synth;
  } else {
    fail("[system] needs one of preset, rhs or synthetic");
  }
  sys.reject_unknown();

  // Embedding: preset defaults, overridden key by key.
  Reader emb(doc.first("embedding"));
  const auto observables = doc.all("observable");
  if (setup.system) {
    const DdeSystem& s = *setup.system;
    const auto k = emb.count("k");
    const auto K = emb.count("K");
    std::optional<ObservableLayout> layout;
    try {
      if (!observables.empty()) {
        std::vector<Observable> obs;
        for (const IniSection* os : observables) {
          Reader o(os);
          const auto comp = o.count("component");
          const auto nu = o.number("nu");
          const auto count = o.count("count");
          const auto div = o.count("divisor");
          o.reject_unknown();
          if (!comp || *comp == 0) fail("[observable] component (1-based) is required");
          obs.push_back(Observable{*comp - 1, nu.value_or(-s.tau), count.value_or(1), div.value_or(1)});
        }
        std::size_t divisor = K.value_or(0);
        if (divisor == 0) {
          for (const Observable& o : obs) divisor = std::max(divisor, o.divisor);
        }
        layout.emplace(s.n, s.tau, std::move(obs), divisor);
      } else if (k || K || !setup.embedding) {
        if (s.n != 1) fail("[embedding] systems with n > 1 need [observable] sections");
        const std::size_t kk = k.value_or(setup.embedding ? setup.embedding->layout.k() : 5);
        if (kk < 2) fail("[embedding] k must be at least 2 for a scalar layout");
        const std::size_t KK = K.value_or(kk - 1);
        layout.emplace(1, s.tau, std::vector<Observable>{Observable{0, -s.tau, kk, KK}}, KK);
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      fail(std::string("[embedding] invalid layout: ") + e.what());
    }
    if (!layout) layout = setup.embedding->layout;
    if (k && *k != layout->k()) fail("[embedding] k does not equal the sum of observable counts");
    EmbeddingConfig cfg{*layout, setup.embedding ? setup.embedding->m : 1,
                        setup.embedding ? setup.embedding->d_bound : 0.0,
                        setup.embedding ? setup.embedding->sigma_bound : 0.0,
                        setup.embedding ? setup.embedding->p : 3};
    if (const auto m = emb.count("m")) cfg.m = *m;
    if (const auto d = emb.number("d_bound")) cfg.d_bound = *d;
    if (const auto sg = emb.number("sigma_bound")) cfg.sigma_bound = *sg;
    if (const auto p = emb.count("p")) cfg.p = *p;
    if (cfg.m == 0) fail("[embedding] m must be >= 1");
    if (cfg.d_bound < 0.0 || cfg.sigma_bound < 0.0) fail("[embedding] dimension bounds must be >= 0");
    setup.embedding = std::move(cfg);
    setup.k = setup.embedding->layout.k();
  } else if (emb.present() || !observables.empty()) {
    fail("[embedding] and [observable] apply to delay equations only");
  }
  emb.reject_unknown();

  Reader dom(doc.first("domain"));
  if (dom.present()) {
    setup.domain = bounds_box(dom, "domain", setup.k);
  } else if (!preset) {
    fail("missing [domain] section");
  }
  dom.reject_unknown();
  if (setup.domain.dim() != setup.k) fail("[domain] needed: the preset domain has " + std::to_string(setup.domain.dim()) +
                                          " coordinates but k = " + std::to_string(setup.k));
  const auto excludes = doc.all("exclude");
  if (!excludes.empty()) {
    setup.excluded.clear();
  } else if (!setup.excluded.empty() && setup.excluded.front().dim() != setup.k) {
    fail("[exclude] needed: the preset excluded regions do not match k = " + std::to_string(setup.k));
  }
  for (const IniSection* es : excludes) {
    Reader e(es);
    setup.excluded.push_back(bounds_box(e, "exclude", setup.k));
    e.reject_unknown();
  }

  Reader run(doc.first("run"));
  setup.run.steps = run.count("steps").value_or(20);
  setup.run.points_per_box = run.count("points_per_box").value_or(100);
  setup.run.seed = run.count("seed").value_or(0);
  setup.run.threads = run.count("threads").value_or(0);
  setup.run.max_payloads_per_box = run.count("max_payloads_per_box").value_or(32);
  setup.checkpoint_every = run.count("checkpoint_every").value_or(0);
  setup.checkpoint_from = run.count("checkpoint_from").value_or(setup.checkpoint_every);
  setup.steps_per_delay = run.count("steps_per_delay").value_or(0);
  run.reject_unknown();

  Reader out(doc.first("output"));
  setup.output_dir = out.text("directory").value_or("out");
  setup.write_checkpoints = out.flag("checkpoints").value_or(true);
  out.reject_unknown();

  Reader sim(doc.first("simulate"));
  setup.simulate.transient = sim.number("transient").value_or(200.0);
  setup.simulate.samples = sim.count("samples").value_or(500);
  setup.simulate.spacing = sim.number("spacing").value_or(0.0);
  setup.simulate.initial = sim.list("initial").value_or(std::vector<double>{});
  sim.reject_unknown();
  if (setup.system && !setup.simulate.initial.empty() && setup.simulate.initial.size() != setup.system->n) {
    fail("[simulate] initial must have n values");
  }
  return setup;
}

RunSetup load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail("cannot read config file " + path);
  return parse_config(is);
}

}  // namespace dembed
