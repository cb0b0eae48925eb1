#include "stackrl/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "stackrl/errors.hpp"

namespace stackrl {
namespace {

struct Value {
  enum class Kind { kInt, kFloat, kBool, kString, kArray };
  Kind kind = Kind::kInt;
  std::int64_t i = 0;
  double d = 0.0;
  bool b = false;
  std::string s;
  std::vector<Value> items;
  int line = 0;
};

struct Entry {
  std::string key;
  Value value;
  bool used = false;
};

struct Table {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;

  Entry* find(std::string_view key) {
    for (auto& e : entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }
};

struct Document {
  Table root;
  std::vector<Table> sections;
  std::vector<Table> stages;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-';
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!is_key_char(c)) return false;
  }
  return true;
}

// Drops a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_string && c == '\\') {
      ++i;
    } else if (c == '"') {
      in_string = !in_string;
    } else if (c == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, int line) : text_(text), line_(line) {}

  Value parse() {
    Value v = value();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(line_, msg); }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  Value value() {
    skip_ws();
    if (pos_ >= text_.size()) fail("missing value");
    Value v;
    v.line = line_;
    const char c = text_[pos_];
    if (c == '"') {
      v.kind = Value::Kind::kString;
      v.s = string_literal();
    } else if (c == '[') {
      v.kind = Value::Kind::kArray;
      ++pos_;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.items.push_back(value());
        if (v.items.back().kind == Value::Kind::kArray) fail("nested arrays are not supported");
        skip_ws();
        if (pos_ >= text_.size()) fail("unterminated array");
        if (text_[pos_] == ',') {
          ++pos_;
          skip_ws();
          if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            break;
          }
          continue;
        }
        if (text_[pos_] == ']') {
          ++pos_;
          break;
        }
        fail("expected ',' or ']' in array");
      }
    } else {
      std::size_t end = pos_;
      while (end < text_.size() && text_[end] != ',' && text_[end] != ']' && text_[end] != ' ' &&
             text_[end] != '\t') {
        ++end;
      }
      const std::string_view tok = text_.substr(pos_, end - pos_);
      pos_ = end;
      scalar(tok, v);
    }
    return v;
  }

  std::string string_literal() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= text_.size()) break;
      const char e = text_[pos_++];
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        default: fail(std::string("unsupported escape '\\") + e + "'");
      }
    }
    fail("unterminated string");
  }

  void scalar(std::string_view tok, Value& v) {
    if (tok == "true" || tok == "false") {
      v.kind = Value::Kind::kBool;
      v.b = tok == "true";
      return;
    }
    std::string clean;
    for (char c : tok) {
      if (c != '_') clean.push_back(c);
    }
    std::string_view num = clean;
    if (!num.empty() && num.front() == '+') num.remove_prefix(1);
    if (num.empty()) fail("invalid value '" + std::string(tok) + "'");
    const bool is_float = num.find_first_of(".eE") != std::string_view::npos ||
                          num.find("inf") != std::string_view::npos ||
                          num.find("nan") != std::string_view::npos;
    const char* first = num.data();
    const char* last = num.data() + num.size();
    if (!is_float) {
      auto [p, ec] = std::from_chars(first, last, v.i);
      if (ec == std::errc() && p == last) {
        v.kind = Value::Kind::kInt;
        v.d = static_cast<double>(v.i);
        return;
      }
      if (ec == std::errc::result_out_of_range) fail("integer out of range '" + std::string(tok) + "'");
    }
    auto [p, ec] = std::from_chars(first, last, v.d);
    if (ec != std::errc() || p != last) fail("invalid value '" + std::string(tok) + "'");
    v.kind = Value::Kind::kFloat;
  }

  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

Document parse_document(std::string_view text) {
  Document doc;
  Table* current = &doc.root;
  std::vector<std::string> seen_sections;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view raw =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.starts_with("[[")) {
      if (!line.ends_with("]]")) throw ConfigError(line_no, "malformed array table header");
      const std::string name(trim(line.substr(2, line.size() - 4)));
      if (name != "stage") throw ConfigError(line_no, "unknown array table [[" + name + "]]");
      doc.stages.push_back(Table{name, line_no, {}});
      current = &doc.stages.back();
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "malformed section header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(name)) throw ConfigError(line_no, "invalid section name '" + name + "'");
      for (const auto& s : seen_sections) {
        if (s == name) throw ConfigError(line_no, "duplicate section [" + name + "]");
      }
      seen_sections.push_back(name);
      doc.sections.push_back(Table{name, line_no, {}});
      current = &doc.sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_key(key)) throw ConfigError(line_no, "invalid key '" + key + "'");
    if (current->find(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
    Value v = ValueParser(trim(line.substr(eq + 1)), line_no).parse();
    current->entries.push_back(Entry{key, std::move(v), false});
  }
  return doc;
}

std::string where(const Table& t) {
  if (t.name.empty()) return "top level";
  if (t.name == "stage") return "[[stage]]";
  return "[" + t.name + "]";
}

// Typed readers. Each marks the key as consumed so leftovers can be reported.
class Reader {
 public:
  explicit Reader(Table& t) : t_(t) {}

  template <class Fn>
  void with(std::string_view key, Fn&& fn) {
    Entry* e = t_.find(key);
    if (!e) return;
    e->used = true;
    try {
      fn(e->value);
    } catch (const ConfigError& err) {
      if (err.line() != 0) throw;
      throw ConfigError(e->value.line, std::string(key) + ": " + err.what());
    }
  }

  void integer(std::string_view key, int& out, int min_value) {
    std::int64_t v = out;
    integer64(key, v, min_value);
    if (v > std::numeric_limits<int>::max()) bad(key, "value too large");
    out = static_cast<int>(v);
  }

  void integer64(std::string_view key, std::int64_t& out, std::int64_t min_value) {
    with(key, [&](const Value& v) {
      if (v.kind != Value::Kind::kInt) bad(key, "expected an integer");
      if (v.i < min_value) bad(key, "must be >= " + std::to_string(min_value));
      out = v.i;
    });
  }

  void unsigned64(std::string_view key, std::uint64_t& out) {
    with(key, [&](const Value& v) {
      if (v.kind != Value::Kind::kInt || v.i < 0) bad(key, "expected a non-negative integer");
      out = static_cast<std::uint64_t>(v.i);
    });
  }

  void real(std::string_view key, double& out) {
    with(key, [&](const Value& v) {
      if (v.kind != Value::Kind::kInt && v.kind != Value::Kind::kFloat) bad(key, "expected a number");
      if (!std::isfinite(v.d)) bad(key, "must be finite");
      out = v.d;
    });
  }

  void boolean(std::string_view key, bool& out) {
    with(key, [&](const Value& v) {
      if (v.kind != Value::Kind::kBool) bad(key, "expected true or false");
      out = v.b;
    });
  }

  void string(std::string_view key, std::string& out) {
    with(key, [&](const Value& v) {
      if (v.kind != Value::Kind::kString) bad(key, "expected a quoted string");
      out = v.s;
    });
  }

  template <class E, std::size_t N>
  void choice(std::string_view key, E& out, const std::array<E, N>& options) {
    with(key, [&](const Value& v) {
      if (v.kind != Value::Kind::kString) bad(key, "expected a quoted string");
      std::string allowed;
      for (E o : options) {
        if (v.s == to_string(o)) {
          out = o;
          return;
        }
        allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(o));
      }
      bad(key, "unknown value '" + v.s + "' (expected one of " + allowed + ")");
    });
  }

  void int_list(std::string_view key, std::vector<int>& out) {
    with(key, [&](const Value& v) {
      if (v.kind != Value::Kind::kArray) bad(key, "expected an array of integers");
      std::vector<int> r;
      for (const auto& item : v.items) {
        if (item.kind != Value::Kind::kInt || item.i < 1 ||
            item.i > std::numeric_limits<int>::max()) {
          bad(key, "entries must be positive integers");
        }
        r.push_back(static_cast<int>(item.i));
      }
      out = std::move(r);
    });
  }

  int line_of(std::string_view key) const {
    for (const auto& e : t_.entries) {
      if (e.key == key) return e.value.line;
    }
    return t_.line;
  }

  void reject_unused() const {
    for (const auto& e : t_.entries) {
      if (!e.used) throw ConfigError(e.value.line, "unknown key '" + e.key + "' in " + where(t_));
    }
  }

 private:
  [[noreturn]] void bad(std::string_view key, const std::string& msg) const {
    throw ConfigError(line_of(key), std::string(key) + ": " + msg);
  }

  Table& t_;
};

constexpr std::array kEnvKinds{EnvKind::kMaze, EnvKind::kStacker};
constexpr std::array kPaddingModes{PaddingMode::kZeros, PaddingMode::kOnes,
                                   PaddingMode::kPermutation};
constexpr std::array kRewardModes{RewardMode::kShapedSet, RewardMode::kStaggered,
                                  RewardMode::kAbsolute};
constexpr std::array kLrModes{LrMode::kFixed, LrMode::kKlAdaptive};

// Re-anchors an unanchored validation error to a line.
template <class Fn>
void anchored(int line, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    if (e.line() != 0 || line == 0) throw;
    throw ConfigError(line, e.what());
  }
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(EnvKind v) { return v == EnvKind::kMaze ? "maze" : "stacker"; }

std::string_view to_string(PaddingMode v) {
  switch (v) {
    case PaddingMode::kZeros: return "zeros";
    case PaddingMode::kOnes: return "ones";
    case PaddingMode::kPermutation: return "permutation";
  }
  return "?";
}

std::string_view to_string(RewardMode v) {
  switch (v) {
    case RewardMode::kShapedSet: return "shaped_set";
    case RewardMode::kStaggered: return "staggered";
    case RewardMode::kAbsolute: return "absolute";
  }
  return "?";
}

std::string_view to_string(LrMode v) { return v == LrMode::kFixed ? "fixed" : "kl_adaptive"; }

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, p);
  if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

void validate(const RunConfig& cfg) {
  if (cfg.seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw ConfigError("seed must fit in a signed 64-bit integer");
  }
  if (cfg.num_envs < 1) throw ConfigError("num_envs must be >= 1");
  if (cfg.shards < 1) throw ConfigError("shards must be >= 1");
  if (cfg.total_steps < 1) throw ConfigError("total_steps must be >= 1");
  if (cfg.accuracy_window < 1) throw ConfigError("accuracy_window must be >= 1");
  if (cfg.eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (cfg.checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  for (int h : cfg.hidden) {
    if (h < 1) throw ConfigError("network.hidden sizes must be >= 1");
  }
  cfg.ppo.validate();
  cfg.gae.validate();
  auto stages = cfg.stages;
  validate_schedule(stages);
  for (const auto& s : stages) {
    (void)apply_stage(s, cfg.env, cfg.ppo, cfg.ppo.lr);
    const std::int64_t window = static_cast<std::int64_t>(s.horizon_length) * cfg.num_envs;
    if (window % cfg.ppo.minibatch_size != 0) {
      throw ConfigError("minibatch_size " + std::to_string(cfg.ppo.minibatch_size) +
                        " does not divide horizon x num_envs = " + std::to_string(window) +
                        " of stage " + std::to_string(s.index));
    }
  }
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  Document doc = parse_document(text);
  RunConfig cfg;

  Reader top(doc.root);
  top.unsigned64("seed", cfg.seed);
  top.integer("num_envs", cfg.num_envs, 1);
  top.integer("shards", cfg.shards, 1);
  top.integer64("total_steps", cfg.total_steps, 1);
  top.string("output_dir", cfg.output_dir);
  top.integer("checkpoint_every", cfg.checkpoint_every, 0);
  top.boolean("stop_on_solve", cfg.stop_on_solve);
  top.integer("accuracy_window", cfg.accuracy_window, 1);
  top.boolean("eval_switching", cfg.eval_switching);
  top.integer("eval_episodes", cfg.eval_episodes, 1);
  top.boolean("bootstrap_on_timeout", cfg.bootstrap_on_timeout);
  top.reject_unused();

  int env_line = 0;
  int ppo_line = 0;
  for (Table& t : doc.sections) {
    Reader r(t);
    if (t.name == "network") {
      r.int_list("hidden", cfg.hidden);
    } else if (t.name == "env") {
      env_line = t.line;
      EnvConfig& e = cfg.env;
      r.choice("kind", e.kind, kEnvKinds);
      r.integer("num_objects", e.num_objects, 1);
      r.choice("padding_mode", e.padding_mode, kPaddingModes);
      r.choice("reward_mode", e.reward_mode, kRewardModes);
      r.real("grasp_epsilon", e.grasp_epsilon);
      r.real("stack_epsilon", e.stack_epsilon);
      r.real("table_theta", e.table_theta);
      r.real("cube_height", e.cube_height);
      r.real("step_scale", e.step_scale);
      r.real("perturbation", e.perturbation);
      r.real("workspace_height", e.workspace_height);
      r.string("maze_wall_file", e.maze_wall_file);
      if (!e.maze_wall_file.empty() && !base_dir.empty()) {
        std::filesystem::path p(e.maze_wall_file);
        if (p.is_relative()) e.maze_wall_file = std::filesystem::absolute(base_dir / p).lexically_normal().string();
      }
    } else if (t.name == "rewards") {
      for (std::size_t k = 0; k < kNumSignals; ++k) {
        const auto s = static_cast<Signal>(k);
        r.real(signal_name(s), cfg.env.rewards[s]);
      }
    } else if (t.name == "ppo") {
      ppo_line = t.line;
      PpoConfig& p = cfg.ppo;
      r.real("clip_epsilon", p.clip_epsilon);
      r.real("kl_threshold", p.kl_threshold);
      r.choice("lr_mode", p.lr_mode, kLrModes);
      r.real("lr", p.lr);
      r.boolean("lr_reset_on_stage", p.lr_reset_on_stage);
      r.integer("mini_epochs", p.mini_epochs, 1);
      r.integer("minibatch_size", p.minibatch_size, 1);
      r.real("value_coef", p.value_coef);
      r.real("entropy_coef", p.entropy_coef);
      r.real("reward_scale", p.reward_scale);
      anchored(t.line, [&] { p.validate(); });
    } else if (t.name == "gae") {
      r.real("gamma", cfg.gae.gamma);
      r.real("tau", cfg.gae.tau);
      anchored(t.line, [&] { cfg.gae.validate(); });
    } else {
      throw ConfigError(t.line, "unknown section [" + t.name + "]");
    }
    r.reject_unused();
  }

  if (!doc.stages.empty()) {
    cfg.stages.clear();
    for (Table& t : doc.stages) {
      Reader r(t);
      CurriculumStage s;
      s.index = static_cast<int>(cfg.stages.size());
      r.integer("objects", s.active_objects, 1);
      r.integer("ep_len", s.max_episode_length, 1);
      r.integer("horizon", s.horizon_length, 1);
      r.reject_unused();
      cfg.stages.push_back(s);
    }
    for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
      anchored(doc.stages[i].line, [&] {
        std::vector<CurriculumStage> prefix(cfg.stages.begin(),
                                            cfg.stages.begin() + static_cast<long>(i) + 1);
        validate_schedule(prefix);
        (void)apply_stage(cfg.stages[i], cfg.env, cfg.ppo, cfg.ppo.lr);
        const std::int64_t window =
            static_cast<std::int64_t>(cfg.stages[i].horizon_length) * cfg.num_envs;
        if (window % cfg.ppo.minibatch_size != 0) {
          throw ConfigError("minibatch_size " + std::to_string(cfg.ppo.minibatch_size) +
                            " does not divide horizon x num_envs = " + std::to_string(window));
        }
      });
    }
  }

  anchored(env_line, [&] {
    EnvConfig probe = cfg.env;
    probe.active_objects = 1;
    probe.validate();
  });
  anchored(ppo_line, [&] { validate(cfg); });
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".")
                                                               : path.parent_path());
}

std::string write_run_config(const RunConfig& cfg) {
  std::ostringstream o;
  o << "seed = " << cfg.seed << "\n";
  o << "num_envs = " << cfg.num_envs << "\n";
  o << "shards = " << cfg.shards << "\n";
  o << "total_steps = " << cfg.total_steps << "\n";
  o << "output_dir = " << quote(cfg.output_dir) << "\n";
  o << "checkpoint_every = " << cfg.checkpoint_every << "\n";
  o << "stop_on_solve = " << (cfg.stop_on_solve ? "true" : "false") << "\n";
  o << "accuracy_window = " << cfg.accuracy_window << "\n";
  o << "eval_switching = " << (cfg.eval_switching ? "true" : "false") << "\n";
  o << "eval_episodes = " << cfg.eval_episodes << "\n";
  o << "bootstrap_on_timeout = " << (cfg.bootstrap_on_timeout ? "true" : "false") << "\n";

  o << "\n[network]\nhidden = [";
  for (std::size_t i = 0; i < cfg.hidden.size(); ++i) o << (i ? ", " : "") << cfg.hidden[i];
  o << "]\n";

  const EnvConfig& e = cfg.env;
  o << "\n[env]\n";
  o << "kind = " << quote(to_string(e.kind)) << "\n";
  o << "num_objects = " << e.num_objects << "\n";
  o << "padding_mode = " << quote(to_string(e.padding_mode)) << "\n";
  o << "reward_mode = " << quote(to_string(e.reward_mode)) << "\n";
  o << "grasp_epsilon = " << format_double(e.grasp_epsilon) << "\n";
  o << "stack_epsilon = " << format_double(e.stack_epsilon) << "\n";
  o << "table_theta = " << format_double(e.table_theta) << "\n";
  o << "cube_height = " << format_double(e.cube_height) << "\n";
  o << "step_scale = " << format_double(e.step_scale) << "\n";
  o << "perturbation = " << format_double(e.perturbation) << "\n";
  o << "workspace_height = " << format_double(e.workspace_height) << "\n";
  o << "maze_wall_file = " << quote(e.maze_wall_file) << "\n";

  o << "\n[rewards]\n";
  for (std::size_t k = 0; k < kNumSignals; ++k) {
    const auto s = static_cast<Signal>(k);
    o << signal_name(s) << " = " << format_double(e.rewards[s]) << "\n";
  }

  const PpoConfig& p = cfg.ppo;
  o << "\n[ppo]\n";
  o << "clip_epsilon = " << format_double(p.clip_epsilon) << "\n";
  o << "kl_threshold = " << format_double(p.kl_threshold) << "\n";
  o << "lr_mode = " << quote(to_string(p.lr_mode)) << "\n";
  o << "lr = " << format_double(p.lr) << "\n";
  o << "lr_reset_on_stage = " << (p.lr_reset_on_stage ? "true" : "false") << "\n";
  o << "mini_epochs = " << p.mini_epochs << "\n";
  o << "minibatch_size = " << p.minibatch_size << "\n";
  o << "value_coef = " << format_double(p.value_coef) << "\n";
  o << "entropy_coef = " << format_double(p.entropy_coef) << "\n";
  o << "reward_scale = " << format_double(p.reward_scale) << "\n";

  o << "\n[gae]\n";
  o << "gamma = " << format_double(cfg.gae.gamma) << "\n";
  o << "tau = " << format_double(cfg.gae.tau) << "\n";

  for (const auto& s : cfg.stages) {
    o << "\n[[stage]]\n";
    o << "objects = " << s.active_objects << "\n";
    o << "ep_len = " << s.max_episode_length << "\n";
    o << "horizon = " << s.horizon_length << "\n";
  }
  return o.str();
}

}  // namespace stackrl
