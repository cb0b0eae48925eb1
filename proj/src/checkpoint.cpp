#include "stackrl/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <type_traits>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stackrl/config.hpp"
#include "stackrl/errors.hpp"

namespace stackrl {
namespace {


template <class T>
void put_le(std::string& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const std::string& in, std::size_t at) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return v;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\\') out += "\\\\";
    else if (c == '\n') out += "\\n";
    else out.push_back(c);
  }
  return out;
}

std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      out.push_back(s[i] == 'n' ? '\n' : s[i]);
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw RuntimeFault("checkpoint header: bad integer list '" + s + "'");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw RuntimeFault("checkpoint header: bad value for '" + key + "': '" + s + "'");
  }
  return v;
}

constexpr std::size_t kPrefix = 4 + 4 + 8;

void write_arrays(std::string& out, const NetParams& p) {
  for (const auto& arr : p.arrays()) {
    for (double d : arr) put_le(out, std::bit_cast<std::uint64_t>(d));
  }
}

void read_arrays(const std::string& in, std::size_t& at, NetParams& p) {
  for (auto arr : p.arrays()) {
    if (at + arr.size() * 8 > in.size()) throw RuntimeFault("checkpoint truncated in parameter payload");
    for (double& d : arr) {
      d = std::bit_cast<double>(get_le<std::uint64_t>(in, at));
      at += 8;
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFault("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string CheckpointHeader::get(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  throw RuntimeFault("checkpoint header is missing '" + key + "'");
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  validate(ckpt.params);
  const NetShape shape = ckpt.params.shape();
  std::ostringstream h;
  h << "head=" << (shape.head == PolicyHead::kGaussian ? "gaussian" : "categorical") << "\n";
  h << "obs_dim=" << shape.obs_dim << "\n";
  h << "hidden=" << join_ints(shape.hidden) << "\n";
  h << "action_dim=" << shape.action_dim << "\n";
  h << "num_parameters=" << ckpt.params.num_parameters() << "\n";
  h << "stage=" << ckpt.stage << "\n";
  h << "lr=" << format_double(ckpt.lr) << "\n";
  h << "global_steps=" << ckpt.global_steps << "\n";
  h << "iteration=" << ckpt.iteration << "\n";
  h << "adam_steps=" << ckpt.adam.step_count << "\n";
  h << "config=" << escape(ckpt.config_text) << "\n";
  const std::string header = h.str();

  std::string out(kCheckpointMagic, 4);
  put_le(out, kCheckpointVersion);
  put_le(out, static_cast<std::uint64_t>(header.size()));
  out += header;
  write_arrays(out, ckpt.params);
  write_arrays(out, ckpt.adam.first_moment);
  write_arrays(out, ckpt.adam.second_moment);
  return out;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Write then rename so a crash never leaves a half-written checkpoint.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFault("cannot write checkpoint '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw RuntimeFault("failed writing checkpoint '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

CheckpointHeader parse_checkpoint_header(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw RuntimeFault("not a checkpoint: bad magic");
  }
  if (bytes.size() < kPrefix) throw RuntimeFault("checkpoint truncated in preamble");
  CheckpointHeader h;
  h.version = get_le<std::uint32_t>(bytes, 4);
  if (h.version != kCheckpointVersion) {
    throw RuntimeFault("checkpoint format version " + std::to_string(h.version) +
                       " is not supported (this build reads version " +
                       std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint64_t len = get_le<std::uint64_t>(bytes, 8);
  if (len > bytes.size() - kPrefix) throw RuntimeFault("checkpoint truncated in header");
  const std::string text = bytes.substr(kPrefix, static_cast<std::size_t>(len));
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(start, nl - start);
    start = nl + 1;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw RuntimeFault("checkpoint header: malformed line '" + line + "'");
    h.entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return h;
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  return parse_checkpoint_header(read_file(path));
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  const CheckpointHeader h = parse_checkpoint_header(bytes);
  NetShape shape;
  const std::string head = h.get("head");
  if (head == "gaussian") shape.head = PolicyHead::kGaussian;
  else if (head == "categorical") shape.head = PolicyHead::kCategorical;
  else throw RuntimeFault("checkpoint header: unknown head '" + head + "'");
  shape.obs_dim = parse_number<int>("obs_dim", h.get("obs_dim"));
  shape.hidden = split_ints(h.get("hidden"));
  shape.action_dim = parse_number<int>("action_dim", h.get("action_dim"));
  if (shape.obs_dim < 1 || shape.action_dim < 1) throw RuntimeFault("checkpoint header: bad shape");
  for (int w : shape.hidden) {
    if (w < 1) throw RuntimeFault("checkpoint header: bad hidden width");
  }

  Checkpoint c;
  c.params = NetParams::zeros(shape);
  if (parse_number<std::size_t>("num_parameters", h.get("num_parameters")) != c.params.num_parameters()) {
    throw RuntimeFault("checkpoint header: parameter count does not match the shape");
  }
  c.adam = AdamState::zeros_like(c.params);
  c.stage = parse_number<int>("stage", h.get("stage"));
  c.lr = parse_number<double>("lr", h.get("lr"));
  c.global_steps = parse_number<std::int64_t>("global_steps", h.get("global_steps"));
  c.iteration = parse_number<std::int64_t>("iteration", h.get("iteration"));
  c.adam.step_count = parse_number<std::int64_t>("adam_steps", h.get("adam_steps"));
  c.config_text = unescape(h.get("config"));

  std::size_t at = kPrefix + static_cast<std::size_t>(get_le<std::uint64_t>(bytes, 8));
  read_arrays(bytes, at, c.params);
  read_arrays(bytes, at, c.adam.first_moment);
  read_arrays(bytes, at, c.adam.second_moment);
  if (at != bytes.size()) throw RuntimeFault("checkpoint has trailing bytes after the payload");
  return c;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace stackrl
