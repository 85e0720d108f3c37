// models.bin layout (all integers and IEEE-754 doubles little-endian):
//
//   magic         8 bytes  "AROUSLDB"
//   version       u32
//   schema_hash   u64
//   schema_ver    str      (u32 length + bytes)
//   n_features    u32
//   epoch_s       f64
//   wamp_factor   f64, eog_window u32, airflow_window u32, xcorr_lag_s f64
//   n_models      u32
//   per model:    subject str, n_epochs u32, arousal u32, non_arousal u32,
//                 n_trees u32, max_depth u32, min_leaf u32, bootstrap f64,
//                 seed u64, tree_count u32,
//                 per tree: n_nodes u32, then per node
//                   feature i32, threshold f64, left i32, right i32,
//                   arousal_fraction f64, n_train u32
//   checksum      u64      FNV-1a of every preceding byte

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "arousal/classifier.hpp"

namespace arousal {
namespace {

constexpr char kMagic[8] = {'A', 'R', 'O', 'U', 'S', 'L', 'D', 'B'};

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) { uint(v); }
  void i32(std::int32_t v) { uint(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) { uint(v); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t n) : data_(data), n_(n) {}

  template <typename T>
  T uint() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(data_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::uint32_t u32() { return uint<std::uint32_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(uint<std::uint32_t>()); }
  std::uint64_t u64() { return uint<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string str() {
    const std::uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
    pos_ += len;
    return s;
  }
  void expect_raw(const char* p, std::size_t n, const char* what) {
    need(n);
    if (std::memcmp(data_ + pos_, p, n) != 0) throw ModelDbError(ModelDbError::Kind::Corrupt, what);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t k) const {
    if (n_ - pos_ < k) throw ModelDbError(ModelDbError::Kind::Corrupt, "model database truncated");
  }
  const std::uint8_t* data_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

[[noreturn]] void corrupt(const std::string& what) { throw ModelDbError(ModelDbError::Kind::Corrupt, what); }

void validate_tree(const Tree& tree, std::uint32_t n_features) {
  const auto n = static_cast<std::int32_t>(tree.nodes.size());
  if (n == 0) corrupt("empty tree");
  for (std::int32_t i = 0; i < n; ++i) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(i)];
    if (node.is_leaf()) {
      if (!(node.arousal_fraction >= 0.0 && node.arousal_fraction <= 1.0)) corrupt("leaf fraction outside [0,1]");
    } else {
      if (static_cast<std::uint32_t>(node.feature) >= n_features) corrupt("split feature index out of range");
      if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) corrupt("bad child index");
      if (!std::isfinite(node.threshold)) corrupt("non-finite threshold");
    }
  }
}

}  // namespace

void save_db(const ModelDatabase& db, const std::filesystem::path& path) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kModelDbVersion);
  w.u64(db.schema_hash);
  w.str(db.schema_version);
  w.u32(static_cast<std::uint32_t>(kFeatureCount));
  w.f64(db.epoch_seconds);
  w.f64(db.feature_config.wamp_threshold_factor);
  w.u32(static_cast<std::uint32_t>(db.feature_config.eog_smooth_window));
  w.u32(static_cast<std::uint32_t>(db.feature_config.airflow_smooth_window));
  w.f64(db.feature_config.xcorr_max_lag_s);
  w.u32(static_cast<std::uint32_t>(db.models.size()));
  for (const auto& m : db.models) {
    w.str(m.subject_id);
    w.u32(m.n_epochs_train);
    w.u32(m.class_counts.arousal);
    w.u32(m.class_counts.non_arousal);
    const auto& p = m.ensemble.params;
    w.u32(p.n_trees);
    w.u32(p.max_depth);
    w.u32(p.min_leaf);
    w.f64(p.bootstrap_fraction);
    w.u64(p.seed);
    w.u32(static_cast<std::uint32_t>(m.ensemble.trees.size()));
    for (const auto& t : m.ensemble.trees) {
      w.u32(static_cast<std::uint32_t>(t.nodes.size()));
      for (const auto& node : t.nodes) {
        w.i32(node.feature);
        w.f64(node.threshold);
        w.i32(node.left);
        w.i32(node.right);
        w.f64(node.arousal_fraction);
        w.u32(node.n_train);
      }
    }
  }
  auto& bytes = w.bytes();
  w.u64(fnv1a(bytes.data(), bytes.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelDbError(ModelDbError::Kind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ModelDbError(ModelDbError::Kind::Io, "write failed: " + path.string());
}

ModelDatabase load_db(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelDbError(ModelDbError::Kind::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

  Reader r(bytes.data(), bytes.size());
  r.expect_raw(kMagic, sizeof kMagic, "not a model database (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kModelDbVersion) {
    throw ModelDbError(ModelDbError::Kind::Version, "model database version " + std::to_string(version) +
                                                        ", this build reads version " +
                                                        std::to_string(kModelDbVersion));
  }
  if (bytes.size() < 8 + sizeof(std::uint64_t) * 2) corrupt("model database truncated");
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored = 0;
  for (std::size_t i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(bytes[body + i]) << (8 * i);
  if (stored != fnv1a(bytes.data(), body)) corrupt("model database checksum mismatch");
  Reader payload(bytes.data(), body);
  payload.expect_raw(kMagic, sizeof kMagic, "bad magic");
  payload.u32();

  ModelDatabase db;
  db.schema_hash = payload.u64();
  db.schema_version = payload.str();
  const std::uint32_t n_features = payload.u32();
  if (db.schema_hash != schema_hash() || db.schema_version != kSchemaVersion || n_features != kFeatureCount) {
    throw ModelDbError(ModelDbError::Kind::SchemaMismatch,
                       "model database was built for feature schema '" + db.schema_version + "' (hash " +
                           std::to_string(db.schema_hash) + "), incompatible with '" + kSchemaVersion + "' (hash " +
                           std::to_string(schema_hash()) + ")");
  }
  db.epoch_seconds = payload.f64();
  db.feature_config.wamp_threshold_factor = payload.f64();
  db.feature_config.eog_smooth_window = payload.u32();
  db.feature_config.airflow_smooth_window = payload.u32();
  db.feature_config.xcorr_max_lag_s = payload.f64();

  const std::uint32_t n_models = payload.u32();
  for (std::uint32_t k = 0; k < n_models; ++k) {
    SubjectModel m;
    m.subject_id = payload.str();
    m.n_epochs_train = payload.u32();
    m.class_counts.arousal = payload.u32();
    m.class_counts.non_arousal = payload.u32();
    auto& p = m.ensemble.params;
    p.n_trees = payload.u32();
    p.max_depth = payload.u32();
    p.min_leaf = payload.u32();
    p.bootstrap_fraction = payload.f64();
    p.seed = payload.u64();
    const std::uint32_t tree_count = payload.u32();
    if (tree_count != p.n_trees || tree_count == 0) corrupt("tree count disagrees with n_trees for " + m.subject_id);
    for (std::uint32_t t = 0; t < tree_count; ++t) {
      Tree tree;
      const std::uint32_t n_nodes = payload.u32();
      if (n_nodes > body) corrupt("implausible node count");
      tree.nodes.resize(n_nodes);
      for (auto& node : tree.nodes) {
        node.feature = payload.i32();
        node.threshold = payload.f64();
        node.left = payload.i32();
        node.right = payload.i32();
        node.arousal_fraction = payload.f64();
        node.n_train = payload.u32();
      }
      validate_tree(tree, n_features);
      m.ensemble.trees.push_back(std::move(tree));
    }
    if (!db.models.empty() && !(db.models.back().subject_id < m.subject_id)) {
      corrupt("subject ids not sorted and unique at " + m.subject_id);
    }
    db.models.push_back(std::move(m));
  }
  if (payload.pos() != body) corrupt("trailing bytes in model database");
  return db;
}

}  // namespace arousal
