#include "planted/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "planted/error.hpp"

namespace planted {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* s, std::size_t n) { bytes_.append(s, n); }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{u8()} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{u8()} << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    require(bytes_.size() - pos_ >= n, ErrorCode::kIo, "instance file is truncated");
  }
  std::string bytes_;
  std::size_t pos_ = 0;
};

void write_matrix(Writer& w, const Matrix& m) {
  w.i64(m.rows());
  w.i64(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
  }
}

Matrix read_matrix(Reader& r) {
  const std::int64_t rows = r.i64();
  const std::int64_t cols = r.i64();
  require(rows >= 0 && cols >= 0 && rows <= (1 << 20) && cols <= (1 << 20), ErrorCode::kIo,
          "instance file has an implausible shape");
  Matrix m(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) m(i, j) = r.f64();
  }
  return m;
}

void write_partition(Writer& w, const BalancedPartition& p) {
  w.u32(static_cast<std::uint32_t>(p.k));
  w.i64(p.size());
  for (int label : p.labels) w.u32(static_cast<std::uint32_t>(label));
}

BalancedPartition read_partition(Reader& r) {
  BalancedPartition p;
  p.k = static_cast<int>(r.u32());
  const std::int64_t size = r.i64();
  require(size >= 0 && size <= (1 << 24), ErrorCode::kIo, "partition size is implausible");
  p.labels.resize(size);
  for (auto& label : p.labels) {
    label = static_cast<int>(r.u32());
    require(label >= 0 && label < p.k, ErrorCode::kIo, "partition label out of range");
  }
  return p;
}

}  // namespace

void save_instance(const PlantedInstance& instance, const std::string& path) {
  Writer w;
  w.raw("PLNT", 4);
  w.u32(kInstanceVersion);
  w.u32(static_cast<std::uint32_t>(problem_of(instance.params)));
  w.f64(snr_of(instance.params));
  double shape = 0.0;
  std::int64_t k = 0;
  std::int64_t n = 0;
  if (const auto* p = std::get_if<SparsePcaParams>(&instance.params)) {
    shape = p->gamma;
    n = p->n;
  } else if (const auto* p = std::get_if<SubmatrixParams>(&instance.params)) {
    k = p->k;
    n = p->n;
  } else {
    const auto& c = std::get<ClusteringParams>(instance.params);
    shape = c.alpha;
    k = c.k;
    n = c.n;
  }
  w.f64(shape);
  w.i64(k);
  w.i64(n);
  w.u32(static_cast<std::uint32_t>(instance.hypothesis));
  w.u64(instance.seed);
  write_matrix(w, instance.x);
  w.u8(instance.truth ? 1 : 0);
  if (instance.truth) {
    const GroundTruth& t = *instance.truth;
    if (const auto* v = std::get_if<SparseSignVector>(&t)) {
      w.i64(static_cast<std::int64_t>(v->support.size()));
      for (std::size_t i = 0; i < v->support.size(); ++i) {
        w.i64(v->support[i]);
        w.u8(v->signs[i] < 0 ? 1 : 0);
      }
    } else if (const auto* p = std::get_if<BalancedPartition>(&t)) {
      write_partition(w, *p);
    } else {
      const auto& c = std::get<ClusteringTruth>(t);
      write_partition(w, c.partition);
      write_matrix(w, c.centers);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  require(static_cast<bool>(out), ErrorCode::kIo, "write to '" + path + "' failed");
}

PlantedInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes));
  require(r.raw(4) == "PLNT", ErrorCode::kIo, "not an instance file");
  require(r.u32() == kInstanceVersion, ErrorCode::kIo, "unsupported instance file version");
  const std::uint32_t tag = r.u32();
  require(tag <= 2, ErrorCode::kIo, "unknown problem tag");
  const double snr = r.f64();
  const double shape = r.f64();
  const std::int64_t k = r.i64();
  const std::int64_t n = r.i64();

  PlantedInstance inst;
  switch (static_cast<Problem>(tag)) {
    case Problem::kSparsePca: inst.params = SparsePcaParams{snr, shape, n}; break;
    case Problem::kSubmatrix: inst.params = SubmatrixParams{snr, static_cast<int>(k), n}; break;
    case Problem::kClustering:
      inst.params = ClusteringParams{snr, shape, static_cast<int>(k), n};
      break;
  }
  try {
    validate(inst.params);
  } catch (const Error& e) {
    fail(ErrorCode::kIo, std::string("instance parameters are invalid: ") + e.what());
  }
  const std::uint32_t hyp = r.u32();
  require(hyp <= 1, ErrorCode::kIo, "unknown hypothesis tag");
  inst.hypothesis = static_cast<Hypothesis>(hyp);
  inst.seed = r.u64();
  inst.x = read_matrix(r);
  const auto [rows, cols] = observed_shape(inst.params);
  require(inst.x.rows() == rows && inst.x.cols() == cols, ErrorCode::kIo,
          "matrix shape does not match the parameters");
  if (r.u8() != 0) {
    if (const auto* p = std::get_if<SparsePcaParams>(&inst.params)) {
      SparseSignVector v;
      v.n = p->n;
      v.gamma = p->gamma;
      const std::int64_t s = r.i64();
      require(s >= 0 && s <= p->n, ErrorCode::kIo, "support size out of range");
      for (std::int64_t i = 0; i < s; ++i) {
        v.support.push_back(r.i64());
        v.signs.push_back(r.u8() ? -1 : 1);
      }
      inst.truth = v;
    } else if (std::holds_alternative<SubmatrixParams>(inst.params)) {
      inst.truth = read_partition(r);
    } else {
      ClusteringTruth c;
      c.partition = read_partition(r);
      c.centers = read_matrix(r);
      inst.truth = c;
    }
  }
  require(r.done(), ErrorCode::kIo, "trailing bytes in instance file");
  return inst;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_matrix_text(const Matrix& x, std::ostream& out) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_real(x(i, j));
    }
    out << '\n';
  }
}

std::string bounds_to_json(const BoundSet& b) {
  nlohmann::ordered_json j;
  j["problem"] = problem_name(b.problem);
  switch (b.problem) {
    case Problem::kSparsePca: j["gamma"] = b.gamma; break;
    case Problem::kSubmatrix: j["k"] = b.k; break;
    case Problem::kClustering:
      j["k"] = b.k;
      j["alpha"] = b.alpha;
      break;
  }
  j["upper"] = b.upper;
  j["lower_theorem"] = b.lower_theorem;
  j["lower_psi"] = b.lower_psi ? nlohmann::ordered_json(*b.lower_psi) : nullptr;
  j["lower_lambert"] = b.lower_lambert ? nlohmann::ordered_json(*b.lower_lambert) : nullptr;
  j["spectral"] = b.spectral;
  return j.dump();
}

}  // namespace planted
