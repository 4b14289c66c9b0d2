#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "planted/error.hpp"
#include "planted/io.hpp"
#include "planted/models.hpp"
#include "planted/thresholds.hpp"

using namespace planted;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("planted_test_" + name)).string();
}

ErrorCode load_error(const std::string& path) {
  try {
    load_instance(path);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("instance roundtrip") {
  const std::vector<ProblemParams> cases = {SparsePcaParams{1.25, 0.3, 20}, SubmatrixParams{2.5, 4, 12},
                                            ClusteringParams{1.7, 1.5, 3, 8}};
  for (const auto& p : cases) {
    for (auto h : {Hypothesis::kNull, Hypothesis::kPlanted}) {
      const auto inst = generate_instance(p, h, 77);
      const auto path = temp_path("roundtrip.bin");
      save_instance(inst, path);
      const auto back = load_instance(path);
      CHECK(back.params == inst.params);
      CHECK(back.hypothesis == h);
      CHECK(back.seed == 77);
      CHECK(back.x == inst.x);
      REQUIRE(back.truth.has_value() == inst.truth.has_value());
      if (inst.truth) CHECK(build_signal(p, *back.truth) == build_signal(p, *inst.truth));
      std::filesystem::remove(path);
    }
  }
}

TEST_CASE("corrupt containers are rejected") {
  const auto inst = generate_instance(SparsePcaParams{1.0, 0.5, 6}, Hypothesis::kPlanted, 1);
  const auto path = temp_path("corrupt.bin");
  save_instance(inst, path);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << b;
  };
  SUBCASE("bad magic") {
    std::string b = bytes;
    b[0] = 'X';
    write(b);
    CHECK(load_error(path) == ErrorCode::kIo);
  }
  SUBCASE("unknown version") {
    std::string b = bytes;
    b[4] = 9;
    write(b);
    CHECK(load_error(path) == ErrorCode::kIo);
  }
  SUBCASE("truncated") {
    for (std::size_t cut : {std::size_t{3}, std::size_t{40}, bytes.size() - 1}) {
      write(bytes.substr(0, cut));
      CHECK(load_error(path) == ErrorCode::kIo);
    }
  }
  SUBCASE("trailing bytes") {
    write(bytes + "z");
    CHECK(load_error(path) == ErrorCode::kIo);
  }
  std::filesystem::remove(path);
  CHECK(load_error(temp_path("does_not_exist.bin")) == ErrorCode::kIo);
}

TEST_CASE("text dump") {
  Matrix x(2, 3);
  x << 1.0, -0.5, 0.1, 1e-300, 2.0, 3.0;
  std::ostringstream out;
  write_matrix_text(x, out);
  CHECK(out.str() == "1 -0.5 0.10000000000000001\n1e-300 2 3\n");
  std::istringstream in(out.str());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      double v;
      in >> v;
      CHECK(v == x(i, j));
    }
  }
}

TEST_CASE("real formatting") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("bounds JSON") {
  const std::string s = bounds_to_json(sparse_pca_bounds(0.5));
  CHECK(s.find("\"problem\"") < s.find("\"gamma\""));
  CHECK(s.find("\"gamma\"") < s.find("\"upper\""));
  CHECK(s.find("\"upper\"") < s.find("\"lower_theorem\""));
  CHECK(s.find("\"lower_psi\"") < s.find("\"lower_lambert\""));
  CHECK(s.find("\"lower_lambert\"") < s.find("\"spectral\""));
  CHECK(s.find("null") == std::string::npos);
  const std::string sub = bounds_to_json(submatrix_bounds(3));
  CHECK(sub.find("\"k\":3") != std::string::npos);
  CHECK(sub.find("\"lower_psi\":null") != std::string::npos);
  const std::string cl = bounds_to_json(clustering_bounds(3, 1.0));
  CHECK(cl.find("\"k\":3") < cl.find("\"alpha\""));
  CHECK(cl.find("\"spectral\":2.0") != std::string::npos);
}
