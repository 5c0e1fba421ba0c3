#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "gblobs/io.hpp"
#include "gblobs/point_cloud.hpp"
#include "gblobs/rng.hpp"

using namespace gblobs;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("gblobs_core_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("rng: identical seeds give identical streams, distinct seeds diverge") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t va = a.next();
    all_equal &= (va == b.next());
    any_diff |= (va != c.next());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("rng: derived streams are deterministic and decorrelated") {
  CHECK(derive_stream(1, 2) == derive_stream(1, 2));
  CHECK(derive_stream(1, 2) != derive_stream(1, 3));
  CHECK(derive_stream(1, 2) != derive_stream(2, 2));
  CHECK(derive_stream(5, 7, 9) == derive_stream(derive_stream(5, 7), 9));
}

TEST_CASE("rng: uniform stays in [0,1) and below() respects its bound") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  std::array<uint64_t, 10> counts{};
  for (int i = 0; i < 100000; ++i) {
    const uint64_t v = rng.below(10);
    REQUIRE(v < 10);
    ++counts[v];
  }
  // Unbiased sampling: each bucket near 10000 (5 sigma ≈ 475).
  for (uint64_t c : counts) {
    CHECK(c > 9500);
    CHECK(c < 10500);
  }
}

TEST_CASE("rng: normal() has the right first two moments") {
  Rng rng(11);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("point cloud rejects non-finite input and wrong arity") {
  PointCloud c3(3), c4(4);
  CHECK_THROWS_AS(c3.add(0.0, 0.0, std::nan("")), InvalidArgument);
  CHECK_THROWS_AS(c3.add(1.0, 2.0, 3.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(c4.add(1.0, 2.0, 3.0), InvalidArgument);
  CHECK_THROWS_AS(c4.add(1.0, 2.0, 3.0, INFINITY), InvalidArgument);
  CHECK_THROWS_AS(PointCloud(5), InvalidArgument);
  c4.add(1.0, 2.0, 3.0, 0.5);
  CHECK(c4.size() == 1);
}

TEST_CASE("transform: inverse round trip within 1e-9 at sensor-range coordinates") {
  Rng rng(3);
  PointCloud cloud(4);
  for (int i = 0; i < 500; ++i)
    cloud.add(rng.uniform(-75.2, 75.2), rng.uniform(-75.2, 75.2), rng.uniform(-4.0, 4.0), rng.uniform());

  RigidTransform rt;
  rt.rotation = rotation_axis_angle({0.3, -0.5, 0.81}, 1.234);
  rt.translation = {120.0, -55.0, 33.0};
  rt.validate();

  const PointCloud roundtrip = transform(transform(cloud, rt), rt.inverse());
  REQUIRE(roundtrip.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(std::abs(roundtrip.x(i) - cloud.x(i)) <= 1e-9);
    CHECK(std::abs(roundtrip.y(i) - cloud.y(i)) <= 1e-9);
    CHECK(std::abs(roundtrip.z(i) - cloud.z(i)) <= 1e-9);
    CHECK(roundtrip.intensity(i) == cloud.intensity(i));  // untouched, bit-exact
  }
}

TEST_CASE("transform: rejects non-rigid matrices") {
  PointCloud cloud(3);
  cloud.add(1, 2, 3);

  RigidTransform scaled;
  scaled.rotation = {2, 0, 0, 0, 2, 0, 0, 0, 2};
  CHECK_THROWS_AS(transform(cloud, scaled), InvalidTransform);

  RigidTransform reflection;
  reflection.rotation = {1, 0, 0, 0, 1, 0, 0, 0, -1};  // orthonormal, det -1
  CHECK_THROWS_AS(transform(cloud, reflection), InvalidTransform);

  RigidTransform ok = RigidTransform::rotate_z(0.5);
  CHECK_NOTHROW(transform(cloud, ok));
}

TEST_CASE("transform: rotate_z quarter turn maps +x to +y") {
  PointCloud cloud(3);
  cloud.add(1, 0, 0);
  const PointCloud r = transform(cloud, RigidTransform::rotate_z(std::acos(-1.0) / 2));
  CHECK(std::abs(r.x(0) - 0.0) < 1e-12);
  CHECK(std::abs(r.y(0) - 1.0) < 1e-12);
  CHECK(std::abs(r.z(0) - 0.0) < 1e-12);
}

TEST_CASE("subsample: exact count, preserved order, deterministic") {
  PointCloud cloud(3);
  for (int i = 0; i < 10; ++i) cloud.add(i, 0, 0);

  const PointCloud half = subsample(cloud, 0.5, 99);
  CHECK(half.size() == 5);  // round(0.5 * 10)
  for (std::size_t i = 1; i < half.size(); ++i) CHECK(half.x(i) > half.x(i - 1));  // order kept

  const PointCloud again = subsample(cloud, 0.5, 99);
  REQUIRE(again.size() == half.size());
  for (std::size_t i = 0; i < half.size(); ++i) CHECK(again.x(i) == half.x(i));

  CHECK(subsample(cloud, 1.0, 1).size() == 10);
  CHECK(subsample(cloud, 0.0, 1).size() == 0);
  CHECK_THROWS_AS(subsample(cloud, 1.5, 1), InvalidArgument);

  // round-half cases: 0.25 of 10 -> 3 (llround away from zero)
  CHECK(subsample(cloud, 0.25, 1).size() == 3);
}

TEST_CASE("subsample: selection is uniform across indices") {
  const std::size_t n = 20;
  std::vector<int> hits(n, 0);
  for (uint64_t seed = 0; seed < 4000; ++seed)
    for (uint32_t idx : subsample_indices(n, 0.5, seed)) ++hits[idx];
  for (int h : hits) {
    CHECK(h > 1700);  // expected 2000, ~6 sigma slack
    CHECK(h < 2300);
  }
}

TEST_CASE("kitti bin: write/load round trip is byte exact") {
  Rng rng(5);
  PointCloud cloud(4);
  for (int i = 0; i < 1000; ++i)
    cloud.add(rng.uniform(-80, 80), rng.uniform(-80, 80), rng.uniform(-3, 5), rng.uniform());

  const std::string path_a = temp_path("roundtrip_a.bin");
  const std::string path_b = temp_path("roundtrip_b.bin");
  write_kitti_bin(path_a, cloud);
  const PointCloud loaded = load_kitti_bin(path_a);
  REQUIRE(loaded.size() == cloud.size());
  write_kitti_bin(path_b, loaded);
  CHECK(slurp(path_a) == slurp(path_b));

  // float32 rounding happens exactly once: re-loading returns the same doubles
  const PointCloud reloaded = load_kitti_bin(path_b);
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(reloaded.x(i) == loaded.x(i));
    CHECK(reloaded.intensity(i) == loaded.intensity(i));
  }
  std::filesystem::remove(path_a);
  std::filesystem::remove(path_b);
}

TEST_CASE("kitti bin: malformed files raise the documented errors") {
  const std::string path = temp_path("malformed.bin");

  {
    std::ofstream out(path, std::ios::binary);
    out.write("12345678901234567", 17);  // not divisible by 16
  }
  CHECK_THROWS_AS(load_kitti_bin(path), MalformedFile);

  {
    std::ofstream out(path, std::ios::binary);
    const float vals[8] = {1.f, 2.f, 3.f, 0.5f, 4.f, NAN, 6.f, 0.25f};
    out.write(reinterpret_cast<const char*>(vals), sizeof(vals));
  }
  try {
    load_kitti_bin(path);
    FAIL("expected MalformedFile");
  } catch (const MalformedFile& e) {
    CHECK(std::string(e.what()).find("index 1") != std::string::npos);
  }

  CHECK_THROWS_AS(load_kitti_bin(temp_path("does_not_exist.bin")), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("xyz csv: arity inference, comments, and error line numbers") {
  const std::string path = temp_path("cloud.csv");
  {
    std::ofstream out(path);
    out << "# a comment\n\n1.5,2.5,3.5\n-1,0,2\n";
  }
  const PointCloud c3 = load_xyz_csv(path);
  REQUIRE(c3.size() == 2);
  CHECK(c3.dims() == 3);
  CHECK(c3.x(0) == 1.5);
  CHECK(c3.z(1) == 2.0);

  {
    std::ofstream out(path);
    out << "1,2,3,0.5\n4,5,6,0.25\n";
  }
  const PointCloud c4 = load_xyz_csv(path);
  CHECK(c4.dims() == 4);
  CHECK(c4.intensity(1) == 0.25);

  {
    std::ofstream out(path);
    out << "1,2,3\n4,5,6,0.5\n";  // mixed arity on line 2
  }
  try {
    load_xyz_csv(path);
    FAIL("expected MalformedFile");
  } catch (const MalformedFile& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  {
    std::ofstream out(path);
    out << "1,2,3\n1,zzz,3\n";
  }
  try {
    load_xyz_csv(path);
    FAIL("expected MalformedFile");
  } catch (const MalformedFile& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  {
    std::ofstream out(path);
    out << "1,2,inf\n";
  }
  CHECK_THROWS_AS(load_xyz_csv(path), MalformedFile);

  std::filesystem::remove(path);
}

TEST_CASE("xyz csv: write/load round trip preserves doubles") {
  PointCloud cloud(3);
  cloud.add(0.1, -2.25, 1e-7);
  cloud.add(75.2, -75.2, 3.9999999);
  const std::string path = temp_path("roundtrip.csv");
  write_xyz_csv(path, cloud);
  const PointCloud loaded = load_xyz_csv(path);
  REQUIRE(loaded.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(loaded.x(i) == cloud.x(i));
    CHECK(loaded.y(i) == cloud.y(i));
    CHECK(loaded.z(i) == cloud.z(i));
  }
  std::filesystem::remove(path);
}
