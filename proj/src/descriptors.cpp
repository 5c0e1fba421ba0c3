#include "gblobs/descriptors.hpp"

#include <algorithm>
#include <cmath>

#include "gblobs/parallel.hpp"

namespace gblobs {

const char* d_mode_name(DMode mode) {
  switch (mode) {
    case DMode::literal: return "literal";
    case DMode::padded: return "padded";
    case DMode::voxel_center: return "voxel_center";
  }
  return "?";
}

DMode parse_d_mode(const std::string& name) {
  if (name == "literal") return DMode::literal;
  if (name == "padded") return DMode::padded;
  if (name == "voxel_center") return DMode::voxel_center;
  throw InvalidArgument("unknown d_mode '" + name + "' (expected literal|padded|voxel_center)");
}

EigSym3 eig_sym3(const Mat3& m) {
  double scale = 0.0;
  for (double v : m) scale = std::max(scale, std::abs(v));
  const double sym_tol = 1e-9 * (1.0 + scale);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (std::abs(m[3 * a + b] - m[3 * b + a]) > sym_tol)
        throw InvalidArgument("eig_sym3: input matrix is not symmetric");

  // Cyclic Jacobi: rotate away each off-diagonal in turn until they vanish.
  double a[3][3] = {{m[0], m[1], m[2]}, {m[3], m[4], m[5]}, {m[6], m[7], m[8]}};
  // Symmetrize exactly so roundoff-level asymmetry cannot bias the sweep.
  for (int p = 0; p < 3; ++p)
    for (int q = p + 1; q < 3; ++q) a[p][q] = a[q][p] = 0.5 * (a[p][q] + a[q][p]);
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off <= 1e-300 || off <= 1e-15 * (1.0 + scale)) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a[p][q];
        if (apq == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        const double app = a[p][p], aqq = a[q][q];
        a[p][p] = app - t * apq;
        a[q][q] = aqq + t * apq;
        a[p][q] = a[q][p] = 0.0;
        const int r = 3 - p - q;  // the remaining axis
        const double arp = a[r][p], arq = a[r][q];
        a[r][p] = a[p][r] = c * arp - s * arq;
        a[r][q] = a[q][r] = s * arp + c * arq;
        for (int i = 0; i < 3; ++i) {
          const double vip = v[i][p], viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
    }
  }

  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (a[i][i] != a[j][j]) return a[i][i] < a[j][j];
    return i < j;
  });

  EigSym3 out;
  for (int k = 0; k < 3; ++k) {
    const int col = order[k];
    out.values[k] = a[col][col];
    Vec3 vec = {v[0][col], v[1][col], v[2][col]};
    const double len = norm(vec);
    if (len > 0.0) vec = (1.0 / len) * vec;
    // Deterministic sign: the largest-magnitude component is made positive;
    // exact magnitude ties resolve to the lowest index.
    int lead = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(vec[i]) > std::abs(vec[lead])) lead = i;
    if (vec[lead] < 0.0) vec = -1.0 * vec;
    out.vectors[k] = vec;
  }
  return out;
}

SurfaceNormal surface_normal_descriptor(std::span<const Vec3> pts, const Vec3& sensor_origin) {
  if (pts.empty()) throw EmptyNeighborhood("surface normal of empty neighborhood");
  SurfaceNormal out;
  if (pts.size() < 3) {
    out.degenerate = true;
    return out;
  }
  const Vec3 mu = neighborhood_mean<3>(pts);
  const Mat3 cov = neighborhood_cov<3>(pts);
  const EigSym3 eig = eig_sym3(cov);
  out.normal = eig.vectors[0];
  if (dot(out.normal, sensor_origin - mu) < 0.0) out.normal = -1.0 * out.normal;
  const double trace = eig.values[0] + eig.values[1] + eig.values[2];
  out.curvature = trace > 0.0 ? std::max(eig.values[0], 0.0) / trace : 0.0;
  return out;
}

const char* feature_kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::global_mean: return "global";
    case FeatureKind::rel_distance: return "rel_distance";
    case FeatureKind::surface_normal: return "surface_normal";
    case FeatureKind::gblobs_d: return "d";
    case FeatureKind::gblobs_sigma: return "sigma";
    case FeatureKind::gblobs: return "gblobs";
  }
  return "?";
}

namespace {

std::size_t kind_width(FeatureKind kind, int m, bool compact_sigma) {
  const std::size_t M = static_cast<std::size_t>(m);
  const std::size_t sigma_w = compact_sigma ? M * (M + 1) / 2 : M * M;
  switch (kind) {
    case FeatureKind::global_mean: return M;
    case FeatureKind::rel_distance: return 2 * M;
    case FeatureKind::surface_normal: return 4;
    case FeatureKind::gblobs_d: return M;
    case FeatureKind::gblobs_sigma: return sigma_w;
    case FeatureKind::gblobs: return M + sigma_w;
  }
  return 0;
}

}  // namespace

std::size_t EncoderSpec::width() const {
  std::size_t w = 0;
  for (FeatureKind k : kinds) w += kind_width(k, point_dims(), compact_sigma);
  return w;
}

void EncoderSpec::validate() const {
  if (kinds.empty()) throw InvalidArgument("encoder has no feature kinds");
  for (std::size_t i = 0; i < kinds.size(); ++i)
    for (std::size_t j = i + 1; j < kinds.size(); ++j)
      if (kinds[i] == kinds[j])
        throw InvalidArgument(std::string("duplicate feature kind '") + feature_kind_name(kinds[i]) +
                              "' in encoder");
}

EncoderSpec EncoderSpec::parse(const std::string& text, DMode d_mode, bool include_intensity) {
  EncoderSpec spec;
  spec.kinds.clear();
  spec.d_mode = d_mode;
  spec.include_intensity = include_intensity;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('+', begin);
    if (end == std::string::npos) end = text.size();
    const std::string token = text.substr(begin, end - begin);
    if (token == "global" || token == "global_mean")
      spec.kinds.push_back(FeatureKind::global_mean);
    else if (token == "d")
      spec.kinds.push_back(FeatureKind::gblobs_d);
    else if (token == "sigma")
      spec.kinds.push_back(FeatureKind::gblobs_sigma);
    else if (token == "gblobs")
      spec.kinds.push_back(FeatureKind::gblobs);
    else if (token == "rel_distance")
      spec.kinds.push_back(FeatureKind::rel_distance);
    else if (token == "surface_normal")
      spec.kinds.push_back(FeatureKind::surface_normal);
    else
      throw InvalidArgument("unknown feature kind '" + token + "' in encoder '" + text + "'");
    begin = end + 1;
  }
  spec.validate();
  return spec;
}

std::string EncoderSpec::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) out += '+';
    out += feature_kind_name(kinds[i]);
  }
  return out;
}

std::pair<std::size_t, std::size_t> feature_columns(const EncoderSpec& spec, FeatureKind kind) {
  std::size_t at = 0;
  for (FeatureKind k : spec.kinds) {
    const std::size_t w = kind_width(k, spec.point_dims(), spec.compact_sigma);
    if (k == kind) return {at, at + w};
    at += w;
  }
  throw InvalidArgument(std::string("encoder does not contain feature kind '") + feature_kind_name(kind) +
                        "'");
}

namespace {

template <int M>
void encode_rows(const PointCloud& cloud, const VoxelSet& vs, const EncoderSpec& spec,
                 int threads, const Vec3& sensor_origin, FeatureSet& out) {
  const std::size_t width = spec.width();
  const uint32_t capacity = vs.spec.max_points_per_voxel;
  const bool needs_3d = std::find(spec.kinds.begin(), spec.kinds.end(), FeatureKind::surface_normal) !=
                        spec.kinds.end();

  parallel_chunks(vs.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<VecM<M>> pts;
    std::vector<Vec3> pts3;
    pts.reserve(capacity);
    pts3.reserve(capacity);
    for (std::size_t vx = begin; vx < end; ++vx) {
      const auto members = vs.voxel_members(vx);
      pts.clear();
      pts3.clear();
      for (uint32_t idx : members) {
        VecM<M> p;
        p[0] = cloud.x(idx);
        p[1] = cloud.y(idx);
        p[2] = cloud.z(idx);
        if constexpr (M == 4) p[3] = cloud.intensity(idx);
        pts.push_back(p);
        if (needs_3d) pts3.push_back({p[0], p[1], p[2]});
      }
      const std::span<const VecM<M>> view(pts.data(), pts.size());

      float* row = out.values.data() + vx * width;
      std::size_t at = 0;
      for (FeatureKind kind : spec.kinds) {
        switch (kind) {
          case FeatureKind::global_mean: {
            const VecM<M> mu = neighborhood_mean<M>(view);
            for (int a = 0; a < M; ++a) row[at++] = static_cast<float>(mu[a]);
            break;
          }
          case FeatureKind::rel_distance: {
            const auto rd = rel_distance_descriptor<M>(view);
            for (double vv : rd) row[at++] = static_cast<float>(vv);
            break;
          }
          case FeatureKind::surface_normal: {
            const SurfaceNormal sn =
                surface_normal_descriptor(std::span<const Vec3>(pts3.data(), pts3.size()), sensor_origin);
            row[at++] = static_cast<float>(sn.normal[0]);
            row[at++] = static_cast<float>(sn.normal[1]);
            row[at++] = static_cast<float>(sn.normal[2]);
            row[at++] = static_cast<float>(sn.curvature);
            break;
          }
          case FeatureKind::gblobs_d:
          case FeatureKind::gblobs_sigma:
          case FeatureKind::gblobs: {
            std::optional<VecM<M>> center;
            if (spec.d_mode == DMode::voxel_center) {
              const Vec3 c = vs.spec.voxel_center(vs.coords[vx]);
              VecM<M> cm{};
              cm[0] = c[0];
              cm[1] = c[1];
              cm[2] = c[2];
              center = cm;  // intensity reference stays 0 for M == 4
            }
            const GBlob<M> blob = gaussian_blob<M>(view, spec.d_mode, center, capacity);
            if (kind != FeatureKind::gblobs_sigma)
              for (int a = 0; a < M; ++a) row[at++] = static_cast<float>(blob.d[a]);
            if (kind != FeatureKind::gblobs_d) {
              if (spec.compact_sigma) {
                for (int a = 0; a < M; ++a)
                  for (int b = a; b < M; ++b) row[at++] = static_cast<float>(blob.sigma[a * M + b]);
              } else {
                for (int i = 0; i < M * M; ++i) row[at++] = static_cast<float>(blob.sigma[i]);
              }
            }
            break;
          }
        }
      }
    }
  });
}

}  // namespace

FeatureSet encode_voxels(const PointCloud& cloud, const VoxelSet& vs, const EncoderSpec& spec,
                         int threads, const Vec3& sensor_origin) {
  spec.validate();
  if (spec.include_intensity && !cloud.has_intensity())
    throw InvalidArgument("encoder requests intensity but the cloud has none");

  FeatureSet out;
  out.width = static_cast<uint32_t>(spec.width());
  out.coords = vs.coords;
  out.values.assign(vs.size() * out.width, 0.0f);
  if (spec.include_intensity)
    encode_rows<4>(cloud, vs, spec, threads, sensor_origin, out);
  else
    encode_rows<3>(cloud, vs, spec, threads, sensor_origin, out);
  return out;
}

FeatureSet encode_cloud(const PointCloud& cloud, const GridSpec& grid, const EncoderSpec& spec,
                        int threads, const Vec3& sensor_origin) {
  const VoxelSet vs = voxelize(cloud, grid, threads);
  return encode_voxels(cloud, vs, spec, threads, sensor_origin);
}

}  // namespace gblobs
