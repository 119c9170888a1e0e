#include "sinr/radiance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <limits>
#include <stdexcept>
#include <utility>

#include "sinr/image_io.hpp"
#include "sinr/metrics.hpp"

namespace sinr {

namespace {

using Vec3 = std::array<double, 3>;

inline Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline Vec3 normalized(const Vec3& a) {
  const double n = std::sqrt(dot(a, a));
  return {a[0] / n, a[1] / n, a[2] / n};
}

inline double dot3(const double* a, const double* b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

void ensure(Grid2D& g, int rows, int cols) {
  if (g.rows() != rows || g.cols() != cols || g.channels() != 1) g = Grid2D(rows, cols);
}

std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b) {
  Rng r(a ^ (0x9E3779B97F4A7C15ull * (b + 1)));
  return r.next_u64();
}

}  // namespace

Ray generate_ray(const CameraPose& pose, double u, double v) {
  if (pose.width < 1 || pose.height < 1 || pose.focal <= 0.0)
    throw std::invalid_argument("generate_ray: pose lacks valid intrinsics");
  const double cx = (u - 0.5 * pose.width) / pose.focal;
  const double cy = -(v - 0.5 * pose.height) / pose.focal;
  Ray ray;
  ray.origin = pose.origin;
  for (int i = 0; i < 3; ++i) {
    ray.dir[i] = pose.rot[i][0] * cx + pose.rot[i][1] * cy - pose.rot[i][2];
    ray.ddu[i] = pose.rot[i][0] / pose.focal;
    ray.ddv[i] = -pose.rot[i][1] / pose.focal;
  }
  return ray;
}

Scene make_sphere_scene(const SphereSceneSpec& spec) {
  if (spec.views < 1 || spec.image_size < 2)
    throw std::invalid_argument("make_sphere_scene: need views >= 1 and image_size >= 2");
  if (spec.radius <= 0.0 || spec.ring_radius <= spec.radius)
    throw std::invalid_argument("make_sphere_scene: cameras must sit outside the sphere");
  if (!(spec.near > 0.0) || !(spec.far > spec.near))
    throw std::invalid_argument("make_sphere_scene: need 0 < near < far");
  constexpr double kPi = 3.14159265358979323846;
  const int size = spec.image_size;
  const double focal = 0.5 * size / std::tan(0.5 * spec.fov_degrees * kPi / 180.0);
  const Vec3 light = normalized({1.0, 1.0, 0.5});
  const Vec3 center = {spec.center[0], spec.center[1], spec.center[2]};

  Scene scene;
  scene.near = spec.near;
  scene.far = spec.far;
  scene.views.reserve(spec.views);
  for (int k = 0; k < spec.views; ++k) {
    const double theta = 2.0 * kPi * k / spec.views;
    const Vec3 eye = add(center, {spec.ring_radius * std::cos(theta), spec.eye_height,
                                  spec.ring_radius * std::sin(theta)});
    const Vec3 back = normalized(add(eye, scale(center, -1.0)));  // camera looks at the center
    const Vec3 right = normalized(cross(Vec3{0.0, 1.0, 0.0}, back));
    const Vec3 up = cross(back, right);

    SceneView view;
    view.pose.height = size;
    view.pose.width = size;
    view.pose.focal = focal;
    view.pose.origin = eye;
    for (int i = 0; i < 3; ++i) {
      view.pose.rot[i][0] = right[i];
      view.pose.rot[i][1] = up[i];
      view.pose.rot[i][2] = back[i];
    }

    view.image = Grid2D(size, size, 3);
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        const Ray ray = generate_ray(view.pose, c, r);
        const Vec3 d = normalized(ray.dir);
        const Vec3 oc = add(eye, scale(center, -1.0));
        const double b = dot(oc, d);
        const double disc = b * b - (dot(oc, oc) - spec.radius * spec.radius);
        if (disc <= 0.0) continue;  // miss: black background
        const double s = -b - std::sqrt(disc);
        if (s <= 0.0) continue;
        const Vec3 p = add(oc, scale(d, s));
        const Vec3 n = scale(p, 1.0 / spec.radius);
        const double lambert = std::max(0.0, dot(n, light));
        double tex = 1.0;
        if (spec.texture_freq > 0.0) {
          const double az = std::atan2(n[2], n[0]);
          const double el = std::acos(std::clamp(n[1], -1.0, 1.0));
          tex = 0.6 + 0.4 * std::sin(spec.texture_freq * az) * std::cos(spec.texture_freq * el);
        }
        for (int ch = 0; ch < 3; ++ch) {
          const double base = 0.5 + 0.5 * n[ch];
          view.image(r, c, ch) =
              std::clamp(spec.albedo[ch] * base * tex * (0.25 + 0.75 * lambert), 0.0, 1.0);
        }
      }
    }
    scene.views.push_back(std::move(view));
  }
  return scene;
}

Scene make_sphere_scene(int n_views, int size) {
  SphereSceneSpec spec;
  spec.views = n_views;
  spec.image_size = size;
  return make_sphere_scene(spec);
}

SphereSceneSpec parse_sphere_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("parse_sphere_spec: cannot open " + path);
  SphereSceneSpec spec;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::runtime_error("parse_sphere_spec: expected key = value at " + path + ":" +
                                 std::to_string(lineno));
      continue;
    }
    auto trim = [](std::string s) {
      const std::size_t a = s.find_first_not_of(" \t\r");
      const std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    std::istringstream vs(val);
    auto bad = [&]() {
      return std::runtime_error("parse_sphere_spec: bad value for '" + key + "' at " + path +
                                ":" + std::to_string(lineno));
    };
    auto read1 = [&](auto& out) {
      if (!(vs >> out)) throw bad();
    };
    auto read3 = [&](std::array<double, 3>& out) {
      if (!(vs >> out[0] >> out[1] >> out[2])) throw bad();
    };
    if (key == "views") read1(spec.views);
    else if (key == "image_size") read1(spec.image_size);
    else if (key == "ring_radius") read1(spec.ring_radius);
    else if (key == "eye_height") read1(spec.eye_height);
    else if (key == "fov_degrees") read1(spec.fov_degrees);
    else if (key == "center") read3(spec.center);
    else if (key == "radius") read1(spec.radius);
    else if (key == "albedo") read3(spec.albedo);
    else if (key == "texture_freq") read1(spec.texture_freq);
    else if (key == "near") read1(spec.near);
    else if (key == "far") read1(spec.far);
    else throw std::runtime_error("parse_sphere_spec: unknown key '" + key + "' at " + path +
                                  ":" + std::to_string(lineno));
    std::string tail;
    if (vs >> tail) throw bad();
  }
  return spec;
}

// --- scene directory I/O ---

namespace {

constexpr int kPoseRowLen = 17;

std::string view_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "view_%03d.png", index);
  return buf;
}

void write_npy_f64(const std::string& path, const std::vector<double>& data, std::size_t rows,
                   std::size_t cols) {
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(rows) + ", " + std::to_string(cols) + "), }";
  // Pad so magic(6) + version(2) + len(2) + header is a multiple of 64.
  const std::size_t base = 10 + header.size() + 1;
  header.append((64 - base % 64) % 64, ' ');
  header.push_back('\n');
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("write_npy_f64: cannot open " + path);
  f.write("\x93NUMPY\x01\x00", 8);
  const std::uint16_t hlen = static_cast<std::uint16_t>(header.size());
  f.write(reinterpret_cast<const char*>(&hlen), 2);
  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!f) throw std::runtime_error("write_npy_f64: write failed for " + path);
}

std::vector<double> read_pose_table(const std::string& path, std::size_t* rows_out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_scene: cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  std::size_t offset = 0;
  std::size_t rows = 0;
  if (bytes.size() >= 10 && std::memcmp(bytes.data(), "\x93NUMPY", 6) == 0) {
    const unsigned major = static_cast<unsigned char>(bytes[6]);
    std::size_t hlen = 0, hstart = 0;
    if (major == 1) {
      std::uint16_t len16;
      std::memcpy(&len16, bytes.data() + 8, 2);
      hlen = len16;
      hstart = 10;
    } else {
      std::uint32_t len32;
      std::memcpy(&len32, bytes.data() + 8, 4);
      hlen = len32;
      hstart = 12;
    }
    if (bytes.size() < hstart + hlen)
      throw std::runtime_error("load_scene: truncated npy header in " + path);
    const std::string header(bytes.data() + hstart, hlen);
    if (header.find("<f8") == std::string::npos)
      throw std::runtime_error("load_scene: pose table must be '<f8' in " + path);
    if (header.find("'fortran_order': False") == std::string::npos)
      throw std::runtime_error("load_scene: pose table must be C-order in " + path);
    const std::size_t sh = header.find("'shape':");
    const std::size_t open = header.find('(', sh);
    const std::size_t comma = header.find(',', open);
    const std::size_t close = header.find(')', comma);
    if (sh == std::string::npos || open == std::string::npos || close == std::string::npos)
      throw std::runtime_error("load_scene: cannot parse npy shape in " + path);
    rows = std::stoul(header.substr(open + 1, comma - open - 1));
    const unsigned long cols = std::stoul(header.substr(comma + 1, close - comma - 1));
    if (cols != kPoseRowLen)
      throw std::runtime_error("load_scene: pose table must have 17 columns, got " +
                               std::to_string(cols) + " in " + path);
    offset = hstart + hlen;
  } else {
    if (bytes.size() % (kPoseRowLen * sizeof(double)) != 0)
      throw std::runtime_error("load_scene: raw pose table size is not a multiple of 17 doubles: " +
                               path);
    rows = bytes.size() / (kPoseRowLen * sizeof(double));
  }

  const std::size_t need = rows * kPoseRowLen * sizeof(double);
  if (bytes.size() < offset + need)
    throw std::runtime_error("load_scene: truncated pose table " + path);
  std::vector<double> table(rows * kPoseRowLen);
  std::memcpy(table.data(), bytes.data() + offset, need);
  *rows_out = rows;
  return table;
}

}  // namespace

void save_scene(const Scene& scene, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<double> table;
  table.reserve(scene.views.size() * kPoseRowLen);
  for (const SceneView& view : scene.views) {
    // 3x5 row-major block [R | t | (H W f)^T], then near, far.
    const double hwf[3] = {static_cast<double>(view.pose.height),
                           static_cast<double>(view.pose.width), view.pose.focal};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) table.push_back(view.pose.rot[r][c]);
      table.push_back(view.pose.origin[r]);
      table.push_back(hwf[r]);
    }
    table.push_back(scene.near);
    table.push_back(scene.far);
  }
  write_npy_f64(dir + "/poses_bounds.npy", table, scene.views.size(), kPoseRowLen);
  for (std::size_t i = 0; i < scene.views.size(); ++i)
    save_png(scene.views[i].image, dir + "/" + view_filename(static_cast<int>(i)));
}

Scene load_scene(const std::string& dir) {
  std::string table_path = dir + "/poses_bounds.npy";
  if (!std::filesystem::exists(table_path)) {
    table_path = dir + "/poses_bounds.bin";
    if (!std::filesystem::exists(table_path))
      throw std::runtime_error("load_scene: no poses_bounds.npy or poses_bounds.bin in " + dir);
  }
  std::size_t rows = 0;
  const std::vector<double> table = read_pose_table(table_path, &rows);
  if (rows == 0) throw std::runtime_error("load_scene: empty pose table in " + dir);

  Scene scene;
  scene.near = std::numeric_limits<double>::infinity();
  scene.far = -std::numeric_limits<double>::infinity();
  scene.views.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = table.data() + i * kPoseRowLen;
    SceneView view;
    double hwf[3];
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) view.pose.rot[r][c] = row[r * 5 + c];
      view.pose.origin[r] = row[r * 5 + 3];
      hwf[r] = row[r * 5 + 4];
    }
    // Rotation must be orthonormal: columns unit length, mutually orthogonal.
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) {
        double d = 0.0;
        for (int r = 0; r < 3; ++r) d += view.pose.rot[r][a] * view.pose.rot[r][b];
        if (std::fabs(d - (a == b ? 1.0 : 0.0)) > 1e-6)
          throw std::runtime_error("load_scene: view " + std::to_string(i) +
                                   " rotation is not orthonormal in " + table_path);
      }
    view.pose.height = static_cast<int>(std::lround(hwf[0]));
    view.pose.width = static_cast<int>(std::lround(hwf[1]));
    view.pose.focal = hwf[2];
    if (view.pose.height < 1 || view.pose.width < 1 || view.pose.focal <= 0.0)
      throw std::runtime_error("load_scene: view " + std::to_string(i) +
                               " has invalid intrinsics in " + table_path);
    const double near = row[15], far = row[16];
    if (!(near > 0.0) || !(far > near))
      throw std::runtime_error("load_scene: view " + std::to_string(i) + " has invalid bounds");
    scene.near = std::min(scene.near, near);
    scene.far = std::max(scene.far, far);

    view.image = load_png(dir + "/" + view_filename(static_cast<int>(i)));
    if (view.image.channels() != 3 || view.image.rows() != view.pose.height ||
        view.image.cols() != view.pose.width)
      throw std::runtime_error("load_scene: image does not match pose intrinsics for view " +
                               std::to_string(i));
    scene.views.push_back(std::move(view));
  }
  return scene;
}

void sample_depths(double near, double far, int count, Rng* jitter, std::vector<double>& out) {
  if (count < 1) throw std::invalid_argument("sample_depths: count must be positive");
  if (!(far > near)) throw std::invalid_argument("sample_depths: need far > near");
  out.resize(count);
  const double span = far - near;
  for (int i = 0; i < count; ++i) {
    const double xi = jitter ? jitter->uniform() : 0.5;
    out[i] = near + span * (i + xi) / count;
  }
}

void volume_render(const double* sigma, const double* rgb, const double* depths, int count,
                   double far, QuadratureScratch& qs, double* c_out) {
  qs.delta.resize(count);
  qs.e.resize(count);
  qs.alpha.resize(count);
  qs.bigt.resize(count);
  qs.w.resize(count);
  c_out[0] = c_out[1] = c_out[2] = 0.0;
  double t_run = 1.0;
  for (int i = 0; i < count; ++i) {
    const double delta = i + 1 < count ? depths[i + 1] - depths[i] : far - depths[count - 1];
    const double e = std::exp(-sigma[i] * delta);
    const double alpha = 1.0 - e;
    qs.delta[i] = delta;
    qs.e[i] = e;
    qs.alpha[i] = alpha;
    qs.bigt[i] = t_run;
    const double w = t_run * alpha;
    qs.w[i] = w;
    for (int ch = 0; ch < 3; ++ch) c_out[ch] += w * rgb[i * 3 + ch];
    t_run *= 1.0 - alpha;
  }
}

void volume_render_dual(const double* sigma, const double* rgb, const double* sigmadot,
                        const double* rgbdot, const double* depths, int count, int dirs,
                        double far, QuadratureScratch& qs, double* c_out, double* cdot_out) {
  volume_render(sigma, rgb, depths, count, far, qs, c_out);
  qs.alphadot.resize(static_cast<std::size_t>(dirs) * count);
  qs.tdot.resize(static_cast<std::size_t>(dirs) * count);
  qs.wdot.resize(static_cast<std::size_t>(dirs) * count);
  for (int d = 0; d < dirs; ++d) {
    double* cd = cdot_out + d * 3;
    cd[0] = cd[1] = cd[2] = 0.0;
    double tdot_run = 0.0;
    for (int i = 0; i < count; ++i) {
      const std::size_t di = static_cast<std::size_t>(d) * count + i;
      const double adot = qs.delta[i] * qs.e[i] * sigmadot[di];
      qs.alphadot[di] = adot;
      qs.tdot[di] = tdot_run;
      const double wdot = tdot_run * qs.alpha[i] + qs.bigt[i] * adot;
      qs.wdot[di] = wdot;
      for (int ch = 0; ch < 3; ++ch)
        cd[ch] += wdot * rgb[i * 3 + ch] + qs.w[i] * rgbdot[di * 3 + ch];
      tdot_run = tdot_run * (1.0 - qs.alpha[i]) - qs.bigt[i] * adot;
    }
  }
}

void volume_render_backward(const double* cbar, const double* rgb, int count,
                            const QuadratureScratch& qs, double* sigmabar, double* rgbbar) {
  double tbar = 0.0;
  for (int i = count - 1; i >= 0; --i) {
    const double wbar = dot3(cbar, rgb + i * 3);
    for (int ch = 0; ch < 3; ++ch) rgbbar[i * 3 + ch] = qs.w[i] * cbar[ch];
    const double abar = (wbar - tbar) * qs.bigt[i];
    tbar = wbar * qs.alpha[i] + tbar * (1.0 - qs.alpha[i]);
    sigmabar[i] = abar * qs.delta[i] * qs.e[i];
  }
}

void volume_render_dual_backward(const double* cbar, const double* cdotbar, const double* rgb,
                                 const double* rgbdot, const double* sigmadot, int count,
                                 int dirs, const QuadratureScratch& qs, double* sigmabar,
                                 double* rgbbar, double* sigmadotbar, double* rgbdotbar) {
  double tbar = 0.0;
  std::vector<double> tdotbar(dirs, 0.0);
  for (int i = count - 1; i >= 0; --i) {
    const double bigt = qs.bigt[i];
    const double alpha = qs.alpha[i];
    const double delta = qs.delta[i];
    const double e = qs.e[i];
    const double w = qs.w[i];
    const double de = delta * e;

    // w_i reaches the loss through C and through every Cdot term that
    // multiplies rgbdot, so its adjoint collects both.
    double wbar = dot3(cbar, rgb + i * 3);
    for (int d = 0; d < dirs; ++d)
      wbar += dot3(cdotbar + d * 3, rgbdot + (static_cast<std::size_t>(d) * count + i) * 3);
    for (int ch = 0; ch < 3; ++ch) rgbbar[i * 3 + ch] = w * cbar[ch];

    double abar = (wbar - tbar) * bigt;
    double tbar_new = wbar * alpha + tbar * (1.0 - alpha);
    double sbar_extra = 0.0;
    for (int d = 0; d < dirs; ++d) {
      const std::size_t di = static_cast<std::size_t>(d) * count + i;
      const double wdbar = dot3(cdotbar + d * 3, rgb + i * 3);
      for (int ch = 0; ch < 3; ++ch) {
        rgbdotbar[di * 3 + ch] = w * cdotbar[d * 3 + ch];
        rgbbar[i * 3 + ch] += qs.wdot[di] * cdotbar[d * 3 + ch];
      }
      const double diff = wdbar - tdotbar[d];
      abar += diff * qs.tdot[di];
      const double adbar = diff * bigt;
      tbar_new += diff * qs.alphadot[di];
      sigmadotbar[di] = adbar * de;
      sbar_extra += adbar * (-delta * de * sigmadot[di]);
      tdotbar[d] = wdbar * alpha + tdotbar[d] * (1.0 - alpha);
    }
    sigmabar[i] = abar * de + sbar_extra;
    tbar = tbar_new;
  }
}

// --- field evaluation helpers ---

namespace {

constexpr Activation kRgbMap{Act::sigmoid, 0.0};
constexpr Activation kDensityMap{Act::softplus, 0.0};

// Splits raw network outputs [N x 4] into contiguous rgb / sigma buffers and
// applies the output nonlinearities (with derivatives as requested).
struct FieldOutputs {
  Grid2D rgb_raw, rgb, rgb_ds, rgb_dds;        // [N x 3]
  Grid2D sig_raw, sigma, sig_ds, sig_dds;      // [N x 1]

  void compute(const Grid2D& y, bool need_ds, bool need_dds) {
    const int n = y.rows();
    ensure(rgb_raw, n, 3);
    ensure(sig_raw, n, 1);
    for (int i = 0; i < n; ++i) {
      const double* yr = y.row(i);
      double* rr = rgb_raw.row(i);
      rr[0] = yr[0];
      rr[1] = yr[1];
      rr[2] = yr[2];
      sig_raw(i, 0) = yr[3];
    }
    ensure(rgb, n, 3);
    ensure(sigma, n, 1);
    double *rds = nullptr, *rdds = nullptr, *sds = nullptr, *sdds = nullptr;
    if (need_ds) {
      ensure(rgb_ds, n, 3);
      ensure(sig_ds, n, 1);
      rds = rgb_ds.data();
      sds = sig_ds.data();
    }
    if (need_dds) {
      ensure(rgb_dds, n, 3);
      ensure(sig_dds, n, 1);
      rdds = rgb_dds.data();
      sdds = sig_dds.data();
    }
    act_eval(kRgbMap, rgb_raw.data(), rgb.data(), rds, rdds, rgb_raw.size());
    act_eval(kDensityMap, sig_raw.data(), sigma.data(), sds, sdds, sig_raw.size());
  }
};

// Encode positions (and tangents, when given) for the field network.
void encode_positions(const Mlp& mlp, const Grid2D& pos, const Grid2D* posdot, int dirs,
                      Grid2D& x, Grid2D& xdot) {
  if (!mlp.cfg.use_encoding()) {
    x = pos;
    if (posdot) xdot = *posdot;
    return;
  }
  const PositionalEncoding pe = mlp.cfg.encoding();
  x = pe.encode_batch(pos);
  if (posdot) {
    ensure(xdot, posdot->rows(), pe.output_dim());
    const int n = pos.rows();
    for (int d = 0; d < dirs; ++d)
      for (int i = 0; i < n; ++i)
        pe.jvp(pos.row(i), posdot->row(d * n + i), xdot.row(d * n + i));
  }
}

}  // namespace

void render_ray_dual(const Mlp& mlp, const Scene& scene, const CameraPose& pose, double u,
                     double v, int samples, double* c_out, double* cdot_out) {
  const Ray ray = generate_ray(pose, u, v);
  std::vector<double> depths;
  sample_depths(scene.near, scene.far, samples, nullptr, depths);

  Grid2D pos(samples, 3);
  Grid2D posdot(2 * samples, 3);
  for (int i = 0; i < samples; ++i) {
    for (int a = 0; a < 3; ++a) {
      pos(i, a) = ray.origin[a] + depths[i] * ray.dir[a];
      posdot(i, a) = depths[i] * ray.ddu[a];
      posdot(samples + i, a) = depths[i] * ray.ddv[a];
    }
  }
  Grid2D x, xdot;
  encode_positions(mlp, pos, &posdot, 2, x, xdot);
  ForwardCache cache;
  forward_dual(mlp, x, xdot, 2, cache, false);

  FieldOutputs out;
  out.compute(cache.y, true, false);
  std::vector<double> sigdot(2 * samples), rgbdot(static_cast<std::size_t>(2) * samples * 3);
  for (int d = 0; d < 2; ++d)
    for (int i = 0; i < samples; ++i) {
      const double* yd = cache.ydot.row(d * samples + i);
      sigdot[d * samples + i] = out.sig_ds(i, 0) * yd[3];
      for (int ch = 0; ch < 3; ++ch)
        rgbdot[(static_cast<std::size_t>(d) * samples + i) * 3 + ch] =
            out.rgb_ds(i, ch) * yd[ch];
    }
  QuadratureScratch qs;
  volume_render_dual(out.sigma.data(), out.rgb.data(), sigdot.data(), rgbdot.data(),
                     depths.data(), samples, 2, scene.far, qs, c_out, cdot_out);
}

Grid2D render_view(const Mlp& mlp, const Scene& scene, const CameraPose& pose, int samples) {
  const int rows = pose.height, cols = pose.width;
  std::vector<double> depths;
  sample_depths(scene.near, scene.far, samples, nullptr, depths);

  Grid2D pos(rows * cols * samples, 3);
  int row = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const Ray ray = generate_ray(pose, c, r);
      for (int i = 0; i < samples; ++i, ++row)
        for (int a = 0; a < 3; ++a) pos(row, a) = ray.origin[a] + depths[i] * ray.dir[a];
    }

  Grid2D x, xdot;
  encode_positions(mlp, pos, nullptr, 0, x, xdot);
  ForwardCache cache;
  forward(mlp, x, cache, false);
  FieldOutputs out;
  out.compute(cache.y, false, false);

  Grid2D img(rows, cols, 3);
  QuadratureScratch qs;
  double c3[3];
  int ray_index = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c, ++ray_index) {
      volume_render(out.sigma.data() + static_cast<std::size_t>(ray_index) * samples,
                    out.rgb.data() + static_cast<std::size_t>(ray_index) * samples * 3,
                    depths.data(), samples, scene.far, qs, c3);
      for (int ch = 0; ch < 3; ++ch) img(r, c, ch) = c3[ch];
    }
  return img;
}

double scene_eval_psnr(const Mlp& mlp, const Scene& scene, int samples, int holdout_every) {
  std::vector<int> eval_views;
  for (int i = 0; i < static_cast<int>(scene.views.size()); ++i)
    if (holdout_every > 0 && i % holdout_every == 0) eval_views.push_back(i);
  if (eval_views.empty())
    for (int i = 0; i < static_cast<int>(scene.views.size()); ++i) eval_views.push_back(i);
  double total = 0.0;
  for (int vi : eval_views) {
    const SceneView& view = scene.views[vi];
    total += psnr(render_view(mlp, scene, view.pose, samples), view.image, 0.0, 1.0);
  }
  return total / static_cast<double>(eval_views.size());
}

SceneRunResult run_inverse_rendering(const Scene& scene, const SceneRunConfig& cfg) {
  const int n_views = static_cast<int>(scene.views.size());
  if (n_views < 1) throw std::invalid_argument("run_inverse_rendering: empty scene");
  for (const SceneView& view : scene.views)
    if (view.image.channels() != 3)
      throw std::invalid_argument("run_inverse_rendering: views must be RGB");
  if (cfg.batch_rays < 1 || cfg.samples_per_ray < 1 || cfg.iterations < 1 ||
      cfg.log_interval < 1)
    throw std::invalid_argument("run_inverse_rendering: invalid loop parameters");

  std::vector<int> train_views;
  for (int i = 0; i < n_views; ++i)
    if (cfg.holdout_every <= 0 || i % cfg.holdout_every != 0) train_views.push_back(i);
  if (train_views.empty())
    throw std::invalid_argument("run_inverse_rendering: holdout leaves no training views");

  // Per-pixel-unit derivative targets of each training view.
  std::vector<Grid2D> target_du(n_views), target_dv(n_views);
  if (cfg.sobolev) {
    const double inv_gain = 1.0 / filter_gain(cfg.filter);
    for (int vi : train_views) {
      auto [du, dv] = image_derivatives(scene.views[vi].image, cfg.filter);
      double* pu = du.data();
      double* pv = dv.data();
      for (std::size_t j = 0; j < du.size(); ++j) {
        pu[j] *= inv_gain;
        pv[j] *= inv_gain;
      }
      target_du[vi] = std::move(du);
      target_dv[vi] = std::move(dv);
    }
  }

  MlpConfig mc = cfg.mlp;
  mc.input_dim = 3;
  mc.output_dim = 4;
  Rng master(cfg.seed);
  Rng init_rng = master.split();
  Rng ray_rng = master.split();
  const std::uint64_t jitter_base = master.next_u64();

  SceneRunResult res;
  res.mlp = build_mlp(mc, init_rng);
  Adam adam(res.mlp, cfg.adam);

  const int b = cfg.batch_rays;
  const int s = cfg.samples_per_ray;
  const int rows_total = b * s;

  Grid2D pos(rows_total, 3);
  Grid2D posdot(cfg.sobolev ? 2 * rows_total : 0, cfg.sobolev ? 3 : 0);
  std::vector<double> depths(static_cast<std::size_t>(b) * s);
  std::vector<double> ray_depths;
  Grid2D gt(b, 3);
  Grid2D gt_du(cfg.sobolev ? b : 0, cfg.sobolev ? 3 : 0);
  Grid2D gt_dv(cfg.sobolev ? b : 0, cfg.sobolev ? 3 : 0);

  Grid2D x, xdot;
  ForwardCache cache;
  FieldOutputs field;
  ParamGrads grads;
  Grid2D ybar(rows_total, 4);
  Grid2D ydotbar(cfg.sobolev ? 2 * rows_total : 0, cfg.sobolev ? 4 : 0);
  QuadratureScratch qs;
  std::vector<double> sigdot(cfg.sobolev ? 2 * rows_total : 0);
  std::vector<double> rgbdot(cfg.sobolev ? static_cast<std::size_t>(2) * rows_total * 3 : 0);
  std::vector<double> sig_ray(s), rgb_bar_ray(static_cast<std::size_t>(s) * 3);
  std::vector<double> sigdot_ray(static_cast<std::size_t>(2) * s);
  std::vector<double> rgbdot_ray(static_cast<std::size_t>(2) * s * 3);
  std::vector<double> sigbar_ray(s);
  std::vector<double> sigdotbar_ray(static_cast<std::size_t>(2) * s);
  std::vector<double> rgbdotbar_ray(static_cast<std::size_t>(2) * s * 3);

  const double qnan = std::numeric_limits<double>::quiet_NaN();
  double last_lv = qnan, last_ld = qnan;

  for (int it = 0; it < cfg.iterations; ++it) {
    // Draw the ray batch and its stratified depths.
    for (int rb = 0; rb < b; ++rb) {
      const int vi = train_views[ray_rng.next_u64() % train_views.size()];
      const SceneView& view = scene.views[vi];
      const int hw = view.pose.height * view.pose.width;
      const int pix = static_cast<int>(ray_rng.next_u64() % hw);
      const int pr = pix / view.pose.width;
      const int pc = pix % view.pose.width;

      const Ray ray = generate_ray(view.pose, pc, pr);
      Rng jitter(derive_seed(derive_seed(jitter_base, it),
                             static_cast<std::uint64_t>(vi) * hw + pix));
      sample_depths(scene.near, scene.far, s, &jitter, ray_depths);
      for (int i = 0; i < s; ++i) {
        const int row = rb * s + i;
        depths[row] = ray_depths[i];
        for (int a = 0; a < 3; ++a) {
          pos(row, a) = ray.origin[a] + ray_depths[i] * ray.dir[a];
          if (cfg.sobolev) {
            posdot(row, a) = ray_depths[i] * ray.ddu[a];
            posdot(rows_total + row, a) = ray_depths[i] * ray.ddv[a];
          }
        }
      }
      for (int ch = 0; ch < 3; ++ch) {
        gt(rb, ch) = view.image(pr, pc, ch);
        if (cfg.sobolev) {
          gt_du(rb, ch) = target_du[vi](pr, pc, ch);
          gt_dv(rb, ch) = target_dv[vi](pr, pc, ch);
        }
      }
    }

    encode_positions(res.mlp, pos, cfg.sobolev ? &posdot : nullptr, 2, x, xdot);

    double lv = 0.0, ld = qnan;
    if (cfg.sobolev) {
      forward_dual(res.mlp, x, xdot, 2, cache, true);
      field.compute(cache.y, true, true);
      for (int d = 0; d < 2; ++d)
        for (int row = 0; row < rows_total; ++row) {
          const double* yd = cache.ydot.row(d * rows_total + row);
          sigdot[static_cast<std::size_t>(d) * rows_total + row] = field.sig_ds(row, 0) * yd[3];
          for (int ch = 0; ch < 3; ++ch)
            rgbdot[(static_cast<std::size_t>(d) * rows_total + row) * 3 + ch] =
                field.rgb_ds(row, ch) * yd[ch];
        }

      ld = 0.0;
      double c3[3], cdot[6], cbar[3], cdotbar[6];
      const double scale_v = 2.0 / b;
      const double scale_d = 2.0 * cfg.lambda / b;
      for (int rb = 0; rb < b; ++rb) {
        // Gather this ray's tangent slices into the per-ray layout.
        for (int d = 0; d < 2; ++d)
          for (int i = 0; i < s; ++i) {
            const std::size_t src = static_cast<std::size_t>(d) * rows_total + rb * s + i;
            sigdot_ray[static_cast<std::size_t>(d) * s + i] = sigdot[src];
            for (int ch = 0; ch < 3; ++ch)
              rgbdot_ray[(static_cast<std::size_t>(d) * s + i) * 3 + ch] =
                  rgbdot[src * 3 + ch];
          }
        const double* sig = field.sigma.data() + static_cast<std::size_t>(rb) * s;
        const double* rgb = field.rgb.data() + static_cast<std::size_t>(rb) * s * 3;
        volume_render_dual(sig, rgb, sigdot_ray.data(), rgbdot_ray.data(),
                           depths.data() + static_cast<std::size_t>(rb) * s, s, 2, scene.far, qs,
                           c3, cdot);
        for (int ch = 0; ch < 3; ++ch) {
          const double dv = c3[ch] - gt(rb, ch);
          lv += dv * dv;
          cbar[ch] = scale_v * dv;
          const double ddu = cdot[ch] - gt_du(rb, ch);
          const double ddv = cdot[3 + ch] - gt_dv(rb, ch);
          ld += ddu * ddu + ddv * ddv;
          cdotbar[ch] = scale_d * ddu;
          cdotbar[3 + ch] = scale_d * ddv;
        }
        volume_render_dual_backward(cbar, cdotbar, rgb, rgbdot_ray.data(), sigdot_ray.data(), s,
                                    2, qs, sigbar_ray.data(), rgb_bar_ray.data(),
                                    sigdotbar_ray.data(), rgbdotbar_ray.data());
        // Map quadrature adjoints back onto raw network outputs.
        for (int i = 0; i < s; ++i) {
          const int row = rb * s + i;
          double* yb = ybar.row(row);
          double acc_sig = sigbar_ray[i] * field.sig_ds(row, 0);
          double acc_rgb[3];
          for (int ch = 0; ch < 3; ++ch)
            acc_rgb[ch] = rgb_bar_ray[static_cast<std::size_t>(i) * 3 + ch] *
                          field.rgb_ds(row, ch);
          for (int d = 0; d < 2; ++d) {
            const double* yd = cache.ydot.row(d * rows_total + row);
            double* ydb = ydotbar.row(d * rows_total + row);
            const double sdb = sigdotbar_ray[static_cast<std::size_t>(d) * s + i];
            acc_sig += sdb * yd[3] * field.sig_dds(row, 0);
            ydb[3] = sdb * field.sig_ds(row, 0);
            for (int ch = 0; ch < 3; ++ch) {
              const double rdb = rgbdotbar_ray[(static_cast<std::size_t>(d) * s + i) * 3 + ch];
              acc_rgb[ch] += rdb * yd[ch] * field.rgb_dds(row, ch);
              ydb[ch] = rdb * field.rgb_ds(row, ch);
            }
          }
          yb[3] = acc_sig;
          for (int ch = 0; ch < 3; ++ch) yb[ch] = acc_rgb[ch];
        }
      }
      lv /= b;
      ld /= b;
      if (!std::isfinite(lv) || !std::isfinite(ld)) throw DivergedError(it + 1, lv, ld);
      backward_sobolev(res.mlp, x, xdot, cache, ybar, ydotbar, grads);
    } else {
      forward(res.mlp, x, cache, true);
      field.compute(cache.y, true, false);
      double c3[3], cbar[3];
      const double scale_v = 2.0 / b;
      for (int rb = 0; rb < b; ++rb) {
        const double* sig = field.sigma.data() + static_cast<std::size_t>(rb) * s;
        const double* rgb = field.rgb.data() + static_cast<std::size_t>(rb) * s * 3;
        volume_render(sig, rgb, depths.data() + static_cast<std::size_t>(rb) * s, s, scene.far,
                      qs, c3);
        for (int ch = 0; ch < 3; ++ch) {
          const double dv = c3[ch] - gt(rb, ch);
          lv += dv * dv;
          cbar[ch] = scale_v * dv;
        }
        volume_render_backward(cbar, rgb, s, qs, sigbar_ray.data(), rgb_bar_ray.data());
        for (int i = 0; i < s; ++i) {
          const int row = rb * s + i;
          double* yb = ybar.row(row);
          yb[3] = sigbar_ray[i] * field.sig_ds(row, 0);
          for (int ch = 0; ch < 3; ++ch)
            yb[ch] = rgb_bar_ray[static_cast<std::size_t>(i) * 3 + ch] * field.rgb_ds(row, ch);
        }
      }
      lv /= b;
      if (!std::isfinite(lv)) throw DivergedError(it + 1, lv, 0.0);
      backward_value(res.mlp, x, cache, ybar, grads);
    }
    adam.step(res.mlp, grads);
    last_lv = lv;
    last_ld = ld;

    if ((it + 1) % cfg.log_interval == 0) {
      LogRow row;
      row.iteration = it + 1;
      row.loss_value = lv;
      row.loss_deriv = ld;
      row.psnr = scene_eval_psnr(res.mlp, scene, s, cfg.holdout_every);
      res.log.history.push_back(row);
    }
  }
  if (cfg.iterations % cfg.log_interval != 0) {
    LogRow row;
    row.iteration = cfg.iterations;
    row.loss_value = last_lv;
    row.loss_deriv = last_ld;
    row.psnr = scene_eval_psnr(res.mlp, scene, s, cfg.holdout_every);
    res.log.history.push_back(row);
  }
  res.psnr = scene_eval_psnr(res.mlp, scene, s, cfg.holdout_every);
  return res;
}

}  // namespace sinr
