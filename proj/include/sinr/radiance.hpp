#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sinr/filters.hpp"
#include "sinr/grid.hpp"
#include "sinr/mlp.hpp"
#include "sinr/rng.hpp"
#include "sinr/training.hpp"

namespace sinr {

struct CameraPose {
  std::array<std::array<double, 3>, 3> rot;  // camera-to-world; columns are the camera axes
  std::array<double, 3> origin;
  int height = 0, width = 0;
  double focal = 0.0;
};

// Pinhole ray through pixel (u, v), u = column index, v = row index, both in
// raw pixel units. dir is the camera-frame vector ((u - W/2)/f, -(v - H/2)/f,
// -1) rotated into the world, left unnormalized so the sample depth t runs
// along the camera's -z. ddu/ddv are the direction's derivatives in pixel
// units: rot column 0 / f and -(rot column 1) / f.
struct Ray {
  std::array<double, 3> origin;
  std::array<double, 3> dir;
  std::array<double, 3> ddu;
  std::array<double, 3> ddv;
};

Ray generate_ray(const CameraPose& pose, double u, double v);

struct SceneView {
  CameraPose pose;
  Grid2D image;  // [H x W x 3], values in [0, 1]
};

struct Scene {
  std::vector<SceneView> views;
  double near = 1.0;
  double far = 4.5;
};

// Procedural test scene: a shaded sphere seen from a ring of inward-looking
// cameras. Fully deterministic. Colors are the surface normal remapped to
// [0,1], tinted by a constant albedo and a fixed-light lambert term.
struct SphereSceneSpec {
  int views = 16;
  int image_size = 48;
  double ring_radius = 3.0;
  double eye_height = 0.9;
  double fov_degrees = 40.0;
  std::array<double, 3> center = {0.0, 0.0, 0.0};
  double radius = 0.8;
  std::array<double, 3> albedo = {1.0, 1.0, 1.0};
  // Sinusoidal albedo bands over the surface angles; 0 turns the pattern off.
  // Integer frequencies keep it seamless around the azimuth. Without texture
  // the images are nearly gradient-free and derivative supervision has
  // nothing to teach.
  double texture_freq = 4.0;
  // Bounds bracket the sphere from every ring camera (eye distance 3.13,
  // radius 0.8) with a little margin; keeping them tight leaves less
  // unsupervised space for stray density between the cameras and the object.
  double near = 2.0;
  double far = 4.3;
};

// Plain-text spec file: one `key = value` per line, '#' comments. Keys match
// the SphereSceneSpec fields (center and albedo take three values).
SphereSceneSpec parse_sphere_spec(const std::string& path);

Scene make_sphere_scene(const SphereSceneSpec& spec);
Scene make_sphere_scene(int n_views, int size);  // spec defaults with these two overridden

// Scene directory layout: a poses table plus images view_000.png,
// view_001.png, ... The table is poses_bounds.npy ('<f8', C-order, [N x 17])
// or poses_bounds.bin holding the same doubles raw; each row is a 3x5 block
// [R | t | (H W f)^T] in row-major order followed by near and far.
Scene load_scene(const std::string& dir);
void save_scene(const Scene& scene, const std::string& dir);

// Stratified sample depths t_i = near + (far - near) * (i + xi_i) / count
// for i = 0..count-1, xi uniform in [0, 1). Null jitter means midpoints
// (xi = 0.5), used for every evaluation render.
void sample_depths(double near, double far, int count, Rng* jitter, std::vector<double>& out);

// Per-ray transmittance quadrature:
//   alpha_i = 1 - exp(-sigma_i * delta_i), delta_i = t_{i+1} - t_i (the last
//   interval closes at far), T_1 = 1, T_{i+1} = T_i (1 - alpha_i),
//   C = sum_i T_i alpha_i rgb_i, no background term.
// The scratch keeps every forward intermediate so the reverse passes replay
// the recurrence without recomputation. Tangent blocks follow the usual
// stacked layout: sigmadot is [dirs*count], rgbdot [dirs*count x 3] row-major.
struct QuadratureScratch {
  std::vector<double> delta, e, alpha, bigt, w;       // count entries each
  std::vector<double> alphadot, tdot, wdot;           // dirs*count entries
};

void volume_render(const double* sigma, const double* rgb, const double* depths, int count,
                   double far, QuadratureScratch& qs, double* c_out);

void volume_render_dual(const double* sigma, const double* rgb, const double* sigmadot,
                        const double* rgbdot, const double* depths, int count, int dirs,
                        double far, QuadratureScratch& qs, double* c_out, double* cdot_out);

// Adjoints through the quadrature, replayed from the scratch of the matching
// forward call. cbar seeds dL/dC (3 values); the dual variant also takes
// cdotbar (dirs x 3) and fills the tangent adjoints.
void volume_render_backward(const double* cbar, const double* rgb, int count,
                            const QuadratureScratch& qs, double* sigmabar, double* rgbbar);

void volume_render_dual_backward(const double* cbar, const double* cdotbar, const double* rgb,
                                 const double* rgbdot, const double* sigmadot, int count,
                                 int dirs, const QuadratureScratch& qs, double* sigmabar,
                                 double* rgbbar, double* sigmadotbar, double* rgbdotbar);

// The field network maps a 3-D position (optionally encoded) to 4 raw
// outputs: columns 0..2 become rgb through a sigmoid, column 3 becomes
// density through a softplus.

// Color of one ray rendered with midpoint depths, plus its derivatives with
// respect to the pixel coordinates (cdot_out: row 0 = d/du, row 1 = d/dv).
void render_ray_dual(const Mlp& mlp, const Scene& scene, const CameraPose& pose, double u,
                     double v, int samples, double* c_out, double* cdot_out);

// Full-image render with midpoint depths.
Grid2D render_view(const Mlp& mlp, const Scene& scene, const CameraPose& pose, int samples);

struct SceneRunConfig {
  MlpConfig mlp;  // input_dim / output_dim are set by the runner
  int samples_per_ray = 16;
  int batch_rays = 64;
  int iterations = 20000;
  bool sobolev = true;
  double lambda = 1.0;
  DerivFilter filter = DerivFilter::sobel;
  AdamConfig adam;
  std::uint64_t seed = 0;
  int log_interval = 500;
  int holdout_every = 8;  // view indices divisible by this evaluate only
};

struct SceneRunResult {
  Mlp mlp;
  TrainResult log;
  double psnr = 0.0;  // mean over held-out views, full pixels, range 1
};

// Joint supervision on pixel colors and their finite-difference image
// derivatives, which live in per-pixel units (filter response / gain). Rays
// are drawn uniformly from the training views; depth jitter is a pure
// function of (seed, iteration, view, pixel) so runs are reproducible.
SceneRunResult run_inverse_rendering(const Scene& scene, const SceneRunConfig& cfg);

double scene_eval_psnr(const Mlp& mlp, const Scene& scene, int samples, int holdout_every);

}  // namespace sinr
