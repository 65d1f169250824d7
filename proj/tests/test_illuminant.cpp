#include <doctest.h>

#include <cmath>

#include "mscc/illuminant.hpp"
#include "test_helpers.hpp"

using namespace mscc;

namespace {

// Same sampled-Gaussian tap convention as the implementation contract:
// normalized smoothing taps, derivative taps derived from them.
std::vector<double> taps_1d(double sigma, int derivative, int& radius) {
  radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> t(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    t[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += t[i + radius];
  }
  for (double& v : t) v /= sum;
  if (derivative == 1)
    for (int i = -radius; i <= radius; ++i) t[i + radius] *= -i / (sigma * sigma);
  return t;
}

}  // namespace

TEST_CASE("gaussian_derivative: order 0 with sigma 0 is the identity") {
  PlanarImage img = fixtures::random_image(201, 6, 6, 3, ColorSpace::CameraRaw);
  PlanarImage out = gaussian_derivative(img, 0.0, 0);
  CHECK(out.data == img.data);
}

TEST_CASE("gaussian_derivative: constant image has zero derivative energy") {
  PlanarImage img(8, 8, 3, ColorSpace::CameraRaw);
  for (double& v : img.data) v = 0.7;
  for (int order : {1, 2}) {
    PlanarImage out = gaussian_derivative(img, 1.0, order);
    for (double v : out.data) CHECK(std::abs(v) < 1e-13);
  }
}

TEST_CASE("gaussian_derivative: order > 0 requires positive sigma") {
  PlanarImage img = fixtures::random_image(202, 6, 6, 3, ColorSpace::CameraRaw);
  CHECK_THROWS_AS(gaussian_derivative(img, 0.0, 1), ConfigError);
}

TEST_CASE("gaussian_derivative: ramp matches the dense convolution oracle") {
  const int h = 12, w = 12;
  PlanarImage img(h, w, 1, ColorSpace::CameraRaw);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(0, y, x) = 0.3 * x + 0.1 * y;

  const double sigma = 1.0;
  PlanarImage out = gaussian_derivative(img, sigma, 1);

  int radius = 0;
  auto g0 = taps_1d(sigma, 0, radius);
  auto g1 = taps_1d(sigma, 1, radius);
  const int k = 2 * radius + 1;
  // Dense x-derivative and y-derivative kernels as outer products.
  std::vector<double> kx(k * k), ky(k * k);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) {
      kx[r * k + c] = g0[r] * g1[c];
      ky[r * k + c] = g1[r] * g0[c];
    }
  std::vector<double> plane(img.data.begin(), img.data.begin() + h * w);
  auto dx = oracle::convolve2d_replicate(plane, h, w, kx, radius);
  auto dy = oracle::convolve2d_replicate(plane, h, w, ky, radius);
  for (int y = radius; y < h - radius; ++y)
    for (int x = radius; x < w - radius; ++x) {
      double expect = std::hypot(dx[y * w + x], dy[y * w + x]);
      CHECK(std::abs(out.at(0, y, x) - expect) < 1e-10);
    }
}

TEST_CASE("minkowski: gray world on a constant image recovers its color") {
  PlanarImage img(4, 4, 3, ColorSpace::CameraRaw);
  const double color[3] = {0.2, 0.5, 0.1};
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) img.at(c, y, x) = color[c];
  IlluminantEstimate est = minkowski_estimate(img, estimator_preset("gw"));
  double norm = std::sqrt(0.2 * 0.2 + 0.5 * 0.5 + 0.1 * 0.1);
  for (int c = 0; c < 3; ++c)
    CHECK(est.rgb[c] == doctest::Approx(color[c] / norm).epsilon(1e-12));
}

TEST_CASE("minkowski: white patch takes the per-channel maximum") {
  PlanarImage img(2, 2, 3, ColorSpace::CameraRaw);
  // Maxima (2, 4, 4) spread over different pixels.
  img.at(0, 0, 0) = 2.0;
  img.at(1, 1, 0) = 4.0;
  img.at(2, 0, 1) = 4.0;
  IlluminantEstimate est = minkowski_estimate(img, estimator_preset("wp"));
  CHECK(est.rgb[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(est.rgb[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(est.rgb[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(est.raw_magnitude == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("minkowski: shades-of-gray two-pixel power mean by hand") {
  PlanarImage img(1, 2, 3, ColorSpace::CameraRaw);
  for (int c = 0; c < 3; ++c) {
    img.at(c, 0, 0) = 1.0;
    img.at(c, 0, 1) = 3.0;
  }
  IlluminantEstimate est = minkowski_estimate(img, estimator_preset("sog"));
  // Each channel: ((1 + 81)/2)^(1/4) = 41^(1/4); direction is neutral.
  double channel = std::pow(41.0, 0.25);
  CHECK(est.raw_magnitude ==
        doctest::Approx(channel * std::sqrt(3.0)).epsilon(1e-12));
  for (int c = 0; c < 3; ++c)
    CHECK(est.rgb[c] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("minkowski: scale covariance of the unit estimate") {
  PlanarImage img = fixtures::random_image(211, 8, 8, 3, ColorSpace::CameraRaw,
                                           0.05, 1.0);
  for (const char* name : {"gw", "wp", "sog", "ggw", "ge1", "ge2"}) {
    EstimatorSpec spec = estimator_preset(name);
    IlluminantEstimate a = minkowski_estimate(img, spec);
    IlluminantEstimate b = minkowski_estimate(scale_exposure(img, 3.7), spec);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(a.rgb[c] - b.rgb[c]) < 1e-12);
  }
}

TEST_CASE("minkowski: p=1 n=0 sigma=0 reproduces the arithmetic mean") {
  PlanarImage img = fixtures::random_image(221, 6, 7, 3, ColorSpace::CameraRaw);
  IlluminantEstimate est = minkowski_estimate(img, estimator_preset("gw"));
  std::vector<double> mean(3, 0.0);
  for (int c = 0; c < 3; ++c) {
    KahanSum s;
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 7; ++x) s.add(img.at(c, y, x));
    mean[c] = s.value() / 42.0;
  }
  IlluminantEstimate expect = normalize_estimate(mean);
  for (int c = 0; c < 3; ++c) CHECK(est.rgb[c] == expect.rgb[c]);
}

TEST_CASE("minkowski: p=infinity dominates as the channel max") {
  PlanarImage img = fixtures::random_image(231, 5, 5, 3, ColorSpace::CameraRaw);
  IlluminantEstimate est = minkowski_estimate(img, estimator_preset("wp"));
  for (int c = 0; c < 3; ++c) {
    double mx = 0.0;
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x) mx = std::max(mx, img.at(c, y, x));
    CHECK(est.rgb[c] * est.raw_magnitude == doctest::Approx(mx).epsilon(1e-12));
  }
}

TEST_CASE("minkowski: pre-normalization values are monotone in p") {
  PlanarImage img = fixtures::random_image(241, 6, 6, 3, ColorSpace::CameraRaw,
                                           0.01, 1.0);
  double previous[3] = {0, 0, 0};
  bool first = true;
  for (double p : {1.0, 2.0, 4.0, 8.0}) {
    EstimatorSpec spec{0, p, 0.0, "custom"};
    IlluminantEstimate est = minkowski_estimate(img, spec);
    for (int c = 0; c < 3; ++c) {
      double value = est.rgb[c] * est.raw_magnitude;
      if (!first) CHECK(value >= previous[c] - 1e-12);
      previous[c] = value;
    }
    first = false;
  }
}

TEST_CASE("minkowski: empty mask and degenerate scenes raise") {
  PlanarImage img(2, 2, 3, ColorSpace::CameraRaw);
  SUBCASE("empty mask") {
    for (auto& m : img.mask) m = 0;
    CHECK_THROWS_AS(minkowski_estimate(img, estimator_preset("gw")), DataError);
  }
  SUBCASE("all-zero response") {
    CHECK_THROWS_AS(minkowski_estimate(img, estimator_preset("gw")),
                    NumericError);
  }
}

TEST_CASE("estimator preset table and validation") {
  CHECK(estimator_preset("ggw").smoothing_sigma == 9.0);
  CHECK(estimator_preset("ge1").derivative_order == 1);
  CHECK(estimator_preset("ge2").smoothing_sigma == 1.0);
  CHECK(estimator_preset("wp").p_is_infinite());
  CHECK_THROWS_AS(estimator_preset("nope"), ConfigError);
  EstimatorSpec bad{1, 1.0, 0.0, "bad"};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  EstimatorSpec bad_p{0, 0.5, 0.0, "bad"};
  CHECK_THROWS_AS(bad_p.validate(), ConfigError);
}

TEST_CASE("minkowski: saturation guard drops clipped pixels") {
  PlanarImage img(1, 4, 3, ColorSpace::CameraRaw);
  for (int c = 0; c < 3; ++c)
    for (int x = 0; x < 4; ++x) img.at(c, 0, x) = 0.2;
  img.at(0, 0, 3) = 1.0;  // saturated in channel 0
  IlluminantEstimate guarded =
      minkowski_estimate(img, estimator_preset("gw"), 1.0);
  // The clipped pixel is excluded entirely, leaving a neutral estimate.
  for (int c = 0; c < 3; ++c)
    CHECK(guarded.rgb[c] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}
