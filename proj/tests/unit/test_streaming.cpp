#include "msld/fixedpoint.hpp"
#include "msld/reference.hpp"
#include "msld/streaming.hpp"

#include "../support/test_data.hpp"

#include <doctest.h>

#include <array>

using namespace msld;

namespace {

double rel_diff(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

double max_roi_diff(const ResponseMap& a, const ResponseMap& b, const Mask& mask) {
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    if (mask.data()[i]) worst = std::max(worst, std::fabs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("line buffer capacity and window exposure") {
  CHECK(LineBuffer::capacity_for(15, 565) == 7925);
  LineBuffer buf(5, 10);
  CHECK(buf.capacity() == 45);
  for (int i = 0; i < 100; ++i) buf.push({static_cast<std::uint8_t>(i), i % 2 == 0});
  CHECK(buf.written() == 100);
  CHECK(buf.at(99).value == 99);
  CHECK(buf.at(55).value == 55);
  CHECK(buf.at(55).roi == false);
  CHECK(buf.at(4, 6).value == 64);
  CHECK_THROWS_AS(buf.at(54), std::out_of_range);
  CHECK_THROWS_AS(buf.at(100), std::out_of_range);
  // Center of the 5x5 window is 2 rows and 2 columns behind the cursor.
  CHECK(buf.center_index() == 99 - 22);
  const Index c = buf.center_index();
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx) CHECK_NOTHROW(buf.at(c + dy * 10 + dx));
}

TEST_CASE("line_sums_incremental") {
  const std::array<std::int64_t, 5> ones{1, 1, 1, 1, 1};
  CHECK(line_sums_incremental(ones) == std::vector<std::int64_t>{1, 3, 5});
  const std::array<std::int64_t, 5> mixed{5, 0, 2, 0, 5};
  CHECK(line_sums_incremental(mixed) == std::vector<std::int64_t>{2, 2, 12});

  // Exhaustive over a three-letter alphabet for W <= 7, against direct central sums.
  const std::array<std::int64_t, 3> alphabet{0, 1, 255};
  for (int w = 1; w <= 7; w += 2) {
    int combos = 1;
    for (int i = 0; i < w; ++i) combos *= 3;
    std::vector<std::int64_t> line(static_cast<std::size_t>(w));
    for (int code = 0; code < combos; ++code) {
      int c = code;
      for (int i = 0; i < w; ++i, c /= 3) line[static_cast<std::size_t>(i)] = alphabet[static_cast<std::size_t>(c % 3)];
      const auto sums = line_sums_incremental(line);
      for (int s = 0; s < static_cast<int>(sums.size()); ++s) {
        std::int64_t direct = 0;
        for (int i = (w - 1) / 2 - s; i <= (w - 1) / 2 + s; ++i) direct += line[static_cast<std::size_t>(i)];
        REQUIRE(sums[static_cast<std::size_t>(s)] == direct);
      }
    }
  }
}

TEST_CASE("rrcm_max_subtract") {
  std::array<double, 12> same;
  same.fill(3.0);
  CHECK(rrcm_max_subtract<double>(same, 3.0) == 0.0);
  std::array<double, 12> spike{};
  spike[11] = 100.0;
  CHECK(rrcm_max_subtract<double>(spike, 20.0) == 80.0);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 12> v;
    for (auto& x : v) x = u(rng);
    double best = v[0];
    for (double x : v) best = x > best ? x : best;
    const double wm = u(rng);
    CHECK(rrcm_max_subtract<double>(v, wm) == best - wm);

    std::array<FixedPoint, 12> fx;
    for (std::size_t i = 0; i < 12; ++i) fx[i] = fx_from_real(v[i], 18);
    // Two inputs quantized to 1/2 ulp each.
    CHECK(std::fabs(rrcm_max_subtract<FixedPoint>(fx, fx_from_real(wm, 18)).to_real() - (best - wm)) <=
          std::ldexp(1.0, -18));
  }
  CHECK_THROWS(rrcm_max_subtract<double>(std::span<const double>(same.data(), 11), 0.0));
}

TEST_CASE("pass 1 on a constant image") {
  const GrayImage img = GrayImage::Constant(17, 19, 120);
  const Mask mask = Mask::Constant(17, 19, true);
  for (auto mode : {ArithmeticMode::floating_point(), ArithmeticMode::fixed_point(18)}) {
    const auto stats = stream_pass1(img, mask, MsldParams(5), mode);
    CHECK(stats.roi_count == 17 * 19);
    for (std::size_t s = 0; s < stats.mean.size(); ++s) {
      if (mode.kind == ArithmeticMode::Kind::floating) {
        CHECK(stats.mean[s] == 0.0);
      } else {
        // c * L * q(1/L) - c * W^2 * q(1/W^2): reciprocal quantization only, the same at every pixel.
        CHECK(std::fabs(stats.mean[s]) <= 120.0 * 25 * std::ldexp(1.0, -19) + std::ldexp(1.0, -18));
      }
      CHECK(stats.std[s] == 0.0);
    }
    CHECK(stats.igc_mean == 120.0);
    CHECK(stats.igc_std == 0.0);
    CHECK(stats.clamped_variances == 0);
    const auto out = stream_pass2(img, mask, MsldParams(5), stats, mode);
    CHECK((out == 0.0).all());
  }
}

TEST_CASE("float streaming reproduces the reference engine") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 6; ++trial) {
    const Index w = 20 + trial * 3, h = 18 + trial * 2;
    const GrayImage img = trial % 2 ? testing::random_image(w, h, rng) : testing::random_vessel_image(w, h, rng);
    const Mask mask = trial % 3 == 2 ? testing::random_bernoulli_mask(w, h, rng) : testing::random_disk_mask(w, h, rng);
    const MsldParams p(std::array<int, 3>{5, 7, 11}[static_cast<std::size_t>(trial % 3)]);
    const auto ref = msld_reference(img, mask, p);
    const auto stats = stream_pass1(img, mask, p, ArithmeticMode::floating_point());
    CHECK(stats.clamped_variances == 0);
    CHECK(stats.roi_count == ref.stats.roi_count);
    for (std::size_t s = 0; s < stats.mean.size(); ++s) {
      CHECK(rel_diff(stats.mean[s], ref.stats.mean[s]) <= 1e-9);
      CHECK(rel_diff(stats.std[s], ref.stats.std[s]) <= 1e-9);
    }
    CHECK(rel_diff(stats.igc_mean, ref.stats.igc_mean) <= 1e-9);
    CHECK(rel_diff(stats.igc_std, ref.stats.igc_std) <= 1e-9);
    const auto out = stream_pass2(img, mask, p, stats, ArithmeticMode::floating_point());
    CHECK(max_roi_diff(out, ref.response, mask) <= 1e-9);
    for (Index i = 0; i < out.size(); ++i) {
      if (!mask.data()[i]) CHECK(out.data()[i] == 0.0);
    }
  }
}

TEST_CASE("images smaller than the window") {
  std::mt19937_64 rng(77);
  for (auto [w, h] : std::vector<std::pair<Index, Index>>{{1, 1}, {2, 5}, {6, 1}, {3, 3}}) {
    const GrayImage img = testing::random_image(w, h, rng);
    const Mask mask = Mask::Constant(h, w, true);
    const MsldParams p(7);
    const auto ref = msld_reference(img, mask, p);
    const auto st = msld_streaming(img, mask, p, ArithmeticMode::floating_point());
    CHECK(max_roi_diff(st.response, ref.response, mask) <= 1e-9);
  }
}

TEST_CASE("fixed-point streaming stays close to floating point") {
  std::mt19937_64 rng(99);
  const GrayImage img = testing::random_vessel_image(40, 36, rng);
  const Mask mask = testing::random_disk_mask(40, 36, rng);
  const MsldParams p(15);
  const auto fl = stream_pass1(img, mask, p, ArithmeticMode::floating_point());
  const auto fx = stream_pass1(img, mask, p, ArithmeticMode::fixed_point(18));
  for (std::size_t s = 0; s < fl.mean.size(); ++s) {
    // Reciprocals of L and W^2 quantized to 18 bits perturb means by well under 0.05 grey level.
    CHECK(std::fabs(fx.mean[s] - fl.mean[s]) <= 0.05);
    CHECK(std::fabs(fx.std[s] - fl.std[s]) <= 0.05);
  }
  CHECK(fx.igc_mean == doctest::Approx(fl.igc_mean).epsilon(1e-5));

  // Fixed statistics are exactly representable at 18 fractional bits.
  for (double m : fx.mean) CHECK(fx_from_real(m, 18).to_real() == m);
  // Float statistics are not, and are rejected by a fixed-point pass 2.
  CHECK_THROWS_AS(stream_pass2(img, mask, p, fl, ArithmeticMode::fixed_point(18)), ValidationError);
}

TEST_CASE("pass 2 rejects mismatched statistics") {
  std::mt19937_64 rng(5);
  const GrayImage img = testing::random_image(16, 16, rng);
  const Mask mask = Mask::Constant(16, 16, true);
  const auto stats = stream_pass1(img, mask, MsldParams(5), ArithmeticMode::floating_point());
  CHECK_THROWS_AS(stream_pass2(img, mask, MsldParams(7), stats, ArithmeticMode::floating_point()), ValidationError);
  Mask smaller = mask;
  smaller(0, 0) = false;
  CHECK_THROWS_AS(stream_pass2(img, smaller, MsldParams(5), stats, ArithmeticMode::floating_point()),
                  ValidationError);
  CHECK_THROWS_AS(stream_pass1(img, Mask::Constant(16, 16, false), MsldParams(5), ArithmeticMode::floating_point()),
                  ValidationError);
  CHECK_THROWS_AS(stream_pass1(img, Mask::Constant(8, 16, true), MsldParams(5), ArithmeticMode::floating_point()),
                  ValidationError);
}

TEST_CASE("determinism") {
  std::mt19937_64 rng(6);
  const GrayImage img = testing::random_vessel_image(30, 30, rng);
  const Mask mask = testing::random_disk_mask(30, 30, rng);
  for (auto mode : {ArithmeticMode::floating_point(), ArithmeticMode::fixed_point(18)}) {
    const auto a = msld_streaming(img, mask, MsldParams(9), mode);
    const auto b = msld_streaming(img, mask, MsldParams(9), mode);
    CHECK((a.response == b.response).all());
    CHECK(a.stats.mean == b.stats.mean);
    CHECK(a.stats.std == b.stats.std);
  }
}

TEST_CASE("memory footprint") {
  const auto nominal = nominal_footprint(MsldParams(15), 565);
  CHECK(nominal.line_buffer_slots == 7925);
  CHECK(nominal.stored_stats_values == 18);
  CHECK(nominal_footprint(MsldParams(41), 3504).stored_stats_values == 2 * 21 + 2);
  CHECK(nominal_footprint(MsldParams(41), 3504).line_buffer_slots == 40 * 3504 + 41);

  std::mt19937_64 rng(10);
  const GrayImage img = testing::random_vessel_image(565, 40, rng);
  const Mask mask = Mask::Constant(40, 565, true);
  const auto r = msld_streaming(img, mask, MsldParams(15), ArithmeticMode::fixed_point(18));
  CHECK(r.footprint.line_buffer_slots == 7925);
  CHECK(r.footprint.stored_stats_values == 18);
  CHECK(r.footprint.largest_allocation_bytes == 7925 * sizeof(PixelSlot));
  // Line buffer plus a few hundred bytes of registers and accumulators.
  CHECK(r.footprint.peak_total_bytes < 7925 * sizeof(PixelSlot) + 4096);
  CHECK(r.footprint.peak_total_bytes < static_cast<std::size_t>(img.size()));
}

TEST_CASE("wide fractional formats run without overflow") {
  std::mt19937_64 rng(12);
  const GrayImage img = testing::random_image(24, 24, rng);
  const Mask mask = Mask::Constant(24, 24, true);
  const auto ref = msld_reference(img, mask, MsldParams(5));
  const auto fx = msld_streaming(img, mask, MsldParams(5), ArithmeticMode::fixed_point(FixedPoint::max_frac_bits));
  CHECK(max_roi_diff(fx.response, ref.response, mask) <= 1e-6);
}
