#include "msld/streaming.hpp"

#include "msld/error.hpp"
#include "msld/fixedpoint.hpp"
#include "msld/reference.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace msld {

LineBuffer::LineBuffer(int window, Index cols, MemoryLedger* ledger)
    : cols_(cols),
      half_((window - 1) / 2),
      slots_(static_cast<std::size_t>(capacity_for(window, cols)), PixelSlot{}, CountingAllocator<PixelSlot>(ledger)) {}

void LineBuffer::push(PixelSlot slot) {
  slots_[static_cast<std::size_t>(written_ % capacity())] = slot;
  ++written_;
}

const PixelSlot& LineBuffer::at(Index linear) const {
  if (linear < 0 || linear >= written_ || linear < written_ - capacity()) {
    throw std::out_of_range("line buffer read of pixel " + std::to_string(linear) + " outside the " +
                            std::to_string(capacity()) + "-slot window ending at " + std::to_string(written_));
  }
  return slots_[static_cast<std::size_t>(linear % capacity())];
}

void line_sums_incremental(std::span<const std::int64_t> line_pixels, std::span<std::int64_t> sums) {
  const std::size_t w = line_pixels.size();
  if (w % 2 == 0) throw std::invalid_argument("line_sums_incremental expects an odd number of pixels");
  if (sums.size() != (w + 1) / 2) throw std::invalid_argument("line_sums_incremental: output size mismatch");
  const std::size_t center = (w - 1) / 2;
  sums[0] = line_pixels[center];
  for (std::size_t s = 1; s < sums.size(); ++s) {
    sums[s] = sums[s - 1] + line_pixels[center - s] + line_pixels[center + s];
  }
}

std::vector<std::int64_t> line_sums_incremental(std::span<const std::int64_t> line_pixels) {
  std::vector<std::int64_t> sums((line_pixels.size() + 1) / 2);
  line_sums_incremental(line_pixels, sums);
  return sums;
}

MemoryFootprint nominal_footprint(const MsldParams& params, Index cols) {
  MemoryFootprint f;
  const Index n = params.n_scales();
  f.line_buffer_slots = LineBuffer::capacity_for(params.window(), cols);
  f.accumulator_words = 2 * (n + 1) + 1;
  f.stored_stats_values = 2 * n + 2;
  f.register_words = params.window() + params.window() + kOrientations * n + n;
  return f;
}

namespace {

// Double-precision datapath. Means are exact integer sums divided by the pixel count.
class FloatDatapath {
 public:
  using Value = double;
  struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  struct Stat {
    double mean = 0.0;
    double std = 0.0;
  };

  Value from_pixel(int v) const { return v; }
  Value line_mean(std::int64_t sum, int length) const { return static_cast<double>(sum) / length; }
  Value window_mean(std::int64_t sum, std::int64_t area) const {
    return static_cast<double>(sum) / static_cast<double>(area);
  }
  void accumulate(Accumulator& acc, Value v) const {
    acc.sum += v;
    acc.sum_sq += v * v;
  }
  Stat finalize(const Accumulator& acc, Index n, Index& clamped) const {
    const double count = static_cast<double>(n);
    const double mean = acc.sum / count;
    double variance = acc.sum_sq / count - mean * mean;
    if (variance < 0.0) {
      ++clamped;
      variance = 0.0;
    }
    return {mean, std::sqrt(variance)};
  }
  Stat load(double mean, double std) const { return {mean, std}; }
  double store(Value v) const { return v; }
  Value standardize(Value v, const Stat& s) const { return msld::standardize(v, s.mean, s.std); }
  Value combine(std::span<const Value> terms) const {
    double sum = 0.0;
    for (double t : terms) sum += t;
    return sum / static_cast<double>(terms.size());
  }
  Value zero() const { return 0.0; }
  double to_real(Value v) const { return v; }
  void check_range(Index) const {}
};

// Fixed-point datapath with f fractional bits. Divisions by the constants L,
// W^2 and n_L + 1 are multiplications by reciprocals quantized to f bits.
class FixedDatapath {
 public:
  using Value = FixedPoint;
  struct Accumulator {
    wide::Int sum = 0;     // raw, f fractional bits
    wide::Int sum_sq = 0;  // raw^2, 2f fractional bits
  };
  struct Stat {
    FixedPoint mean;
    FixedPoint std;
  };

  FixedDatapath(const MsldParams& params, int frac_bits)
      : f_(frac_bits),
        recip_area_(fx_from_real(1.0 / (static_cast<double>(params.window()) * params.window()), frac_bits)),
        recip_combine_(fx_from_real(1.0 / (params.n_scales() + 1), frac_bits)) {
    recip_length_.resize(static_cast<std::size_t>(params.window()) + 1);
    for (int length : params.scales()) {
      recip_length_[static_cast<std::size_t>(length)] = fx_from_real(1.0 / length, frac_bits);
    }
  }

  Value from_pixel(int v) const { return FixedPoint::from_int(v, f_); }
  Value line_mean(std::int64_t sum, int length) const {
    return fx_mul(FixedPoint::from_int(sum, f_), recip_length_[static_cast<std::size_t>(length)]);
  }
  Value window_mean(std::int64_t sum, std::int64_t) const { return fx_mul(FixedPoint::from_int(sum, f_), recip_area_); }
  void accumulate(Accumulator& acc, const Value& v) const {
    acc.sum += v.raw();
    acc.sum_sq += static_cast<wide::Int>(v.raw()) * v.raw();
  }
  Stat finalize(const Accumulator& acc, Index n, Index& clamped) const {
    const FixedPoint mean = FixedPoint::from_raw(wide::narrow(wide::round_div(acc.sum, n)), f_);
    const FixedPoint mean_sq =
        FixedPoint::from_raw(wide::narrow(wide::round_shift(wide::round_div(acc.sum_sq, n), f_)), f_);
    FixedPoint variance = mean_sq - mean * mean;
    if (variance.raw() < 0) {
      ++clamped;
      variance = FixedPoint::from_raw(0, f_);
    }
    return {mean, fx_sqrt(variance)};
  }
  Stat load(double mean, double std) const {
    const Stat s{fx_from_real(mean, f_), fx_from_real(std, f_)};
    if (s.mean.to_real() != mean || s.std.to_real() != std) {
      throw ValidationError("statistics are not representable with " + std::to_string(f_) +
                            " fractional bits; were they produced in this arithmetic mode?");
    }
    return s;
  }
  double store(const Value& v) const { return v.to_real(); }
  Value standardize(const Value& v, const Stat& s) const {
    if (s.std.raw() == 0) return FixedPoint::from_raw(0, f_);
    return (v - s.mean) / s.std;
  }
  Value combine(std::span<const Value> terms) const {
    FixedPoint sum = FixedPoint::from_raw(0, f_);
    for (const auto& t : terms) sum = sum + t;
    return sum * recip_combine_;
  }
  Value zero() const { return FixedPoint::from_raw(0, f_); }
  double to_real(const Value& v) const { return v.to_real(); }

  // Static range analysis for the wide accumulators: |x| <= 256 for every
  // accumulated signal, so sum_sq needs log2(N) + 2 * (8 + f) bits.
  void check_range(Index pixels) const {
    const int needed = wide::bit_width(static_cast<wide::Int>(pixels)) + 2 * (9 + f_);
    if (needed > 126) {
      throw NumericError("accumulators would need " + std::to_string(needed) +
                         " bits; reduce frac_bits or the image size");
    }
  }

 private:
  int f_;
  FixedPoint recip_area_;
  FixedPoint recip_combine_;
  std::vector<FixedPoint> recip_length_;
};

// Raw-response generator shared by both passes: line buffer, column-sum
// register, twelve incremental line-sum units and the per-scale max/subtract.
template <class Datapath>
class RawResponseStream {
 public:
  using Value = typename Datapath::Value;

  RawResponseStream(const MsldParams& params, const GrayImage& img, const Mask& mask, const Datapath& dp,
                    MemoryLedger* ledger)
      : params_(params),
        img_(img),
        mask_(mask),
        dp_(dp),
        cols_(img.cols()),
        rows_(img.rows()),
        half_(params.half_window()),
        buffer_(params.window(), img.cols(), ledger),
        column_sums_(static_cast<std::size_t>(params.window()), 0, CountingAllocator<std::int64_t>(ledger)),
        line_pixels_(static_cast<std::size_t>(params.window()), 0, CountingAllocator<std::int64_t>(ledger)),
        line_sums_(static_cast<std::size_t>(params.n_scales()), 0, CountingAllocator<std::int64_t>(ledger)),
        line_means_(static_cast<std::size_t>(params.n_scales() * kOrientations), dp.zero(),
                    CountingAllocator<Value>(ledger)),
        raw_(static_cast<std::size_t>(params.n_scales()), dp.zero(), CountingAllocator<Value>(ledger)) {
    for (int k = 0; k < kOrientations; ++k) patterns_[static_cast<std::size_t>(k)] = line_offsets(k, params.window());
  }

  // Streams the image in raster order. sink(x, y, roi, raw_responses, igc) is
  // called once per pixel, in raster order; raw_responses is only valid when roi.
  template <class Sink>
  void run(Sink&& sink) {
    const Index total = rows_ * cols_;
    const Index lag = half_ * cols_ + half_;
    Index next_center = 0;
    for (Index p = 0; p < total; ++p) {
      buffer_.push({img_.data()[p], mask_.data()[p]});
      if (p >= lag) process(next_center++, sink);
    }
    // Bottom rows: remaining centers read only edge-clamped, already buffered pixels.
    while (next_center < total) process(next_center++, sink);
  }

 private:
  std::int64_t column_sum(Index col, Index cy) const {
    std::int64_t sum = 0;
    for (Index dy = -half_; dy <= half_; ++dy) sum += buffer_.at(col, clamp_coord(cy + dy, rows_)).value;
    return sum;
  }

  void advance_window(Index cx, Index cy) {
    const std::size_t w = column_sums_.size();
    if (cx == 0) {
      window_total_ = 0;
      column_head_ = 0;
      for (std::size_t i = 0; i < w; ++i) {
        column_sums_[i] = column_sum(clamp_coord(static_cast<Index>(i) - half_, cols_), cy);
        window_total_ += column_sums_[i];
      }
      return;
    }
    const std::int64_t entering = column_sum(clamp_coord(cx + half_, cols_), cy);
    window_total_ += entering - column_sums_[column_head_];
    column_sums_[column_head_] = entering;
    column_head_ = (column_head_ + 1) % w;
  }

  template <class Sink>
  void process(Index center, Sink& sink) {
    const Index cx = center % cols_;
    const Index cy = center / cols_;
    advance_window(cx, cy);
    const PixelSlot& slot = buffer_.at(center);
    if (!slot.roi) {
      sink(cx, cy, false, std::span<const Value>(raw_), dp_.zero());
      return;
    }

    const int w = params_.window();
    const int n = params_.n_scales();
    const Value window_mean = dp_.window_mean(window_total_, static_cast<std::int64_t>(w) * w);
    for (int k = 0; k < kOrientations; ++k) {
      const auto& offsets = patterns_[static_cast<std::size_t>(k)].offsets;
      for (int j = 0; j < w; ++j) {
        const auto& o = offsets[static_cast<std::size_t>(j)];
        line_pixels_[static_cast<std::size_t>(j)] =
            buffer_.at(clamp_coord(cx + o.dx, cols_), clamp_coord(cy + o.dy, rows_)).value;
      }
      line_sums_incremental(line_pixels_, line_sums_);
      for (int s = 0; s < n; ++s) {
        line_means_[static_cast<std::size_t>(s * kOrientations + k)] =
            dp_.line_mean(line_sums_[static_cast<std::size_t>(s)], params_.scales()[static_cast<std::size_t>(s)]);
      }
    }
    const std::span<const Value> means(line_means_);
    for (int s = 0; s < n; ++s) {
      raw_[static_cast<std::size_t>(s)] =
          rrcm_max_subtract(means.subspan(static_cast<std::size_t>(s * kOrientations), kOrientations), window_mean);
    }
    sink(cx, cy, true, std::span<const Value>(raw_), dp_.from_pixel(slot.value));
  }

  const MsldParams& params_;
  const GrayImage& img_;
  const Mask& mask_;
  const Datapath& dp_;
  Index cols_;
  Index rows_;
  Index half_;
  LineBuffer buffer_;
  std::array<LinePattern, kOrientations> patterns_;
  TrackedVector<std::int64_t> column_sums_;
  std::size_t column_head_ = 0;
  std::int64_t window_total_ = 0;
  TrackedVector<std::int64_t> line_pixels_;
  TrackedVector<std::int64_t> line_sums_;
  TrackedVector<Value> line_means_;
  TrackedVector<Value> raw_;
};

template <class Datapath>
ScaleStats run_pass1(const GrayImage& img, const Mask& mask, const MsldParams& params, const Datapath& dp,
                     MemoryLedger* ledger) {
  check_inputs(img, mask);
  dp.check_range(img.size());
  using Acc = typename Datapath::Accumulator;
  using Value = typename Datapath::Value;
  TrackedVector<Acc> accumulators(static_cast<std::size_t>(params.n_scales()) + 1, Acc{},
                                  CountingAllocator<Acc>(ledger));
  Index roi_count = 0;

  RawResponseStream<Datapath> stream(params, img, mask, dp, ledger);
  stream.run([&](Index, Index, bool roi, std::span<const Value> raw, const Value& igc) {
    if (!roi) return;
    ++roi_count;
    for (std::size_t s = 0; s < raw.size(); ++s) dp.accumulate(accumulators[s], raw[s]);
    dp.accumulate(accumulators.back(), igc);
  });

  ScaleStats stats;
  stats.roi_count = roi_count;
  stats.mean.reserve(static_cast<std::size_t>(params.n_scales()));
  stats.std.reserve(static_cast<std::size_t>(params.n_scales()));
  for (int s = 0; s < params.n_scales(); ++s) {
    const auto st = dp.finalize(accumulators[static_cast<std::size_t>(s)], roi_count, stats.clamped_variances);
    stats.mean.push_back(dp.store(st.mean));
    stats.std.push_back(dp.store(st.std));
  }
  const auto igc = dp.finalize(accumulators.back(), roi_count, stats.clamped_variances);
  stats.igc_mean = dp.store(igc.mean);
  stats.igc_std = dp.store(igc.std);
  return stats;
}

template <class Datapath>
ResponseMap run_pass2(const GrayImage& img, const Mask& mask, const MsldParams& params, const ScaleStats& stats,
                      const Datapath& dp, MemoryLedger* ledger) {
  check_inputs(img, mask);
  dp.check_range(img.size());
  if (stats.mean.size() != static_cast<std::size_t>(params.n_scales()) || stats.std.size() != stats.mean.size()) {
    throw ValidationError("statistics hold " + std::to_string(stats.mean.size()) + " scales but the window has " +
                          std::to_string(params.n_scales()));
  }
  if (stats.roi_count != mask.count()) throw ValidationError("statistics were computed over a different ROI");

  using Value = typename Datapath::Value;
  using Stat = typename Datapath::Stat;
  TrackedVector<Stat> loaded{CountingAllocator<Stat>(ledger)};
  loaded.reserve(static_cast<std::size_t>(params.n_scales()) + 1);
  for (int s = 0; s < params.n_scales(); ++s) {
    loaded.push_back(dp.load(stats.mean[static_cast<std::size_t>(s)], stats.std[static_cast<std::size_t>(s)]));
  }
  loaded.push_back(dp.load(stats.igc_mean, stats.igc_std));
  TrackedVector<Value> terms(loaded.size(), dp.zero(), CountingAllocator<Value>(ledger));

  ResponseMap out(img.rows(), img.cols());
  RawResponseStream<Datapath> stream(params, img, mask, dp, ledger);
  stream.run([&](Index x, Index y, bool roi, std::span<const Value> raw, const Value& igc) {
    if (!roi) {
      out(y, x) = 0.0;
      return;
    }
    for (std::size_t s = 0; s < raw.size(); ++s) terms[s] = dp.standardize(raw[s], loaded[s]);
    terms.back() = dp.standardize(igc, loaded.back());
    out(y, x) = dp.to_real(dp.combine(terms));
  });
  return out;
}

}  // namespace

ScaleStats stream_pass1(const GrayImage& img, const Mask& mask, const MsldParams& params, ArithmeticMode mode,
                        MemoryLedger* ledger) {
  if (mode.kind == ArithmeticMode::Kind::fixed) {
    return run_pass1(img, mask, params, FixedDatapath(params, mode.frac_bits), ledger);
  }
  return run_pass1(img, mask, params, FloatDatapath{}, ledger);
}

ResponseMap stream_pass2(const GrayImage& img, const Mask& mask, const MsldParams& params, const ScaleStats& stats,
                         ArithmeticMode mode, MemoryLedger* ledger) {
  if (mode.kind == ArithmeticMode::Kind::fixed) {
    return run_pass2(img, mask, params, stats, FixedDatapath(params, mode.frac_bits), ledger);
  }
  return run_pass2(img, mask, params, stats, FloatDatapath{}, ledger);
}

StreamingResult msld_streaming(const GrayImage& img, const Mask& mask, const MsldParams& params,
                               ArithmeticMode mode) {
  MemoryLedger ledger;
  StreamingResult result;
  result.stats = stream_pass1(img, mask, params, mode, &ledger);
  result.response = stream_pass2(img, mask, params, result.stats, mode, &ledger);
  result.footprint = nominal_footprint(params, img.cols());
  result.footprint.peak_total_bytes = ledger.peak_bytes();
  result.footprint.largest_allocation_bytes = ledger.largest_allocation_bytes();
  return result;
}

}  // namespace msld
