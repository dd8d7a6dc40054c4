#include "msld/cli.hpp"

#include "msld/eval.hpp"
#include "msld/imageio.hpp"
#include "msld/reference.hpp"
#include "msld/response_io.hpp"
#include "msld/streaming.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace msld::cli {

namespace {

enum class Engine { reference, streaming_float, streaming_fixed };

const char* engine_name(Engine e) {
  switch (e) {
    case Engine::reference: return "reference";
    case Engine::streaming_float: return "streaming-float";
    case Engine::streaming_fixed: return "streaming-fixed";
  }
  return "?";
}

Engine parse_engine(const std::string& name) {
  if (name == "reference") return Engine::reference;
  if (name == "streaming-float") return Engine::streaming_float;
  if (name == "streaming-fixed") return Engine::streaming_fixed;
  throw ValidationError("unknown engine '" + name + "' (reference | streaming-float | streaming-fixed)");
}

struct RunConfig {
  std::string input;
  std::string mask;
  std::string truth;
  int window = 15;
  int frac_bits = 18;
  std::string engine = "streaming-fixed";
  std::optional<double> threshold;
  std::string out;
  std::string binary;
  std::string report;
  int reps = 3;
};

struct Inputs {
  GrayImage image;  // inverted green channel
  Mask mask;
};

// PPM inputs contribute their inverted green channel; a PGM is taken as the green channel itself.
GrayImage load_inverted_green(const std::string& path) {
  auto image = load_pnm(path);
  if (auto* rgb = std::get_if<RgbImage>(&image)) return extract_inverted_green(*rgb);
  const auto& gray = std::get<GrayImage>(image);
  return (255 - gray.cast<int>()).cast<std::uint8_t>();
}

Inputs load_inputs(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ValidationError("--input is required");
  if (cfg.mask.empty()) throw ValidationError("--mask is required");
  Inputs in{load_inverted_green(cfg.input), load_mask(cfg.mask)};
  check_inputs(in.image, in.mask);
  return in;
}

ArithmeticMode mode_for(Engine e, const MsldParams& params) {
  return e == Engine::streaming_fixed ? ArithmeticMode::fixed_point(params.frac_bits())
                                      : ArithmeticMode::floating_point();
}

void write_stats(std::ostream& out, const ScaleStats& stats, const MsldParams& params) {
  out << "roi_count " << stats.roi_count << '\n';
  for (std::size_t s = 0; s < stats.mean.size(); ++s) {
    const int length = params.scales()[s];
    out << "scale_" << length << "_mean " << stats.mean[s] << '\n';
    out << "scale_" << length << "_std " << stats.std[s] << '\n';
  }
  out << "igc_mean " << stats.igc_mean << '\n';
  out << "igc_std " << stats.igc_std << '\n';
  out << "clamped_variances " << stats.clamped_variances << '\n';
}

void write_footprint(std::ostream& out, const MemoryFootprint& f) {
  out << "line_buffer_slots " << f.line_buffer_slots << '\n';
  out << "accumulator_words " << f.accumulator_words << '\n';
  out << "stored_stats_values " << f.stored_stats_values << '\n';
  out << "register_words " << f.register_words << '\n';
  out << "peak_total_bytes " << f.peak_total_bytes << '\n';
  out << "largest_allocation_bytes " << f.largest_allocation_bytes << '\n';
}

// Writes to --report when given, otherwise to stdout.
void emit(const std::string& report_path, std::ostream& stdout_stream, const std::string& text) {
  if (report_path.empty()) {
    stdout_stream << text;
  } else {
    write_file_atomically(report_path, [&](std::ostream& o) { o << text; });
  }
}

struct EngineRun {
  ResponseMap response;
  ScaleStats stats;
  std::optional<MemoryFootprint> footprint;
};

EngineRun run_engine(Engine e, const Inputs& in, const MsldParams& params) {
  if (e == Engine::reference) {
    auto r = msld_reference(in.image, in.mask, params);
    return {std::move(r.response), std::move(r.stats), std::nullopt};
  }
  auto r = msld_streaming(in.image, in.mask, params, mode_for(e, params));
  return {std::move(r.response), std::move(r.stats), r.footprint};
}

int cmd_segment(const RunConfig& cfg, std::ostream& out) {
  if (cfg.out.empty()) throw ValidationError("--out is required");
  const MsldParams params(cfg.window, cfg.frac_bits);
  const Engine engine = parse_engine(cfg.engine);
  const Inputs in = load_inputs(cfg);
  const EngineRun run = run_engine(engine, in, params);

  std::ostringstream report;
  report << std::setprecision(17);
  report << "engine " << engine_name(engine) << '\n';
  report << "window " << params.window() << '\n';
  report << "frac_bits " << params.frac_bits() << '\n';
  report << "width " << in.image.cols() << '\n' << "height " << in.image.rows() << '\n';
  write_stats(report, run.stats, params);
  if (run.footprint) write_footprint(report, *run.footprint);

  save_response(run.response, cfg.out);
  if (cfg.threshold) {
    const std::filesystem::path binary = cfg.binary.empty() ? cfg.out + ".pgm" : cfg.binary;
    std::filesystem::path tmp = binary;
    tmp += ".tmp";
    save_mask(binarize(run.response, in.mask, *cfg.threshold), tmp);
    std::filesystem::rename(tmp, binary);
  }
  emit(cfg.report, out, report.str());
  return kSuccess;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  if (cfg.input.empty()) throw ValidationError("--input (response file) is required");
  if (cfg.truth.empty()) throw ValidationError("--truth is required");
  if (cfg.mask.empty()) throw ValidationError("--mask is required");
  const ResponseMap response = load_response(cfg.input);
  const Mask truth = load_mask(cfg.truth);
  const Mask roi = load_mask(cfg.mask);
  if (truth.rows() != response.rows() || truth.cols() != response.cols() || roi.rows() != response.rows() ||
      roi.cols() != response.cols()) {
    throw ValidationError("response, truth and mask dimensions differ");
  }
  const MetricsReport report =
      cfg.threshold ? evaluate_at(response, truth, roi, *cfg.threshold) : best_threshold(response, truth, roi);
  std::ostringstream text;
  write_report(text, report);
  emit(cfg.report, out, text.str());
  return kSuccess;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const MsldParams params(cfg.window, cfg.frac_bits);
  const Engine engine = parse_engine(cfg.engine);
  if (engine == Engine::reference) throw ValidationError("compare needs a streaming engine");
  const Inputs in = load_inputs(cfg);
  const EngineRun ref = run_engine(Engine::reference, in, params);
  const EngineRun stream = run_engine(engine, in, params);

  double max_diff = 0.0;
  double sum_diff = 0.0;
  for (Index i = 0; i < in.mask.size(); ++i) {
    if (!in.mask.data()[i]) continue;
    const double d = std::fabs(ref.response.data()[i] - stream.response.data()[i]);
    max_diff = std::max(max_diff, d);
    sum_diff += d;
  }
  std::ostringstream text;
  text << std::setprecision(17);
  text << "engine " << engine_name(engine) << '\n';
  text << "roi_count " << ref.stats.roi_count << '\n';
  text << "max_abs_diff " << max_diff << '\n';
  text << "mean_abs_diff " << sum_diff / static_cast<double>(ref.stats.roi_count) << '\n';
  for (std::size_t s = 0; s < ref.stats.mean.size(); ++s) {
    const int length = params.scales()[s];
    text << "scale_" << length << "_mean_delta " << stream.stats.mean[s] - ref.stats.mean[s] << '\n';
    text << "scale_" << length << "_std_delta " << stream.stats.std[s] - ref.stats.std[s] << '\n';
  }
  text << "igc_mean_delta " << stream.stats.igc_mean - ref.stats.igc_mean << '\n';
  text << "igc_std_delta " << stream.stats.igc_std - ref.stats.igc_std << '\n';
  text << "clamped_variances " << stream.stats.clamped_variances << '\n';
  emit(cfg.report, out, text.str());
  return kSuccess;
}

int cmd_bench(const RunConfig& cfg, bool engine_given, std::ostream& out) {
  if (cfg.reps < 1) throw ValidationError("--reps must be >= 1");
  const MsldParams params(cfg.window, cfg.frac_bits);
  std::vector<Engine> engines{Engine::reference, Engine::streaming_float, Engine::streaming_fixed};
  if (engine_given) engines = {parse_engine(cfg.engine)};
  const Inputs in = load_inputs(cfg);

  using Clock = std::chrono::steady_clock;
  auto seconds = [](Clock::time_point a, Clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };

  std::ostringstream text;
  text << std::setprecision(6);
  text << "width " << in.image.cols() << '\n' << "height " << in.image.rows() << '\n';
  text << "window " << params.window() << '\n' << "reps " << cfg.reps << '\n';
  for (Engine e : engines) {
    const std::string name = engine_name(e);
    for (int rep = 0; rep < cfg.reps; ++rep) {
      if (e == Engine::reference) {
        const auto t0 = Clock::now();
        const auto r = msld_reference(in.image, in.mask, params);
        const auto t1 = Clock::now();
        text << name << ".total_s." << rep << ' ' << seconds(t0, t1) << '\n';
      } else {
        const ArithmeticMode mode = mode_for(e, params);
        const auto t0 = Clock::now();
        const ScaleStats stats = stream_pass1(in.image, in.mask, params, mode);
        const auto t1 = Clock::now();
        const ResponseMap response = stream_pass2(in.image, in.mask, params, stats, mode);
        const auto t2 = Clock::now();
        text << name << ".pass1_s." << rep << ' ' << seconds(t0, t1) << '\n';
        text << name << ".pass2_s." << rep << ' ' << seconds(t1, t2) << '\n';
        text << name << ".total_s." << rep << ' ' << seconds(t0, t2) << '\n';
      }
    }
  }
  const bool any_streaming = std::any_of(engines.begin(), engines.end(), [](Engine e) { return e != Engine::reference; });
  if (any_streaming) {
    // Byte counts come from one instrumented run; they do not depend on timing.
    const Engine e = engines.back() == Engine::reference ? Engine::streaming_float : engines.back();
    const auto r = msld_streaming(in.image, in.mask, params, mode_for(e, params));
    write_footprint(text, r.footprint);
  } else {
    write_footprint(text, nominal_footprint(params, in.image.cols()));
  }
  emit(cfg.report, out, text.str());
  return kSuccess;
}

void add_image_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--input", cfg.input, "Fundus image, PPM (P3/P6) or PGM (P2/P5) green channel, maxval 255");
  cmd->add_option("--mask", cfg.mask, "ROI mask PGM; values > 0 are inside");
  cmd->add_option("--window", cfg.window, "Odd window size W >= 3")->capture_default_str();
  cmd->add_option("--frac-bits", cfg.frac_bits, "Fractional bits of the fixed-point engine")->capture_default_str();
  cmd->add_option("--report", cfg.report, "Write the key/value report here instead of stdout");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{
      "Multi-scale line detector for retinal vessel segmentation.\n"
      "Inputs are PGM/PPM with maxval 255; convert TIFF/GIF sources (e.g. DRIVE) beforehand."};
  app.require_subcommand(1);
  RunConfig cfg;
  bool engine_given = false;

  auto* segment = app.add_subcommand("segment", "Compute the combined response map");
  add_image_options(segment, cfg);
  segment->add_option("--engine", cfg.engine, "reference | streaming-float | streaming-fixed")->capture_default_str();
  segment->add_option("--out", cfg.out, "Response file (MSLDF header + little-endian float32)");
  segment->add_option("--threshold", cfg.threshold, "Also write a binarized PGM (response > threshold)");
  segment->add_option("--binary", cfg.binary, "Path of the binarized PGM (default: <out>.pgm)");

  auto* eval = app.add_subcommand("eval", "AUC / SE / SP / ACC of a response file inside the ROI");
  eval->add_option("--input", cfg.input, "Response file written by segment");
  eval->add_option("--truth", cfg.truth, "Ground-truth vessel PGM; values > 0 are vessel");
  eval->add_option("--mask", cfg.mask, "ROI mask PGM");
  eval->add_option("--threshold", cfg.threshold, "Fixed threshold; default is the accuracy-maximizing one");
  eval->add_option("--report", cfg.report, "Write the metrics report here instead of stdout");

  auto* compare = app.add_subcommand("compare", "Reference vs streaming engine differences over the ROI");
  add_image_options(compare, cfg);
  compare->add_option("--engine", cfg.engine, "streaming-float | streaming-fixed")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Wall time per engine and pass, plus the memory footprint");
  add_image_options(bench, cfg);
  bench->add_option("--engine", cfg.engine, "Restrict to one engine")->each([&](const std::string&) {
    engine_given = true;
  });
  bench->add_option("--reps", cfg.reps, "Repetitions per engine")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidation;
  }

  try {
    if (segment->parsed()) return cmd_segment(cfg, out);
    if (eval->parsed()) return cmd_eval(cfg, out);
    if (compare->parsed()) return cmd_compare(cfg, out);
    if (bench->parsed()) return cmd_bench(cfg, engine_given, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::overflow_error& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kValidation;
}

}  // namespace msld::cli
