#include "habdf/cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "habdf/errors.hpp"
#include "habdf/metrics.hpp"

namespace habdf::cli {

using io::format_real;

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const io::InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const io::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InsufficientDetectors& e) {
    err << "error: " << e.what() << " (majority voting needs at least 3 detectors)\n";
    return kExitUsage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DegenerateError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void require_file(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw io::InputError(std::string("missing ") + what + " path");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(p, ec)) {
    throw io::InputError(p.string() + ": " + what + " file not found");
  }
}

void append_indexed(std::ostream& out, const char* prefix, std::size_t n) {
  for (std::size_t i = 1; i <= n; ++i) out << ',' << prefix << i;
}

void append_values(std::ostream& out, const std::vector<double>& v) {
  for (double x : v) out << ',' << format_real(x);
}

Scenario checked_scenario(const io::RunConfig& config) {
  if (config.sensors.size() < 3) {
    throw io::ConfigError("simulation needs at least 3 sensors (sensor.1 .. sensor.3), got " +
                          std::to_string(config.sensors.size()));
  }
  return io::make_scenario(config);
}

void write_sweep_header(std::ostream& out, const std::vector<GridAxis>& axes, std::size_t n) {
  out << "cell";
  for (const auto& a : axes) out << ',' << a.key;
  out << ",fused_rmse";
  append_indexed(out, "sensor_rmse_", n);
  append_indexed(out, "expert_rmse_", n);
  append_indexed(out, "mean_wM_", n);
  append_indexed(out, "mean_wd_", n);
  append_indexed(out, "mean_rvv_", n);
  out << '\n';
}

}  // namespace

void write_sim_csv(std::ostream& out, const SimRecord& record) {
  const std::size_t n = record.sensors;
  out << "frame,truth";
  append_indexed(out, "sensor_", n);
  append_indexed(out, "expert_", n);
  append_indexed(out, "wM_", n);
  append_indexed(out, "wd_", n);
  append_indexed(out, "rvv_", n);
  out << ",fused,fused_var\n";
  for (const SimFrame& f : record.frames) {
    out << f.frame << ',' << format_real(f.truth);
    append_values(out, f.sensor);
    append_values(out, f.expert);
    append_values(out, f.w_M);
    append_values(out, f.w_d);
    append_values(out, f.rvv);
    out << ',' << format_real(f.fused) << ',' << format_real(f.fused_var) << '\n';
  }
}

void write_sim_summary(std::ostream& out, const SimSummary& s) {
  out << "series,rmse,mean_wM,mean_wd,mean_rvv\n";
  for (std::size_t i = 0; i < s.sensor_rmse.size(); ++i) {
    out << "sensor_" << i + 1 << ',' << format_real(s.sensor_rmse[i]) << ','
        << format_real(s.mean_w_M[i]) << ',' << format_real(s.mean_w_d[i]) << ','
        << format_real(s.mean_rvv[i]) << '\n';
  }
  for (std::size_t i = 0; i < s.expert_rmse.size(); ++i) {
    out << "expert_" << i + 1 << ',' << format_real(s.expert_rmse[i]) << ",,,\n";
  }
  out << "fused," << format_real(s.fused_rmse) << ",,,\n";
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    require_file(opts.config, "config");
    if (opts.out.empty()) throw io::InputError("missing --out path");
    io::RunConfig config = io::load_config(opts.config);
    if (opts.seed) config.seed = *opts.seed;

    const SimRecord record = run_sim_experiment(checked_scenario(config));
    const SimSummary summary = summarize(record);

    {
      auto out = io::open_output(opts.out);
      write_sim_csv(out, record);
    }
    std::filesystem::path summary_path = opts.summary;
    if (summary_path.empty() && !config.output_summary.empty()) summary_path = config.output_summary;
    if (summary_path.empty()) summary_path = io::sibling_path(opts.out, "summary");
    {
      auto out = io::open_output(summary_path);
      write_sim_summary(out, summary);
    }

    log << "simulated " << record.frames.size() << " frames, " << record.sensors
        << " sensors (seed " << config.seed << ")\n";
    for (std::size_t i = 0; i < summary.sensor_rmse.size(); ++i) {
      log << "  sensor_" << i + 1 << " rmse " << format_real(summary.sensor_rmse[i]) << '\n';
    }
    log << "  fused    rmse " << format_real(summary.fused_rmse) << '\n';
    log << "wrote " << opts.out.string() << " and " << summary_path.string() << '\n';
    return kExitOk;
  });
}

FuseResult fuse_tracks(const std::vector<io::TrackRecord>& records, const io::RunConfig& config) {
  FuseResult result;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    if (index.emplace(r.detector_id, result.detector_ids.size()).second) {
      result.detector_ids.push_back(r.detector_id);
    }
  }
  const std::size_t n = result.detector_ids.size();
  if (n < 3) {
    throw InsufficientDetectors("track log has " + std::to_string(n) +
                                " detectors; consensus needs at least 3");
  }
  if (records.empty()) throw io::InputError("track log has no rows");

  std::int64_t first = records.front().frame;
  std::int64_t last = first;
  std::map<std::int64_t, std::vector<const io::TrackRecord*>> by_frame;
  for (const auto& r : records) {
    first = std::min(first, r.frame);
    last = std::max(last, r.frame);
    auto& slot = by_frame[r.frame];
    if (slot.empty()) slot.assign(n, nullptr);
    auto& cell = slot[index[r.detector_id]];
    if (cell) {
      throw io::InputError("duplicate record for detector '" + r.detector_id + "' at frame " +
                           std::to_string(r.frame));
    }
    cell = &r;
  }

  io::RunConfig cfg = config;
  cfg.params.model.axes = 4;
  Pipeline pipeline = make_pipeline(n, cfg.params, io::resolved_fusion(cfg, 4));

  std::vector<std::optional<Vector>> meas(n);
  for (std::int64_t f = first; f <= last; ++f) {
    std::fill(meas.begin(), meas.end(), std::nullopt);
    if (auto it = by_frame.find(f); it != by_frame.end()) {
      for (std::size_t i = 0; i < n; ++i) {
        const io::TrackRecord* r = it->second[i];
        if (r && r->valid) meas[i] = Vector(r->box.as_vector());
      }
    }
    const PipelineFrame pf = pipeline.step(f, meas);
    if (!pf.initialized) continue;
    FusedTrackRow row;
    row.frame = f;
    row.box = BoundingBox::from_vector(pf.fused.state.mean.head(4));
    row.var = pf.fused.state.cov.diagonal().head(4);
    row.coasting = pf.fused.coasting;
    row.per_detector = pf.fused.per_detector;
    result.rows.push_back(std::move(row));
  }
  return result;
}

void write_fused(std::ostream& out, const FuseResult& result) {
  out << "frame,u,v,h,w,var_u,var_v,var_h,var_w,coasting\n";
  for (const auto& r : result.rows) {
    out << r.frame << ',' << format_real(r.box.u) << ',' << format_real(r.box.v) << ','
        << format_real(r.box.h) << ',' << format_real(r.box.w);
    for (int k = 0; k < 4; ++k) out << ',' << format_real(r.var[k]);
    out << ',' << (r.coasting ? 1 : 0) << '\n';
  }
}

void write_weights(std::ostream& out, const FuseResult& result) {
  out << "frame,detector_id,present,md,w_M,w_d,rvv\n";
  for (const auto& r : result.rows) {
    for (std::size_t i = 0; i < r.per_detector.size(); ++i) {
      const auto& d = r.per_detector[i];
      out << r.frame << ',' << result.detector_ids[i] << ',' << (d.present ? 1 : 0) << ','
          << format_real(d.md) << ',' << format_real(d.w_M) << ',' << format_real(d.w_d) << ','
          << format_real(d.rvv_scale) << '\n';
    }
  }
}

int cmd_fuse(const FuseOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    require_file(opts.tracks, "tracks");
    if (opts.out.empty()) throw io::InputError("missing --out path");
    io::RunConfig config;
    if (!opts.config.empty()) {
      require_file(opts.config, "config");
      config = io::load_config(opts.config);
    }
    const auto records = io::read_tracks(opts.tracks);
    if (records.empty()) throw io::InputError(opts.tracks.string() + ": no track records");
    const FuseResult result = fuse_tracks(records, config);

    {
      auto out = io::open_output(opts.out);
      write_fused(out, result);
    }
    const auto weights = opts.weights.empty() ? io::sibling_path(opts.out, "weights") : opts.weights;
    {
      auto out = io::open_output(weights);
      write_weights(out, result);
    }
    log << "fused " << result.rows.size() << " frames from " << result.detector_ids.size()
        << " detectors\nwrote " << opts.out.string() << " and " << weights.string() << '\n';
    return kExitOk;
  });
}

namespace {

using FrameBoxes = std::map<std::int64_t, BoundingBox>;

// Reads an estimate or ground-truth file. Files with a detector_id column
// yield one approach per detector; otherwise the file stem names the
// approach. Rows flagged invalid are dropped.
std::vector<std::pair<std::string, FrameBoxes>> read_boxes(const std::filesystem::path& path) {
  const io::CsvTable t = io::read_csv(path);
  for (const char* c : {"frame", "u", "v", "h", "w"}) {
    if (t.column(c) < 0) throw io::InputError(path.string() + ": missing column '" + c + "'");
  }
  const int c_id = t.column("detector_id");
  const int c_valid = t.column("valid");
  std::vector<std::pair<std::string, FrameBoxes>> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path.string() + ":" + std::to_string(t.lines[r]);
    if (c_valid >= 0 && !io::parse_bool(row[c_valid], where + " (valid)")) continue;
    const std::string name = c_id >= 0 ? row[c_id] : path.stem().string();
    auto [it, fresh] = index.emplace(name, out.size());
    if (fresh) out.emplace_back(name, FrameBoxes{});
    BoundingBox b{io::parse_real(row[t.column("u")], where + " (u)"),
                  io::parse_real(row[t.column("v")], where + " (v)"),
                  io::parse_real(row[t.column("h")], where + " (h)"),
                  io::parse_real(row[t.column("w")], where + " (w)")};
    try {
      validate(b);
    } catch (const ContractError& e) {
      throw io::InputError(where + ": " + e.what());
    }
    const auto frame = io::parse_int(row[t.column("frame")], where + " (frame)");
    if (!out[it->second].second.emplace(frame, b).second) {
      throw io::InputError(where + ": duplicate frame " + std::to_string(frame) + " for '" +
                           name + "'");
    }
  }
  return out;
}

}  // namespace

int cmd_eval(const EvalOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.inputs.empty()) throw io::InputError("missing --fused path");
    for (const auto& p : opts.inputs) require_file(p, "estimate");
    require_file(opts.gt, "ground-truth");
    if (opts.out.empty()) throw io::InputError("missing --out path");

    const auto gt_sets = read_boxes(opts.gt);
    if (gt_sets.size() != 1) {
      throw io::InputError(opts.gt.string() + ": ground truth must describe a single target");
    }
    const FrameBoxes& gt = gt_sets.front().second;

    std::vector<ApproachRun> runs;
    for (const auto& path : opts.inputs) {
      for (auto& [name, boxes] : read_boxes(path)) {
        ApproachRun run;
        run.name = name;
        std::size_t unmatched = 0;
        for (const auto& [frame, box] : boxes) {
          auto g = gt.find(frame);
          if (g == gt.end()) {
            ++unmatched;
            continue;
          }
          run.evals.push_back(evaluate_frame(box, g->second, frame));
        }
        for (const auto& [frame, _] : gt) unmatched += boxes.count(frame) ? 0 : 1;
        if (unmatched > 0) {
          log << name << ": " << unmatched << " unmatched frames excluded\n";
        }
        if (run.evals.empty()) {
          throw io::InputError(path.string() + ": approach '" + name +
                               "' shares no frames with the ground truth");
        }
        runs.push_back(std::move(run));
      }
    }
    const auto summary = summarize(runs);

    {
      auto out = io::open_output(opts.out);
      out << "approach,frame,jaccard,dist,success\n";
      for (const auto& run : runs) {
        for (const auto& e : run.evals) {
          out << run.name << ',' << e.frame << ',' << format_real(e.jaccard) << ','
              << format_real(e.dist) << ',' << (e.success ? 1 : 0) << '\n';
        }
      }
    }
    const auto summary_path =
        opts.summary.empty() ? io::sibling_path(opts.out, "summary") : opts.summary;
    {
      auto out = io::open_output(summary_path);
      out << "approach,frames,mean_jaccard,mean_dist,success_rate\n";
      for (const auto& s : summary) {
        out << s.name << ',' << s.frames << ',' << format_real(s.mean_jaccard) << ','
            << format_real(s.mean_dist) << ',' << format_real(s.success_rate) << '\n';
      }
    }

    log << std::left << std::setw(16) << "approach" << std::setw(8) << "frames" << std::setw(14)
        << "mean_jaccard" << std::setw(12) << "mean_dist" << "success\n";
    for (const auto& s : summary) {
      log << std::left << std::setw(16) << s.name << std::setw(8) << s.frames << std::setw(14)
          << format_real(s.mean_jaccard) << std::setw(12) << format_real(s.mean_dist)
          << format_real(s.success_rate) << '\n';
    }
    return kExitOk;
  });
}

std::vector<GridAxis> parse_grid(const std::string& spec_or_path) {
  std::vector<std::string> lines;
  std::string origin = "grid";
  std::error_code ec;
  if (std::filesystem::is_regular_file(spec_or_path, ec)) {
    std::ifstream in(spec_or_path);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    origin = spec_or_path;
  } else {
    std::string item;
    std::istringstream ss(spec_or_path);
    while (std::getline(ss, item, ';')) lines.push_back(item);
  }

  std::vector<GridAxis> axes;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string body = lines[n];
    if (auto h = body.find('#'); h != std::string::npos) body.resize(h);
    body = trim(body);
    if (body.empty()) continue;
    const std::string where = origin + ":" + std::to_string(n + 1);
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw io::ConfigError(where + ": expected 'key = a | b | c'");
    GridAxis axis;
    axis.key = trim(body.substr(0, eq));
    std::string item;
    std::istringstream vs(body.substr(eq + 1));
    while (std::getline(vs, item, '|')) {
      item = trim(item);
      if (item.empty()) throw io::ConfigError(where + ": " + axis.key + ": empty grid value");
      axis.values.push_back(item);
    }
    if (axis.key.empty() || axis.values.empty()) {
      throw io::ConfigError(where + ": expected 'key = a | b | c'");
    }
    for (const auto& a : axes) {
      if (a.key == axis.key) throw io::ConfigError(where + ": " + axis.key + ": repeated in grid");
    }
    axes.push_back(std::move(axis));
  }
  if (axes.empty()) throw io::ConfigError(origin + ": empty grid");
  return axes;
}

int cmd_sweep(const SweepOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    require_file(opts.config, "config");
    if (opts.out.empty()) throw io::InputError("missing --out path");
    io::RunConfig base = io::load_config(opts.config);
    if (opts.seed) base.seed = *opts.seed;
    const auto axes = parse_grid(opts.grid);

    std::size_t cells = 1;
    for (const auto& a : axes) {
      cells *= a.values.size();
      if (cells > kMaxSweepCells && !opts.force) {
        throw io::ConfigError("grid has more than " + std::to_string(kMaxSweepCells) +
                              " cells; pass --force to run it anyway");
      }
    }
    // Validate every value up front so a typo fails before any work is done.
    for (const auto& a : axes) {
      for (const auto& v : a.values) {
        io::RunConfig probe = base;
        io::set_config_value(probe, a.key, v, "grid");
      }
    }

    auto out = io::open_output(opts.out);
    std::size_t sensors = 0;
    std::vector<std::size_t> pick(axes.size(), 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      io::RunConfig config = base;
      for (std::size_t k = 0; k < axes.size(); ++k) {
        io::set_config_value(config, axes[k].key, axes[k].values[pick[k]], "grid");
      }
      const SimSummary s = summarize(run_sim_experiment(checked_scenario(config)));
      if (cell == 0) {
        sensors = s.sensor_rmse.size();
        write_sweep_header(out, axes, sensors);
      } else if (s.sensor_rmse.size() != sensors) {
        throw io::ConfigError("grid changes the number of sensors between cells");
      }
      out << cell;
      for (std::size_t k = 0; k < axes.size(); ++k) {
        std::string v = axes[k].values[pick[k]];
        std::replace(v.begin(), v.end(), ',', ' ');
        out << ',' << v;
      }
      out << ',' << format_real(s.fused_rmse);
      append_values(out, s.sensor_rmse);
      append_values(out, s.expert_rmse);
      append_values(out, s.mean_w_M);
      append_values(out, s.mean_w_d);
      append_values(out, s.mean_rvv);
      out << '\n';

      // odometer over the grid, last axis fastest
      for (std::size_t k = axes.size(); k-- > 0;) {
        if (++pick[k] < axes[k].values.size()) break;
        pick[k] = 0;
      }
    }
    log << "swept " << cells << " cells, wrote " << opts.out.string() << '\n';
    return kExitOk;
  });
}

}  // namespace habdf::cli
