#include "mdcsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace mdcsim {

using nlohmann::json;

namespace {

double capacity(const RawResults& raw) {
    return static_cast<double>(raw.mdc_config.capacity());
}

std::vector<EnvelopePoint> envelope_of(const RawResults& raw, bool reservation) {
    if (raw.series.empty()) throw InvalidParameterError("envelope requires >= 1 MDC");
    const std::size_t n_samples = raw.series[0].size();
    std::vector<EnvelopePoint> out;
    out.reserve(n_samples);
    const double cap = capacity(raw);
    for (std::size_t i = 0; i < n_samples; ++i) {
        EnvelopePoint p;
        p.t = engine::to_seconds(raw.series[0][i].t);
        p.min = std::numeric_limits<double>::infinity();
        p.max = -p.min;
        double sum = 0.0;
        for (const auto& series : raw.series) {
            const double u = (reservation ? series[i].reserved_threads
                                          : series[i].busy_threads) / cap;
            sum += u;
            p.min = std::min(p.min, u);
            p.max = std::max(p.max, u);
        }
        p.mean = sum / static_cast<double>(raw.series.size());
        out.push_back(p);
    }
    return out;
}

}  // namespace

std::vector<EnvelopePoint> utilization_envelope(const RawResults& raw) {
    return envelope_of(raw, /*reservation=*/true);
}

std::vector<TaskShare> task_shares(const RawResults& raw) {
    if (raw.series.empty() || raw.series[0].empty())
        throw InvalidParameterError("task_shares requires samples");
    double total_requests = 0.0;
    double total_thread_s = 0.0;
    std::vector<double> requests(raw.series.size(), 0.0);
    std::vector<double> thread_s(raw.series.size(), 0.0);
    for (std::size_t m = 0; m < raw.series.size(); ++m) {
        const MdcSample& last = raw.series[m].back();
        requests[m] = static_cast<double>(last.served_inference_cum + last.served_training_cum);
        for (const MdcSample& s : raw.series[m]) thread_s[m] += s.busy_thread_seconds;
        total_requests += requests[m];
        total_thread_s += thread_s[m];
    }
    if (total_requests <= 0.0)
        throw InvalidParameterError("task_shares: no served requests in this run");
    std::vector<TaskShare> out(raw.series.size());
    for (std::size_t m = 0; m < raw.series.size(); ++m) {
        out[m].request_pct = requests[m] / total_requests * 100.0;
        out[m].thread_seconds_pct =
            total_thread_s > 0.0 ? thread_s[m] / total_thread_s * 100.0 : 0.0;
    }
    return out;
}

PowerSummary power_summary(const RawResults& raw, double warmup_s) {
    if (raw.series.empty() || raw.series[0].size() < 2)
        throw InvalidParameterError("power_summary requires >= 2 samples");
    if (warmup_s >= raw.duration_s)
        throw InvalidParameterError("power_summary: warmup " + std::to_string(warmup_s) +
                                    " s is not shorter than the run duration " +
                                    std::to_string(raw.duration_s) + " s");
    const PowerModel& pm = raw.power_model;
    const double idle_floor = pm.idle_w * raw.mdc_config.pus;
    const double delta = pm.active_w - pm.idle_w;

    PowerSummary sum;
    sum.warmup_s = warmup_s;
    sum.per_mdc.resize(raw.series.size());
    for (std::size_t m = 0; m < raw.series.size(); ++m) {
        const auto& series = raw.series[m];
        double warm_busy_pu_s = 0.0;
        double warm_time = 0.0;
        double energy_ws = 0.0;
        for (std::size_t i = 1; i < series.size(); ++i) {
            const double t0 = engine::to_seconds(series[i - 1].t);
            const double t1 = engine::to_seconds(series[i].t);
            const double dt = t1 - t0;
            energy_ws += idle_floor * dt + delta * series[i].busy_pu_seconds;
            if (t0 >= warmup_s) {
                warm_busy_pu_s += series[i].busy_pu_seconds;
                warm_time += dt;
            }
        }
        MdcPower& p = sum.per_mdc[m];
        p.idle_w = idle_floor;
        p.mean_w = warm_time > 0.0 ? idle_floor + delta * warm_busy_pu_s / warm_time : idle_floor;
        p.dynamic_w = p.mean_w - p.idle_w;
        p.energy_wh = energy_ws / 3600.0;
        sum.total.mean_w += p.mean_w;
        sum.total.idle_w += p.idle_w;
        sum.total.dynamic_w += p.dynamic_w;
        sum.total.energy_wh += p.energy_wh;
    }
    return sum;
}

ScenarioReport build_scenario_report(const RawResults& raw, const MobilityTrace& trace,
                                     double warmup_s) {
    ScenarioReport rep;
    rep.tag = raw.scenario;
    rep.utilization = envelope_of(raw, true);
    rep.busy_utilization = envelope_of(raw, false);
    for (const MdcSample& s : raw.series[0]) {
        const double t = engine::to_seconds(s.t);
        rep.live_agents.emplace_back(t, live_agents_at(trace, t));
    }
    rep.rejections.resize(raw.series.size());
    for (std::size_t m = 0; m < raw.series.size(); ++m)
        for (const MdcSample& s : raw.series[m])
            rep.rejections[m].emplace_back(engine::to_seconds(s.t), s.rejections_cum);
    rep.shares = task_shares(raw);
    rep.power = power_summary(raw, warmup_s);
    return rep;
}

// ---------------------------------------------------------------------------
// Report rendering: CSV per figure plus small standalone SVG charts.

namespace {

constexpr int kW = 800, kH = 400, kMargin = 50;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Scale {
    double x0, x1, y0, y1;
    double sx(double x) const {
        return kMargin + (x - x0) / (x1 - x0 > 0 ? x1 - x0 : 1.0) * (kW - 2 * kMargin);
    }
    double sy(double y) const {
        return kH - kMargin - (y - y0) / (y1 - y0 > 0 ? y1 - y0 : 1.0) * (kH - 2 * kMargin);
    }
};

void svg_open(std::string& s, const std::string& title) {
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kW) +
         "\" height=\"" + std::to_string(kH) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + std::to_string(kW / 2) + "\" y=\"20\" text-anchor=\"middle\">" +
         title + "</text>\n";
}

void svg_axes(std::string& s) {
    s += "<line x1=\"" + std::to_string(kMargin) + "\" y1=\"" + std::to_string(kH - kMargin) +
         "\" x2=\"" + std::to_string(kW - kMargin) + "\" y2=\"" + std::to_string(kH - kMargin) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + std::to_string(kMargin) + "\" y1=\"" + std::to_string(kMargin) +
         "\" x2=\"" + std::to_string(kMargin) + "\" y2=\"" + std::to_string(kH - kMargin) +
         "\" stroke=\"black\"/>\n";
}

void svg_polyline(std::string& s, const std::vector<std::pair<double, double>>& pts,
                  const Scale& sc, const std::string& color) {
    s += "<polyline fill=\"none\" stroke=\"" + color + "\" points=\"";
    for (const auto& [x, y] : pts) s += fmt(sc.sx(x)) + "," + fmt(sc.sy(y)) + " ";
    s += "\"/>\n";
}

void svg_bars(std::string& s, const std::vector<double>& lower, const std::vector<double>& upper,
              double y_max, const std::string& lower_color, const std::string& upper_color) {
    const std::size_t n = lower.size();
    const double slot = static_cast<double>(kW - 2 * kMargin) / static_cast<double>(n);
    const double bw = slot * 0.6;
    Scale sc{0, 1, 0, y_max > 0 ? y_max : 1};
    for (std::size_t i = 0; i < n; ++i) {
        const double x = kMargin + slot * (static_cast<double>(i) + 0.2);
        const double yl = sc.sy(lower[i]);
        s += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(yl) + "\" width=\"" + fmt(bw) +
             "\" height=\"" + fmt(kH - kMargin - yl) + "\" fill=\"" + lower_color + "\"/>\n";
        if (upper[i] > 0.0) {
            const double yu = sc.sy(lower[i] + upper[i]);
            s += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(yu) + "\" width=\"" + fmt(bw) +
                 "\" height=\"" + fmt(yl - yu) + "\" fill=\"" + upper_color + "\"/>\n";
        }
    }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write report file: " + path.string());
    f << content;
}

void render_scenario(const ScenarioReport& rep, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    char buf[256];

    {  // utilization.csv + svg
        std::string csv = "t,mean,min,max,busy_mean,live_agents\n";
        for (std::size_t i = 0; i < rep.utilization.size(); ++i) {
            const EnvelopePoint& p = rep.utilization[i];
            std::snprintf(buf, sizeof(buf), "%.3f,%.9g,%.9g,%.9g,%.9g,%zu\n", p.t, p.mean,
                          p.min, p.max, rep.busy_utilization[i].mean, rep.live_agents[i].second);
            csv += buf;
        }
        write_file(dir / "utilization.csv", csv);

        double t_max = rep.utilization.empty() ? 1.0 : rep.utilization.back().t;
        double u_max = 0.0;
        for (const EnvelopePoint& p : rep.utilization) u_max = std::max(u_max, p.max);
        Scale sc{0, t_max, 0, std::max(u_max, 1e-3)};
        std::string svg;
        svg_open(svg, rep.tag + " MDC utilization");
        svg_axes(svg);
        std::vector<std::pair<double, double>> mean, lo, hi;
        for (const EnvelopePoint& p : rep.utilization) {
            mean.emplace_back(p.t, p.mean);
            lo.emplace_back(p.t, p.min);
            hi.emplace_back(p.t, p.max);
        }
        svg_polyline(svg, lo, sc, "lightsteelblue");
        svg_polyline(svg, hi, sc, "lightsteelblue");
        svg_polyline(svg, mean, sc, "steelblue");
        svg += "</svg>\n";
        write_file(dir / "utilization.svg", svg);
    }

    {  // rejections.csv + svg
        std::string csv = "t";
        for (std::size_t m = 0; m < rep.rejections.size(); ++m) csv += ",mdc" + std::to_string(m);
        csv += '\n';
        const std::size_t n = rep.rejections.empty() ? 0 : rep.rejections[0].size();
        double r_max = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), "%.3f", rep.rejections[0][i].first);
            csv += buf;
            for (const auto& series : rep.rejections) {
                csv += ',' + std::to_string(series[i].second);
                r_max = std::max(r_max, static_cast<double>(series[i].second));
            }
            csv += '\n';
        }
        write_file(dir / "rejections.csv", csv);

        Scale sc{0, n ? rep.rejections[0].back().first : 1.0, 0, std::max(r_max, 1.0)};
        std::string svg;
        svg_open(svg, rep.tag + " cumulative rejected sessions");
        svg_axes(svg);
        for (const auto& series : rep.rejections) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& [t, r] : series) pts.emplace_back(t, static_cast<double>(r));
            svg_polyline(svg, pts, sc, "firebrick");
        }
        svg += "</svg>\n";
        write_file(dir / "rejections.svg", svg);
    }

    {  // shares.csv + svg
        std::string csv = "mdc_id,request_pct,thread_seconds_pct\n";
        std::vector<double> vals, zeros(rep.shares.size(), 0.0);
        for (std::size_t m = 0; m < rep.shares.size(); ++m) {
            std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", m, rep.shares[m].request_pct,
                          rep.shares[m].thread_seconds_pct);
            csv += buf;
            vals.push_back(rep.shares[m].request_pct);
        }
        write_file(dir / "shares.csv", csv);

        std::string svg;
        svg_open(svg, rep.tag + " task share per MDC (%)");
        svg_axes(svg);
        svg_bars(svg, vals, zeros, 100.0, "darkorange", "none");
        svg += "</svg>\n";
        write_file(dir / "shares.svg", svg);
    }

    {  // power.csv + svg
        std::string csv = "mdc_id,mean_w,idle_w,dynamic_w,energy_wh\n";
        std::vector<double> idles, dyns;
        double p_max = 0.0;
        for (std::size_t m = 0; m < rep.power.per_mdc.size(); ++m) {
            const MdcPower& p = rep.power.per_mdc[m];
            std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6f\n", m, p.mean_w, p.idle_w,
                          p.dynamic_w, p.energy_wh);
            csv += buf;
            idles.push_back(p.idle_w);
            dyns.push_back(p.dynamic_w);
            p_max = std::max(p_max, p.mean_w);
        }
        std::snprintf(buf, sizeof(buf), "total,%.6f,%.6f,%.6f,%.6f\n", rep.power.total.mean_w,
                      rep.power.total.idle_w, rep.power.total.dynamic_w,
                      rep.power.total.energy_wh);
        csv += buf;
        write_file(dir / "power.csv", csv);

        std::string svg;
        svg_open(svg, rep.tag + " warmed-up mean power per MDC (W)");
        svg_axes(svg);
        svg_bars(svg, idles, dyns, p_max * 1.1, "steelblue", "darkorange");
        svg += "</svg>\n";
        write_file(dir / "power.svg", svg);
    }
}

}  // namespace

void render_report(const SimulationReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    json summary;
    for (const ScenarioReport& rep : report.scenarios) {
        render_scenario(rep, out_dir / rep.tag);
        json s;
        s["n_mdcs"] = rep.power.per_mdc.size();
        s["total_mean_power_w"] = rep.power.total.mean_w;
        s["total_idle_power_w"] = rep.power.total.idle_w;
        s["total_dynamic_power_w"] = rep.power.total.dynamic_w;
        s["total_energy_wh"] = rep.power.total.energy_wh;
        s["dynamic_share"] = rep.power.total.mean_w > 0.0
                                 ? rep.power.total.dynamic_w / rep.power.total.mean_w
                                 : 0.0;
        std::uint64_t rej = 0;
        for (const auto& series : rep.rejections)
            if (!series.empty()) rej += series.back().second;
        s["total_rejections"] = rej;
        json shares = json::array();
        for (const TaskShare& sh : rep.shares) shares.push_back(sh.request_pct);
        s["request_shares_pct"] = shares;
        summary["scenarios"][rep.tag] = s;
    }
    // Cross-scenario power ratios for every ordered pair.
    for (const ScenarioReport& a : report.scenarios)
        for (const ScenarioReport& b : report.scenarios)
            if (a.tag != b.tag && b.power.total.mean_w > 0.0)
                summary["power_ratios"][a.tag + "_over_" + b.tag] =
                    a.power.total.mean_w / b.power.total.mean_w;
    std::ofstream f(out_dir / "summary.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write summary.json");
    f << summary.dump(2) << '\n';
}

}  // namespace mdcsim
