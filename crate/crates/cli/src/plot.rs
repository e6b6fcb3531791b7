use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;
use swarm_core::control::ManeuverMode;
use swarm_core::sim::{update_obstacles, TrajectoryLog};
use swarm_core::ScenarioSpec;

use crate::input::load_log;
use crate::manifest::RunManifest;
use crate::{Failure, LogArgs};

pub const PLAN_FILE: &str = "plan.svg";
pub const DISTANCE_FILE: &str = "distance.svg";
pub const ALTITUDE_FILE: &str = "altitude.svg";

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
];
const MARGIN: (f64, f64, f64, f64) = (60.0, 20.0, 36.0, 50.0);
const GUIDE_DISTANCE: f64 = 2.0;

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Maps data coordinates onto an SVG canvas with a fixed margin.
struct Chart {
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl Chart {
    fn new(width: f64, height: f64, x: (f64, f64), y: (f64, f64)) -> Chart {
        let pad = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        Chart {
            width,
            height,
            x: pad(x),
            y: pad(y),
            body: String::new(),
        }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let (l, r, t, b) = MARGIN;
        let u = (x - self.x.0) / (self.x.1 - self.x.0);
        let v = (y - self.y.0) / (self.y.1 - self.y.0);
        (l + u * (self.width - l - r), self.height - b - v * (self.height - t - b))
    }

    fn polyline(&mut self, pts: impl IntoIterator<Item = (f64, f64)>, stroke: &str, extra: &str) {
        let mut d = String::new();
        for (x, y) in pts {
            let (a, b) = self.px(x, y);
            let _ = write!(d, "{a:.2},{b:.2} ");
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.2"{extra}/>"#,
            d.trim_end()
        );
    }

    fn rect(&mut self, min: (f64, f64), max: (f64, f64), fill: &str) {
        let (x0, y0) = self.px(min.0, max.1);
        let (x1, y1) = self.px(max.0, min.1);
        let _ = writeln!(
            self.body,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="#555"/>"##,
            x1 - x0,
            y1 - y0
        );
    }

    fn circle(&mut self, c: (f64, f64), r: f64, style: &str) {
        let (cx, cy) = self.px(c.0, c.1);
        let (ex, _) = self.px(c.0 + r, c.1);
        let _ = writeln!(self.body, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" {style}/>"#, (ex - cx).abs().max(1.5));
    }

    fn label(&mut self, x: f64, y: f64, text: &str, anchor: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{text}</text>"#
        );
    }

    fn axes(&mut self, title: &str, x_label: &str, y_label: &str) {
        let (l, r, t, b) = MARGIN;
        let (w, h) = (self.width, self.height);
        let _ = writeln!(
            self.body,
            r##"<rect x="{l}" y="{t}" width="{:.2}" height="{:.2}" fill="none" stroke="#000"/>"##,
            w - l - r,
            h - t - b
        );
        for v in ticks(self.x) {
            let (px, _) = self.px(v, self.y.0);
            self.label(px, h - b + 14.0, &fmt_tick(v), "middle");
        }
        for v in ticks(self.y) {
            let (_, py) = self.px(self.x.0, v);
            self.label(l - 6.0, py + 4.0, &fmt_tick(v), "end");
        }
        self.label(l + (w - l - r) / 2.0, h - 8.0, x_label, "middle");
        self.label(l, t - 8.0, &format!("{title} ({y_label})"), "start");
    }

    fn finish(mut self, title: &str, x_label: &str, y_label: &str) -> String {
        self.axes(title, x_label, y_label);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// Round tick positions, roughly six per axis.
fn ticks((lo, hi): (f64, f64)) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    // tolerate rounding so range ends that sit on a tick keep it
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn bounds(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Plan view with trajectories, buildings and obstacle paths.
pub fn plan_svg(log: &TrajectoryLog, spec: Option<&ScenarioSpec>) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for r in &log.records {
        for a in &r.agents {
            xs.push(a.position.x);
            ys.push(a.position.y);
        }
    }
    let mut obstacle_paths: Vec<Vec<(f64, f64)>> = Vec::new();
    if let Some(s) = spec {
        let mut obs = s.obstacles.clone();
        obstacle_paths = vec![Vec::new(); obs.len()];
        for r in &log.records {
            for (path, o) in obstacle_paths.iter_mut().zip(&obs) {
                path.push((o.center.x, o.center.y));
            }
            obs = update_obstacles(&obs, r.time, log.dt);
        }
        for (o, p) in s.obstacles.iter().zip(&obstacle_paths) {
            for (x, y) in p {
                xs.extend([x - o.radius, x + o.radius]);
                ys.extend([y - o.radius, y + o.radius]);
            }
        }
    }
    let (mut x, mut y) = (bounds(xs), bounds(ys));
    let span = (x.1 - x.0).max(1.0);
    let pad = 0.03 * span;
    x = (x.0 - pad, x.1 + pad);
    y = (y.0 - pad, y.1 + pad);
    let width = 960.0;
    let inner_w = width - MARGIN.0 - MARGIN.1;
    let inner_h = (inner_w * (y.1 - y.0) / (x.1 - x.0)).clamp(160.0, 720.0);
    let mut chart = Chart::new(width, inner_h + MARGIN.2 + MARGIN.3, x, y);

    if let Some(s) = spec {
        for b in &s.buildings {
            let lo = (b.min.x.max(x.0), b.min.y.max(y.0));
            let hi = (b.max.x.min(x.1), b.max.y.min(y.1));
            if lo.0 < hi.0 && lo.1 < hi.1 {
                chart.rect(lo, hi, "#d9d9d9");
            }
        }
        for (o, path) in s.obstacles.iter().zip(&obstacle_paths) {
            let (Some(first), Some(last)) = (path.first(), path.last()) else { continue };
            if first != last {
                chart.polyline(path.iter().copied(), "#444", r#" stroke-dasharray="4 3""#);
                chart.circle(*last, o.radius, r##"fill="none" stroke="#444" stroke-dasharray="4 3""##);
            }
            chart.circle(*first, o.radius, r##"fill="#bbb" stroke="#222""##);
        }
    }
    for i in 0..log.agent_count {
        let pts: Vec<(f64, f64)> = log.records.iter().map(|r| (r.agents[i].position.x, r.agents[i].position.y)).collect();
        chart.polyline(pts.iter().copied(), color(i), "");
        if let Some(p) = pts.last() {
            chart.circle(*p, 0.0, &format!(r#"fill="{}""#, color(i)));
        }
    }
    chart.finish("plan view", "x (m)", "y, m")
}

/// Distance from the reference agent to every other agent over time.
pub fn distance_svg(log: &TrajectoryLog, reference: usize) -> String {
    let times: Vec<f64> = log.records.iter().map(|r| r.time).collect();
    let series: Vec<(usize, Vec<f64>)> = (0..log.agent_count)
        .filter(|&j| j != reference)
        .map(|j| {
            let d = log
                .records
                .iter()
                .map(|r| r.agents[reference].position.distance(r.agents[j].position))
                .collect();
            (j, d)
        })
        .collect();
    let hi = series.iter().flat_map(|(_, d)| d.iter().copied()).fold(GUIDE_DISTANCE, f64::max);
    let mut chart = Chart::new(960.0, 420.0, bounds(times.iter().copied()), (0.0, hi * 1.05));
    for (j, d) in &series {
        chart.polyline(times.iter().copied().zip(d.iter().copied()), color(*j), "");
    }
    let (t0, t1) = chart.x;
    chart.polyline([(t0, GUIDE_DISTANCE), (t1, GUIDE_DISTANCE)], "#d62728", r#" stroke-dasharray="6 4""#);
    let (px, py) = chart.px(t1, GUIDE_DISTANCE);
    chart.label(px - 4.0, py - 4.0, "2 m", "end");
    let title = format!("distance from agent {reference}");
    chart.finish(&title, "time (s)", "m")
}

/// Altitude of every agent over time.
pub fn altitude_svg(log: &TrajectoryLog) -> String {
    let times: Vec<f64> = log.records.iter().map(|r| r.time).collect();
    let z = bounds(log.records.iter().flat_map(|r| r.agents.iter().map(|a| a.position.z)));
    let pad = 0.05 * (z.1 - z.0).max(1.0);
    let mut chart = Chart::new(960.0, 420.0, bounds(times.iter().copied()), (z.0 - pad, z.1 + pad));
    for i in 0..log.agent_count {
        let pts = log.records.iter().map(|r| (r.time, r.agents[i].position.z));
        chart.polyline(pts, color(i), "");
    }
    chart.finish("altitude", "time (s)", "z, m")
}

/// Writes the plot set for `log` into `dir` and returns the file names.
pub fn write_plots(
    log: &TrajectoryLog,
    spec: Option<&ScenarioSpec>,
    reference: usize,
    dir: &Path,
) -> anyhow::Result<Vec<&'static str>> {
    let mut files = vec![(PLAN_FILE, plan_svg(log, spec)), (DISTANCE_FILE, distance_svg(log, reference))];
    if log.mode == ManeuverMode::Spatial {
        files.push((ALTITUDE_FILE, altitude_svg(log)));
    }
    let mut names = Vec::new();
    for (name, body) in files {
        fs::write(dir.join(name), body).with_context(|| format!("writing {name}"))?;
        names.push(name);
    }
    Ok(names)
}

pub fn cmd_plot(args: &LogArgs) -> Result<(), Failure> {
    let loaded = load_log(args)?;
    let dir = args.out.clone().unwrap_or_else(|| loaded.dir().to_path_buf());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let names = write_plots(&loaded.log, loaded.spec.as_ref(), args.ref_agent, &dir)?;
    if let Some(mut m) = RunManifest::load(&dir)? {
        for n in &names {
            m.record(&dir, n)?;
        }
        m.store(&dir)?;
    }
    for n in names {
        println!("{}", dir.join(n).display());
    }
    Ok(())
}
