use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use pslab_core::experiments::stats::normal_quantile;
use pslab_core::io::{read_diagram_csv, read_table, COVARIANCE_HEADER, REPLICATES_HEADER, TAILS_HEADER};
use pslab_core::persistence::{PersistencePair, RankQuery};
use serde::Serialize;

use crate::config::{CliError, CliResult};
use crate::manifest::sha256_file;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];
/// Survival values below this are drawn on the floor of the log axis.
const LOG_FLOOR: f64 = 1e-3;

fn c(v: f64) -> String {
    format!("{v:.2}")
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn linear(lo: f64, hi: f64) -> Self {
        let (lo, hi) = if !(hi - lo > 1e-12) { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
        let pad = 0.05 * (hi - lo);
        Axis { lo: lo - pad, hi: hi + pad, log: false }
    }

    fn frac(&self, v: f64) -> f64 {
        if self.log {
            (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log10().ceil() as i32, self.hi.log10().floor() as i32);
            return (a..=b).map(|k| 10f64.powi(k)).collect();
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let mut t = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.hi + 1e-9 * step {
            out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
            t += step;
        }
        out
    }
}

struct Canvas {
    x: Axis,
    y: Axis,
    body: String,
    legend: usize,
}

impl Canvas {
    fn new(title: &str, x: Axis, y: Axis, xlabel: &str, ylabel: &str) -> Self {
        let mut cv = Canvas { x, y, body: String::new(), legend: 0 };
        let b = &mut cv.body;
        let _ = writeln!(b, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#);
        let _ = writeln!(b, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(b, r#"<text x="{}" y="24" font-size="14" text-anchor="middle">{}</text>"#, c((LEFT + WIDTH - RIGHT) / 2.0), escape(title));
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
        let _ = writeln!(b, r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#, c(x0), c(y1), c(x1 - x0), c(y0 - y1));
        for t in x.ticks() {
            let px = cv.px(t);
            let _ = writeln!(cv.body, r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/><text x="{0}" y="{3}" font-size="11" text-anchor="middle">{4}</text>"#, c(px), c(y0), c(y0 + 5.0), c(y0 + 18.0), label(t));
        }
        for t in y.ticks() {
            let py = cv.py(t);
            let _ = writeln!(cv.body, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/><text x="{3}" y="{4}" font-size="11" text-anchor="end">{5}</text>"#, c(x0 - 5.0), c(py), c(x0), c(x0 - 8.0), c(py + 4.0), label(t));
        }
        let _ = writeln!(cv.body, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, c((x0 + x1) / 2.0), c(HEIGHT - 16.0), escape(xlabel));
        let _ = writeln!(cv.body, r#"<text x="18" y="{0}" font-size="12" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#, c((y0 + y1) / 2.0), escape(ylabel));
        cv
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + self.x.frac(v) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - self.y.frac(v) * (HEIGHT - TOP - BOTTOM)
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str, dashed: bool) {
        self.polyline_with(pts, color, dashed, "");
    }

    fn polyline_with(&mut self, pts: &[(f64, f64)], color: &str, dashed: bool, extra: &str) {
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", c(self.px(x)), c(self.py(y)))).collect();
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(self.body, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}{extra}/>"#, path.join(" "));
    }

    fn dot(&mut self, x: f64, y: f64, color: &str, extra: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{}" cy="{}" r="3" fill="{color}"{extra}/>"#, c(self.px(x)), c(self.py(y)));
    }

    fn legend(&mut self, text: &str, color: &str, dashed: bool) {
        let y = TOP + 10.0 + 14.0 * self.legend as f64;
        let x = WIDTH - RIGHT + 10.0;
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(self.body, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{color}" stroke-width="2"{dash}/><text x="{3}" y="{4}" font-size="10">{5}</text>"#, c(x), c(y), c(x + 18.0), c(x + 22.0), c(y + 3.5), escape(text));
        self.legend += 1;
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn field(row: &[String], k: usize) -> CliResult<f64> {
    row.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| CliError::MissingInput(format!("malformed field {k} in `{}`", row.join(","))))
}

fn read_csv(dir: &Path, name: &str, header: &str) -> CliResult<Option<Vec<Vec<String>>>> {
    let path = dir.join(name);
    if !path.exists() {
        return Ok(None);
    }
    let file = std::fs::File::open(&path).map_err(|e| CliError::MissingInput(format!("{}: {e}", path.display())))?;
    read_table(file, header).map(Some).map_err(|e| CliError::MissingInput(format!("{}: {e}", path.display())))
}

/// QQ plots of the standardized replicates, one per pair, for the Poisson
/// process when present and the largest `n`.
fn qq_plots(rows: &[Vec<String>]) -> CliResult<Vec<(String, String)>> {
    // (pair) -> (process preference, n) -> values
    let mut groups: BTreeMap<usize, BTreeMap<(u8, i64), (String, Vec<f64>, f64, f64)>> = BTreeMap::new();
    for row in rows {
        let pair = field(row, 3)? as usize;
        let pref = if row[0] == "poisson" { 0 } else { 1 };
        let n = field(row, 1)? as i64;
        let entry = groups.entry(pair).or_default().entry((pref, -n)).or_insert_with(|| (row[0].clone(), Vec::new(), 0.0, 0.0));
        entry.1.push(field(row, 7)?);
        entry.2 = field(row, 4)?;
        entry.3 = field(row, 5)?;
    }
    let mut out = Vec::new();
    for (pair, by_run) in groups {
        let (&(_, neg_n), (process, values, r, s)) = by_run.iter().next().expect("non-empty group");
        let mut ys = values.clone();
        ys.sort_by(f64::total_cmp);
        let m = ys.len() as f64;
        let xs: Vec<f64> = (0..ys.len()).map(|k| normal_quantile((k as f64 + 0.5) / m)).collect();
        let sd = (ys.iter().map(|v| v * v).sum::<f64>() / (m - 1.0).max(1.0)).sqrt();
        let lo = xs[0].min(ys[0]).min(xs[0] * sd);
        let hi = xs[xs.len() - 1].max(ys[ys.len() - 1]).max(xs[xs.len() - 1] * sd);
        let title = format!("QQ plot: pair {pair} (r={}, s={}), {process}, n={}", label(*r), label(*s), -neg_n);
        let mut cv = Canvas::new(&title, Axis::linear(xs[0], xs[xs.len() - 1]), Axis::linear(lo, hi), "normal quantile", "standardized replicate");
        cv.polyline(&[(xs[0], xs[0] * sd), (xs[xs.len() - 1], xs[xs.len() - 1] * sd)], "#888888", true);
        for (x, y) in xs.iter().zip(&ys) {
            cv.dot(*x, *y, PALETTE[0], "");
        }
        cv.legend("replicates", PALETTE[0], false);
        cv.legend("N(0, sd²) reference", "#888888", true);
        out.push((format!("qq_{pair}.svg"), cv.finish()));
    }
    Ok(out)
}

fn survival_plot(rows: &[Vec<String>]) -> CliResult<String> {
    let mut keys: Vec<String> = Vec::new();
    let mut curves: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows {
        let key = format!("{} λ={} r={} q={}", row[0], row[1], row[2], row[3]);
        let idx = keys.iter().position(|k| *k == key).unwrap_or_else(|| {
            keys.push(key);
            keys.len() - 1
        });
        curves.entry(idx).or_default().push((field(row, 4)?, field(row, 5)?.max(LOG_FLOOR)));
    }
    let ls: Vec<f64> = curves.values().flatten().map(|p| p.0).collect();
    let (lo, hi) = (ls.iter().copied().fold(f64::INFINITY, f64::min), ls.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let (lo, hi) = if ls.is_empty() { (0.0, 1.0) } else { (lo, hi) };
    let mut cv = Canvas::new("Radius survival P(radius > L)", Axis::linear(lo, hi), Axis { lo: LOG_FLOOR * 0.8, hi: 1.25, log: true }, "L", "survival (log scale)");
    for (idx, pts) in &curves {
        let color = PALETTE[idx % PALETTE.len()];
        let dashed = keys[*idx].starts_with("strong");
        cv.polyline_with(pts, color, dashed, &format!(r#" class="curve" data-series="{}""#, escape(&keys[*idx])));
        cv.legend(&keys[*idx], color, dashed);
    }
    Ok(cv.finish())
}

fn variance_plot(rows: &[Vec<String>]) -> CliResult<String> {
    let mut series: BTreeMap<(String, usize), Vec<(f64, f64, f64)>> = BTreeMap::new();
    for row in rows {
        if row[2] != row[3] {
            continue;
        }
        series.entry((row[0].clone(), field(row, 2)? as usize)).or_default().push((field(row, 1)?, field(row, 4)?, field(row, 5)?));
    }
    let all: Vec<&(f64, f64, f64)> = series.values().flatten().collect();
    let fold = |f: fn(f64, f64) -> f64, init: f64, g: &dyn Fn(&(f64, f64, f64)) -> f64| all.iter().map(|p| g(p)).fold(init, f);
    let (xlo, xhi) = (fold(f64::min, f64::INFINITY, &|p| p.0), fold(f64::max, f64::NEG_INFINITY, &|p| p.0));
    let se = |p: &(f64, f64, f64)| if p.2.is_finite() { 2.0 * p.2 } else { 0.0 };
    let (ylo, yhi) = (fold(f64::min, f64::INFINITY, &|p| p.1 - se(p)), fold(f64::max, f64::NEG_INFINITY, &|p| p.1 + se(p)));
    let (xlo, xhi, ylo, yhi) = if all.is_empty() { (0.0, 1.0, 0.0, 1.0) } else { (xlo, xhi, ylo, yhi) };
    let mut cv = Canvas::new("Standardized variance n⁻¹Var(β) vs n", Axis::linear(xlo, xhi), Axis::linear(ylo.min(0.0), yhi), "n", "variance (±2 SE)");
    for (k, ((process, i), pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        cv.polyline(&pts.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>(), color, process == "binomial");
        for p in pts {
            cv.polyline(&[(p.0, p.1 - se(p)), (p.0, p.1 + se(p))], color, false);
            cv.dot(p.0, p.1, color, "");
        }
        cv.legend(&format!("{process}, pair {i}"), color, process == "binomial");
    }
    Ok(cv.finish())
}

/// Persistence diagram with the rectangle counted by `β^{r,s}_q`: births
/// `<= r` (solid edge, included) and deaths `> s` (dashed edge, excluded).
pub fn diagram_svg(pairs: &[PersistencePair], query: Option<RankQuery>) -> String {
    let mut top = pairs.iter().flat_map(|p| [p.birth, p.death]).filter(|v| v.is_finite()).fold(0.0, f64::max);
    if let Some(q) = query {
        top = top.max(q.r).max(q.s);
    }
    let top = if top > 0.0 { top } else { 1.0 };
    let inf_level = top * 1.12;
    let axis = Axis { lo: 0.0, hi: top * 1.2, log: false };
    let mut cv = Canvas::new("Persistence diagram", axis, axis, "birth", "death");
    cv.polyline(&[(0.0, 0.0), (top * 1.2, top * 1.2)], "#888888", false);
    cv.polyline(&[(0.0, inf_level), (top * 1.2, inf_level)], "#bbbbbb", true);
    let _ = writeln!(cv.body, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">∞</text>"#, c(LEFT - 8.0), c(cv.py(inf_level) + 4.0));
    if let Some(q) = query {
        let (x0, x1, y0, y1) = (cv.px(0.0), cv.px(q.r), cv.py(q.s), cv.py(inf_level));
        let _ = writeln!(cv.body, r##"<rect class="query" data-q="{}" data-r="{}" data-s="{}" x="{}" y="{}" width="{}" height="{}" fill="#999999" fill-opacity="0.3"/>"##, q.q, q.r, q.s, c(x0), c(y1), c(x1 - x0), c(y0 - y1));
        let _ = writeln!(cv.body, r##"<line class="query-excluded" x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#d62728" stroke-width="2" stroke-dasharray="6 4"/>"##, c(x0), c(y0), c(x1));
        let _ = writeln!(cv.body, r##"<line class="query-included" x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#d62728" stroke-width="2"/>"##, c(x1), c(y0), c(y1));
    }
    for p in pairs {
        let y = if p.death.is_finite() { p.death } else { inf_level };
        let inside = query.is_some_and(|q| p.q == q.q && p.birth <= q.r && p.death > q.s);
        let extra = format!(r#" class="pair q{}" data-birth="{}" data-death="{}" data-in-query="{inside}""#, p.q, p.birth, p.death);
        cv.dot(p.birth, y, PALETTE[p.q % PALETTE.len()], &extra);
    }
    let mut dims: Vec<usize> = pairs.iter().map(|p| p.q).collect();
    dims.sort_unstable();
    dims.dedup();
    for q in dims {
        cv.legend(&format!("H{q}"), PALETTE[q % PALETTE.len()], false);
    }
    if let Some(q) = query {
        cv.legend(&format!("β^(r={},s={})_{}", label(q.r), label(q.s), q.q), "#d62728", false);
    }
    cv.finish()
}

#[derive(Serialize)]
struct PlotEntry {
    name: String,
    sha256: String,
}

/// Writes every plot the result directory has inputs for, plus `plots.json`.
/// Returns the plot file names; output depends only on the directory's CSVs.
pub fn emit_all(dir: &Path, query: Option<RankQuery>) -> CliResult<Vec<String>> {
    let mut svgs: Vec<(String, String)> = Vec::new();
    if let Some(rows) = read_csv(dir, "replicates.csv", REPLICATES_HEADER)? {
        svgs.extend(qq_plots(&rows)?);
    }
    if let Some(rows) = read_csv(dir, "tails.csv", TAILS_HEADER)? {
        svgs.push(("survival.svg".into(), survival_plot(&rows)?));
    }
    if let Some(rows) = read_csv(dir, "covariance.csv", COVARIANCE_HEADER)? {
        svgs.push(("variance_vs_n.svg".into(), variance_plot(&rows)?));
    }
    let diagram = dir.join("diagram.csv");
    if diagram.exists() {
        let file = std::fs::File::open(&diagram).map_err(|e| CliError::MissingInput(format!("{}: {e}", diagram.display())))?;
        let pairs = read_diagram_csv(file).map_err(|e| CliError::MissingInput(format!("{}: {e}", diagram.display())))?;
        svgs.push(("diagram.svg".into(), diagram_svg(&pairs, query)));
    }
    let mut entries = Vec::new();
    for (name, body) in &svgs {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|source| CliError::Write { path: path.clone(), source })?;
        let (sha256, _) = sha256_file(&path).map_err(|source| CliError::Write { path, source })?;
        entries.push(PlotEntry { name: name.clone(), sha256 });
    }
    if !entries.is_empty() {
        let path = dir.join("plots.json");
        let text = serde_json::to_string_pretty(&entries).map_err(pslab_core::Error::from)? + "\n";
        std::fs::write(&path, text).map_err(|source| CliError::Write { path, source })?;
    }
    Ok(svgs.into_iter().map(|(n, _)| n).collect())
}
