//! Text and CSV formats for clouds, complexes, diagrams, radii and
//! experiment results. Floats are written in shortest round-trip form,
//! `inf` for infinity.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{
    AlphaEstimate, CltResult, DepoReport, ExpectationRow, RelationReport, TailTable,
};
use crate::filtration::{Cell, FilteredComplex, FiltrationKind, Simplex};
use crate::persistence::{PersistencePair, RankQuery};
use crate::point_process::{DensitySpec, PointCloud, Window};
use crate::rng::RngSeed;
use crate::stabilization::{RadiusEstimate, StabilizationTrace};

pub const DIAGRAM_HEADER: &str = "q,birth,death";
pub const QUERY_HEADER: &str = "q,r,s";
pub const RANK_HEADER: &str = "q,r,s,betti";
pub const TRACE_HEADER: &str = "a,q,D1,D2";
pub const RADII_HEADER: &str = "z,r,s,value,censored";
pub const STRONG_HEADER: &str = "z,q,r,value,censored";
pub const REPLICATES_HEADER: &str = "process,n,replicate,pair,r,s,raw,standardized";
pub const COVARIANCE_HEADER: &str = "process,n,i,j,value,se";
pub const SCORES_HEADER: &str = "process,n,target,ad,ad_adjusted,ks,skewness,excess_kurtosis,note";
pub const EXPECTATION_HEADER: &str = "process,n,pair,value,se,delta";
pub const RELATION_HEADER: &str = "n,i,j,binomial,poisson,alpha_product,difference,pooled_se,pass";
pub const ALPHA_HEADER: &str = "q,r,s,value,se,window_radius,censored_fraction,reps";
pub const DEPO_HEADER: &str = "mean,se,alpha,alpha_se,difference,pooled_se,pass";
pub const TAILS_HEADER: &str = "radius,lambda,r,q,L,survival,lower,upper,censored";

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

fn writer<W: Write>(w: W, header: &str) -> Result<csv::Writer<W>> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header.split(','))?;
    Ok(out)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Reads a headed numeric CSV, checking the header against `expected`.
fn read_rows<R: Read>(r: R, expected: Option<&str>) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if let Some(exp) = expected {
        if header.join(",") != exp {
            return Err(parse_err(1, format!("expected header `{exp}`, found `{}`", header.join(","))));
        }
    }
    let rows = rdr
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_owned).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, csv::Error>>()?;
    Ok((header, rows))
}

fn num<T: std::str::FromStr>(field: &str, line: usize) -> Result<T> {
    field.parse().map_err(|_| parse_err(line, format!("cannot parse `{field}`")))
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub fn write_cloud_csv<W: Write>(w: W, cloud: &PointCloud) -> Result<()> {
    let header: Vec<String> = (0..cloud.dim()).map(|i| format!("x{i}")).collect();
    let mut out = writer(w, &header.join(","))?;
    for p in cloud.points() {
        out.write_record(p.iter().map(f64::to_string))?;
    }
    finish(out)
}

/// Reads a `x0,...,x{d-1}` CSV. Without a window the bounding box is used.
pub fn read_cloud_csv<R: Read>(r: R, window: Option<Window>) -> Result<PointCloud> {
    let (header, rows) = read_rows(r, None)?;
    let d = header.len();
    if header.iter().enumerate().any(|(i, h)| *h != format!("x{i}")) {
        return Err(parse_err(1, format!("expected header x0..x{}, found `{}`", d.saturating_sub(1), header.join(","))));
    }
    let points = rows
        .iter()
        .enumerate()
        .map(|(k, row)| row.iter().map(|f| num::<f64>(f, k + 2)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    match window {
        Some(w) => PointCloud::from_points(&points, w),
        None if points.is_empty() => Ok(PointCloud::empty(Window::unit_cube(d))),
        None => PointCloud::from_points_bbox(&points),
    }
}

/// JSON form of a cloud with its window and, when sampled, seed and density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudEnvelope {
    pub d: usize,
    pub window: Window,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<RngSeed>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    pub points: Vec<Vec<f64>>,
}

impl CloudEnvelope {
    pub fn new(cloud: &PointCloud, seed: Option<RngSeed>, density: Option<DensitySpec>) -> Self {
        Self { d: cloud.dim(), window: cloud.window().clone(), seed, density, points: cloud.to_vecs() }
    }

    pub fn to_cloud(&self) -> Result<PointCloud> {
        if self.points.is_empty() {
            return Ok(PointCloud::empty(self.window.clone()));
        }
        if self.points.iter().any(|p| p.len() != self.d) {
            return Err(Error::Parse(format!("every point must have {} coordinates", self.d)));
        }
        PointCloud::from_points(&self.points, self.window.clone())
    }
}

/// One line per cell, `time q v0 ... vq`, in filtration order.
pub fn write_complex_text<W: Write>(mut w: W, complex: &FilteredComplex) -> Result<()> {
    writeln!(w, "# kind={} q_max={} r_max={}", complex.kind().as_str(), complex.q_max(), complex.r_max())?;
    for cell in complex.cells() {
        write!(w, "{} {}", cell.time, cell.simplex.dim())?;
        for v in cell.simplex.vertices() {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses the cell lines of [`write_complex_text`]; `#` lines are skipped.
pub fn read_complex_cells<R: Read>(r: R) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for (k, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(parse_err(k + 1, "expected `time q v0 ... vq`"));
        }
        let time: f64 = num(fields[0], k + 1)?;
        let q: usize = num(fields[1], k + 1)?;
        if fields.len() != q + 3 {
            return Err(parse_err(k + 1, format!("a {q}-simplex needs {} vertices", q + 1)));
        }
        let vertices = fields[2..].iter().map(|f| num::<u32>(f, k + 1)).collect::<Result<Vec<u32>>>()?;
        cells.push(Cell { simplex: Simplex::new(vertices)?, time });
    }
    Ok(cells)
}

pub fn read_complex_text<R: Read>(r: R, kind: FiltrationKind, q_max: usize, r_max: f64, cloud: PointCloud) -> Result<FilteredComplex> {
    FilteredComplex::from_cells(kind, q_max, r_max, read_complex_cells(r)?, cloud)
}

pub fn write_diagram_csv<W: Write>(w: W, pairs: &[PersistencePair]) -> Result<()> {
    let mut out = writer(w, DIAGRAM_HEADER)?;
    for p in pairs {
        out.write_record([p.q.to_string(), p.birth.to_string(), p.death.to_string()])?;
    }
    finish(out)
}

pub fn read_diagram_csv<R: Read>(r: R) -> Result<Vec<PersistencePair>> {
    let (_, rows) = read_rows(r, Some(DIAGRAM_HEADER))?;
    rows.iter()
        .enumerate()
        .map(|(k, row)| Ok(PersistencePair { q: num(&row[0], k + 2)?, birth: num(&row[1], k + 2)?, death: num(&row[2], k + 2)? }))
        .collect()
}

pub fn write_queries_csv<W: Write>(w: W, queries: &[RankQuery]) -> Result<()> {
    let mut out = writer(w, QUERY_HEADER)?;
    for q in queries {
        out.write_record([q.q.to_string(), q.r.to_string(), q.s.to_string()])?;
    }
    finish(out)
}

pub fn read_queries_csv<R: Read>(r: R) -> Result<Vec<RankQuery>> {
    let (_, rows) = read_rows(r, Some(QUERY_HEADER))?;
    rows.iter()
        .enumerate()
        .map(|(k, row)| Ok(RankQuery::new(num(&row[0], k + 2)?, num(&row[1], k + 2)?, num(&row[2], k + 2)?)))
        .collect()
}

pub fn write_ranks_csv<W: Write>(w: W, ranks: &[(RankQuery, usize)]) -> Result<()> {
    let mut out = writer(w, RANK_HEADER)?;
    for (q, b) in ranks {
        out.write_record([q.q.to_string(), q.r.to_string(), q.s.to_string(), b.to_string()])?;
    }
    finish(out)
}

pub fn write_trace_csv<W: Write>(w: W, trace: &StabilizationTrace) -> Result<()> {
    let mut out = writer(w, TRACE_HEADER)?;
    for (k, a) in trace.radii.iter().enumerate() {
        for q in 0..trace.d1[k].len() {
            out.write_record([a.to_string(), q.to_string(), trace.d1[k][q].to_string(), trace.d2[k][q].to_string()])?;
        }
    }
    finish(out)
}

/// Centers are written as `;`-separated coordinates.
pub fn format_point(z: &[f64]) -> String {
    z.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

pub struct RadiusRow<'a> {
    pub center: &'a [f64],
    pub r: f64,
    pub s: f64,
    pub estimate: &'a RadiusEstimate,
}

pub fn write_radii_csv<W: Write>(w: W, rows: &[RadiusRow<'_>]) -> Result<()> {
    let mut out = writer(w, RADII_HEADER)?;
    for row in rows {
        out.write_record([
            format_point(row.center),
            row.r.to_string(),
            row.s.to_string(),
            row.estimate.value.to_string(),
            row.estimate.censored.to_string(),
        ])?;
    }
    finish(out)
}

pub fn write_strong_csv<W: Write>(w: W, rows: &[(&[f64], usize, f64, &RadiusEstimate)]) -> Result<()> {
    let mut out = writer(w, STRONG_HEADER)?;
    for (z, q, r, e) in rows {
        out.write_record([format_point(z), q.to_string(), r.to_string(), e.value.to_string(), e.censored.to_string()])?;
    }
    finish(out)
}

pub fn write_replicates_csv<W: Write>(w: W, results: &[&CltResult]) -> Result<()> {
    let mut out = writer(w, REPLICATES_HEADER)?;
    for res in results {
        let process = res.config.process.as_str();
        for block in &res.blocks {
            for (k, (raw, std)) in block.raw.iter().zip(&block.standardized).enumerate() {
                for (i, &(r, s)) in res.config.pairs.iter().enumerate() {
                    out.write_record([
                        process.to_string(),
                        block.n.to_string(),
                        k.to_string(),
                        i.to_string(),
                        r.to_string(),
                        s.to_string(),
                        raw[i].to_string(),
                        std[i].to_string(),
                    ])?;
                }
            }
        }
    }
    finish(out)
}

pub fn write_covariance_csv<W: Write>(w: W, results: &[&CltResult]) -> Result<()> {
    let mut out = writer(w, COVARIANCE_HEADER)?;
    for res in results {
        for block in &res.blocks {
            for (i, row) in block.covariance.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    out.write_record([
                        res.config.process.as_str().to_string(),
                        block.n.to_string(),
                        i.to_string(),
                        j.to_string(),
                        v.to_string(),
                        block.covariance_se[i][j].to_string(),
                    ])?;
                }
            }
        }
    }
    finish(out)
}

pub fn write_scores_csv<W: Write>(w: W, results: &[&CltResult]) -> Result<()> {
    let mut out = writer(w, SCORES_HEADER)?;
    for res in results {
        for block in &res.blocks {
            for row in &block.scores {
                let s = row.scores;
                out.write_record([
                    res.config.process.as_str().to_string(),
                    block.n.to_string(),
                    row.target.clone(),
                    opt(s.map(|s| s.ad)),
                    opt(s.map(|s| s.ad_adjusted)),
                    opt(s.map(|s| s.ks)),
                    opt(s.map(|s| s.skewness)),
                    opt(s.map(|s| s.excess_kurtosis)),
                    row.note.clone().unwrap_or_default(),
                ])?;
            }
        }
    }
    finish(out)
}

/// `n^{-1}` mean per pair taken from CLT replicates.
pub fn write_expectation_csv<W: Write>(w: W, results: &[&CltResult]) -> Result<()> {
    let mut out = writer(w, EXPECTATION_HEADER)?;
    for res in results {
        for i in 0..res.config.pairs.len() {
            let mut prev: Option<f64> = None;
            for block in &res.blocks {
                let vals: Vec<f64> = block.raw.iter().map(|row| row[i] as f64 / block.n as f64).collect();
                let (value, se) = crate::experiments::stats::mean_se(&vals);
                out.write_record([
                    res.config.process.as_str().to_string(),
                    block.n.to_string(),
                    i.to_string(),
                    value.to_string(),
                    se.to_string(),
                    opt(prev.map(|p| value - p)),
                ])?;
                prev = Some(value);
            }
        }
    }
    finish(out)
}

pub fn write_expectation_rows_csv<W: Write>(w: W, process: &str, rows: &[ExpectationRow]) -> Result<()> {
    let mut out = writer(w, EXPECTATION_HEADER)?;
    for row in rows {
        out.write_record([process.to_string(), row.n.to_string(), "0".into(), row.value.to_string(), row.se.to_string(), opt(row.delta)])?;
    }
    finish(out)
}

pub fn write_relation_csv<W: Write>(w: W, report: &RelationReport) -> Result<()> {
    let mut out = writer(w, RELATION_HEADER)?;
    for e in &report.entries {
        out.write_record([
            e.n.to_string(),
            e.i.to_string(),
            e.j.to_string(),
            e.binomial.to_string(),
            e.poisson.to_string(),
            e.alpha_product.to_string(),
            e.difference.to_string(),
            e.pooled_se.to_string(),
            e.pass.to_string(),
        ])?;
    }
    finish(out)
}

pub fn write_alpha_csv<W: Write>(w: W, alphas: &[AlphaEstimate]) -> Result<()> {
    let mut out = writer(w, ALPHA_HEADER)?;
    for a in alphas {
        out.write_record([
            a.q.to_string(),
            a.r.to_string(),
            a.s.to_string(),
            a.value.to_string(),
            a.se.to_string(),
            a.window_radius.to_string(),
            a.censored_fraction.to_string(),
            a.reps.to_string(),
        ])?;
    }
    finish(out)
}

pub fn write_depo_csv<W: Write>(w: W, report: &DepoReport) -> Result<()> {
    let mut out = writer(w, DEPO_HEADER)?;
    out.write_record([
        report.mean.to_string(),
        report.se.to_string(),
        report.alpha.value.to_string(),
        report.alpha.se.to_string(),
        report.difference.to_string(),
        report.pooled_se.to_string(),
        report.pass.to_string(),
    ])?;
    finish(out)
}

pub fn write_tails_csv<W: Write>(w: W, table: &TailTable) -> Result<()> {
    let mut out = writer(w, TAILS_HEADER)?;
    for row in &table.rows {
        for (l, s) in table.l_grid.iter().zip(&row.survival) {
            out.write_record([
                row.radius.as_str().to_string(),
                row.lambda.to_string(),
                row.r.to_string(),
                row.q.to_string(),
                l.to_string(),
                s.estimate.to_string(),
                s.lower.to_string(),
                s.upper.to_string(),
                row.censored.to_string(),
            ])?;
        }
    }
    finish(out)
}

/// Rows of any headed CSV as strings, for consumers such as plotting.
pub fn read_table<R: Read>(r: R, expected_header: &str) -> Result<Vec<Vec<String>>> {
    Ok(read_rows(r, Some(expected_header))?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::build_rips;
    use crate::persistence::reduce;

    #[test]
    fn cloud_round_trip() {
        let cloud = PointCloud::from_points(&[vec![0.1, 0.7], vec![1.0 / 3.0, 0.25]], Window::unit_cube(2)).unwrap();
        let mut buf = Vec::new();
        write_cloud_csv(&mut buf, &cloud).unwrap();
        assert!(buf.starts_with(b"x0,x1\n"));
        let back = read_cloud_csv(&buf[..], Some(Window::unit_cube(2))).unwrap();
        assert_eq!(back, cloud);
        let env = CloudEnvelope::new(&cloud, Some(RngSeed::new(3)), Some(DensitySpec::Uniform { d: 2 }));
        let json = serde_json::to_string(&env).unwrap();
        assert_eq!(serde_json::from_str::<CloudEnvelope>(&json).unwrap().to_cloud().unwrap(), cloud);
    }

    #[test]
    fn complex_and_diagram_round_trip() {
        let cloud = PointCloud::from_points_bbox(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let complex = build_rips(&cloud, 2.0, 2).unwrap();
        let mut buf = Vec::new();
        write_complex_text(&mut buf, &complex).unwrap();
        let back = read_complex_text(&buf[..], FiltrationKind::Rips, 2, 2.0, cloud).unwrap();
        assert_eq!(back.cells(), complex.cells());

        let diagram = reduce(&complex);
        let mut buf = Vec::new();
        write_diagram_csv(&mut buf, diagram.pairs()).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().contains(",inf\n"));
        assert_eq!(read_diagram_csv(&buf[..]).unwrap(), diagram.pairs());
    }

    #[test]
    fn bad_inputs_are_parse_errors() {
        assert!(matches!(read_queries_csv(&b"q,r\n1,2\n"[..]), Err(Error::Parse(_))));
        assert!(matches!(read_queries_csv(&b"q,r,s\n1,x,2\n"[..]), Err(Error::Parse(_))));
        assert!(matches!(read_complex_cells(&b"0.5 1 0\n"[..]), Err(Error::Parse(_))));
    }
}
