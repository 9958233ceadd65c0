use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::miniball::miniball_radius;
use super::neighbors::forward_neighbors;
use crate::error::{domain, Error, Result};
use crate::point_process::{dist, PointCloud, Window};

/// The two filtrations supported by the crate.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiltrationKind {
    Cech,
    Rips,
}

impl FiltrationKind {
    /// `μ(r)`: upper bound on the diameter of a simplex present at time `r`.
    /// Equals `r` for Vietoris-Rips and `2r` for Čech.
    pub fn diameter_bound(self, r: f64) -> f64 {
        match self {
            FiltrationKind::Rips => r,
            FiltrationKind::Cech => 2.0 * r,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FiltrationKind::Cech => "cech",
            FiltrationKind::Rips => "rips",
        }
    }
}

impl std::str::FromStr for FiltrationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cech" => Ok(FiltrationKind::Cech),
            "rips" => Ok(FiltrationKind::Rips),
            other => Err(Error::Parse(format!("unknown filtration kind `{other}`"))),
        }
    }
}

/// Strictly increasing tuple of vertex indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<u32>);

impl Simplex {
    pub fn new(mut vertices: Vec<u32>) -> Result<Self> {
        if vertices.is_empty() {
            return domain("a simplex needs at least one vertex");
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return domain("simplex vertices must be distinct");
        }
        Ok(Self(vertices))
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, face `k` omitting vertex `k`.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |k| {
            let mut v = self.0.clone();
            v.remove(k);
            Simplex(v)
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub simplex: Simplex,
    pub time: f64,
}

/// Ordering of simplices that enter at the same time and dimension.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// Lexicographic in the vertex tuple.
    #[default]
    Lexicographic,
    /// Uniformly random, from the given seed.
    Seeded(u64),
}

/// A Čech or Vietoris-Rips filtration truncated at `r_max` and dimension
/// `q_max`, with cells sorted by `(time, dimension, tie rank)`.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    kind: FiltrationKind,
    q_max: usize,
    r_max: f64,
    cells: Vec<Cell>,
    cloud: PointCloud,
}

pub fn build_rips(p: &PointCloud, r_max: f64, q_max: usize) -> Result<FilteredComplex> {
    build(FiltrationKind::Rips, p, r_max, q_max)
}

pub fn build_cech(p: &PointCloud, r_max: f64, q_max: usize) -> Result<FilteredComplex> {
    build(FiltrationKind::Cech, p, r_max, q_max)
}

pub fn build(kind: FiltrationKind, p: &PointCloud, r_max: f64, q_max: usize) -> Result<FilteredComplex> {
    if !(r_max.is_finite() && r_max > 0.0) {
        return domain(format!("r_max must be positive and finite, got {r_max}"));
    }
    build_with(kind, p, r_max, q_max, TieBreak::Lexicographic)
}

/// Like [`build`] but also accepts `r_max = 0` and a tie-break mode.
pub fn build_with(kind: FiltrationKind, p: &PointCloud, r_max: f64, q_max: usize, tie: TieBreak) -> Result<FilteredComplex> {
    if !(r_max.is_finite() && r_max >= 0.0) {
        return domain(format!("r_max must be finite and nonnegative, got {r_max}"));
    }
    let n = p.len();
    if n > u32::MAX as usize {
        return Err(Error::Size("too many points".into()));
    }
    let mut cells: Vec<Cell> = (0..n as u32).map(|v| Cell { simplex: Simplex(vec![v]), time: 0.0 }).collect();
    if q_max >= 1 && n >= 2 {
        let fwd = forward_neighbors(p, kind.diameter_bound(r_max));
        let adjacent = |u: u32, v: u32| fwd[u as usize].binary_search(&v).is_ok();

        let mut level: Vec<(Vec<u32>, f64)> = Vec::new();
        for (u, nb) in fwd.iter().enumerate() {
            for &v in nb {
                let len = dist(p.point(u), p.point(v as usize));
                let time = match kind {
                    FiltrationKind::Rips => len,
                    FiltrationKind::Cech => 0.5 * len,
                };
                if time <= r_max {
                    level.push((vec![u as u32, v], time));
                }
            }
        }
        for q in 2..=q_max {
            cells.extend(level.iter().map(|(v, t)| Cell { simplex: Simplex(v.clone()), time: *t }));
            if level.is_empty() {
                break;
            }
            let times: HashMap<&[u32], f64> = match kind {
                FiltrationKind::Cech => level.iter().map(|(v, t)| (v.as_slice(), *t)).collect(),
                FiltrationKind::Rips => HashMap::new(),
            };
            let mut next = Vec::new();
            let mut buf: Vec<&[f64]> = Vec::with_capacity(q + 1);
            for (verts, time) in &level {
                let last = *verts.last().expect("nonempty simplex");
                for &c in &fwd[last as usize] {
                    if !verts[..verts.len() - 1].iter().all(|&u| adjacent(u, c)) {
                        continue;
                    }
                    let mut cand = verts.clone();
                    cand.push(c);
                    let t = match kind {
                        FiltrationKind::Rips => verts
                            .iter()
                            .map(|&u| dist(p.point(u as usize), p.point(c as usize)))
                            .fold(*time, f64::max),
                        FiltrationKind::Cech => {
                            // Every facet must be present; the time is at least each facet's.
                            let mut face_max = *time;
                            let mut ok = true;
                            for k in 0..cand.len() - 1 {
                                let mut f = cand.clone();
                                f.remove(k);
                                match times.get(f.as_slice()) {
                                    Some(&ft) => face_max = face_max.max(ft),
                                    None => {
                                        ok = false;
                                        break;
                                    }
                                }
                            }
                            if !ok {
                                continue;
                            }
                            buf.clear();
                            buf.extend(cand.iter().map(|&u| p.point(u as usize)));
                            miniball_radius(&buf)?.max(face_max)
                        }
                    };
                    if t <= r_max {
                        next.push((cand, t));
                    }
                }
            }
            level = next;
            if q == q_max {
                cells.extend(level.drain(..).map(|(v, t)| Cell { simplex: Simplex(v), time: t }));
            }
        }
        if q_max == 1 {
            cells.extend(level.into_iter().map(|(v, t)| Cell { simplex: Simplex(v), time: t }));
        }
    }
    sort_cells(&mut cells, tie);
    Ok(FilteredComplex { kind, q_max, r_max, cells, cloud: p.clone() })
}

fn sort_cells(cells: &mut [Cell], tie: TieBreak) {
    match tie {
        TieBreak::Lexicographic => cells.sort_by(|a, b| {
            a.time
                .total_cmp(&b.time)
                .then(a.simplex.dim().cmp(&b.simplex.dim()))
                .then_with(|| a.simplex.cmp(&b.simplex))
        }),
        TieBreak::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Assign keys in a canonical order first so the permutation is a
            // function of the seed and the complex only.
            cells.sort_by(|a, b| a.simplex.dim().cmp(&b.simplex.dim()).then_with(|| a.simplex.cmp(&b.simplex)));
            let keys: Vec<u64> = (0..cells.len()).map(|_| rng.random()).collect();
            let mut keyed: Vec<(u64, Cell)> = keys.into_iter().zip(cells.iter().cloned()).collect();
            keyed.sort_by(|(ka, a), (kb, b)| {
                a.time.total_cmp(&b.time).then(a.simplex.dim().cmp(&b.simplex.dim())).then(ka.cmp(kb))
            });
            for (slot, (_, c)) in cells.iter_mut().zip(keyed) {
                *slot = c;
            }
        }
    }
}

impl FilteredComplex {
    /// Assembles a complex from explicit cells, checking the filtration
    /// property and sort order.
    pub fn from_cells(kind: FiltrationKind, q_max: usize, r_max: f64, cells: Vec<Cell>, cloud: PointCloud) -> Result<Self> {
        let mut index: HashMap<&Simplex, f64> = HashMap::with_capacity(cells.len());
        for (i, c) in cells.iter().enumerate() {
            if c.simplex.vertices().iter().any(|&v| v as usize >= cloud.len()) {
                return domain(format!("cell {i} references a vertex outside the cloud"));
            }
            if c.simplex.dim() > q_max || !(c.time >= 0.0 && c.time <= r_max) {
                return domain(format!("cell {i} violates the caps"));
            }
            if c.simplex.dim() == 0 && c.time != 0.0 {
                return domain(format!("vertex cell {i} has nonzero time"));
            }
            if i > 0 {
                let prev = &cells[i - 1];
                if (prev.time, prev.simplex.dim()) > (c.time, c.simplex.dim()) {
                    return domain(format!("cell {i} out of order"));
                }
            }
            for f in c.simplex.facets() {
                match index.get(&f) {
                    Some(&ft) if ft <= c.time => {}
                    _ => return domain(format!("cell {i}: facet missing or entering later")),
                }
            }
            if index.insert(&c.simplex, c.time).is_some() {
                return domain(format!("cell {i} duplicated"));
            }
        }
        drop(index);
        Ok(Self { kind, q_max, r_max, cells, cloud })
    }

    pub fn kind(&self) -> FiltrationKind {
        self.kind
    }

    pub fn q_max(&self) -> usize {
        self.q_max
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn dim(&self) -> usize {
        self.cloud.dim()
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Number of leading cells with time `<= t`.
    pub fn prefix_len(&self, t: f64) -> usize {
        self.cells.partition_point(|c| c.time <= t)
    }

    /// Number of `q`-cells with time `<= t`.
    pub fn count_cells(&self, q: usize, t: f64) -> usize {
        self.cells[..self.prefix_len(t)].iter().filter(|c| c.simplex.dim() == q).count()
    }

    /// Sorted distinct filtration times.
    pub fn event_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.cells.iter().map(|c| c.time).collect();
        ts.dedup();
        ts
    }

    /// Map from simplex to its position in the cell order.
    pub fn index(&self) -> HashMap<&Simplex, usize> {
        self.cells.iter().enumerate().map(|(i, c)| (&c.simplex, i)).collect()
    }
}

/// Points of `p` in the closed ball `B(center, a)`; the window becomes that ball.
pub fn restrict(p: &PointCloud, center: &[f64], a: f64) -> Result<PointCloud> {
    if center.len() != p.dim() {
        return domain("center dimension mismatch");
    }
    if !(a >= 0.0) {
        return domain("restriction radius must be nonnegative");
    }
    Ok(p.filter(Window::ball(center.to_vec(), a), |x| dist(x, center) <= a))
}

/// `|K_q(Y, s) \ K_q(X, s)|`: the `q`-simplices of `𝒦_s(Y)` with at least
/// one vertex in `Y \ X`.
pub fn count_new_simplices(x: &PointCloud, y: &PointCloud, s: f64, q: usize, kind: FiltrationKind) -> Result<usize> {
    let Some(embed) = x.embedding_into(y) else {
        return domain("X is not a subset of Y");
    };
    let mut old = vec![false; y.len()];
    for i in embed {
        old[i] = true;
    }
    if old.iter().all(|&o| o) {
        return Ok(0);
    }
    let complex = build_with(kind, y, s.max(0.0), q, TieBreak::Lexicographic)?;
    Ok(complex
        .cells()
        .iter()
        .filter(|c| c.simplex.dim() == q && c.simplex.vertices().iter().any(|&v| !old[v as usize]))
        .count())
}
