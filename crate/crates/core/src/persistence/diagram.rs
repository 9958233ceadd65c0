use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::filtration::{FilteredComplex, FiltrationKind};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub q: usize,
    pub birth: f64,
    /// `f64::INFINITY` for classes alive at `r_max`.
    pub death: f64,
}

/// Where a diagram came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub complex_hash: u64,
    pub kind: FiltrationKind,
    pub q_max: usize,
    pub r_max: f64,
}

impl Provenance {
    pub fn of(complex: &FilteredComplex) -> Self {
        // FNV-1a over (vertices, time bits) of every cell.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for c in complex.cells() {
            for &v in c.simplex.vertices() {
                eat(v as u64);
            }
            eat(c.time.to_bits());
        }
        Self { complex_hash: h, kind: complex.kind(), q_max: complex.q_max(), r_max: complex.r_max() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceDiagram {
    pairs: Vec<PersistencePair>,
    provenance: Provenance,
}

/// A persistent Betti number query `β^{r,s}_q`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankQuery {
    pub q: usize,
    pub r: f64,
    pub s: f64,
}

impl RankQuery {
    pub fn new(q: usize, r: f64, s: f64) -> Self {
        Self { q, r, s }
    }

    /// Checks `0 <= r <= s <= r_max` and `q < q_max`.
    pub fn validate(&self, q_max: usize, r_max: f64) -> Result<()> {
        if !(self.r >= 0.0 && self.r <= self.s) {
            return domain(format!("query needs 0 <= r <= s, got r={} s={}", self.r, self.s));
        }
        if self.s > r_max {
            return Err(Error::Cap(format!("s={} exceeds r_max={r_max}; the value would be censored", self.s)));
        }
        if self.q >= q_max {
            return Err(Error::Cap(format!("q={} needs simplices of dimension {} but q_max={q_max}", self.q, self.q + 1)));
        }
        Ok(())
    }
}

impl PersistenceDiagram {
    pub fn new(pairs: Vec<PersistencePair>, provenance: Provenance) -> Self {
        Self { pairs, provenance }
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn pairs_of_dim(&self, q: usize) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.q == q)
    }

    /// Number of essential classes of dimension `q`, i.e. `β_q` at `r_max`.
    pub fn essential_count(&self, q: usize) -> usize {
        self.pairs_of_dim(q).filter(|p| p.death.is_infinite()).count()
    }

    /// `β^{r,s}_q`: pairs of dimension `q` with `birth <= r` and `death > s`.
    pub fn persistent_betti(&self, query: RankQuery) -> Result<usize> {
        query.validate(self.provenance.q_max, self.provenance.r_max)?;
        Ok(self.rank_unchecked(query))
    }

    pub(crate) fn rank_unchecked(&self, query: RankQuery) -> usize {
        self.pairs_of_dim(query.q).filter(|p| p.birth <= query.r && p.death > query.s).count()
    }
}

pub fn persistent_betti(diagram: &PersistenceDiagram, query: RankQuery) -> Result<usize> {
    diagram.persistent_betti(query)
}
