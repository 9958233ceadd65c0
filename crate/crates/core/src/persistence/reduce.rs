use std::collections::HashMap;

use super::diagram::{PersistenceDiagram, PersistencePair, Provenance};
use crate::filtration::{FilteredComplex, Simplex};

/// Boundary matrix over F₂: column `j` lists, ascending, the cell indices of
/// the facets of cell `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryMatrix {
    columns: Vec<Vec<usize>>,
    dims: Vec<usize>,
}

impl BoundaryMatrix {
    pub fn from_complex(complex: &FilteredComplex) -> Self {
        let index: HashMap<&Simplex, usize> = complex.index();
        let mut columns = Vec::with_capacity(complex.len());
        let mut dims = Vec::with_capacity(complex.len());
        for cell in complex.cells() {
            let mut col: Vec<usize> = cell.simplex.facets().map(|f| index[&f]).collect();
            col.sort_unstable();
            columns.push(col);
            dims.push(cell.simplex.dim());
        }
        Self { columns, dims }
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Process dimensions top-down and zero out columns already known to be
    /// paired ("twist"/clearing). Same pairing, fewer column additions.
    pub clearing: bool,
}

/// Result of reducing a boundary matrix: `low[j]` is the pivot row of the
/// reduced column `j`, or `None` when the column reduced to zero (a
/// positive cell).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    low: Vec<Option<usize>>,
    killer: Vec<Option<usize>>,
    dims: Vec<usize>,
}

impl Reduction {
    pub fn is_positive(&self, j: usize) -> bool {
        self.low[j].is_none()
    }

    pub fn low(&self, j: usize) -> Option<usize> {
        self.low[j]
    }

    /// The cell whose column has pivot `i`, i.e. the cell that kills the class born at `i`.
    pub fn killer(&self, i: usize) -> Option<usize> {
        self.killer[i]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
}

/// Standard left-to-right column reduction over F₂.
pub fn reduce_matrix(matrix: &BoundaryMatrix, opts: ReduceOptions) -> Reduction {
    let n = matrix.len();
    let mut cols: Vec<Vec<usize>> = matrix.columns.clone();
    let mut low: Vec<Option<usize>> = vec![None; n];
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    let mut scratch = Vec::new();

    let order: Vec<usize> = if opts.clearing {
        let max_dim = matrix.dims.iter().copied().max().unwrap_or(0);
        (0..=max_dim).rev().flat_map(|q| (0..n).filter(move |&j| matrix.dims[j] == q)).collect()
    } else {
        (0..n).collect()
    };
    let mut cleared = vec![false; n];

    for j in order {
        if cleared[j] {
            cols[j].clear();
            continue;
        }
        while let Some(&l) = cols[j].last() {
            match pivot_owner[l] {
                Some(k) => {
                    let (a, b) = if k < j {
                        let (lo, hi) = cols.split_at_mut(j);
                        (&mut hi[0], &lo[k])
                    } else {
                        let (lo, hi) = cols.split_at_mut(k);
                        (&mut lo[j], &hi[0])
                    };
                    add_into(a, b, &mut scratch);
                }
                None => break,
            }
        }
        if let Some(&l) = cols[j].last() {
            low[j] = Some(l);
            pivot_owner[l] = Some(j);
            if opts.clearing {
                cleared[l] = true;
            }
        }
    }
    Reduction { low, killer: pivot_owner, dims: matrix.dims.clone() }
}

/// `a ^= b` for sorted sparse F₂ columns.
fn add_into(a: &mut Vec<usize>, b: &[usize], scratch: &mut Vec<usize>) {
    scratch.clear();
    scratch.reserve(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&a[i..]);
    scratch.extend_from_slice(&b[j..]);
    std::mem::swap(a, scratch);
}

/// Reduced complex together with its persistence diagram.
#[derive(Clone, Debug)]
pub struct Persistence {
    pub reduction: Reduction,
    pub diagram: PersistenceDiagram,
    times: Vec<f64>,
}

impl Persistence {
    /// `dim Z_q(K_t)`: positive `q`-cells entering by time `t`.
    pub fn cycle_dim(&self, q: usize, t: f64) -> usize {
        let end = self.times.partition_point(|&x| x <= t);
        (0..end).filter(|&j| self.reduction.dims[j] == q && self.reduction.is_positive(j)).count()
    }
}

pub fn reduce(complex: &FilteredComplex) -> PersistenceDiagram {
    reduce_with(complex, ReduceOptions::default()).diagram
}

pub fn reduce_with(complex: &FilteredComplex, opts: ReduceOptions) -> Persistence {
    let matrix = BoundaryMatrix::from_complex(complex);
    let reduction = reduce_matrix(&matrix, opts);
    let times: Vec<f64> = complex.cells().iter().map(|c| c.time).collect();
    let mut pairs = Vec::new();
    for (i, cell) in complex.cells().iter().enumerate() {
        let q = cell.simplex.dim();
        if q >= complex.q_max() || !reduction.is_positive(i) {
            continue;
        }
        let death = reduction.killer(i).map_or(f64::INFINITY, |j| times[j]);
        pairs.push(PersistencePair { q, birth: cell.time, death });
    }
    let diagram = PersistenceDiagram::new(pairs, Provenance::of(complex));
    Persistence { reduction, diagram, times }
}

/// Reduces `columns` left to right over F₂ and reports which ones become
/// zero, i.e. which lie in the span of the columns before them. Row
/// indices are arbitrary `usize` keys; each column must be sorted.
pub(crate) fn zero_after_reduction(columns: Vec<Vec<usize>>) -> Vec<bool> {
    let mut pivots: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut scratch = Vec::new();
    columns
        .into_iter()
        .map(|mut col| {
            while let Some(&l) = col.last() {
                match pivots.get(&l) {
                    Some(p) => add_into(&mut col, p, &mut scratch),
                    None => {
                        pivots.insert(l, col);
                        return false;
                    }
                }
            }
            true
        })
        .collect()
}
