use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Piecewise-constant density on a regular `m^d` grid of subcubes of `[0,1]^d`.
///
/// Cell `i` has per-axis indices `(i mod m, (i / m) mod m, ...)`, i.e. axis 0
/// varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockedDensity {
    pub d: usize,
    pub m: usize,
    pub weights: Vec<f64>,
}

impl BlockedDensity {
    pub fn new(d: usize, m: usize, weights: Vec<f64>) -> Result<Self> {
        if d == 0 || m == 0 {
            return domain("blocked density needs d >= 1 and m >= 1");
        }
        let cells = m.checked_pow(d as u32).ok_or_else(|| Error::Domain("m^d overflows".into()))?;
        if weights.len() != cells {
            return domain(format!("expected {cells} weights, got {}", weights.len()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return domain("blocked weights must be positive and finite");
        }
        let mass: f64 = weights.iter().sum::<f64>() / cells as f64;
        if (mass - 1.0).abs() > 1e-12 {
            return domain(format!("blocked density integrates to {mass}, not 1"));
        }
        Ok(Self { d, m, weights })
    }

    pub fn cell_index(&self, x: &[f64]) -> usize {
        let m = self.m;
        let mut idx = 0;
        let mut stride = 1;
        for &v in x.iter().take(self.d) {
            let k = ((v * m as f64).floor().max(0.0) as usize).min(m - 1);
            idx += k * stride;
            stride *= m;
        }
        idx
    }

    /// Lower and upper corner of cell `i`.
    pub fn cell_bounds(&self, i: usize) -> (Vec<f64>, Vec<f64>) {
        let m = self.m;
        let h = 1.0 / m as f64;
        let mut rest = i;
        let mut lo = Vec::with_capacity(self.d);
        for _ in 0..self.d {
            lo.push((rest % m) as f64 * h);
            rest /= m;
        }
        let hi = lo.iter().map(|l| l + h).collect();
        (lo, hi)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.weights[self.cell_index(x)]
    }
}

/// Serializable description of a density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    Uniform { d: usize },
    Constant { d: usize, value: f64 },
    Blocked { d: usize, m: usize, weights: Vec<f64> },
    /// Placeholder emitted for closures; cannot be rebuilt from JSON.
    Callable { d: usize, inf_bound: f64, sup_bound: f64 },
}

#[derive(Clone)]
enum Repr {
    Constant(f64),
    Blocked(BlockedDensity),
    Callable(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

/// Intensity function `κ` on `[0,1]^d`, bounded away from zero and infinity.
#[derive(Clone)]
pub struct Density {
    d: usize,
    repr: Repr,
    inf_bound: f64,
    sup_bound: f64,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density").field("spec", &self.spec()).finish()
    }
}

impl Density {
    /// `κ ≡ 1`.
    pub fn uniform(d: usize) -> Self {
        Self { d, repr: Repr::Constant(1.0), inf_bound: 1.0, sup_bound: 1.0 }
    }

    pub fn constant(d: usize, value: f64) -> Result<Self> {
        if d == 0 || !(value.is_finite() && value > 0.0) {
            return domain("constant density needs d >= 1 and a positive value");
        }
        Ok(Self { d, repr: Repr::Constant(value), inf_bound: value, sup_bound: value })
    }

    pub fn blocked(b: BlockedDensity) -> Self {
        let inf_bound = b.weights.iter().copied().fold(f64::INFINITY, f64::min);
        let sup_bound = b.weights.iter().copied().fold(0.0, f64::max);
        Self { d: b.d, repr: Repr::Blocked(b), inf_bound, sup_bound }
    }

    /// Arbitrary density given by a closure with declared bounds. The bounds
    /// are checked on a grid with `grid_per_axis` nodes per axis.
    pub fn callable<F>(d: usize, inf_bound: f64, sup_bound: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if d == 0 || !(inf_bound > 0.0 && inf_bound <= sup_bound && sup_bound.is_finite()) {
            return domain("callable density needs 0 < inf_bound <= sup_bound < inf");
        }
        let density = Self { d, repr: Repr::Callable(Arc::new(f)), inf_bound, sup_bound };
        density.check_bounds_on_grid(9)?;
        Ok(density)
    }

    pub fn from_spec(spec: &DensitySpec) -> Result<Self> {
        match spec {
            DensitySpec::Uniform { d } => Self::constant(*d, 1.0),
            DensitySpec::Constant { d, value } => Self::constant(*d, *value),
            DensitySpec::Blocked { d, m, weights } => Ok(Self::blocked(BlockedDensity::new(*d, *m, weights.clone())?)),
            DensitySpec::Callable { .. } => domain("callable densities cannot be rebuilt from a descriptor"),
        }
    }

    pub fn spec(&self) -> DensitySpec {
        match &self.repr {
            Repr::Constant(v) if *v == 1.0 => DensitySpec::Uniform { d: self.d },
            Repr::Constant(v) => DensitySpec::Constant { d: self.d, value: *v },
            Repr::Blocked(b) => DensitySpec::Blocked { d: b.d, m: b.m, weights: b.weights.clone() },
            Repr::Callable(_) => DensitySpec::Callable { d: self.d, inf_bound: self.inf_bound, sup_bound: self.sup_bound },
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn inf_bound(&self) -> f64 {
        self.inf_bound
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn as_blocked(&self) -> Option<&BlockedDensity> {
        match &self.repr {
            Repr::Blocked(b) => Some(b),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.repr {
            Repr::Constant(v) => *v,
            Repr::Blocked(b) => b.eval(x),
            Repr::Callable(f) => f(x),
        }
    }

    /// Checks `inf_bound <= κ(x) <= sup_bound` on a regular grid.
    pub fn check_bounds_on_grid(&self, per_axis: usize) -> Result<()> {
        let per_axis = per_axis.max(2);
        let total = per_axis.pow(self.d as u32);
        let mut x = vec![0.0; self.d];
        for flat in 0..total {
            let mut rest = flat;
            for v in x.iter_mut() {
                *v = (rest % per_axis) as f64 / (per_axis - 1) as f64;
                rest /= per_axis;
            }
            let k = self.eval(&x);
            if !(k.is_finite() && k >= self.inf_bound && k <= self.sup_bound) {
                return Err(Error::Domain(format!("density value {k} at {x:?} violates declared bounds")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocked_mass_and_cells() {
        let b = BlockedDensity::new(2, 2, vec![2.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert_eq!(b.cell_index(&[0.1, 0.1]), 0);
        assert_eq!(b.cell_index(&[0.9, 0.1]), 1);
        assert_eq!(b.cell_index(&[0.1, 0.9]), 2);
        assert_eq!(b.cell_index(&[1.0, 1.0]), 3);
        assert_eq!(b.cell_bounds(1), (vec![0.5, 0.0], vec![1.0, 0.5]));
        assert!(BlockedDensity::new(2, 2, vec![1.0, 1.0, 1.0, 1.1]).is_err());
        assert!(BlockedDensity::new(2, 2, vec![2.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn bounds_hold_on_grid() {
        let b = Density::blocked(BlockedDensity::new(2, 2, vec![2.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]).unwrap());
        assert_eq!(b.sup_bound(), 2.0);
        assert!((b.inf_bound() - 2.0 / 3.0).abs() < 1e-15);
        b.check_bounds_on_grid(17).unwrap();
        let c = Density::callable(1, 0.5, 1.5, |x| 0.5 + x[0]).unwrap();
        assert_eq!(c.eval(&[0.25]), 0.75);
        assert!(Density::callable(1, 0.5, 1.2, |x| 0.5 + x[0]).is_err());
    }

    #[test]
    fn spec_roundtrip() {
        let b = Density::blocked(BlockedDensity::new(1, 2, vec![1.5, 0.5]).unwrap());
        let json = serde_json::to_string(&b.spec()).unwrap();
        let back = Density::from_spec(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.spec(), b.spec());
    }
}
