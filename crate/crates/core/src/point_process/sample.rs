use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::cloud::{PointCloud, Window};
use super::density::Density;
use crate::error::{domain, Error, Result};
use crate::rng::RngSeed;

/// Retry cap per point for rejection sampling.
pub const REJECTION_CAP: u64 = 1_000_000;

pub(crate) fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Domain(format!("poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: &[f64], hi: &[f64], out: &mut Vec<f64>) {
    for (l, h) in lo.iter().zip(hi) {
        out.push(l + rng.random::<f64>() * (h - l));
    }
}

/// Homogeneous Poisson process of intensity `lambda` on `window`.
pub fn sample_poisson_homogeneous(lambda: f64, window: &Window, seed: RngSeed) -> Result<PointCloud> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return domain(format!("intensity must be a finite nonnegative number, got {lambda}"));
    }
    let volume = window.volume();
    if !(volume > 0.0) {
        return domain("window has zero volume");
    }
    let d = window.dim();
    let mut rng = seed.rng();
    let (lo, hi) = window.bounds();
    let mut coords = Vec::new();
    match window {
        Window::Box { .. } => {
            let count = poisson_count(&mut rng, lambda * volume)?;
            coords.reserve(count * d);
            for _ in 0..count {
                uniform_in(&mut rng, &lo, &hi, &mut coords);
            }
        }
        Window::Ball { .. } => {
            // Restriction of a process on the bounding box is again Poisson.
            let box_volume: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
            let count = poisson_count(&mut rng, lambda * box_volume)?;
            let mut p = Vec::with_capacity(d);
            for _ in 0..count {
                p.clear();
                uniform_in(&mut rng, &lo, &hi, &mut p);
                if window.contains(&p) {
                    coords.extend_from_slice(&p);
                }
            }
        }
    }
    Ok(PointCloud::from_parts_unchecked(d, coords, window.clone()))
}

/// Poisson process with intensity measure `n·κ` on `[0,1]^d`, realized as
/// `{x : ∃ t ≤ n·κ(x), (x, t) ∈ 𝒫}` for a unit-rate driving process 𝒫 on
/// `[0,1]^d × [0, ∞)`.
///
/// The driving process is generated in horizontal slabs of height `n`, slab
/// `k` from stream `seed.derive(k)`, and only the first `⌈sup κ⌉` slabs are
/// drawn. Calls sharing `seed` therefore share their marks, so `κ ≤ κ'`
/// pointwise gives a sub-cloud.
pub fn sample_poisson_inhomogeneous(density: &Density, n: f64, seed: RngSeed) -> Result<PointCloud> {
    if !(n.is_finite() && n > 0.0) {
        return domain(format!("scale n must be positive, got {n}"));
    }
    let d = density.dim();
    let slabs = density.sup_bound().ceil().max(1.0) as u64;
    let mut coords = Vec::new();
    let mut x = Vec::with_capacity(d);
    for k in 0..slabs {
        let mut rng = seed.derive(k).rng();
        let count = poisson_count(&mut rng, n)?;
        for _ in 0..count {
            x.clear();
            for _ in 0..d {
                x.push(rng.random::<f64>());
            }
            let height = k as f64 + rng.random::<f64>();
            if height <= density.eval(&x) {
                coords.extend_from_slice(&x);
            }
        }
    }
    Ok(PointCloud::from_parts_unchecked(d, coords, Window::unit_cube(d)))
}

/// `n` i.i.d. points with density `κ` on `[0,1]^d`, by rejection against
/// the declared upper bound.
pub fn sample_binomial(n: usize, density: &Density, seed: RngSeed) -> Result<PointCloud> {
    let d = density.dim();
    let mut rng = seed.rng();
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n {
        draw_from_density(&mut rng, density, &mut coords)?;
    }
    Ok(PointCloud::from_parts_unchecked(d, coords, Window::unit_cube(d)))
}

/// Appends one draw from `κ` to `out`.
pub(crate) fn draw_from_density(rng: &mut ChaCha8Rng, density: &Density, out: &mut Vec<f64>) -> Result<()> {
    let d = density.dim();
    let sup = density.sup_bound();
    let start = out.len();
    for _ in 0..REJECTION_CAP {
        out.truncate(start);
        for _ in 0..d {
            out.push(rng.random::<f64>());
        }
        if rng.random::<f64>() * sup <= density.eval(&out[start..]) {
            return Ok(());
        }
    }
    out.truncate(start);
    Err(Error::Numerical(format!("rejection sampling exceeded {REJECTION_CAP} proposals")))
}

/// Whether `x` lies in the half-open unit cube `Q(z) = (-1/2, 1/2]^d + z`.
pub fn in_unit_cell(x: &[f64], z: &[i64]) -> bool {
    x.iter().zip(z).all(|(v, c)| {
        let c = *c as f64;
        c - 0.5 < *v && *v <= c + 0.5
    })
}

/// `(P \ Q(z)) ∪ (P' ∩ Q(z))`, keeping the window of `P`.
pub fn swap_window(p: &PointCloud, p_prime: &PointCloud, z: &[i64]) -> Result<PointCloud> {
    if p.dim() != p_prime.dim() || z.len() != p.dim() {
        return domain("dimension mismatch in swap_window");
    }
    let mut coords: Vec<f64> = p.points().filter(|x| !in_unit_cell(x, z)).flatten().copied().collect();
    coords.extend(p_prime.points().filter(|x| in_unit_cell(x, z)).flatten().copied());
    Ok(PointCloud::from_parts_unchecked(p.dim(), coords, p.window().clone()))
}
