//! Finite-difference Sturm–Liouville eigenvalues for the separated
//! equations `-y'' + V y = E y`.

use crate::tridiag::lowest_eigenvalues;

use super::OracleError;

/// Boundary treatment at both ends of the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// `y = 0` at the first grid points outside the open interval.
    Dirichlet,
    /// Solve for `u = y / (|sin fx|^p |cos fx|^q)` with natural conditions,
    /// which selects the solution behaving as `sin^p`, `cos^q` at the ends.
    /// Used for the irregular branches, which Dirichlet truncation cannot
    /// reach.
    Factored { sin_power: f64, cos_power: f64 },
}

/// A separated equation with potential
/// `s/sin²(fx) + c/cos²(fx) + h·x² - η/x + i/x²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSpec {
    pub interval: (f64, f64),
    pub freq: f64,
    pub inv_sin_sq: f64,
    pub inv_cos_sq: f64,
    pub harmonic: f64,
    pub coulomb: f64,
    pub inv_sq: f64,
    pub boundary: Boundary,
}

impl OdeSpec {
    pub fn angular(interval: (f64, f64), freq: f64, inv_sin_sq: f64, inv_cos_sq: f64) -> Self {
        Self {
            interval,
            freq,
            inv_sin_sq,
            inv_cos_sq,
            harmonic: 0.0,
            coulomb: 0.0,
            inv_sq: 0.0,
            boundary: Boundary::Dirichlet,
        }
    }

    /// Truncated at `√((2κ + 4k + 40)/ω)`.
    pub fn harmonic_radial(omega: f64, inv_sq: f64, kappa: f64, k_max: u32) -> Self {
        let r_max = ((2.0 * kappa + 4.0 * k_max as f64 + 40.0) / omega).sqrt();
        Self { harmonic: omega * omega, inv_sq, ..Self::radial(r_max) }
    }

    /// Truncated at `40(2k + 2κ + 1)/η`.
    pub fn coulomb_radial(eta: f64, inv_sq: f64, kappa: f64, k_max: u32) -> Self {
        let r_max = 40.0 * (2.0 * k_max as f64 + 2.0 * kappa + 1.0) / eta;
        Self { coulomb: eta, inv_sq, ..Self::radial(r_max) }
    }

    fn radial(r_max: f64) -> Self {
        Self {
            interval: (0.0, r_max),
            freq: 1.0,
            inv_sin_sq: 0.0,
            inv_cos_sq: 0.0,
            harmonic: 0.0,
            coulomb: 0.0,
            inv_sq: 0.0,
            boundary: Boundary::Dirichlet,
        }
    }

    pub fn with_boundary(self, boundary: Boundary) -> Self {
        Self { boundary, ..self }
    }

    pub fn potential(&self, x: f64) -> f64 {
        let mut v = self.harmonic * x * x;
        if self.inv_sin_sq != 0.0 {
            let s = (self.freq * x).sin();
            v += self.inv_sin_sq / (s * s);
        }
        if self.inv_cos_sq != 0.0 {
            let c = (self.freq * x).cos();
            v += self.inv_cos_sq / (c * c);
        }
        if self.coulomb != 0.0 {
            v -= self.coulomb / x;
        }
        if self.inv_sq != 0.0 {
            v += self.inv_sq / (x * x);
        }
        v
    }
}

pub const MIN_GRID: usize = 200;

/// Lowest `n_states` eigenvalues on `n_grid` interior points, ascending.
pub fn fd_eigenvalues(spec: &OdeSpec, n_grid: usize, n_states: usize) -> Result<Vec<f64>, OracleError> {
    if n_grid < MIN_GRID {
        return Err(OracleError::Grid { n_grid, min: MIN_GRID });
    }
    match spec.boundary {
        Boundary::Dirichlet => dirichlet(spec, n_grid, n_states),
        Boundary::Factored { sin_power, cos_power } => factored(spec, n_grid, sin_power, cos_power, n_states),
    }
}

fn dirichlet(spec: &OdeSpec, n_grid: usize, n_states: usize) -> Result<Vec<f64>, OracleError> {
    let (lo, hi) = spec.interval;
    let h = (hi - lo) / (n_grid + 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    let diag: Vec<f64> = (1..=n_grid).map(|i| 2.0 * inv_h2 + spec.potential(lo + i as f64 * h)).collect();
    let off = vec![-inv_h2; n_grid - 1];
    Ok(lowest_eigenvalues(&diag, &off, n_states)?)
}

// With A = |s|^p |c|^q the equation becomes -(A² u')' = (E - f²(p+q)²) A² u,
// because A''/A = f²[p(p-1)/s² + q(q-1)/c² - (p+q)²] and the potential
// coefficients are f²(p(p-1)) and f²(q(q-1)). Finite volumes on the nodes
// including both ends; each end cell's mass integrates the power law.
fn factored(spec: &OdeSpec, n_grid: usize, p: f64, q: f64, n_states: usize) -> Result<Vec<f64>, OracleError> {
    let (lo, hi) = spec.interval;
    let f = spec.freq;
    let cells = n_grid + 1;
    let h = (hi - lo) / cells as f64;
    let weight = |x: f64| {
        let s = (f * x).sin().abs();
        let c = (f * x).cos().abs();
        s.powf(2.0 * p) * if q == 0.0 { 1.0 } else { c.powf(2.0 * q) }
    };
    let end_mass = |end: f64, inward: f64| {
        let e = if (f * end).sin().abs() < 1e-12 { 2.0 * p } else { 2.0 * q };
        let half = 0.5 * h;
        let probe = 0.5 * half;
        let smooth = weight(end + inward * probe) / probe.powf(e);
        smooth * half.powf(e + 1.0) / (e + 1.0)
    };
    let nodes = cells + 1;
    let mut mass = vec![0.0; nodes];
    for (i, m) in mass.iter_mut().enumerate() {
        *m = match i {
            0 => end_mass(lo, 1.0),
            i if i == nodes - 1 => end_mass(hi, -1.0),
            i => weight(lo + i as f64 * h) * h,
        };
    }
    let flux: Vec<f64> = (0..cells).map(|i| weight(lo + (i as f64 + 0.5) * h) / h).collect();
    let mut diag = vec![0.0; nodes];
    let mut off = vec![0.0; cells];
    for i in 0..cells {
        diag[i] += flux[i];
        diag[i + 1] += flux[i];
        off[i] = -flux[i] / (mass[i] * mass[i + 1]).sqrt();
    }
    for (d, m) in diag.iter_mut().zip(&mass) {
        *d /= m;
    }
    let shift = f * f * (p + q) * (p + q);
    Ok(lowest_eigenvalues(&diag, &off, n_states)?.into_iter().map(|l| l + shift).collect())
}

/// Eigenvalues from grids `n`, `2n+1`, `4n+3` (spacing halved twice),
/// extrapolated with the observed convergence order.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolated {
    pub values: Vec<f64>,
    /// `|extrapolated - finest|`, or the last grid change when the sequence
    /// is too slow to extrapolate.
    pub error: Vec<f64>,
    pub order: Vec<f64>,
    pub grids: [usize; 3],
    pub raw: [Vec<f64>; 3],
}

pub fn fd_extrapolated(spec: &OdeSpec, n_grid: usize, n_states: usize) -> Result<Extrapolated, OracleError> {
    let grids = [n_grid, 2 * n_grid + 1, 4 * n_grid + 3];
    let raw = [
        fd_eigenvalues(spec, grids[0], n_states)?,
        fd_eigenvalues(spec, grids[1], n_states)?,
        fd_eigenvalues(spec, grids[2], n_states)?,
    ];
    let mut values = Vec::with_capacity(n_states);
    let mut error = Vec::with_capacity(n_states);
    let mut order = Vec::with_capacity(n_states);
    for s in 0..n_states {
        let (e1, e2, e3) = (raw[0][s], raw[1][s], raw[2][s]);
        let (p, v) = richardson(e1, e2, e3);
        values.push(v);
        error.push(if v == e3 { (e2 - e3).abs() } else { (v - e3).abs() });
        order.push(p);
    }
    Ok(Extrapolated { values, error, order, grids, raw })
}

/// Below this observed order the three grids are not in the asymptotic
/// regime and `1/(2^p - 1)` would amplify the last change without bound.
pub const MIN_ORDER: f64 = 0.25;

/// Order and extrapolated limit from three values at spacings h, h/2, h/4.
/// Falls back to order 2 when the differences are not monotone, and to the
/// finest value when the observed order is below [`MIN_ORDER`].
pub fn richardson(e1: f64, e2: f64, e3: f64) -> (f64, f64) {
    let (d1, d2) = (e1 - e2, e2 - e3);
    let ratio = d1 / d2;
    let p = if ratio.is_finite() && ratio > 1.0 { ratio.log2().min(8.0) } else { 2.0 };
    if p < MIN_ORDER {
        return (p, e3);
    }
    (p, e3 - d2 / (2f64.powf(p) - 1.0))
}
