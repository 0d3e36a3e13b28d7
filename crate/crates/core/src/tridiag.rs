//! Symmetric tridiagonal eigenproblems.
//!
//! Two routines live here: an implicit-shift QL iteration that also tracks
//! the first row of the eigenvector matrix (all that Golub-Welsch needs), and
//! a Sturm-sequence bisection that extracts the lowest few eigenvalues of
//! large finite-difference matrices without forming eigenvectors.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TridiagError {
    #[error("QL iteration did not converge for eigenvalue {index} after {iterations} sweeps")]
    NoConvergence { index: usize, iterations: usize },
    #[error("diagonal and off-diagonal lengths disagree: {diag} vs {offdiag}")]
    Shape { diag: usize, offdiag: usize },
    #[error("requested {requested} eigenvalues from a matrix of order {order}")]
    TooMany { requested: usize, order: usize },
}

const MAX_SWEEPS: usize = 64;

/// Eigenvalues (ascending) and the first component of each normalized
/// eigenvector, for the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `offdiag` (`offdiag[i]` couples rows `i` and `i + 1`).
pub fn eigen_first_row(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Vec<f64>), TridiagError> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if offdiag.len() + 1 != n {
        return Err(TridiagError::Shape { diag: n, offdiag: offdiag.len() });
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    // first row of the accumulated rotation matrix
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(TridiagError::NoConvergence { index: l, iterations: sweeps });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok((order.iter().map(|&i| d[i]).collect(), order.iter().map(|&i| z[i]).collect()))
}

/// Number of eigenvalues strictly below `x` (Sturm count via LDLᵀ pivots).
fn count_below(diag: &[f64], offdiag_sq: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if q.abs() < tiny { tiny.copysign(q) } else { q };
        q = diag[i] - x - offdiag_sq[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `count` smallest eigenvalues, ascending, by bisection on the Sturm
/// count. Converges to a relative width of a few ulps.
pub fn lowest_eigenvalues(diag: &[f64], offdiag: &[f64], count: usize) -> Result<Vec<f64>, TridiagError> {
    let n = diag.len();
    if offdiag.len() + 1 != n {
        return Err(TridiagError::Shape { diag: n, offdiag: offdiag.len() });
    }
    if count > n {
        return Err(TridiagError::TooMany { requested: count, order: n });
    }
    let offdiag_sq: Vec<f64> = offdiag.iter().map(|v| v * v).collect();

    // Gershgorin bracket
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius = if i > 0 { offdiag[i - 1].abs() } else { 0.0 } + if i + 1 < n { offdiag[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let pad = 1e-12 * (lo.abs().max(hi.abs()).max(1.0));
    lo -= pad;
    hi += pad;

    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if count_below(diag, &offdiag_sq, mid) > k {
                b = mid;
            } else {
                a = mid;
            }
            if (b - a) <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
                break;
            }
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}
