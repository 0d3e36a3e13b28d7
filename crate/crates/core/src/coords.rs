//! Orthonormal internal coordinates and the hyperspherical maps.
//!
//! Each model has a fixed orthonormal matrix taking particle positions to
//! internal coordinates (`t` is the centre-of-mass direction). Angles are
//! recovered with `atan2` from the outermost coordinate inward, so exact
//! poles map to the canonical angle 0.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, TAU};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoordError {
    #[error("expected {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("coordinate {index} is not finite")]
    NotFinite { index: usize },
    #[error("degenerate point: zero hyperradius")]
    ZeroRadius,
    #[error("{name} = {value} is outside its range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("angle {phi} lies on a two-particle coincidence (multiple of pi/3)")]
    OnSingularity { phi: f64 },
}

/// Particle positions on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub x: Vec<f64>,
}

impl Configuration {
    pub fn new(x: Vec<f64>) -> Result<Self, CoordError> {
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(CoordError::NotFinite { index });
        }
        Ok(Self { x })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InternalCoords {
    Four { t: f64, u: f64, v: f64, w: f64 },
    Five { t: f64, u: f64, v: f64, z: f64, w: f64 },
    Six { t: f64, u1: f64, v1: f64, u2: f64, v2: f64, w: f64 },
}

impl InternalCoords {
    /// Components in the row order of [`transform_matrix`].
    pub fn as_vec(&self) -> Vec<f64> {
        match *self {
            Self::Four { t, u, v, w } => vec![t, u, v, w],
            Self::Five { t, u, v, z, w } => vec![t, u, v, z, w],
            Self::Six { t, u1, v1, u2, v2, w } => vec![t, u1, v1, u2, v2, w],
        }
    }

    pub fn from_slice(c: &[f64]) -> Result<Self, CoordError> {
        match *c {
            [t, u, v, w] => Ok(Self::Four { t, u, v, w }),
            [t, u, v, z, w] => Ok(Self::Five { t, u, v, z, w }),
            [t, u1, v1, u2, v2, w] => Ok(Self::Six { t, u1, v1, u2, v2, w }),
            _ => Err(CoordError::Dimension { expected: 4, got: c.len() }),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.as_vec().iter().map(|v| v * v).sum()
    }
}

/// Hyperspherical points. The six-body variant stores the angles of both
/// polar steps: `phi1`, `phi2` from `(u_i, v_i)`, then `(r, α, θ, β)` on
/// `(t, w, r₁, r₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperPoint {
    Four { r: f64, alpha: f64, theta: f64, phi: f64 },
    Five { r: f64, alpha: f64, theta: f64, beta: f64, phi: f64 },
    Six { r: f64, alpha: f64, theta: f64, beta: f64, phi1: f64, phi2: f64 },
}

impl HyperPoint {
    pub fn radius(&self) -> f64 {
        match *self {
            Self::Four { r, .. } | Self::Five { r, .. } | Self::Six { r, .. } => r,
        }
    }
}

const S2: f64 = std::f64::consts::SQRT_2;

/// Rows of the orthonormal map from particle positions to internal
/// coordinates, for `n` ∈ {4, 5, 6}.
pub fn transform_matrix(n: usize) -> Result<Vec<Vec<f64>>, CoordError> {
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let s6 = 6f64.sqrt();
    let s30 = 30f64.sqrt();
    let rows = match n {
        4 => vec![
            vec![0.5, 0.5, 0.5, 0.5],
            vec![1.0 / S2, -1.0 / S2, 0.0, 0.0],
            vec![1.0 / s6, 1.0 / s6, -2.0 / s6, 0.0],
            vec![1.0 / (2.0 * s3), 1.0 / (2.0 * s3), 1.0 / (2.0 * s3), -3.0 / (2.0 * s3)],
        ],
        5 => vec![
            vec![1.0 / s5; 5],
            vec![1.0 / S2, -1.0 / S2, 0.0, 0.0, 0.0],
            vec![1.0 / s6, 1.0 / s6, -2.0 / s6, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0 / S2, -1.0 / S2],
            vec![2.0 / s30, 2.0 / s30, 2.0 / s30, -3.0 / s30, -3.0 / s30],
        ],
        6 => vec![
            vec![1.0 / s6; 6],
            vec![1.0 / S2, -1.0 / S2, 0.0, 0.0, 0.0, 0.0],
            vec![1.0 / s6, 1.0 / s6, -2.0 / s6, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0 / S2, -1.0 / S2, 0.0],
            vec![0.0, 0.0, 0.0, 1.0 / s6, 1.0 / s6, -2.0 / s6],
            vec![1.0 / s6, 1.0 / s6, 1.0 / s6, -1.0 / s6, -1.0 / s6, -1.0 / s6],
        ],
        got => return Err(CoordError::Dimension { expected: 4, got }),
    };
    Ok(rows)
}

pub fn to_internal(config: &Configuration) -> Result<InternalCoords, CoordError> {
    let m = transform_matrix(config.len())?;
    let c: Vec<f64> = m.iter().map(|row| row.iter().zip(&config.x).map(|(a, b)| a * b).sum()).collect();
    InternalCoords::from_slice(&c)
}

pub fn from_internal(coords: &InternalCoords) -> Configuration {
    let c = coords.as_vec();
    let m = transform_matrix(c.len()).expect("internal coordinates always have 4, 5 or 6 entries");
    let n = c.len();
    let x = (0..n).map(|j| (0..n).map(|i| m[i][j] * c[i]).sum()).collect();
    Configuration { x }
}

fn wrap_angle(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

fn hypot_all(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn to_hyper(coords: &InternalCoords) -> Result<HyperPoint, CoordError> {
    let r = coords.norm_sq().sqrt();
    if r == 0.0 {
        return Err(CoordError::ZeroRadius);
    }
    Ok(match *coords {
        InternalCoords::Four { t, u, v, w } => {
            let rho = u.hypot(v);
            HyperPoint::Four {
                r,
                alpha: hypot_all(&[w, u, v]).atan2(t),
                theta: rho.atan2(w),
                phi: wrap_angle(u.atan2(v)),
            }
        }
        InternalCoords::Five { t, u, v, z, w } => {
            let rho = u.hypot(v);
            HyperPoint::Five {
                r,
                alpha: hypot_all(&[w, z, u, v]).atan2(t),
                theta: hypot_all(&[z, u, v]).atan2(w),
                beta: rho.atan2(z),
                phi: wrap_angle(u.atan2(v)),
            }
        }
        InternalCoords::Six { t, u1, v1, u2, v2, w } => {
            let (r1, phi1) = polar(u1, v1);
            let (r2, phi2) = polar(u2, v2);
            HyperPoint::Six {
                r,
                alpha: hypot_all(&[w, r1, r2]).atan2(t),
                theta: r1.hypot(r2).atan2(w),
                beta: r1.atan2(r2),
                phi1,
                phi2,
            }
        }
    })
}

/// `(ρ, φ)` with `u = ρ sin φ`, `v = ρ cos φ`, `φ ∈ [0, 2π)`.
pub fn polar(u: f64, v: f64) -> (f64, f64) {
    (u.hypot(v), wrap_angle(u.atan2(v)))
}

fn check(name: &'static str, value: f64, lo: f64, hi: f64, hi_open: bool) -> Result<(), CoordError> {
    let ok = value.is_finite() && value >= lo && if hi_open { value < hi } else { value <= hi };
    if ok {
        Ok(())
    } else {
        Err(CoordError::OutOfRange { name, value })
    }
}

pub fn from_hyper(point: &HyperPoint) -> Result<InternalCoords, CoordError> {
    match *point {
        HyperPoint::Four { r, alpha, theta, phi } => {
            check("r", r, 0.0, f64::INFINITY, true)?;
            check("alpha", alpha, 0.0, PI, false)?;
            check("theta", theta, 0.0, PI, false)?;
            check("phi", phi, 0.0, TAU, true)?;
            let s = r * alpha.sin();
            let p = s * theta.sin();
            Ok(InternalCoords::Four { t: r * alpha.cos(), w: s * theta.cos(), u: p * phi.sin(), v: p * phi.cos() })
        }
        HyperPoint::Five { r, alpha, theta, beta, phi } => {
            check("r", r, 0.0, f64::INFINITY, true)?;
            check("alpha", alpha, 0.0, PI, false)?;
            check("theta", theta, 0.0, PI, false)?;
            check("beta", beta, 0.0, PI, false)?;
            check("phi", phi, 0.0, TAU, true)?;
            let s = r * alpha.sin();
            let p = s * theta.sin();
            let q = p * beta.sin();
            Ok(InternalCoords::Five {
                t: r * alpha.cos(),
                w: s * theta.cos(),
                z: p * beta.cos(),
                u: q * phi.sin(),
                v: q * phi.cos(),
            })
        }
        HyperPoint::Six { r, alpha, theta, beta, phi1, phi2 } => {
            check("r", r, 0.0, f64::INFINITY, true)?;
            check("alpha", alpha, 0.0, PI, false)?;
            check("theta", theta, 0.0, PI, false)?;
            check("beta", beta, 0.0, FRAC_PI_2, false)?;
            check("phi1", phi1, 0.0, TAU, true)?;
            check("phi2", phi2, 0.0, TAU, true)?;
            let s = r * alpha.sin();
            let p = s * theta.sin();
            let (r1, r2) = (p * beta.sin(), p * beta.cos());
            Ok(InternalCoords::Six {
                t: r * alpha.cos(),
                w: s * theta.cos(),
                u1: r1 * phi1.sin(),
                v1: r1 * phi1.cos(),
                u2: r2 * phi2.sin(),
                v2: r2 * phi2.cos(),
            })
        }
    }
}

const SECTOR_TOL: f64 = 1e-12;

/// Index `k` of the sector `(kπ/3, (k+1)π/3)` containing `phi`.
pub fn sector_index(phi: f64) -> Result<usize, CoordError> {
    check("phi", phi, 0.0, TAU, true)?;
    let scaled = phi / FRAC_PI_3;
    let nearest = scaled.round();
    if (phi - nearest * FRAC_PI_3).abs() <= SECTOR_TOL {
        return Err(CoordError::OnSingularity { phi });
    }
    Ok((scaled.floor() as usize).min(5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn four_body_example() {
        let c = to_internal(&Configuration::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap()).unwrap();
        let InternalCoords::Four { t, u, v, w } = c else { panic!() };
        assert!((t - 5.0).abs() < 1e-14);
        assert!((u + 1.0 / S2).abs() < 1e-14);
        assert!((v + 3.0 / 6f64.sqrt()).abs() < 1e-14);
        assert!((w + 3f64.sqrt()).abs() < 1e-14);
        assert!((c.norm_sq() - 30.0).abs() < 1e-12);

        let s = 0.7;
        let c = to_internal(&Configuration::new(vec![s; 4]).unwrap()).unwrap();
        let v = c.as_vec();
        assert!((v[0] - 2.0 * s).abs() < 1e-15);
        assert!(v[1..].iter().all(|x| x.abs() < 1e-15));

        let c = to_internal(&Configuration::new(vec![1.0; 6]).unwrap()).unwrap().as_vec();
        assert!((c[0] - 6f64.sqrt()).abs() < 1e-14);
        assert!(c[1..].iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(
            to_internal(&Configuration::new(vec![1.0; 3]).unwrap()),
            Err(CoordError::Dimension { got: 3, .. })
        ));
        assert!(Configuration::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn orthonormal_matrices() {
        for n in 4..=6 {
            let m = transform_matrix(n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = (0..n).map(|k| m[i][k] * m[j][k]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-13, "n={n} ({i},{j}) {dot}");
                }
            }
        }
    }

    #[test]
    fn hyper_examples() {
        let p = to_hyper(&InternalCoords::Four { t: 1.0, u: 0.0, v: 0.0, w: 0.0 }).unwrap();
        assert_eq!(p, HyperPoint::Four { r: 1.0, alpha: 0.0, theta: 0.0, phi: 0.0 });
        let HyperPoint::Four { r, alpha, theta, phi } =
            to_hyper(&InternalCoords::Four { t: 0.0, u: 1.0, v: 0.0, w: 0.0 }).unwrap()
        else {
            panic!()
        };
        assert_eq!(r, 1.0);
        for a in [alpha, theta, phi] {
            assert!((a - FRAC_PI_2).abs() < 1e-15);
        }
        let zero = InternalCoords::Four { t: 0.0, u: 0.0, v: 0.0, w: 0.0 };
        assert_eq!(to_hyper(&zero), Err(CoordError::ZeroRadius));
        assert!(from_hyper(&HyperPoint::Six { r: 1.0, alpha: 1.0, theta: 1.0, beta: 2.0, phi1: 0.0, phi2: 0.0 }).is_err());
    }

    #[test]
    fn sector_examples() {
        assert_eq!(sector_index(0.1), Ok(0));
        assert_eq!(sector_index(FRAC_PI_2), Ok(1));
        assert!(matches!(sector_index(FRAC_PI_3), Err(CoordError::OnSingularity { .. })));
        assert!(sector_index(0.0).is_err());
        assert_eq!(sector_index(TAU - 0.01), Ok(5));
    }

    #[test]
    fn norm_preserved_for_random_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 4..=6 {
            for _ in 0..1000 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let cfg = Configuration::new(x).unwrap();
                let h = to_hyper(&to_internal(&cfg).unwrap()).unwrap();
                let r = h.radius();
                assert!((r * r - cfg.norm_sq()).abs() <= 1e-12 * cfg.norm_sq());
            }
        }
    }

    #[test]
    fn w_sign_matches_cos_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let c = to_internal(&Configuration::new(x).unwrap()).unwrap();
            let InternalCoords::Four { w, .. } = c else { panic!() };
            let HyperPoint::Four { theta, .. } = to_hyper(&c).unwrap() else { panic!() };
            assert_eq!(w > 0.0, theta.cos() > 0.0);
        }
    }

    fn close(a: &[f64], b: &[f64], scale: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * scale.max(1.0))
    }

    proptest! {
        #[test]
        fn round_trips(x in proptest::collection::vec(-5.0f64..5.0, 4..=6)) {
            let cfg = Configuration::new(x.clone()).unwrap();
            let internal = to_internal(&cfg).unwrap();
            let back = from_internal(&internal);
            prop_assert!(back.x.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-13 * 5.0));
            let scale = cfg.norm_sq().sqrt();
            prop_assume!(scale > 1e-6);
            let hyper = to_hyper(&internal).unwrap();
            let again = from_hyper(&hyper).unwrap();
            prop_assert!(close(&again.as_vec(), &internal.as_vec(), scale));
        }
    }
}
