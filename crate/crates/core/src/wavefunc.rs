//! Separated factors, normalization and full eigenfunction evaluation.
//!
//! Every state is a product of one-dimensional factors times fixed powers of
//! `r`, `sin α`, `sin θ` and `sin β` (or `sin 2β`). The model measure times
//! the squared prefactors is plain `dx` in each variable, so norms and
//! overlaps are products of one-dimensional integrals over the fundamental
//! domain: the principal φ sector(s), the θ (and five-body β) half named by
//! the state's sector signs, all of `α` and `r`. Outside the fundamental
//! domain the state is extended evenly in `w` and `z` and by the statistics
//! sign across φ sectors.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use thiserror::Error;

use crate::coords::{to_hyper, to_internal, Configuration, CoordError, HyperPoint, InternalCoords};
use crate::model::{BranchSelector, Model, ModelKind, Sign, Statistics};
use crate::orthopoly::{gauss_rule, poly_eval, poly_norm_sq, PolyError, PolyFamily};
use crate::spectrum::{energy_from_kappa, separation_ladder, QuantumNumbers, SeparationConstants, SpectrumError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Coord(#[from] CoordError),
    #[error("argument {x} is outside the factor interval [{lo}, {hi}]")]
    OutsideInterval { x: f64, lo: f64, hi: f64 },
    #[error("factor diverges at the interval boundary {x}")]
    DivergentBoundary { x: f64 },
    #[error("configuration lies on the singular manifold {manifold}")]
    Singular { manifold: String },
    #[error("expected {expected} coordinates for this model, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorRole {
    Radial,
    G,
    Theta,
    /// β factor (five- and six-body).
    H,
    Phi,
    /// Second-cluster φ factor (six-body).
    Phi2,
}

impl FactorRole {
    pub fn name(self) -> &'static str {
        match self {
            Self::Radial => "F",
            Self::G => "G",
            Self::Theta => "Theta",
            Self::H => "H",
            Self::Phi => "Phi",
            Self::Phi2 => "Phi2",
        }
    }
}

/// Factor shape.
///
/// `Trig` is `|sin fx|^p |cos fx|^q P(cos gx)` on `interval`, with `g = f`
/// (then `q = 0`) or `g = 2f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorShape {
    Trig { freq: f64, sin_power: f64, cos_power: f64, arg_freq: f64, interval: (f64, f64) },
    /// `r^{κ+1/2} e^{-ωr²/2} L_k^{(κ)}(ωr²)`.
    HarmonicRadial { kappa: f64, omega: f64 },
    /// `r^{κ+1/2} e^{-η̃r} L_k^{(2κ)}(2η̃r)`.
    CoulombRadial { kappa: f64, eta_tilde: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorSpec {
    pub role: FactorRole,
    pub shape: FactorShape,
    pub poly: PolyFamily,
    pub degree: u32,
    /// Eigenvalue of the reduced one-dimensional equation.
    pub eigenvalue: f64,
}

impl FactorSpec {
    pub fn interval(&self) -> (f64, f64) {
        match self.shape {
            FactorShape::Trig { interval, .. } => interval,
            _ => (0.0, f64::INFINITY),
        }
    }
}

fn trig_value(freq: f64, p: f64, q: f64, g: f64, poly: &PolyFamily, degree: u32, x: f64) -> Result<f64, PolyError> {
    let s = (freq * x).sin().abs();
    let c = (freq * x).cos().abs();
    let xi = (g * x).cos().clamp(-1.0, 1.0);
    let pre = s.powf(p) * if q == 0.0 { 1.0 } else { c.powf(q) };
    Ok(pre * poly_eval(poly, degree, xi)?)
}

fn radial_value(shape: &FactorShape, poly: &PolyFamily, degree: u32, r: f64) -> Result<f64, PolyError> {
    match *shape {
        FactorShape::HarmonicRadial { kappa, omega } => {
            let x = omega * r * r;
            Ok(r.powf(kappa + 0.5) * (-0.5 * x).exp() * poly_eval(poly, degree, x)?)
        }
        FactorShape::CoulombRadial { kappa, eta_tilde } => {
            let x = 2.0 * eta_tilde * r;
            Ok(r.powf(kappa + 0.5) * (-eta_tilde * r).exp() * poly_eval(poly, degree, x)?)
        }
        FactorShape::Trig { .. } => unreachable!("radial_value called on an angular factor"),
    }
}

/// Value of a factor at an angle or radius inside its interval.
pub fn eval_factor(spec: &FactorSpec, x: f64) -> Result<f64, WaveError> {
    let (lo, hi) = spec.interval();
    if !(x >= lo && x <= hi) {
        return Err(WaveError::OutsideInterval { x, lo, hi });
    }
    match spec.shape {
        FactorShape::Trig { freq, sin_power, cos_power, arg_freq, .. } => {
            let s = (freq * x).sin().abs();
            let c = (freq * x).cos().abs();
            let on_edge = |v: f64| v <= 1e-15;
            if (sin_power < 0.0 && on_edge(s)) || (cos_power < 0.0 && on_edge(c)) {
                return Err(WaveError::DivergentBoundary { x });
            }
            Ok(trig_value(freq, sin_power, cos_power, arg_freq, &spec.poly, spec.degree, x)?)
        }
        _ => {
            if x == 0.0 {
                return Ok(0.0);
            }
            Ok(radial_value(&spec.shape, &spec.poly, spec.degree, x)?)
        }
    }
}

fn trig_factor(
    role: FactorRole,
    (freq, arg_freq): (f64, f64),
    sin_exp: f64,
    cos_exp: Option<f64>,
    interval: (f64, f64),
    degree: u32,
    eigenvalue: f64,
) -> Result<FactorSpec, WaveError> {
    let poly = match cos_exp {
        None if arg_freq == freq => PolyFamily::gegenbauer(sin_exp + 0.5)?,
        Some(c) => PolyFamily::jacobi(sin_exp, c)?,
        None => unreachable!("a cos-free factor always uses a Gegenbauer polynomial"),
    };
    let sin_power = sin_exp + 0.5;
    Ok(FactorSpec {
        role,
        shape: FactorShape::Trig {
            freq,
            sin_power,
            cos_power: cos_exp.map_or(0.0, |c| c + 0.5),
            arg_freq,
            interval,
        },
        poly,
        degree,
        eigenvalue,
    })
}

fn half_interval(sector: Sign) -> (f64, f64) {
    match sector {
        Sign::Plus => (0.0, FRAC_PI_2),
        Sign::Minus => (FRAC_PI_2, PI),
    }
}

/// The factors of a state, outermost (radial) first.
pub fn factor_specs(
    model: &Model,
    branch: &BranchSelector,
    qn: &QuantumNumbers,
) -> Result<(SeparationConstants, Vec<FactorSpec>), WaveError> {
    let s = separation_ladder(model, branch, qn)?;
    let e = &model.exponents;
    let kappa = s.kappa_radial;
    let radial = if model.kind.is_coulomb() {
        let eta_tilde = model.couplings.eta / (2.0 * qn.k as f64 + 2.0 * kappa + 1.0);
        FactorSpec {
            role: FactorRole::Radial,
            shape: FactorShape::CoulombRadial { kappa, eta_tilde },
            poly: PolyFamily::laguerre(2.0 * kappa)?,
            degree: qn.k,
            eigenvalue: energy_from_kappa(model, qn.k, kappa),
        }
    } else {
        FactorSpec {
            role: FactorRole::Radial,
            shape: FactorShape::HarmonicRadial { kappa, omega: model.couplings.omega },
            poly: PolyFamily::laguerre(kappa)?,
            degree: qn.k,
            eigenvalue: energy_from_kappa(model, qn.k, kappa),
        }
    };
    let phi_order = |a: f64, sign: Sign| sign.value() * a;
    let sector = (0.0, FRAC_PI_3);
    let mut out = vec![radial];
    match model.kind {
        ModelKind::FourHarmonic | ModelKind::FourCoulomb => {
            let cs = branch.sign_c.value() * e.c.unwrap_or(0.0);
            out.push(trig_factor(FactorRole::G, (1.0, 1.0), s.c, None, (0.0, PI), qn.l, s.top * s.top)?);
            out.push(trig_factor(
                FactorRole::Theta,
                (1.0, 2.0),
                s.b,
                Some(cs),
                half_interval(qn.w_sector),
                qn.m,
                s.c * s.c,
            )?);
            out.push(trig_factor(FactorRole::Phi, (3.0, 3.0), phi_order(e.a, branch.sign_a), None, sector, qn.n, s.b * s.b)?);
        }
        ModelKind::FiveHarmonic => {
            let d = s.d.expect("five-body ladder has d");
            let cs = branch.sign_c.value() * e.c.unwrap_or(0.0);
            let ds = branch.sign_d.value() * e.d.unwrap_or(0.0);
            out.push(trig_factor(FactorRole::G, (1.0, 1.0), d, None, (0.0, PI), qn.l, s.top * s.top)?);
            out.push(trig_factor(
                FactorRole::Theta,
                (1.0, 2.0),
                s.c,
                Some(ds),
                half_interval(qn.w_sector),
                qn.j,
                d * d,
            )?);
            out.push(trig_factor(FactorRole::H, (1.0, 2.0), s.b, Some(cs), half_interval(qn.z_sector), qn.m, s.c * s.c)?);
            out.push(trig_factor(FactorRole::Phi, (3.0, 3.0), phi_order(e.a, branch.sign_a), None, sector, qn.n, s.b * s.b)?);
        }
        ModelKind::SixHarmonic => {
            let d = s.d.expect("six-body ladder has d");
            let b2 = s.b2.expect("six-body ladder has b2");
            let ds = branch.sign_d.value() * e.d.unwrap_or(0.0);
            out.push(trig_factor(FactorRole::G, (1.0, 1.0), d, None, (0.0, PI), qn.l, s.top * s.top)?);
            out.push(trig_factor(
                FactorRole::Theta,
                (1.0, 2.0),
                s.c,
                Some(ds),
                half_interval(qn.w_sector),
                qn.j,
                d * d,
            )?);
            out.push(trig_factor(FactorRole::H, (1.0, 2.0), s.b, Some(b2), (0.0, FRAC_PI_2), qn.m, s.c * s.c)?);
            out.push(trig_factor(FactorRole::Phi, (3.0, 3.0), phi_order(e.a, branch.sign_a), None, sector, qn.n, s.b * s.b)?);
            let a2 = e.a2.unwrap_or(0.0);
            out.push(trig_factor(FactorRole::Phi2, (3.0, 3.0), phi_order(a2, branch.sign_a2), None, sector, qn.n2, b2 * b2)?);
        }
    }
    Ok((s, out))
}

/// Closed-form `∫ X² dx` over the factor interval from the polynomial norms.
pub fn factor_norm_closed(spec: &FactorSpec) -> f64 {
    let h = poly_norm_sq(&spec.poly, spec.degree);
    match spec.shape {
        FactorShape::Trig { freq, sin_power, cos_power, arg_freq, .. } => {
            if arg_freq == freq {
                h / freq
            } else {
                let (b, c) = (sin_power - 0.5, cos_power - 0.5);
                2f64.powf(-b - c - 2.0) * h / freq
            }
        }
        FactorShape::HarmonicRadial { kappa, omega } => h / (2.0 * omega.powf(kappa + 1.0)),
        FactorShape::CoulombRadial { kappa, eta_tilde } => {
            // one extra power of x against the Laguerre weight
            let k = spec.degree as f64;
            (2.0 * eta_tilde).powf(-(2.0 * kappa + 2.0)) * h * (2.0 * k + 2.0 * kappa + 1.0)
        }
    }
}

/// Gauss quadrature of `∫ X_a X_b dx` with the product's non-polynomial
/// part folded into the weight. Both factors must share role and interval.
pub fn factor_overlap(a: &FactorSpec, b: &FactorSpec) -> Result<f64, WaveError> {
    let extra = |p: f64| p.ceil().max(0.0) as usize;
    let points = |exp: f64| a.degree.max(b.degree) as usize + extra(exp) + 10;
    match (a.shape, b.shape) {
        (
            FactorShape::Trig { freq, sin_power: pa, cos_power: qa, arg_freq, .. },
            FactorShape::Trig { sin_power: pb, cos_power: qb, .. },
        ) => {
            let big_p = pa + pb;
            if arg_freq == freq {
                // ξ = cos(fx): weight (1-ξ²)^{(P-1)/2}
                let e = 0.5 * (big_p - 1.0);
                let rule = gauss_rule(&PolyFamily::jacobi(e, e)?, points(e))?;
                let mut sum = 0.0;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    sum += w * poly_eval(&a.poly, a.degree, *x)? * poly_eval(&b.poly, b.degree, *x)?;
                }
                Ok(sum / freq)
            } else {
                // ξ = cos(2fx): weight (1-ξ)^{(P-1)/2} (1+ξ)^{(Q-1)/2}
                let big_q = qa + qb;
                let (ea, eb) = (0.5 * (big_p - 1.0), 0.5 * (big_q - 1.0));
                let rule = gauss_rule(&PolyFamily::jacobi(ea, eb)?, points(ea.max(eb)))?;
                let mut sum = 0.0;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    sum += w * poly_eval(&a.poly, a.degree, *x)? * poly_eval(&b.poly, b.degree, *x)?;
                }
                Ok(2f64.powf(-ea - eb - 2.0) * sum / freq)
            }
        }
        (FactorShape::HarmonicRadial { kappa: ka, omega }, FactorShape::HarmonicRadial { kappa: kb, .. }) => {
            let kbar = 0.5 * (ka + kb);
            let rule = gauss_rule(&PolyFamily::laguerre(kbar)?, points(kbar))?;
            let mut sum = 0.0;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                sum += w * poly_eval(&a.poly, a.degree, *x)? * poly_eval(&b.poly, b.degree, *x)?;
            }
            Ok(0.5 * omega.powf(-kbar - 1.0) * sum)
        }
        (
            FactorShape::CoulombRadial { kappa: ka, eta_tilde: ea },
            FactorShape::CoulombRadial { kappa: kb, eta_tilde: eb },
        ) => {
            let s = ea + eb;
            let alpha = ka + kb + 1.0;
            let rule = gauss_rule(&PolyFamily::laguerre(alpha)?, points(alpha))?;
            let mut sum = 0.0;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let pa = poly_eval(&a.poly, a.degree, 2.0 * ea * x / s)?;
                let pb = poly_eval(&b.poly, b.degree, 2.0 * eb * x / s)?;
                sum += w * pa * pb;
            }
            Ok(s.powf(-(ka + kb + 2.0)) * sum)
        }
        _ => unreachable!("factor_overlap called on factors of different shapes"),
    }
}

/// A state with its factors and normalization integral, immutable after
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedState {
    pub model: Model,
    pub branch: BranchSelector,
    pub qn: QuantumNumbers,
    pub constants: SeparationConstants,
    pub energy: f64,
    pub factors: Vec<FactorSpec>,
    /// `∫ Ψ² dV` of the unnormalized product over the fundamental domain.
    pub norm_constant: f64,
}

/// Relative agreement required between the Gauss and closed-form norms.
pub const NORM_AGREEMENT: f64 = 1e-10;

impl NormalizedState {
    pub fn new(model: &Model, branch: &BranchSelector, qn: &QuantumNumbers) -> Result<Self, WaveError> {
        let (constants, factors) = factor_specs(model, branch, qn)?;
        let mut norm = 1.0;
        for f in &factors {
            norm *= factor_overlap(f, f)?;
        }
        Ok(Self {
            model: *model,
            branch: *branch,
            qn: *qn,
            constants,
            energy: factors[0].eigenvalue,
            factors,
            norm_constant: norm,
        })
    }

    /// The same integral from the closed-form polynomial norms.
    pub fn closed_form_norm(&self) -> f64 {
        self.factors.iter().map(factor_norm_closed).product()
    }

    pub fn factor(&self, role: FactorRole) -> Option<&FactorSpec> {
        self.factors.iter().find(|f| f.role == role)
    }
}

/// `⟨a|b⟩` over the fundamental domain, both states normalized. The result
/// does not depend on the sector signs, since the θ and β halves mirror
/// each other.
pub fn overlap(a: &NormalizedState, b: &NormalizedState) -> Result<f64, WaveError> {
    assert_eq!(a.model.kind, b.model.kind, "overlap of states from different models");
    let mut prod = 1.0;
    for (fa, fb) in a.factors.iter().zip(&b.factors) {
        prod *= factor_overlap(fa, fb)?;
    }
    Ok(prod / (a.norm_constant * b.norm_constant).sqrt())
}

/// Distance below which a configuration counts as singular.
pub const SINGULAR_GUARD: f64 = 1e-10;

/// Pairs whose coincidence is singular (0-based indices).
pub fn singular_pairs(kind: ModelKind) -> &'static [(usize, usize)] {
    match kind {
        ModelKind::FourHarmonic | ModelKind::FourCoulomb => &[(0, 1), (0, 2), (1, 2)],
        ModelKind::FiveHarmonic => &[(0, 1), (0, 2), (1, 2), (3, 4)],
        ModelKind::SixHarmonic => &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)],
    }
}

/// Name of the nearest singular manifold when closer than `margin`, and the
/// smallest distance found.
pub fn singular_distance(kind: ModelKind, x: &[f64], internal: &InternalCoords) -> (f64, String) {
    let mut best = (f64::INFINITY, String::new());
    for &(i, j) in singular_pairs(kind) {
        let d = (x[i] - x[j]).abs();
        if d < best.0 {
            best = (d, format!("x{}=x{}", i + 1, j + 1));
        }
    }
    let w = match *internal {
        InternalCoords::Four { w, .. } | InternalCoords::Five { w, .. } | InternalCoords::Six { w, .. } => w,
    };
    if w.abs() < best.0 {
        best = (w.abs(), "w=0".to_string());
    }
    let r = internal.norm_sq().sqrt();
    if r < best.0 {
        best = (r, "origin".to_string());
    }
    best
}

fn phi_full(spec: &FactorSpec, phi: f64, statistics: Statistics) -> Result<f64, PolyError> {
    let FactorShape::Trig { freq, sin_power, arg_freq, .. } = spec.shape else {
        unreachable!("phi factor is trigonometric")
    };
    let v = trig_value(freq, sin_power, 0.0, arg_freq, &spec.poly, spec.degree, phi)?;
    Ok(match statistics {
        Statistics::Bose => v,
        Statistics::Fermi => v * (freq * phi).sin().signum(),
    })
}

/// Normalized `Ψ(x)`. The θ (and β) half is taken from the sign of `w`
/// (and `z`); φ is extended to all sectors with the statistics sign.
pub fn eval_psi(state: &NormalizedState, config: &Configuration) -> Result<f64, WaveError> {
    let kind = state.model.kind;
    if config.len() != kind.particles() {
        return Err(WaveError::Dimension { expected: kind.particles(), got: config.len() });
    }
    let internal = to_internal(config)?;
    let (dist, manifold) = singular_distance(kind, &config.x, &internal);
    if dist < SINGULAR_GUARD {
        return Err(WaveError::Singular { manifold });
    }
    let hyper = to_hyper(&internal)?;
    let raw = eval_unnormalized(state, &internal, &hyper)?;
    Ok(raw / state.norm_constant.sqrt())
}

fn eval_unnormalized(state: &NormalizedState, internal: &InternalCoords, hyper: &HyperPoint) -> Result<f64, WaveError> {
    let stats = state.qn.statistics;
    let f = |role| state.factor(role).expect("factor present for this model");
    let unchecked = |spec: &FactorSpec, x: f64| -> Result<f64, PolyError> {
        match spec.shape {
            FactorShape::Trig { freq, sin_power, cos_power, arg_freq, .. } => {
                trig_value(freq, sin_power, cos_power, arg_freq, &spec.poly, spec.degree, x)
            }
            _ => radial_value(&spec.shape, &spec.poly, spec.degree, x),
        }
    };
    // |cos| in the trig factors makes θ and π-θ (and β, π-β) equivalent
    match (*internal, *hyper) {
        (InternalCoords::Four { .. }, HyperPoint::Four { r, alpha, theta, phi }) => {
            let v = unchecked(f(FactorRole::Radial), r)? * r.powf(-1.5)
                * unchecked(f(FactorRole::G), alpha)?
                / alpha.sin()
                * unchecked(f(FactorRole::Theta), theta)?
                / theta.sin().sqrt()
                * phi_full(f(FactorRole::Phi), phi, stats)?;
            Ok(v)
        }
        (InternalCoords::Five { .. }, HyperPoint::Five { r, alpha, theta, beta, phi }) => {
            let v = unchecked(f(FactorRole::Radial), r)? * r.powi(-2)
                * unchecked(f(FactorRole::G), alpha)?
                / alpha.sin().powf(1.5)
                * unchecked(f(FactorRole::Theta), theta)?
                / theta.sin()
                * unchecked(f(FactorRole::H), beta)?
                / beta.sin().sqrt()
                * phi_full(f(FactorRole::Phi), phi, stats)?;
            Ok(v)
        }
        (InternalCoords::Six { .. }, HyperPoint::Six { r, alpha, theta, beta, phi1, phi2 }) => {
            let v = unchecked(f(FactorRole::Radial), r)? * r.powf(-2.5)
                * unchecked(f(FactorRole::G), alpha)?
                / alpha.sin().powi(2)
                * unchecked(f(FactorRole::Theta), theta)?
                / theta.sin().powf(1.5)
                * unchecked(f(FactorRole::H), beta)?
                / (2.0 * beta).sin().sqrt()
                * phi_full(f(FactorRole::Phi), phi1, stats)?
                * phi_full(f(FactorRole::Phi2), phi2, stats)?;
            Ok(v)
        }
        _ => unreachable!("internal and hyperspherical coordinates come from the same model"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::from_internal;
    use crate::model::{build_model, Couplings};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const REG: BranchSelector = BranchSelector::REGULAR;

    fn generic(kind: ModelKind) -> Model {
        let cp = match kind {
            ModelKind::SixHarmonic => Couplings { lambda1: 1.0, lambda2: 0.6, g: 2.0, mu: 0.5, ..Default::default() },
            ModelKind::FiveHarmonic => Couplings { lambda: 1.0, kappa_pair: 0.8, g: 2.0, mu: 0.5, ..Default::default() },
            _ => Couplings { lambda: 1.0, g: 2.0, mu: 0.5, ..Default::default() },
        };
        build_model(kind, cp).unwrap()
    }

    fn spec_of(state: &NormalizedState, role: FactorRole) -> FactorSpec {
        *state.factor(role).unwrap()
    }

    #[test]
    fn factor_examples() {
        let m = build_model(ModelKind::FourHarmonic, Couplings { lambda: 1.5, ..Default::default() }).unwrap();
        let s = NormalizedState::new(&m, &REG, &QuantumNumbers::ground()).unwrap();
        let phi = spec_of(&s, FactorRole::Phi);
        assert!((eval_factor(&phi, std::f64::consts::FRAC_PI_6).unwrap() - 1.0).abs() < 1e-15);
        assert!(eval_factor(&phi, 2.0).is_err());

        let f = FactorSpec {
            role: FactorRole::Radial,
            shape: FactorShape::HarmonicRadial { kappa: 5.0, omega: 1.0 },
            poly: PolyFamily::laguerre(5.0).unwrap(),
            degree: 0,
            eigenvalue: 12.0,
        };
        assert!((eval_factor(&f, 1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);

        // Θ at λ = g = 0, (m, n) = (1, 0): b = 3, c = 1/2
        let m0 = build_model(ModelKind::FourHarmonic, Couplings::default()).unwrap();
        let s = NormalizedState::new(&m0, &REG, &QuantumNumbers::four(0, 0, 1, 0)).unwrap();
        let th = spec_of(&s, FactorRole::Theta);
        let x = std::f64::consts::FRAC_PI_4;
        // P_1^{(3, 1/2)}(0) = (a - b)/2 = 1.25; sin^{3.5} cos^{1} at π/4
        let expect = 0.5f64.sqrt().powf(3.5) * 0.5f64.sqrt() * 1.25;
        assert!((eval_factor(&th, x).unwrap() - expect).abs() < 1e-14);
        // c_10 = 2 + 3 + 1/2 + 1
        assert_eq!(th.eigenvalue, 42.25);
    }

    #[test]
    fn divergent_boundary_is_an_error() {
        let m = build_model(ModelKind::FourHarmonic, Couplings { lambda: 0.5, ..Default::default() }).unwrap();
        let irr: BranchSelector = "-a".parse().unwrap();
        let s = NormalizedState::new(&m, &irr, &QuantumNumbers::ground()).unwrap();
        let phi = spec_of(&s, FactorRole::Phi);
        assert!(matches!(eval_factor(&phi, 0.0), Err(WaveError::DivergentBoundary { .. })));
    }

    #[test]
    fn gauss_and_closed_norms_agree() {
        for kind in ModelKind::ALL {
            let m = generic(kind);
            for qn in [QuantumNumbers::ground(), QuantumNumbers::six(2, 1, 0, 1, 1, 0)] {
                let mut qn = qn;
                if matches!(kind, ModelKind::FourHarmonic | ModelKind::FourCoulomb) {
                    qn.j = 0;
                }
                let s = NormalizedState::new(&m, &REG, &qn).unwrap();
                for f in &s.factors {
                    let g = factor_overlap(f, f).unwrap();
                    let c = factor_norm_closed(f);
                    assert!((g - c).abs() <= NORM_AGREEMENT * c, "{kind} {:?}: {g} vs {c}", f.role);
                }
                let closed = s.closed_form_norm();
                assert!((s.norm_constant - closed).abs() <= NORM_AGREEMENT * closed);
            }
        }
    }

    #[test]
    fn gram_first_states_is_identity() {
        for kind in ModelKind::ALL {
            let m = generic(kind);
            let levels = crate::spectrum::enumerate_levels_capped(&m, &REG, f64::INFINITY, 2);
            let states: Vec<NormalizedState> = levels
                .iter()
                .flat_map(|l| l.members.clone())
                .take(6)
                .map(|q| NormalizedState::new(&m, &REG, &q).unwrap())
                .collect();
            for (i, a) in states.iter().enumerate() {
                for (j, b) in states.iter().enumerate() {
                    let g = overlap(a, b).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((g - expect).abs() < 1e-10, "{kind} ({i},{j}) = {g}");
                }
            }
        }
    }

    #[test]
    fn states_differing_in_n_are_orthogonal() {
        let m = generic(ModelKind::FourHarmonic);
        let a = NormalizedState::new(&m, &REG, &QuantumNumbers::four(0, 1, 1, 0)).unwrap();
        let b = NormalizedState::new(&m, &REG, &QuantumNumbers::four(0, 1, 1, 1)).unwrap();
        let fa = spec_of(&a, FactorRole::Phi);
        let fb = spec_of(&b, FactorRole::Phi);
        assert!(factor_overlap(&fa, &fb).unwrap().abs() < 1e-10);
    }

    #[test]
    fn singular_and_generic_points() {
        let m = generic(ModelKind::FourHarmonic);
        let s = NormalizedState::new(&m, &REG, &QuantumNumbers::ground()).unwrap();
        let err = eval_psi(&s, &Configuration::new(vec![0.5, 0.5, 1.0, -1.0]).unwrap()).unwrap_err();
        assert_eq!(err, WaveError::Singular { manifold: "x1=x2".into() });
        let x = Configuration::new(vec![0.3, 0.9, 1.7, 2.5]).unwrap();
        let v = eval_psi(&s, &x).unwrap();
        assert!(v.is_finite() && v > 0.0);
        // the w < 0 half mirrors the w > 0 half
        let qn = QuantumNumbers::ground().with_sectors(Sign::Minus, Sign::Plus);
        let s2 = NormalizedState::new(&m, &REG, &qn).unwrap();
        assert!((eval_psi(&s2, &x).unwrap() - v).abs() < 1e-14 * v);
        assert!((overlap(&s, &s2).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            eval_psi(&s, &Configuration::new(vec![1.0, 2.0, 3.0]).unwrap()),
            Err(WaveError::Dimension { .. })
        ));
    }

    #[test]
    fn exchange_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in ModelKind::ALL {
            let m = generic(kind);
            for stats in [Statistics::Bose, Statistics::Fermi] {
                let qn = QuantumNumbers::ground().with_statistics(stats);
                let s = NormalizedState::new(&m, &REG, &qn).unwrap();
                let mut checked = 0;
                while checked < 20 {
                    let x: Vec<f64> = (0..kind.particles()).map(|_| rng.gen_range(-1.5..1.5)).collect();
                    let mut y = x.clone();
                    y.swap(0, 1);
                    let a = eval_psi(&s, &Configuration::new(x).unwrap());
                    let b = eval_psi(&s, &Configuration::new(y).unwrap());
                    let (Ok(a), Ok(b)) = (a, b) else { continue };
                    if a == 0.0 {
                        continue;
                    }
                    let expect = if stats == Statistics::Bose { a } else { -a };
                    assert!((b - expect).abs() <= 1e-12 * a.abs(), "{kind} {stats}: {a} vs {b}");
                    checked += 1;
                }
            }
        }
    }

    #[test]
    fn sector_wall_continuity() {
        let m = generic(ModelKind::FourHarmonic);
        for stats in [Statistics::Bose, Statistics::Fermi] {
            let s = NormalizedState::new(&m, &REG, &QuantumNumbers::four(0, 0, 0, 1).with_statistics(stats)).unwrap();
            let at = |phi: f64| {
                let hp = HyperPoint::Four { r: 1.2, alpha: 1.1, theta: 0.7, phi };
                let x = from_internal(&crate::coords::from_hyper(&hp).unwrap());
                eval_psi(&s, &x).unwrap()
            };
            let d = 1e-3;
            let (left, right) = (at(FRAC_PI_3 - d), at(FRAC_PI_3 + d));
            assert!((left.abs() - right.abs()).abs() < 1e-12 * left.abs());
            assert_eq!(left.signum() == right.signum(), stats == Statistics::Bose);
        }
    }

    #[test]
    fn regular_factors_vanish_at_walls() {
        let m = generic(ModelKind::FiveHarmonic);
        let s = NormalizedState::new(&m, &REG, &QuantumNumbers::five(0, 1, 1, 1, 1)).unwrap();
        for f in &s.factors {
            let FactorShape::Trig { sin_power, cos_power, freq, interval, .. } = f.shape else { continue };
            let (lo, hi) = interval;
            let lo_power = if (freq * lo).sin().abs() < 1e-12 { sin_power } else { cos_power };
            let x1 = eval_factor(f, lo + 1e-6).unwrap().abs();
            let x2 = eval_factor(f, lo + 2e-6).unwrap().abs();
            assert!(x1 < 1e-5);
            assert!(((x2 / x1).log2() - lo_power).abs() < 1e-3, "{:?} {}", f.role, (x2 / x1).log2());
            let y = eval_factor(f, hi - 1e-6).unwrap().abs();
            assert!(y < 1e-5);
        }
    }

    #[test]
    fn six_body_norm_routes_agree() {
        let m = generic(ModelKind::SixHarmonic);
        let s = NormalizedState::new(&m, &REG, &QuantumNumbers::ground()).unwrap();
        let c = s.closed_form_norm();
        assert!((s.norm_constant - c).abs() < 1e-10 * c);
    }

    fn kinds() -> impl Strategy<Value = ModelKind> {
        prop_oneof![
            Just(ModelKind::FourHarmonic),
            Just(ModelKind::FourCoulomb),
            Just(ModelKind::FiveHarmonic),
            Just(ModelKind::SixHarmonic)
        ]
    }

    proptest! {
        #[test]
        fn psi_is_product_of_factors(kind in kinds(), seed in 0u64..1000, k in 0u32..2, l in 0u32..2, n in 0u32..2) {
            let m = generic(kind);
            let qn = QuantumNumbers::four(k, l, 1, n);
            let s = NormalizedState::new(&m, &REG, &qn).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..kind.particles()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let cfg = Configuration::new(x).unwrap();
            let internal = to_internal(&cfg).unwrap();
            let hyper = to_hyper(&internal).unwrap();
            let psi = match eval_psi(&s, &cfg) { Ok(v) => v, Err(_) => return Ok(()) };
            prop_assume!(psi != 0.0);
            // rebuild from eval_factor on the principal-interval images
            // fold φ into the principal sector; C_n(cos 3φ) picks up (-1)^{n·sector}
            let fold = |phi: f64, degree: u32| {
                let sector = (phi / FRAC_PI_3).floor() as u32;
                (phi - sector as f64 * FRAC_PI_3, if (sector * degree) % 2 == 1 { -1.0 } else { 1.0 })
            };
            let ef = |role, x: f64| eval_factor(&spec_of(&s, role), x).unwrap();
            // the θ (and five-body β) factor is even about π/2
            let half = |x: f64| if x > FRAC_PI_2 { PI - x } else { x };
            let prod = match hyper {
                HyperPoint::Four { r, alpha, theta, phi } => {
                    let (p, sign) = fold(phi, n);
                    ef(FactorRole::Radial, r) * r.powf(-1.5) * ef(FactorRole::G, alpha) / alpha.sin()
                        * ef(FactorRole::Theta, half(theta)) / theta.sin().sqrt() * ef(FactorRole::Phi, p) * sign
                }
                HyperPoint::Five { r, alpha, theta, beta, phi } => {
                    let (p, sign) = fold(phi, n);
                    ef(FactorRole::Radial, r) * r.powi(-2) * ef(FactorRole::G, alpha) / alpha.sin().powf(1.5)
                        * ef(FactorRole::Theta, half(theta)) / theta.sin() * ef(FactorRole::H, half(beta)) / beta.sin().sqrt()
                        * ef(FactorRole::Phi, p) * sign
                }
                HyperPoint::Six { r, alpha, theta, beta, phi1, phi2 } => {
                    let (p1, s1) = fold(phi1, n);
                    let (p2, s2) = fold(phi2, 0);
                    let sign = s1 * s2;
                    ef(FactorRole::Radial, r) * r.powf(-2.5) * ef(FactorRole::G, alpha) / alpha.sin().powi(2)
                        * ef(FactorRole::Theta, half(theta)) / theta.sin().powf(1.5)
                        * ef(FactorRole::H, beta) / (2.0 * beta).sin().sqrt()
                        * ef(FactorRole::Phi, p1) * ef(FactorRole::Phi2, p2) * sign
                }
            };
            let expect = prod / s.norm_constant.sqrt();
            prop_assert!((psi - expect).abs() <= 1e-12 * psi.abs().max(expect.abs()), "{psi} vs {expect}");
        }
    }
}
