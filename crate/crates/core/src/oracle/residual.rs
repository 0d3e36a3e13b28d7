//! Residuals of the closed forms in their own equations: each factor in its
//! separated ODE with analytic derivatives, and the full state under the
//! Cartesian Hamiltonian with finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use crate::coords::{to_internal, Configuration};
use crate::model::{BranchSelector, Model, ModelKind};
use crate::orthopoly::{poly_derivative, poly_eval};
use crate::spectrum::{separation_ladder, QuantumNumbers};
use crate::wavefunc::{eval_psi, factor_specs, singular_distance, FactorRole, FactorShape, FactorSpec, NormalizedState};

use super::fd::{Boundary, OdeSpec};
use super::OracleError;

/// The separated equation a factor solves, built from the raw couplings and
/// the constants of the equations above it. Angular equations live on their
/// principal interval. `k_max` sizes the radial truncation.
pub fn separated_equation(
    model: &Model,
    branch: &BranchSelector,
    qn: &QuantumNumbers,
    role: FactorRole,
    k_max: u32,
) -> Result<OdeSpec, OracleError> {
    let s = separation_ladder(model, branch, qn)?;
    let cp = &model.couplings;
    let sq = |x: f64| x * x - 0.25;
    let kind = model.kind;
    let spec = match (kind, role) {
        (_, FactorRole::Radial) => {
            let inv_sq = cp.mu + s.top * s.top - 0.25;
            if kind.is_coulomb() {
                OdeSpec::coulomb_radial(cp.eta, inv_sq, s.kappa_radial, k_max)
            } else {
                OdeSpec::harmonic_radial(cp.omega, inv_sq, s.kappa_radial, k_max)
            }
        }
        (ModelKind::FourHarmonic | ModelKind::FourCoulomb, FactorRole::G) => OdeSpec::angular((0.0, PI), 1.0, sq(s.c), 0.0),
        (_, FactorRole::G) => OdeSpec::angular((0.0, PI), 1.0, sq(s.d.unwrap_or(0.0)), 0.0),
        (ModelKind::FourHarmonic | ModelKind::FourCoulomb, FactorRole::Theta) => {
            OdeSpec::angular((0.0, FRAC_PI_2), 1.0, sq(s.b), cp.g / 12.0)
        }
        (ModelKind::FiveHarmonic, FactorRole::Theta) => OdeSpec::angular((0.0, FRAC_PI_2), 1.0, sq(s.c), cp.g / 30.0),
        (ModelKind::SixHarmonic, FactorRole::Theta) => OdeSpec::angular((0.0, FRAC_PI_2), 1.0, sq(s.c), cp.g / 6.0),
        (ModelKind::FiveHarmonic, FactorRole::H) => OdeSpec::angular((0.0, FRAC_PI_2), 1.0, sq(s.b), cp.kappa_pair / 2.0),
        (ModelKind::SixHarmonic, FactorRole::H) => {
            OdeSpec::angular((0.0, FRAC_PI_2), 1.0, sq(s.b), sq(s.b2.unwrap_or(0.0)))
        }
        (ModelKind::SixHarmonic, FactorRole::Phi) => OdeSpec::angular((0.0, FRAC_PI_3), 3.0, 4.5 * cp.lambda1, 0.0),
        (ModelKind::SixHarmonic, FactorRole::Phi2) => OdeSpec::angular((0.0, FRAC_PI_3), 3.0, 4.5 * cp.lambda2, 0.0),
        (_, FactorRole::Phi) => OdeSpec::angular((0.0, FRAC_PI_3), 3.0, 4.5 * cp.lambda, 0.0),
        (_, role) => return Err(OracleError::NoSuchFactor { role: role.name(), kind }),
    };
    let (_, factors) = factor_specs(model, branch, qn)?;
    let factor = find(&factors, role, kind)?;
    Ok(spec.with_boundary(boundary_for(&spec, factor)))
}

fn find(factors: &[FactorSpec], role: FactorRole, kind: ModelKind) -> Result<&FactorSpec, OracleError> {
    factors.iter().find(|f| f.role == role).ok_or(OracleError::NoSuchFactor { role: role.name(), kind })
}

// Dirichlet truncation converges to the larger indicial root at each end.
// When the branch picks the smaller root somewhere, the oracle switches to
// the factored form with both roots recomputed from the potential.
fn boundary_for(ode: &OdeSpec, factor: &FactorSpec) -> Boundary {
    let FactorShape::Trig { sin_power, cos_power, freq, arg_freq, .. } = factor.shape else {
        return Boundary::Dirichlet;
    };
    let has_cos = arg_freq != freq;
    let irregular = sin_power < 0.5 || (has_cos && cos_power < 0.5);
    if !irregular {
        return Boundary::Dirichlet;
    }
    let f2 = ode.freq * ode.freq;
    let root = |coef: f64, small: bool| {
        let r = (coef / f2 + 0.25).sqrt();
        if small {
            0.5 - r
        } else {
            0.5 + r
        }
    };
    Boundary::Factored {
        sin_power: root(ode.inv_sin_sq, sin_power < 0.5),
        cos_power: if has_cos { root(ode.inv_cos_sq, cos_power < 0.5) } else { 0.0 },
    }
}

/// Value and second derivative of a factor, from the polynomial's
/// derivatives and the product rule on its prefactor.
pub fn factor_with_second(spec: &FactorSpec, x: f64) -> Result<(f64, f64), OracleError> {
    let d = |order: u8, xi: f64| -> Result<f64, OracleError> {
        Ok(if order == 0 {
            poly_eval(&spec.poly, spec.degree, xi)?
        } else {
            poly_derivative(&spec.poly, spec.degree, xi, order)?
        })
    };
    // log-derivatives of the prefactor A: l1 = A'/A, l2 = A''/A
    let (a, l1, l2, xi, dxi, ddxi) = match spec.shape {
        FactorShape::Trig { freq: f, sin_power: p, cos_power: q, arg_freq: g, .. } => {
            let (s, c) = ((f * x).sin(), (f * x).cos());
            let a = s.abs().powf(p) * if q == 0.0 { 1.0 } else { c.abs().powf(q) };
            let l1 = f * (p * c / s - if q == 0.0 { 0.0 } else { q * s / c });
            let l2 = l1 * l1 - f * f * (p / (s * s) + if q == 0.0 { 0.0 } else { q / (c * c) });
            (a, l1, l2, (g * x).cos(), -g * (g * x).sin(), -g * g * (g * x).cos())
        }
        FactorShape::HarmonicRadial { kappa, omega } => {
            let e = kappa + 0.5;
            let a = x.powf(e) * (-0.5 * omega * x * x).exp();
            let l1 = e / x - omega * x;
            let l2 = l1 * l1 - e / (x * x) - omega;
            (a, l1, l2, omega * x * x, 2.0 * omega * x, 2.0 * omega)
        }
        FactorShape::CoulombRadial { kappa, eta_tilde } => {
            let e = kappa + 0.5;
            let a = x.powf(e) * (-eta_tilde * x).exp();
            let l1 = e / x - eta_tilde;
            let l2 = l1 * l1 - e / (x * x);
            (a, l1, l2, 2.0 * eta_tilde * x, 2.0 * eta_tilde, 0.0)
        }
    };
    let (p0, p1, p2) = (d(0, xi)?, d(1, xi)?, d(2, xi)?);
    let second = a * (l2 * p0 + 2.0 * l1 * p1 * dxi + p2 * dxi * dxi + p1 * ddxi);
    Ok((a * p0, second))
}

/// `max |-f'' + V f - E f| / (|E| max |f|)` over the samples, with `f` the
/// closed-form factor and `V` its separated equation's potential.
pub fn ode_residual(
    model: &Model,
    branch: &BranchSelector,
    qn: &QuantumNumbers,
    role: FactorRole,
    samples: &[f64],
) -> Result<f64, OracleError> {
    let (_, factors) = factor_specs(model, branch, qn)?;
    let factor = find(&factors, role, model.kind)?;
    let ode = separated_equation(model, branch, qn, role, qn.k)?;
    ode_residual_with(factor, &ode, factor.eigenvalue, samples)
}

/// As [`ode_residual`] with an explicit eigenvalue, for sensitivity checks.
pub fn ode_residual_with(factor: &FactorSpec, ode: &OdeSpec, eigenvalue: f64, samples: &[f64]) -> Result<f64, OracleError> {
    let (lo, hi) = factor.interval();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &x in samples {
        if !(x > lo && x < hi) {
            return Err(OracleError::Sample { x, lo, hi });
        }
        let (f, f2) = factor_with_second(factor, x)?;
        let v = ode.potential(x);
        if !v.is_finite() {
            return Err(OracleError::Sample { x, lo, hi });
        }
        worst = worst.max((-f2 + v * f - eigenvalue * f).abs());
        scale = scale.max(f.abs());
    }
    Ok(worst / (eigenvalue.abs() * scale + 1e-300))
}

/// Equally spaced interior samples of a factor's interval. Radial factors
/// use `(0, 3 r_peak)`.
pub fn interior_samples(factor: &FactorSpec, count: usize) -> Vec<f64> {
    let (lo, hi) = match factor.shape {
        FactorShape::Trig { interval, .. } => interval,
        _ => (0.0, 3.0 * radial_peak(factor)),
    };
    (0..count).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64).collect()
}

/// Radius where the radial factor's prefactor peaks, at least one length unit.
pub fn radial_peak(factor: &FactorSpec) -> f64 {
    match factor.shape {
        FactorShape::HarmonicRadial { kappa, omega } => ((kappa + 0.5 + 2.0 * factor.degree as f64) / omega).sqrt(),
        FactorShape::CoulombRadial { kappa, eta_tilde } => (kappa + 0.5 + factor.degree as f64) / eta_tilde,
        FactorShape::Trig { .. } => 1.0,
    }
}

/// The model's potential energy at a configuration, straight from the
/// Cartesian Hamiltonian.
pub fn cartesian_potential(model: &Model, x: &[f64]) -> f64 {
    let cp = &model.couplings;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let pair = |i: usize, j: usize| 1.0 / (x[i] - x[j]).powi(2);
    let triple = |o: usize| pair(o, o + 1) + pair(o, o + 2) + pair(o + 1, o + 2);
    let confinement = if model.kind.is_coulomb() { -cp.eta / r2.sqrt() } else { cp.omega * cp.omega * r2 };
    let clusters = match model.kind {
        ModelKind::FourHarmonic | ModelKind::FourCoulomb => {
            cp.lambda * triple(0) + cp.g / (x[0] + x[1] + x[2] - 3.0 * x[3]).powi(2)
        }
        ModelKind::FiveHarmonic => {
            cp.lambda * triple(0)
                + cp.kappa_pair * pair(3, 4)
                + cp.g / (2.0 * (x[0] + x[1] + x[2]) - 3.0 * (x[3] + x[4])).powi(2)
        }
        ModelKind::SixHarmonic => {
            cp.lambda1 * triple(0) + cp.lambda2 * triple(3) + cp.g / (x[0] + x[1] + x[2] - x[3] - x[4] - x[5]).powi(2)
        }
    };
    confinement + clusters + cp.mu / r2
}

/// Finite-difference steps, in units of the state's length scale.
pub const HAMILTONIAN_STEPS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];
/// Smallest allowed distance to a singular manifold, in the same units.
pub const CONFIG_MARGIN: f64 = 1e-3;

/// `1/√ω`, or `1/η̃` for Coulomb states.
pub fn length_scale(state: &NormalizedState) -> f64 {
    match state.factors[0].shape {
        FactorShape::CoulombRadial { eta_tilde, .. } => 1.0 / eta_tilde,
        _ => 1.0 / state.model.couplings.omega.sqrt(),
    }
}

/// `max |HΨ - EΨ| / max |EΨ|` over the configurations.
pub fn full_hamiltonian_residual(state: &NormalizedState, configs: &[Configuration]) -> Result<f64, OracleError> {
    full_hamiltonian_residual_with(state, configs, state.energy)
}

/// As [`full_hamiltonian_residual`] against an explicit energy.
pub fn full_hamiltonian_residual_with(
    state: &NormalizedState,
    configs: &[Configuration],
    energy: f64,
) -> Result<f64, OracleError> {
    let scale = length_scale(state);
    let mut worst: f64 = 0.0;
    let mut size: f64 = 0.0;
    for cfg in configs {
        let internal = to_internal(cfg)?;
        let (dist, manifold) = singular_distance(state.model.kind, &cfg.x, &internal);
        if dist < CONFIG_MARGIN * scale {
            return Err(OracleError::TooClose { manifold, distance: dist });
        }
        let psi = eval_psi(state, cfg)?;
        let laplacian = laplacian(state, cfg, psi, scale)?;
        let h_psi = -laplacian + cartesian_potential(&state.model, &cfg.x) * psi;
        worst = worst.max((h_psi - energy * psi).abs());
        size = size.max((energy * psi).abs());
    }
    Ok(worst / (size + 1e-300))
}

// Σ ∂²Ψ/∂x_i² by the 5-point stencil at three steps, Richardson-combined
// twice (h⁴ then h⁶ error terms).
fn laplacian(state: &NormalizedState, cfg: &Configuration, psi: f64, scale: f64) -> Result<f64, OracleError> {
    let mut d = [0.0; 3];
    for (slot, step) in d.iter_mut().zip(HAMILTONIAN_STEPS) {
        let h = step * scale;
        let mut sum = 0.0;
        for i in 0..cfg.len() {
            let at = |offset: f64| -> Result<f64, OracleError> {
                let mut x = cfg.x.clone();
                x[i] += offset;
                Ok(eval_psi(state, &Configuration::new(x)?)?)
            };
            let (m2, m1, p1, p2) = (at(-2.0 * h)?, at(-h)?, at(h)?, at(2.0 * h)?);
            sum += (-m2 + 16.0 * m1 - 30.0 * psi + 16.0 * p1 - p2) / (12.0 * h * h);
        }
        *slot = sum;
    }
    let r1 = (16.0 * d[1] - d[0]) / 15.0;
    let r2 = (16.0 * d[2] - d[1]) / 15.0;
    Ok((64.0 * r2 - r1) / 63.0)
}

/// Seeded configurations at radii in `[0.5, 1.5]` times the radial peak,
/// uniformly distributed in direction, at least `0.05 r` from every
/// singular manifold.
pub fn sample_configs(state: &NormalizedState, count: usize, seed: u64) -> Vec<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = state.model.kind.particles();
    let peak = radial_peak(&state.factors[0]);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(0.1..=1.0).contains(&norm) {
            continue;
        }
        let r = peak * rng.gen_range(0.5..1.5);
        let x: Vec<f64> = dir.iter().map(|v| v / norm * r).collect();
        let cfg = Configuration::new(x).expect("finite coordinates");
        let internal = to_internal(&cfg).expect("dimension matches the model");
        if singular_distance(state.model.kind, &cfg.x, &internal).0 >= 0.05 * r {
            out.push(cfg);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, Couplings};
    use crate::oracle::fd::fd_extrapolated;
    use proptest::prelude::*;

    const REG: BranchSelector = BranchSelector::REGULAR;

    fn generic(kind: ModelKind) -> Model {
        let cp = Couplings {
            lambda: 1.0,
            lambda1: 1.0,
            lambda2: 0.6,
            kappa_pair: 0.8,
            g: 2.0,
            mu: 0.5,
            ..Default::default()
        };
        build_model(kind, cp).unwrap()
    }

    fn roles(kind: ModelKind) -> Vec<FactorRole> {
        let (_, f) = factor_specs(&generic(kind), &REG, &QuantumNumbers::ground()).unwrap();
        f.iter().map(|f| f.role).collect()
    }

    #[test]
    fn every_factor_solves_its_equation() {
        for kind in ModelKind::ALL {
            for qn in [QuantumNumbers::ground(), QuantumNumbers::six(1, 2, 1, 1, 2, 1)] {
                let qn = if kind == ModelKind::SixHarmonic { qn } else { QuantumNumbers { n2: 0, ..qn } };
                let qn = if matches!(kind, ModelKind::FourHarmonic | ModelKind::FourCoulomb) { QuantumNumbers { j: 0, ..qn } } else { qn };
                let m = generic(kind);
                let (_, factors) = factor_specs(&m, &REG, &qn).unwrap();
                for f in &factors {
                    let r = ode_residual(&m, &REG, &qn, f.role, &interior_samples(f, 50)).unwrap();
                    assert!(r < 1e-9, "{kind} {:?} {r}", f.role);
                }
            }
        }
    }

    #[test]
    fn perturbed_eigenvalue_is_detected() {
        let m = generic(ModelKind::FourHarmonic);
        let qn = QuantumNumbers::four(0, 1, 1, 1);
        for role in roles(ModelKind::FourHarmonic) {
            let (_, factors) = factor_specs(&m, &REG, &qn).unwrap();
            let f = factors.iter().find(|f| f.role == role).unwrap();
            let ode = separated_equation(&m, &REG, &qn, role, qn.k).unwrap();
            let r = ode_residual_with(f, &ode, f.eigenvalue * (1.0 + 1e-3), &interior_samples(f, 50)).unwrap();
            assert!(r > 1e-4, "{role:?} {r}");
        }
    }

    #[test]
    fn irregular_factors_solve_their_equations() {
        let m = build_model(ModelKind::FourHarmonic, Couplings { lambda: -0.25, ..Default::default() }).unwrap();
        let irr: BranchSelector = "-a".parse().unwrap();
        for qn in [QuantumNumbers::ground(), QuantumNumbers::four(1, 1, 1, 2)] {
            let (_, factors) = factor_specs(&m, &irr, &qn).unwrap();
            for f in &factors {
                let r = ode_residual(&m, &irr, &qn, f.role, &interior_samples(f, 50)).unwrap();
                assert!(r < 1e-9, "{:?} {r}", f.role);
            }
        }
    }

    #[test]
    fn samples_on_the_boundary_are_rejected() {
        let m = generic(ModelKind::FourHarmonic);
        let r = ode_residual(&m, &REG, &QuantumNumbers::ground(), FactorRole::Phi, &[0.0]);
        assert!(matches!(r, Err(OracleError::Sample { .. })));
    }

    #[test]
    fn oracle_picks_the_irregular_family() {
        let m = build_model(ModelKind::FourHarmonic, Couplings { lambda: 0.5, ..Default::default() }).unwrap();
        let irr: BranchSelector = "-a".parse().unwrap();
        let qn = QuantumNumbers::ground();
        let ode = separated_equation(&m, &irr, &qn, FactorRole::Phi, 0).unwrap();
        assert!(matches!(ode.boundary, Boundary::Factored { .. }));
        let ex = fd_extrapolated(&ode, 400, 3).unwrap();
        for n in 0..3u32 {
            let (_, f) = factor_specs(&m, &irr, &QuantumNumbers::four(0, 0, 0, n)).unwrap();
            let want = f.iter().find(|f| f.role == FactorRole::Phi).unwrap().eigenvalue;
            assert!((ex.values[n as usize] - want).abs() < 2e-3 * want, "{n}: {} vs {want}", ex.values[n as usize]);
        }
    }

    #[test]
    fn hamiltonian_residual_ground_and_wrong_energy() {
        for kind in ModelKind::ALL {
            let m = generic(kind);
            let s = NormalizedState::new(&m, &REG, &QuantumNumbers::ground()).unwrap();
            let cfgs = sample_configs(&s, 20, 7);
            let r = full_hamiltonian_residual(&s, &cfgs).unwrap();
            assert!(r < 1e-6, "{kind} {r}");
            let wrong = full_hamiltonian_residual_with(&s, &cfgs, s.energy + 0.01 * s.energy.abs().max(1.0)).unwrap();
            assert!(wrong > 1e-3, "{kind} {wrong}");
        }
    }

    #[test]
    fn configs_near_a_manifold_are_rejected() {
        let m = generic(ModelKind::FourHarmonic);
        let s = NormalizedState::new(&m, &REG, &QuantumNumbers::ground()).unwrap();
        let cfg = Configuration::new(vec![0.5, 0.5 + 1e-5, -1.0, 0.3]).unwrap();
        assert!(matches!(full_hamiltonian_residual(&s, &[cfg]), Err(OracleError::TooClose { .. })));
    }

    #[test]
    fn potential_at_a_known_point() {
        // x = (1,2,3,4): triple 1 + 1/4 + 1 = 9/4; (1+2+3-12)² = 36; Σx² = 30
        let m = build_model(ModelKind::FourHarmonic, Couplings { lambda: 1.0, g: 2.0, mu: 0.5, ..Default::default() }).unwrap();
        let v = cartesian_potential(&m, &[1.0, 2.0, 3.0, 4.0]);
        let want = 30.0 + 2.25 + 2.0 / 36.0 + 0.5 / 30.0;
        assert!((v - want).abs() < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn residual_small_for_random_couplings(
            lambda in -0.45f64..3.0, g in -2.5f64..6.0, mu in -1.0f64..2.0,
            k in 0u32..3, l in 0u32..3, m_idx in 0u32..3, n in 0u32..3,
        ) {
            let cp = Couplings { lambda, g, mu, ..Default::default() };
            let m = build_model(ModelKind::FourHarmonic, cp).unwrap();
            let qn = QuantumNumbers::four(k, l, m_idx, n);
            let (_, factors) = factor_specs(&m, &REG, &qn).unwrap();
            for f in &factors {
                let r = ode_residual(&m, &REG, &qn, f.role, &interior_samples(f, 40)).unwrap();
                prop_assert!(r < 1e-9, "{:?} {}", f.role, r);
            }
        }
    }
}
