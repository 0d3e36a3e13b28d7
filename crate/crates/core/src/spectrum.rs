//! Separation-constant ladders, closed-form energies and level enumeration.
//!
//! Every reduced angular equation has the form
//! `-X'' + (q²-1/4)/sin² + (p²-1/4)/cos²` and its square-rooted eigenvalue
//! becomes the `q` of the next equation in the chain. The top of the chain
//! enters the radial equation through `κ = √(μ + top²)`.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::model::{BranchSelector, Model, ModelError, ModelKind, Sign, Statistics};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("ladder constraint violated: {constraint} (got {value})")]
    Ladder { constraint: &'static str, value: f64 },
    #[error("quantum number {name} is not used by the {kind} model and must be 0")]
    UnusedIndex { name: &'static str, kind: ModelKind },
    #[error("the {kind} model has no {name} sector")]
    UnusedSector { name: &'static str, kind: ModelKind },
}

/// Quantum numbers shared by all models; unused indices stay 0.
///
/// Index roles: four-body `(k, ℓ, m, n)` with `m` on θ and `n` on φ;
/// five-body `(k, ℓ, j, m, n)` with `j` on θ and `m` on β; six-body
/// `(k, ℓ, j, m, n₁, n₂)` with `j` on θ, `m` on β and `n₂` stored in `n2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantumNumbers {
    pub k: u32,
    pub l: u32,
    pub j: u32,
    pub m: u32,
    pub n: u32,
    pub n2: u32,
    /// Sign of `w`: which half of the θ interval the state lives on.
    pub w_sector: Sign,
    /// Sign of `z` (five-body β half-interval).
    pub z_sector: Sign,
    pub statistics: Statistics,
}

impl QuantumNumbers {
    pub fn four(k: u32, l: u32, m: u32, n: u32) -> Self {
        Self { k, l, j: 0, m, n, n2: 0, w_sector: Sign::Plus, z_sector: Sign::Plus, statistics: Statistics::Bose }
    }

    pub fn five(k: u32, l: u32, j: u32, m: u32, n: u32) -> Self {
        Self { j, ..Self::four(k, l, m, n) }
    }

    pub fn six(k: u32, l: u32, j: u32, m: u32, n1: u32, n2: u32) -> Self {
        Self { j, n2, ..Self::four(k, l, m, n1) }
    }

    pub fn ground() -> Self {
        Self::four(0, 0, 0, 0)
    }

    pub fn with_statistics(self, statistics: Statistics) -> Self {
        Self { statistics, ..self }
    }

    pub fn with_sectors(self, w_sector: Sign, z_sector: Sign) -> Self {
        Self { w_sector, z_sector, ..self }
    }

    /// Index values in display order for `kind`.
    pub fn indices(&self, kind: ModelKind) -> Vec<(&'static str, u32)> {
        match kind {
            ModelKind::FourHarmonic | ModelKind::FourCoulomb => {
                vec![("k", self.k), ("l", self.l), ("m", self.m), ("n", self.n)]
            }
            ModelKind::FiveHarmonic => vec![("k", self.k), ("l", self.l), ("j", self.j), ("m", self.m), ("n", self.n)],
            ModelKind::SixHarmonic => {
                vec![("k", self.k), ("l", self.l), ("j", self.j), ("m", self.m), ("n1", self.n), ("n2", self.n2)]
            }
        }
    }

    pub fn validate(&self, kind: ModelKind) -> Result<(), SpectrumError> {
        let four = matches!(kind, ModelKind::FourHarmonic | ModelKind::FourCoulomb);
        if four && self.j != 0 {
            return Err(SpectrumError::UnusedIndex { name: "j", kind });
        }
        if kind != ModelKind::SixHarmonic && self.n2 != 0 {
            return Err(SpectrumError::UnusedIndex { name: "n2", kind });
        }
        if kind != ModelKind::FiveHarmonic && self.z_sector == Sign::Minus {
            return Err(SpectrumError::UnusedSector { name: "z", kind });
        }
        Ok(())
    }

    /// The degeneracy composite `ℓ+2m+3n`, `ℓ+2j+2m+3n` or `ℓ+2j+2m+3n₁+3n₂`.
    pub fn composite(&self, kind: ModelKind) -> u32 {
        match kind {
            ModelKind::FourHarmonic | ModelKind::FourCoulomb => self.l + 2 * self.m + 3 * self.n,
            ModelKind::FiveHarmonic => self.l + 2 * self.j + 2 * self.m + 3 * self.n,
            ModelKind::SixHarmonic => self.l + 2 * self.j + 2 * self.m + 3 * self.n + 3 * self.n2,
        }
    }

    pub fn label(&self, kind: ModelKind) -> String {
        self.indices(kind).iter().map(|(name, v)| format!("{name}={v}")).collect::<Vec<_>>().join(",")
    }

    fn sort_key(&self) -> [u32; 6] {
        [self.k, self.l, self.j, self.m, self.n, self.n2]
    }
}

impl fmt::Display for QuantumNumbers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{},{},{})", self.k, self.l, self.j, self.m, self.n, self.n2)
    }
}

/// The chained separation constants of one state.
///
/// `b` is the φ (first cluster) constant, `b2` the second cluster's
/// (six-body). `c` is the constant of the equation just above φ (θ for four
/// bodies, β otherwise) and `d` the θ constant of the five- and six-body
/// chains. Each reduced eigenvalue is the square of its constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationConstants {
    pub b: f64,
    pub b2: Option<f64>,
    pub c: f64,
    pub d: Option<f64>,
    pub top: f64,
    pub kappa_radial: f64,
}

fn ensure(ok: bool, constraint: &'static str, value: f64) -> Result<(), SpectrumError> {
    if ok {
        Ok(())
    } else {
        Err(SpectrumError::Ladder { constraint, value })
    }
}

/// `3(n + 1/2 ± a)` with the checks that keep the φ Gegenbauer order valid
/// and the next (Jacobi) exponent above -1.
fn cluster_constant(n: u32, a: f64, sign: Sign, name_b: &'static str) -> Result<f64, SpectrumError> {
    let order = 0.5 + sign.value() * a;
    ensure(order > -0.5, "1/2 - a > -1/2", order)?;
    ensure(order != 0.0, "1/2 - a != 0", order)?;
    let b = 3.0 * (n as f64 + order);
    ensure(b > -1.0 && b != 0.0, name_b, b)?;
    Ok(b)
}

fn signed_exponent(x: f64, sign: Sign, name: &'static str) -> Result<f64, SpectrumError> {
    let s = sign.value() * x;
    ensure(s > -1.0, name, s)?;
    Ok(s)
}

pub fn separation_ladder(
    model: &Model,
    branch: &BranchSelector,
    qn: &QuantumNumbers,
) -> Result<SeparationConstants, SpectrumError> {
    branch.check_for(model.kind)?;
    qn.validate(model.kind)?;
    let e = &model.exponents;
    let (b, b2, c, d, inner) = match model.kind {
        ModelKind::FourHarmonic | ModelKind::FourCoulomb => {
            let b = cluster_constant(qn.n, e.a, branch.sign_a, "b_n > -1, b_n != 0")?;
            let cs = signed_exponent(e.c.unwrap_or(0.0), branch.sign_c, "-c > -1")?;
            let cmn = 2.0 * qn.m as f64 + b + cs + 1.0;
            ensure(cmn > 0.0, "c_mn > 0", cmn)?;
            (b, None, cmn, None, cmn)
        }
        ModelKind::FiveHarmonic => {
            let b = cluster_constant(qn.n, e.a, branch.sign_a, "b_n > -1, b_n != 0")?;
            let cs = signed_exponent(e.c.unwrap_or(0.0), branch.sign_c, "-c > -1")?;
            let cmn = 2.0 * qn.m as f64 + b + cs + 1.0;
            ensure(cmn > 0.0, "c_mn > 0", cmn)?;
            let ds = signed_exponent(e.d.unwrap_or(0.0), branch.sign_d, "-d > -1")?;
            let d = 2.0 * qn.j as f64 + cmn + ds + 1.0;
            ensure(d > 0.0, "d_jmn > 0", d)?;
            (b, None, cmn, Some(d), d)
        }
        ModelKind::SixHarmonic => {
            let b1 = cluster_constant(qn.n, e.a, branch.sign_a, "b_n1 > -1, b_n1 != 0")?;
            let b2 = cluster_constant(qn.n2, e.a2.unwrap_or(0.0), branch.sign_a2, "b_n2 > -1, b_n2 != 0")?;
            let c = 2.0 * qn.m as f64 + b1 + b2 + 1.0;
            ensure(c > 0.0, "c_mn > 0", c)?;
            let ds = signed_exponent(e.d.unwrap_or(0.0), branch.sign_d, "-d > -1")?;
            let d = 2.0 * qn.j as f64 + c + ds + 1.0;
            ensure(d > 0.0, "d_jmn > 0", d)?;
            (b1, Some(b2), c, Some(d), d)
        }
    };
    let top = qn.l as f64 + inner + 0.5;
    let kappa_sq = model.couplings.mu + top * top;
    ensure(kappa_sq > 0.0, "mu + top^2 > 0", kappa_sq)?;
    Ok(SeparationConstants { b, b2, c, d, top, kappa_radial: kappa_sq.sqrt() })
}

/// Harmonic: `2ω(2k + 1 + κ)`. Coulomb: `-η²/(2k + 2κ + 1)²`.
pub fn energy(model: &Model, branch: &BranchSelector, qn: &QuantumNumbers) -> Result<f64, SpectrumError> {
    let s = separation_ladder(model, branch, qn)?;
    Ok(energy_from_kappa(model, qn.k, s.kappa_radial))
}

pub fn energy_from_kappa(model: &Model, k: u32, kappa: f64) -> f64 {
    let k = k as f64;
    if model.kind.is_coulomb() {
        let denom = 2.0 * k + 2.0 * kappa + 1.0;
        -model.couplings.eta.powi(2) / (denom * denom)
    } else {
        2.0 * model.couplings.omega * (2.0 * k + 1.0 + kappa)
    }
}

/// The alternative Coulomb expression `-4η²/(2k + κ + 1)²`, kept only so
/// reports can show both values side by side.
pub fn printed_coulomb_energy(eta: f64, k: u32, kappa: f64) -> f64 {
    let denom = 2.0 * k as f64 + kappa + 1.0;
    -4.0 * eta * eta / (denom * denom)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLevel {
    pub energy: f64,
    pub degeneracy: usize,
    pub members: Vec<QuantumNumbers>,
    /// The shared composite, when all members have the same one.
    pub composite: Option<u32>,
}

/// Relative tolerance for treating two energies as one level.
pub const LEVEL_TOL: f64 = 1e-10;

/// Per-index cap used when the energy bound alone does not terminate the
/// enumeration (Coulomb levels accumulate at 0).
pub const COULOMB_INDEX_CAP: u32 = 10;

const HARD_INDEX_CAP: u32 = 400;

fn same_level(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= LEVEL_TOL * a.abs().max(b.abs())
}

/// All levels with `E ≤ max_energy`, ascending, members in index order.
/// Members use the `+` sectors and Bose statistics.
pub fn enumerate_levels(model: &Model, branch: &BranchSelector, max_energy: f64) -> Vec<EnergyLevel> {
    let cap = if model.kind.is_coulomb() && max_energy >= 0.0 { COULOMB_INDEX_CAP } else { HARD_INDEX_CAP };
    enumerate_levels_capped(model, branch, max_energy, cap)
}

/// As [`enumerate_levels`], with every index limited to `0..=cap`.
pub fn enumerate_levels_capped(model: &Model, branch: &BranchSelector, max_energy: f64, cap: u32) -> Vec<EnergyLevel> {
    let kind = model.kind;
    let mut states: Vec<(f64, QuantumNumbers)> = Vec::new();
    let e_of = |qn: &QuantumNumbers| energy(model, branch, qn).ok();
    let used_j = matches!(kind, ModelKind::FiveHarmonic | ModelKind::SixHarmonic);
    let used_n2 = kind == ModelKind::SixHarmonic;

    // Energy increases in every index, so each loop stops at the first
    // index whose all-zero completion exceeds the bound. A prefix whose
    // ladder fails is skipped without descending.
    let probe_ok = |qn: &QuantumNumbers| e_of(qn).map(|e| e <= max_energy);
    'n2: for n2 in 0..=if used_n2 { cap } else { 0 } {
        let p2 = QuantumNumbers { n2, ..QuantumNumbers::ground() };
        match probe_ok(&p2) {
            Some(false) => break 'n2,
            None if n2 > 0 => continue,
            _ => {}
        }
        for n in 0..=cap {
            let pn = QuantumNumbers { n, ..p2 };
            match probe_ok(&pn) {
                Some(false) => break,
                None => continue,
                Some(true) => {}
            }
            for m in 0..=cap {
                let pm = QuantumNumbers { m, ..pn };
                match probe_ok(&pm) {
                    Some(false) => break,
                    None => continue,
                    Some(true) => {}
                }
                for j in 0..=if used_j { cap } else { 0 } {
                    let pj = QuantumNumbers { j, ..pm };
                    match probe_ok(&pj) {
                        Some(false) => break,
                        None => continue,
                        Some(true) => {}
                    }
                    for l in 0..=cap {
                        for k in 0..=cap {
                            let qn = QuantumNumbers { k, l, ..pj };
                            match e_of(&qn) {
                                Some(e) if e <= max_energy => states.push((e, qn)),
                                _ => break,
                            }
                        }
                        let pl = QuantumNumbers { l: l + 1, ..pj };
                        if probe_ok(&pl) != Some(true) {
                            break;
                        }
                    }
                }
            }
        }
    }
    group_levels(kind, states)
}

fn group_levels(kind: ModelKind, mut states: Vec<(f64, QuantumNumbers)>) -> Vec<EnergyLevel> {
    states.sort_by(|(ea, qa), (eb, qb)| match ea.total_cmp(eb) {
        Ordering::Equal => qa.sort_key().cmp(&qb.sort_key()),
        o => o,
    });
    let mut levels: Vec<EnergyLevel> = Vec::new();
    for (e, qn) in states {
        match levels.last_mut() {
            Some(level) if same_level(level.energy, e) => level.members.push(qn),
            _ => levels.push(EnergyLevel { energy: e, degeneracy: 0, members: vec![qn], composite: None }),
        }
    }
    for level in &mut levels {
        level.members.sort_by_key(|q| q.sort_key());
        level.degeneracy = level.members.len();
        let first = level.members[0].composite(kind);
        level.composite = level.members.iter().all(|q| q.composite(kind) == first).then_some(first);
    }
    levels
}

/// Number of index tuples (k and sectors excluded) with the given composite.
pub fn composite_count(kind: ModelKind, composite: u32) -> u64 {
    // coin-change count over the composite's weights; ℓ absorbs the rest
    let weights: &[u32] = match kind {
        ModelKind::FourHarmonic | ModelKind::FourCoulomb => &[2, 3],
        ModelKind::FiveHarmonic => &[2, 2, 3],
        ModelKind::SixHarmonic => &[2, 2, 3, 3],
    };
    let n = composite as usize;
    let mut ways = vec![1u64; n + 1];
    for &w in weights {
        let w = w as usize;
        for total in w..=n {
            ways[total] += ways[total - w];
        }
    }
    ways[n]
}
