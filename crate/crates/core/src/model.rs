//! Model Hamiltonians, coupling validation and the singular exponents.
//!
//! Four model kinds share one coupling record. Each kind reads only the
//! couplings it uses:
//!
//! | kind           | confinement | clusters                           |
//! |----------------|-------------|------------------------------------|
//! | `FourHarmonic` | `ω² Σx²`    | Calogero triple (λ) + 4th particle (g)  |
//! | `FourCoulomb`  | `-η/|x|`    | same as above                      |
//! | `FiveHarmonic` | `ω² Σx²`    | triple (λ), pair (κ), inter-cluster (g) |
//! | `SixHarmonic`  | `ω² Σx²`    | two triples (λ₁, λ₂), inter-cluster (g) |
//!
//! Every kind also carries the non-translational `μ/Σx²` term.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    FourHarmonic,
    FourCoulomb,
    FiveHarmonic,
    SixHarmonic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [Self::FourHarmonic, Self::FourCoulomb, Self::FiveHarmonic, Self::SixHarmonic];

    pub fn particles(self) -> usize {
        match self {
            Self::FourHarmonic | Self::FourCoulomb => 4,
            Self::FiveHarmonic => 5,
            Self::SixHarmonic => 6,
        }
    }

    pub fn is_coulomb(self) -> bool {
        self == Self::FourCoulomb
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FourHarmonic => "four-harmonic",
            Self::FourCoulomb => "four-coulomb",
            Self::FiveHarmonic => "five-harmonic",
            Self::SixHarmonic => "six-harmonic",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| ModelError::UnknownModel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Statistics {
    #[default]
    Bose,
    Fermi,
}

impl Statistics {
    /// `+1` for bosons, `-1` for fermions.
    pub fn sign(self) -> f64 {
        match self {
            Self::Bose => 1.0,
            Self::Fermi => -1.0,
        }
    }
}

impl FromStr for Statistics {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bose" | "boson" | "bosons" => Ok(Self::Bose),
            "fermi" | "fermion" | "fermions" => Ok(Self::Fermi),
            other => Err(ModelError::UnknownStatistics(other.to_string())),
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bose => "bose",
            Self::Fermi => "fermi",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("coupling constraint violated: {constraint} (got {value})")]
    Constraint { constraint: &'static str, value: f64 },
    #[error("coupling {name} is not finite")]
    NotFinite { name: &'static str },
    #[error("unknown model '{0}' (expected four-harmonic, four-coulomb, five-harmonic or six-harmonic)")]
    UnknownModel(String),
    #[error("unknown statistics '{0}' (expected bose or fermi)")]
    UnknownStatistics(String),
    #[error("cannot parse branch '{0}': expected entries like -a,+c (symbols a, a1, a2, c, d)")]
    BadBranch(String),
    #[error("branch flips exponent '{symbol}', which the {kind} model does not have")]
    BranchSymbol { symbol: &'static str, kind: ModelKind },
}

/// Raw couplings as entered. Fields a kind does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub omega: f64,
    pub eta: f64,
    pub lambda: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub kappa_pair: f64,
    pub g: f64,
    pub mu: f64,
}

impl Default for Couplings {
    fn default() -> Self {
        Self { omega: 1.0, eta: 1.0, lambda: 0.0, lambda1: 0.0, lambda2: 0.0, kappa_pair: 0.0, g: 0.0, mu: 0.0 }
    }
}

/// The exponents of the inverse-square singularities.
///
/// `a` is the φ exponent of the first (or only) three-body cluster, `a2` the
/// second cluster's (six-body only). `c` belongs to the g term in the
/// four-body model and to the pair term in the five-body model; `d` to the
/// inter-cluster g term of the five- and six-body models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedExponents {
    pub a: f64,
    pub a2: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    /// g/12, four-body only.
    pub beta_aux: Option<f64>,
}

/// `½√(1 + 2λ)`, the exponent for a Calogero cluster of coupling λ.
pub fn cluster_exponent(lambda: f64) -> f64 {
    0.5 * (1.0 + 2.0 * lambda).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }

    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Self::Minus
        } else {
            Self::Plus
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Self::Plus => '+',
            Self::Minus => '-',
        }
    }
}

/// Regular (`+`) or irregular (`-`) choice per singular exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BranchSelector {
    pub sign_a: Sign,
    pub sign_a2: Sign,
    pub sign_c: Sign,
    pub sign_d: Sign,
}

impl BranchSelector {
    pub const REGULAR: Self = Self { sign_a: Sign::Plus, sign_a2: Sign::Plus, sign_c: Sign::Plus, sign_d: Sign::Plus };

    pub fn is_regular(&self) -> bool {
        *self == Self::REGULAR
    }

    /// Rejects flips of exponents the model does not have.
    pub fn check_for(&self, kind: ModelKind) -> Result<(), ModelError> {
        let has_c = matches!(kind, ModelKind::FourHarmonic | ModelKind::FourCoulomb | ModelKind::FiveHarmonic);
        let has_d = matches!(kind, ModelKind::FiveHarmonic | ModelKind::SixHarmonic);
        let has_a2 = kind == ModelKind::SixHarmonic;
        if self.sign_c == Sign::Minus && !has_c {
            return Err(ModelError::BranchSymbol { symbol: "c", kind });
        }
        if self.sign_d == Sign::Minus && !has_d {
            return Err(ModelError::BranchSymbol { symbol: "d", kind });
        }
        if self.sign_a2 == Sign::Minus && !has_a2 {
            return Err(ModelError::BranchSymbol { symbol: "a2", kind });
        }
        Ok(())
    }
}

impl fmt::Display for BranchSelector {
    /// Lists only the flipped exponents, e.g. `-a,-c`; the regular branch
    /// prints as `regular`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (sign, name) in [(self.sign_a, "a"), (self.sign_a2, "a2"), (self.sign_c, "c"), (self.sign_d, "d")] {
            if sign == Sign::Minus {
                parts.push(format!("-{name}"));
            }
        }
        if parts.is_empty() {
            f.write_str("regular")
        } else {
            f.write_str(&parts.join(","))
        }
    }
}

impl FromStr for BranchSelector {
    type Err = ModelError;

    /// Accepts `regular` or a comma list such as `-a,+c` or `-a1,-d`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut branch = Self::REGULAR;
        let s = s.trim();
        if s.is_empty() || s == "regular" {
            return Ok(branch);
        }
        for item in s.split(',') {
            let item = item.trim();
            let (sign, symbol) = match item.chars().next() {
                Some('+') => (Sign::Plus, &item[1..]),
                Some('-') => (Sign::Minus, &item[1..]),
                _ => return Err(ModelError::BadBranch(s.to_string())),
            };
            match symbol {
                "a" | "a1" => branch.sign_a = sign,
                "a2" => branch.sign_a2 = sign,
                "c" => branch.sign_c = sign,
                "d" => branch.sign_d = sign,
                _ => return Err(ModelError::BadBranch(s.to_string())),
            }
        }
        Ok(branch)
    }
}

/// A validated model: kind, couplings and derived exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub kind: ModelKind,
    pub couplings: Couplings,
    pub exponents: DerivedExponents,
}

fn require(ok: bool, constraint: &'static str, value: f64) -> Result<(), ModelError> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::Constraint { constraint, value })
    }
}

/// Validate `couplings` for `kind` and derive the exponents.
///
/// Boundary points of every strict inequality are rejected. The μ check here
/// uses the regular branch; irregular branches tighten it (see
/// [`crate::admissibility`]).
pub fn build_model(kind: ModelKind, couplings: Couplings) -> Result<Model, ModelError> {
    let cp = couplings;
    for (name, v) in [
        ("omega", cp.omega),
        ("eta", cp.eta),
        ("lambda", cp.lambda),
        ("lambda1", cp.lambda1),
        ("lambda2", cp.lambda2),
        ("kappa", cp.kappa_pair),
        ("g", cp.g),
        ("mu", cp.mu),
    ] {
        if !v.is_finite() {
            return Err(ModelError::NotFinite { name });
        }
    }

    let exponents = match kind {
        ModelKind::FourHarmonic | ModelKind::FourCoulomb => {
            if kind.is_coulomb() {
                require(cp.eta > 0.0, "eta > 0", cp.eta)?;
            } else {
                require(cp.omega > 0.0, "omega > 0", cp.omega)?;
            }
            require(cp.lambda > -0.5, "lambda > -1/2", cp.lambda)?;
            require(cp.g > -3.0, "g > -3", cp.g)?;
            let beta = cp.g / 12.0;
            DerivedExponents {
                a: cluster_exponent(cp.lambda),
                a2: None,
                c: Some(0.5 * (1.0 + 4.0 * beta).sqrt()),
                d: None,
                beta_aux: Some(beta),
            }
        }
        ModelKind::FiveHarmonic => {
            require(cp.omega > 0.0, "omega > 0", cp.omega)?;
            require(cp.lambda > -0.5, "lambda > -1/2", cp.lambda)?;
            require(cp.kappa_pair > -0.5, "kappa > -1/2", cp.kappa_pair)?;
            require(cp.g > -7.5, "g > -15/2", cp.g)?;
            DerivedExponents {
                a: cluster_exponent(cp.lambda),
                a2: None,
                c: Some(cluster_exponent(cp.kappa_pair)),
                d: Some(0.5 * (1.0 + 2.0 * cp.g / 15.0).sqrt()),
                beta_aux: None,
            }
        }
        ModelKind::SixHarmonic => {
            require(cp.omega > 0.0, "omega > 0", cp.omega)?;
            require(cp.lambda1 > -0.5, "lambda1 > -1/2", cp.lambda1)?;
            require(cp.lambda2 > -0.5, "lambda2 > -1/2", cp.lambda2)?;
            require(cp.g > -1.5, "g > -3/2", cp.g)?;
            DerivedExponents {
                a: cluster_exponent(cp.lambda1),
                a2: Some(cluster_exponent(cp.lambda2)),
                c: None,
                d: Some(0.5 * (1.0 + 2.0 * cp.g / 3.0).sqrt()),
                beta_aux: None,
            }
        }
    };

    let model = Model { kind, couplings, exponents };
    let base = model.radial_base(&BranchSelector::REGULAR);
    require(cp.mu + base * base > 0.0, "mu + top^2 > 0", cp.mu)?;
    Ok(model)
}

impl Model {
    pub fn new(kind: ModelKind, couplings: Couplings) -> Result<Self, ModelError> {
        build_model(kind, couplings)
    }

    /// The radial base `top` at all-zero quantum numbers for a branch; the
    /// μ term must satisfy `μ + top² > 0`.
    pub fn radial_base(&self, branch: &BranchSelector) -> f64 {
        let e = &self.exponents;
        let sa = branch.sign_a.value() * e.a;
        match self.kind {
            ModelKind::FourHarmonic | ModelKind::FourCoulomb => {
                3.0 + 3.0 * sa + branch.sign_c.value() * e.c.unwrap_or(0.0)
            }
            ModelKind::FiveHarmonic => {
                4.0 + 3.0 * sa + branch.sign_c.value() * e.c.unwrap_or(0.0) + branch.sign_d.value() * e.d.unwrap_or(0.0)
            }
            ModelKind::SixHarmonic => {
                5.5 + 3.0 * sa
                    + 3.0 * branch.sign_a2.value() * e.a2.unwrap_or(0.0)
                    + branch.sign_d.value() * e.d.unwrap_or(0.0)
            }
        }
    }

    /// Named exponents this model carries, in a fixed order.
    pub fn named_exponents(&self) -> Vec<(&'static str, f64)> {
        let e = &self.exponents;
        match self.kind {
            ModelKind::FourHarmonic | ModelKind::FourCoulomb => vec![("a", e.a), ("c", e.c.unwrap_or(0.0))],
            ModelKind::FiveHarmonic => vec![("a", e.a), ("c", e.c.unwrap_or(0.0)), ("d", e.d.unwrap_or(0.0))],
            ModelKind::SixHarmonic => vec![("a1", e.a), ("a2", e.a2.unwrap_or(0.0)), ("d", e.d.unwrap_or(0.0))],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pathology {
    /// δ distribution at the sector walls of the first (or only) triple.
    A,
    /// Same for the second triple of the six-body model.
    A2,
    C,
    D,
}

impl Pathology {
    pub fn label(self, kind: ModelKind) -> &'static str {
        match (self, kind) {
            (Self::A, ModelKind::SixHarmonic) => "a1-pathology",
            (Self::A, _) => "a-pathology",
            (Self::A2, _) => "a2-pathology",
            (Self::C, _) => "c-pathology",
            (Self::D, _) => "d-pathology",
        }
    }
}

const HALF_TOL: f64 = 1e-12;

/// Exponents equal to 1/2 whose sector joining produces a δ distribution.
///
/// Under Bose statistics the `|sin|^{a+1/2}` (or `|cos|^{c+1/2}`) kink at
/// `a = 1/2` is the culprit. Under Fermi statistics only the irregular
/// branch is affected: `sgn(sin)·|sin|^{1/2-a}` jumps at `a = 1/2`.
pub fn pathology_flags(model: &Model, branch: &BranchSelector, statistics: Statistics) -> Vec<Pathology> {
    let is_half = |x: f64| (x - 0.5).abs() <= HALF_TOL;
    let e = &model.exponents;
    let triple = |exponent: f64, sign: Sign| match statistics {
        Statistics::Bose => sign == Sign::Plus && is_half(exponent),
        Statistics::Fermi => sign == Sign::Minus && is_half(exponent),
    };
    let mut flags = Vec::new();
    if triple(e.a, branch.sign_a) {
        flags.push(Pathology::A);
    }
    if let Some(a2) = e.a2 {
        if triple(a2, branch.sign_a2) {
            flags.push(Pathology::A2);
        }
    }
    if statistics == Statistics::Bose {
        if let Some(c) = e.c {
            if branch.sign_c == Sign::Plus && is_half(c) {
                flags.push(Pathology::C);
            }
        }
        if let Some(d) = e.d {
            if branch.sign_d == Sign::Plus && is_half(d) {
                flags.push(Pathology::D);
            }
        }
    }
    flags
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn four(lambda: f64, g: f64) -> Couplings {
        Couplings { lambda, g, ..Default::default() }
    }

    #[test]
    fn build_examples() {
        let m = build_model(ModelKind::FourHarmonic, four(0.0, 0.0)).unwrap();
        assert_eq!(m.exponents.a, 0.5);
        assert_eq!(m.exponents.c, Some(0.5));

        let m = build_model(ModelKind::FourHarmonic, four(1.5, 0.0)).unwrap();
        assert_eq!(m.exponents.a, 1.0);

        let err = build_model(ModelKind::FourHarmonic, four(0.0, -3.0)).unwrap_err();
        assert_eq!(err, ModelError::Constraint { constraint: "g > -3", value: -3.0 });
        assert!(err.to_string().contains("g > -3"));

        let m = build_model(ModelKind::SixHarmonic, Couplings { g: 9.0, ..Default::default() }).unwrap();
        let d = m.exponents.d.unwrap();
        assert!((d - 7f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(((2.0 * d).powi(2) - 7.0).abs() < 1e-12);
        assert!((d - 1.3229).abs() < 1e-4);
    }

    #[test]
    fn boundary_points_rejected() {
        let cases = [
            (ModelKind::FourHarmonic, Couplings { lambda: -0.5, ..Default::default() }, "lambda > -1/2"),
            (ModelKind::FourCoulomb, Couplings { g: -3.0, ..Default::default() }, "g > -3"),
            (ModelKind::FourCoulomb, Couplings { eta: 0.0, ..Default::default() }, "eta > 0"),
            (ModelKind::FourHarmonic, Couplings { omega: 0.0, ..Default::default() }, "omega > 0"),
            (ModelKind::FiveHarmonic, Couplings { kappa_pair: -0.5, ..Default::default() }, "kappa > -1/2"),
            (ModelKind::FiveHarmonic, Couplings { g: -7.5, ..Default::default() }, "g > -15/2"),
            (ModelKind::SixHarmonic, Couplings { g: -1.5, ..Default::default() }, "g > -3/2"),
            (ModelKind::SixHarmonic, Couplings { lambda2: -0.5, ..Default::default() }, "lambda2 > -1/2"),
            // regular four-body base at zero couplings is 5
            (ModelKind::FourHarmonic, Couplings { mu: -25.0, ..Default::default() }, "mu + top^2 > 0"),
        ];
        for (kind, cp, name) in cases {
            match build_model(kind, cp) {
                Err(ModelError::Constraint { constraint, .. }) => assert_eq!(constraint, name),
                other => panic!("{kind}: expected {name}, got {other:?}"),
            }
        }
        assert!(build_model(ModelKind::FourHarmonic, Couplings { mu: -24.999, ..Default::default() }).is_ok());
    }

    #[test]
    fn pathology_examples() {
        let m = build_model(ModelKind::FourHarmonic, four(0.0, 0.0)).unwrap();
        let flags = pathology_flags(&m, &BranchSelector::REGULAR, Statistics::Bose);
        assert_eq!(flags, vec![Pathology::A, Pathology::C]);

        let m = build_model(ModelKind::FourHarmonic, four(1.0, 5.0)).unwrap();
        assert!(pathology_flags(&m, &BranchSelector::REGULAR, Statistics::Bose).is_empty());

        let six = build_model(ModelKind::SixHarmonic, Couplings { lambda1: 0.0, lambda2: 1.5, g: 0.0, ..Default::default() })
            .unwrap();
        let flags = pathology_flags(&six, &BranchSelector::REGULAR, Statistics::Bose);
        assert_eq!(flags, vec![Pathology::A, Pathology::D]);
        assert_eq!(flags[0].label(ModelKind::SixHarmonic), "a1-pathology");

        // Fermi regular is smooth at a = 1/2, Fermi irregular jumps
        assert!(pathology_flags(&m, &BranchSelector::REGULAR, Statistics::Fermi).is_empty());
        let m0 = build_model(ModelKind::FourHarmonic, four(0.0, 2.0)).unwrap();
        let irr: BranchSelector = "-a".parse().unwrap();
        assert_eq!(pathology_flags(&m0, &irr, Statistics::Fermi), vec![Pathology::A]);
    }

    #[test]
    fn branch_parsing() {
        let b: BranchSelector = "-a,+c".parse().unwrap();
        assert_eq!(b.sign_a, Sign::Minus);
        assert_eq!(b.sign_c, Sign::Plus);
        assert_eq!(b.to_string(), "-a");
        let b: BranchSelector = "-a1,-a2,-d".parse().unwrap();
        assert_eq!(b.to_string(), "-a,-a2,-d");
        assert!(b.check_for(ModelKind::SixHarmonic).is_ok());
        assert!(b.check_for(ModelKind::FourHarmonic).is_err());
        assert!("a".parse::<BranchSelector>().is_err());
        assert!("-q".parse::<BranchSelector>().is_err());
        assert!("regular".parse::<BranchSelector>().unwrap().is_regular());
    }

    #[test]
    fn exponent_monotone_in_lambda() {
        let mut prev = cluster_exponent(-0.4999);
        for i in 1..2000 {
            let lambda = -0.4999 + i as f64 * 0.005;
            let a = cluster_exponent(lambda);
            assert!(a > prev);
            prev = a;
        }
    }

    proptest! {
        #[test]
        fn squaring_round_trip(lambda in -0.49f64..50.0, g in -2.99f64..50.0, kappa in -0.49f64..50.0) {
            let m4 = build_model(ModelKind::FourHarmonic, four(lambda, g)).unwrap();
            prop_assert!(((2.0 * m4.exponents.a).powi(2) - (1.0 + 2.0 * lambda)).abs() < 1e-12 * (1.0 + lambda.abs()));
            prop_assert!(((2.0 * m4.exponents.c.unwrap()).powi(2) - (1.0 + g / 3.0)).abs() < 1e-12 * (1.0 + g.abs()));
            let m5 = build_model(ModelKind::FiveHarmonic, Couplings { lambda, kappa_pair: kappa, g, ..Default::default() }).unwrap();
            prop_assert!(((2.0 * m5.exponents.c.unwrap()).powi(2) - (1.0 + 2.0 * kappa)).abs() < 1e-12 * (1.0 + kappa.abs()));
            prop_assert!(((2.0 * m5.exponents.d.unwrap()).powi(2) - (1.0 + 2.0 * g / 15.0)).abs() < 1e-12 * (1.0 + g.abs()));
            let gs = g.max(-1.49);
            let m6 = build_model(ModelKind::SixHarmonic, Couplings { lambda1: lambda, lambda2: kappa, g: gs, ..Default::default() }).unwrap();
            prop_assert!(((2.0 * m6.exponents.d.unwrap()).powi(2) - (1.0 + 2.0 * gs / 3.0)).abs() < 1e-12 * (1.0 + gs.abs()));
            prop_assert!(m6.exponents.a2.unwrap() >= 0.0);
        }
    }
}
