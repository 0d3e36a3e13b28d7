//! Coupling domains on which a branch's solutions are square-integrable and
//! the operator self-adjoint.
//!
//! Each record is one strict inequality (or the non-strict Dirichlet
//! variant of the φ criterion), evaluated with its margin. Four-body
//! records for flipped exponents follow the published catalogue; the five-
//! and six-body ones come from the same pattern (every ladder constant
//! positive, every flipped exponent below 1) and are marked `extended`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::model::{build_model, BranchSelector, Couplings, Model, ModelError, ModelKind, Sign};

/// Which condition the irregular φ family must meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhiCriterion {
    /// `λ < 3/2`: the irregular φ family is square-integrable.
    #[default]
    SquareIntegrable,
    /// `λ ≤ 0`: the irregular φ family also vanishes at the coincidences.
    Dirichlet,
}

impl FromStr for PhiCriterion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square-integrable" => Ok(Self::SquareIntegrable),
            "dirichlet" => Ok(Self::Dirichlet),
            other => Err(format!("unknown criterion '{other}' (expected square-integrable or dirichlet)")),
        }
    }
}

impl fmt::Display for PhiCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SquareIntegrable => "square-integrable",
            Self::Dirichlet => "dirichlet",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRecord {
    pub name: String,
    /// The inequality in terms of the couplings and exponents.
    pub inequality: String,
    /// Derived by the general pattern rather than taken from the four-body
    /// catalogue.
    pub extended: bool,
    pub satisfied: bool,
    /// Positive iff satisfied; zero on the boundary of a non-strict record.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub records: Vec<ConstraintRecord>,
    pub admissible: bool,
}

impl Verdict {
    pub fn violated(&self) -> impl Iterator<Item = &ConstraintRecord> {
        self.records.iter().filter(|r| !r.satisfied)
    }

    pub fn first_violation(&self) -> Option<&ConstraintRecord> {
        self.violated().next()
    }
}

struct Builder {
    records: Vec<ConstraintRecord>,
    extended: bool,
}

impl Builder {
    fn strict(&mut self, name: impl Into<String>, inequality: impl Into<String>, margin: f64) {
        self.records.push(ConstraintRecord {
            name: name.into(),
            inequality: inequality.into(),
            extended: self.extended,
            satisfied: margin > 0.0,
            margin,
        });
    }

    fn non_strict(&mut self, name: impl Into<String>, inequality: impl Into<String>, margin: f64) {
        self.records.push(ConstraintRecord {
            name: name.into(),
            inequality: inequality.into(),
            extended: self.extended,
            satisfied: margin >= 0.0,
            margin,
        });
    }

    // the φ family of one cluster taken on its irregular root
    fn irregular_cluster(&mut self, lambda_name: &str, lambda: f64, criterion: PhiCriterion) {
        self.strict(
            format!("{lambda_name} < 8/9"),
            format!("3(1/2 - a) > -1, i.e. {lambda_name} < 8/9"),
            8.0 / 9.0 - lambda,
        );
        self.strict(format!("{lambda_name} != 0"), format!("{lambda_name} != 0 (the two roots coincide)"), lambda.abs());
        match criterion {
            PhiCriterion::SquareIntegrable => {
                self.strict(format!("{lambda_name} < 3/2"), "a < 1".to_string(), 1.5 - lambda)
            }
            PhiCriterion::Dirichlet => self.non_strict(format!("{lambda_name} <= 0"), "a <= 1/2".to_string(), -lambda),
        }
    }
}

/// Evaluates every constraint that applies to `branch` on `model`. The
/// ladder records use the lowest state, which bounds all others from below.
pub fn check_branch(model: &Model, branch: &BranchSelector, criterion: PhiCriterion) -> Verdict {
    let cp = &model.couplings;
    let e = &model.exponents;
    let extended = !matches!(model.kind, ModelKind::FourHarmonic | ModelKind::FourCoulomb);
    let mut b = Builder { records: Vec::new(), extended };
    let flipped = |s: Sign| s == Sign::Minus;
    let b0 = |a: f64, s: Sign| 3.0 * (0.5 + s.value() * a);
    let sc = branch.sign_c.value() * e.c.unwrap_or(0.0);
    let sd = branch.sign_d.value() * e.d.unwrap_or(0.0);
    match model.kind {
        ModelKind::FourHarmonic | ModelKind::FourCoulomb => {
            if flipped(branch.sign_a) {
                b.irregular_cluster("lambda", cp.lambda, criterion);
            }
            if flipped(branch.sign_c) {
                b.strict("g < 9", "c < 1", 9.0 - cp.g);
            }
            let c00 = b0(e.a, branch.sign_a) + sc + 1.0;
            b.strict("c_mn > 0", "3(1/2 ± a) ± c + 1 > 0", c00);
            b.strict("c_mn + 1 > 0", "3(1/2 ± a) ± c + 2 > 0", c00 + 1.0);
            let top = c00 + 0.5;
            b.strict("mu + top^2 > 0", "|c_00 + 1/2| > sqrt(-mu)", cp.mu + top * top);
        }
        ModelKind::FiveHarmonic => {
            if flipped(branch.sign_a) {
                b.irregular_cluster("lambda", cp.lambda, criterion);
            }
            if flipped(branch.sign_c) {
                b.strict("kappa < 3/2", "c < 1", 1.5 - cp.kappa_pair);
            }
            if flipped(branch.sign_d) {
                b.strict("g < 45/2", "d < 1", 22.5 - cp.g);
            }
            let c00 = b0(e.a, branch.sign_a) + sc + 1.0;
            b.strict("c_mn > 0", "3(1/2 ± a) ± c + 1 > 0", c00);
            let d0 = c00 + sd + 1.0;
            b.strict("d_jmn > 0", "c_00 ± d + 1 > 0", d0);
            b.strict("d_jmn + 1 > 0", "c_00 ± d + 2 > 0", d0 + 1.0);
            let top = d0 + 0.5;
            b.strict("mu + top^2 > 0", "|d_000 + 1/2| > sqrt(-mu)", cp.mu + top * top);
        }
        ModelKind::SixHarmonic => {
            if flipped(branch.sign_a) {
                b.irregular_cluster("lambda1", cp.lambda1, criterion);
            }
            if flipped(branch.sign_a2) {
                b.irregular_cluster("lambda2", cp.lambda2, criterion);
            }
            if flipped(branch.sign_d) {
                b.strict("g < 9/2", "d < 1", 4.5 - cp.g);
            }
            let c00 = b0(e.a, branch.sign_a) + b0(e.a2.unwrap_or(0.0), branch.sign_a2) + 1.0;
            b.strict("c_mn > 0", "b_1 + b_2 + 1 > 0", c00);
            let d0 = c00 + sd + 1.0;
            b.strict("d_jmn > 0", "c_00 ± d + 1 > 0", d0);
            b.strict("d_jmn + 1 > 0", "c_00 ± d + 2 > 0", d0 + 1.0);
            let top = d0 + 0.5;
            b.strict("mu + top^2 > 0", "|d_000 + 1/2| > sqrt(-mu)", cp.mu + top * top);
        }
    }
    let admissible = b.records.iter().all(|r| r.satisfied);
    Verdict { records: b.records, admissible }
}

/// One point of a region scan. `valid` is false when the couplings lie
/// outside the model's base domain, in which case `admissible` is false too.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub lambda: f64,
    pub g: f64,
    pub mu: f64,
    pub valid: bool,
    pub admissible: bool,
}

/// Inclusive grid `lo, ..., hi` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.lo];
        }
        (0..self.count).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64).collect()
    }
}

impl FromStr for Axis {
    type Err = String;
    /// `lo:hi:count` or a single value.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number '{t}' in range '{s}'"));
        match parts.as_slice() {
            [v] => Ok(Self::fixed(num(v)?)),
            [lo, hi, n] => {
                let count = n.trim().parse::<usize>().map_err(|_| format!("bad count '{n}' in range '{s}'"))?;
                if count == 0 {
                    return Err(format!("range '{s}' has no points"));
                }
                Ok(Self { lo: num(lo)?, hi: num(hi)?, count })
            }
            _ => Err(format!("range '{s}' must be lo:hi:count or a single value")),
        }
    }
}

/// Verdicts over a `(λ, g, μ)` grid, λ varying fastest. The λ axis sets the
/// first cluster's coupling (`lambda1` for six bodies); other couplings come
/// from `base`.
pub fn admissible_region_scan(
    kind: ModelKind,
    base: Couplings,
    branch: &BranchSelector,
    criterion: PhiCriterion,
    lambda: Axis,
    g: Axis,
    mu: Axis,
) -> Result<Vec<ScanPoint>, ModelError> {
    branch.check_for(kind)?;
    let mut grid = Vec::new();
    for &m in &mu.values() {
        for &gv in &g.values() {
            for &l in &lambda.values() {
                grid.push((l, gv, m));
            }
        }
    }
    Ok(grid
        .par_iter()
        .map(|&(l, gv, m)| {
            let mut cp = Couplings { g: gv, mu: m, ..base };
            if kind == ModelKind::SixHarmonic {
                cp.lambda1 = l;
            } else {
                cp.lambda = l;
            }
            match build_model(kind, cp) {
                Ok(model) => {
                    let v = check_branch(&model, branch, criterion);
                    ScanPoint { lambda: l, g: gv, mu: m, valid: true, admissible: v.admissible }
                }
                Err(_) => ScanPoint { lambda: l, g: gv, mu: m, valid: false, admissible: false },
            }
        })
        .collect())
}

/// Midpoints between λ-neighbours whose verdicts differ, for plotting the
/// region boundary. Expects the ordering of [`admissible_region_scan`].
pub fn region_boundary(scan: &[ScanPoint], lambda_count: usize) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    if lambda_count < 2 {
        return out;
    }
    for row in scan.chunks(lambda_count) {
        for w in row.windows(2) {
            if w[0].admissible != w[1].admissible {
                out.push((0.5 * (w[0].lambda + w[1].lambda), w[0].g, w[0].mu));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{separation_ladder, QuantumNumbers};
    use crate::wavefunc::NormalizedState;
    use proptest::prelude::*;

    fn four(lambda: f64, g: f64, mu: f64) -> Model {
        build_model(ModelKind::FourHarmonic, Couplings { lambda, g, mu, ..Default::default() }).unwrap()
    }

    fn branch(s: &str) -> BranchSelector {
        s.parse().unwrap()
    }

    fn violated(v: &Verdict) -> Vec<String> {
        v.violated().map(|r| r.name.clone()).collect()
    }

    #[test]
    fn catalogue_examples() {
        let v = check_branch(&four(-0.25, 0.0, 0.0), &branch("-a"), PhiCriterion::SquareIntegrable);
        assert!(v.admissible, "{:?}", violated(&v));
        let v = check_branch(&four(1.2, 0.0, 0.0), &branch("-a"), PhiCriterion::SquareIntegrable);
        assert_eq!(violated(&v), ["lambda < 8/9"]);
        let v = check_branch(&four(0.0, 0.0, 0.0), &branch("-a"), PhiCriterion::SquareIntegrable);
        assert_eq!(violated(&v), ["lambda != 0"]);
        let v = check_branch(&four(0.0, 9.5, 0.0), &branch("-c"), PhiCriterion::SquareIntegrable);
        assert_eq!(violated(&v), ["g < 9"]);
    }

    #[test]
    fn dirichlet_criterion_is_stricter() {
        let m = four(0.5, 0.0, 0.0);
        assert!(check_branch(&m, &branch("-a"), PhiCriterion::SquareIntegrable).admissible);
        let v = check_branch(&m, &branch("-a"), PhiCriterion::Dirichlet);
        assert_eq!(violated(&v), ["lambda <= 0"]);
        assert!(check_branch(&four(-0.25, 0.0, 0.0), &branch("-a"), PhiCriterion::Dirichlet).admissible);
    }

    #[test]
    fn boundary_flips_only_its_constraint() {
        let below = check_branch(&four(8.0 / 9.0 - 1e-6, 0.0, 0.0), &branch("-a"), PhiCriterion::SquareIntegrable);
        let above = check_branch(&four(8.0 / 9.0 + 1e-6, 0.0, 0.0), &branch("-a"), PhiCriterion::SquareIntegrable);
        let flips: Vec<&str> = below
            .records
            .iter()
            .zip(&above.records)
            .filter(|(a, b)| a.satisfied != b.satisfied)
            .map(|(a, _)| a.name.as_str())
            .collect();
        assert_eq!(flips, ["lambda < 8/9"]);
    }

    #[test]
    fn mu_slice_boundary() {
        // top = 3 ± c - 3a; the boundary sits at mu = -top²
        let (lambda, g) = (0.5, 3.0);
        let m = four(lambda, g, 0.0);
        let top = 3.0 - m.exponents.c.unwrap() - 3.0 * m.exponents.a;
        let at = |mu: f64| {
            let m = four(lambda, g, mu);
            check_branch(&m, &branch("-a,-c"), PhiCriterion::SquareIntegrable)
                .records
                .iter()
                .find(|r| r.name == "mu + top^2 > 0")
                .unwrap()
                .satisfied
        };
        assert!(at(-top * top + 1e-9));
        assert!(!at(-top * top - 1e-9));
    }

    #[test]
    fn scan_shows_the_lambda_boundary() {
        let axis = Axis { lo: -0.45, hi: 1.45, count: 39 };
        let scan = admissible_region_scan(
            ModelKind::FourHarmonic,
            Couplings::default(),
            &branch("-a"),
            PhiCriterion::SquareIntegrable,
            axis,
            Axis::fixed(0.0),
            Axis::fixed(0.0),
        )
        .unwrap();
        let edges = region_boundary(&scan, axis.count);
        // the λ = 0 exclusion is a single point the grid does not land on
        assert_eq!(edges.len(), 1);
        assert!((edges[0].0 - 8.0 / 9.0).abs() < 0.05);
        let reg = admissible_region_scan(
            ModelKind::FourHarmonic,
            Couplings::default(),
            &BranchSelector::REGULAR,
            PhiCriterion::SquareIntegrable,
            axis,
            Axis { lo: -2.9, hi: 10.0, count: 7 },
            Axis { lo: 0.0, hi: 3.0, count: 3 },
        )
        .unwrap();
        assert!(reg.iter().all(|p| p.admissible));
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("1.5".parse::<Axis>().unwrap(), Axis::fixed(1.5));
        assert_eq!("-0.5:1.5:5".parse::<Axis>().unwrap().values(), vec![-0.5, 0.0, 0.5, 1.0, 1.5]);
        assert!("1:2".parse::<Axis>().is_err());
        assert!("1:2:0".parse::<Axis>().is_err());
    }

    fn kinds_and_branches() -> impl Strategy<Value = (ModelKind, &'static str)> {
        prop_oneof![
            Just((ModelKind::FourHarmonic, "regular")),
            Just((ModelKind::FourHarmonic, "-a")),
            Just((ModelKind::FourHarmonic, "-c")),
            Just((ModelKind::FourHarmonic, "-a,-c")),
            Just((ModelKind::FiveHarmonic, "-a")),
            Just((ModelKind::FiveHarmonic, "-c,-d")),
            Just((ModelKind::SixHarmonic, "-a1")),
            Just((ModelKind::SixHarmonic, "-a2,-d")),
        ]
    }

    proptest! {
        #[test]
        fn margin_sign_matches_verdict(lambda in -0.49f64..2.0, g in -1.4f64..12.0, mu in -3.0f64..2.0) {
            for kind in ModelKind::ALL {
                let cp = Couplings { lambda, lambda1: lambda, lambda2: 0.3, kappa_pair: 0.4, g, mu, ..Default::default() };
                let Ok(m) = build_model(kind, cp) else { continue };
                let v = check_branch(&m, &BranchSelector::REGULAR, PhiCriterion::SquareIntegrable);
                prop_assert!(v.admissible, "regular branch rejected: {:?}", violated(&v));
                for r in &v.records {
                    prop_assert_eq!(r.satisfied, r.margin > 0.0);
                }
            }
        }

        #[test]
        fn admissible_means_ladder_and_norms_exist(
            (kind, br) in kinds_and_branches(),
            lambda in -0.49f64..1.4, g in -1.4f64..10.0, mu in -2.0f64..2.0, kp in -0.49f64..2.0,
        ) {
            let cp = Couplings { lambda, lambda1: lambda, lambda2: 0.5 - lambda / 2.0, kappa_pair: kp, g, mu, ..Default::default() };
            let Ok(m) = build_model(kind, cp) else { return Ok(()) };
            let branch: BranchSelector = if br == "regular" { BranchSelector::REGULAR } else { br.parse().unwrap() };
            let v = check_branch(&m, &branch, PhiCriterion::SquareIntegrable);
            prop_assume!(v.admissible);
            for total in 0..=3u32 {
                let qn = match kind {
                    ModelKind::FourHarmonic => QuantumNumbers::four(0, total % 2, total / 2, total % 3),
                    ModelKind::FiveHarmonic => QuantumNumbers::five(0, 0, total % 2, total / 2, total % 3),
                    _ => QuantumNumbers::six(0, 0, 0, total % 2, total / 2, total % 3),
                };
                prop_assert!(separation_ladder(&m, &branch, &qn).is_ok(), "{:?}", separation_ladder(&m, &branch, &qn));
                let s = NormalizedState::new(&m, &branch, &qn).unwrap();
                prop_assert!(s.norm_constant.is_finite() && s.norm_constant > 0.0);
            }
        }

        #[test]
        fn flipping_c_touches_only_c_records(lambda in -0.49f64..0.85, g in -2.9f64..8.9, mu in 0.0f64..2.0) {
            prop_assume!(lambda.abs() > 1e-3);
            let m = four(lambda, g, mu);
            let a = check_branch(&m, &branch("-a"), PhiCriterion::SquareIntegrable);
            let b = check_branch(&m, &branch("-a,-c"), PhiCriterion::SquareIntegrable);
            let names = |v: &Verdict| v.records.iter().map(|r| r.name.clone()).collect::<Vec<_>>();
            let only_b: Vec<String> = names(&b).into_iter().filter(|n| !names(&a).contains(n)).collect();
            prop_assert_eq!(only_b, vec!["g < 9".to_string()]);
            for ra in &a.records {
                let rb = b.records.iter().find(|r| r.name == ra.name).unwrap();
                let references_c = ra.name.starts_with("c_mn") || ra.name.starts_with("mu");
                if !references_c {
                    prop_assert_eq!(ra, rb);
                }
            }
        }
    }
}
