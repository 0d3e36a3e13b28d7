//! The full verification run for one model and branch.

use std::fmt;
use std::io;

use rayon::prelude::*;

use crate::admissibility::{check_branch, PhiCriterion};
use crate::model::{BranchSelector, Model, ModelKind};
use crate::numfmt::g15;
use crate::spectrum::{enumerate_levels, printed_coulomb_energy, separation_ladder, QuantumNumbers};
use crate::wavefunc::{eval_factor, factor_specs, FactorRole, FactorShape, FactorSpec, NormalizedState};

use super::fd::fd_extrapolated;
use super::quad::tanh_sinh;
use super::residual::{full_hamiltonian_residual, interior_samples, ode_residual, sample_configs, separated_equation};
use super::OracleError;

pub const ANGULAR_TOL: f64 = 2e-3;
pub const RADIAL_TOL: f64 = 1e-3;
pub const COULOMB_TOL: f64 = 5e-3;
pub const ODE_TOL: f64 = 1e-9;
pub const GRAM_TOL: f64 = 1e-8;
pub const GROUND_TOL: f64 = 1e-6;
pub const EXCITED_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Absolute,
    Relative,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Absolute => "abs",
            Self::Relative => "rel",
        })
    }
}

/// One check. `pass` holds iff the deviation named by `measure` is finite
/// and at most `tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub name: String,
    pub expected: f64,
    pub got: f64,
    pub abs_dev: f64,
    pub rel_dev: f64,
    pub tol: f64,
    pub measure: Measure,
    pub grids: Vec<usize>,
    pub pass: bool,
    pub notes: String,
}

impl VerificationReport {
    pub const CSV_HEADER: [&'static str; 10] =
        ["name", "expected", "got", "abs_dev", "rel_dev", "tol", "measure", "pass", "grids", "notes"];

    pub fn compare(name: impl Into<String>, expected: f64, got: f64, tol: f64, measure: Measure) -> Self {
        let abs_dev = (got - expected).abs();
        let rel_dev = if expected == 0.0 { abs_dev } else { abs_dev / expected.abs() };
        let dev = match measure {
            Measure::Absolute => abs_dev,
            Measure::Relative => rel_dev,
        };
        Self {
            name: name.into(),
            expected,
            got,
            abs_dev,
            rel_dev,
            tol,
            measure,
            grids: Vec::new(),
            pass: dev.is_finite() && dev <= tol,
            notes: String::new(),
        }
    }

    /// A check that could not run.
    pub fn failed(name: impl Into<String>, err: impl fmt::Display) -> Self {
        Self {
            notes: format!("error: {err}"),
            pass: false,
            ..Self::compare(name, f64::NAN, f64::NAN, 0.0, Measure::Absolute)
        }
    }

    fn with_grids(mut self, grids: &[usize]) -> Self {
        self.grids = grids.to_vec();
        self
    }

    fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn csv_record(&self) -> [String; 10] {
        [
            self.name.clone(),
            g15(self.expected),
            g15(self.got),
            g15(self.abs_dev),
            g15(self.rel_dev),
            g15(self.tol),
            self.measure.to_string(),
            self.pass.to_string(),
            self.grids.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" "),
            self.notes.clone(),
        ]
    }
}

/// Writes the reports as CSV with [`VerificationReport::CSV_HEADER`].
pub fn write_csv<W: io::Write>(reports: &[VerificationReport], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VerificationReport::CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_record())?;
    }
    w.flush()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    /// Quantum-number depth: index tuples with sum at most this.
    pub depth: u32,
    /// Configurations per full-Hamiltonian check.
    pub configs: usize,
    pub seed: u64,
    pub angular_grid: usize,
    pub radial_grid: usize,
    pub coulomb_grid: usize,
    pub gram_states: usize,
    pub residual_samples: usize,
    pub criterion: PhiCriterion,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            depth: 2,
            configs: 100,
            seed: 1,
            angular_grid: 400,
            radial_grid: 1000,
            coulomb_grid: 4000,
            gram_states: 20,
            residual_samples: 64,
            criterion: PhiCriterion::SquareIntegrable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Index {
    K,
    L,
    J,
    M,
    N,
    N2,
}

impl Index {
    fn name(self) -> &'static str {
        match self {
            Self::K => "k",
            Self::L => "l",
            Self::J => "j",
            Self::M => "m",
            Self::N => "n",
            Self::N2 => "n2",
        }
    }

    fn set(self, qn: &mut QuantumNumbers, v: u32) {
        match self {
            Self::K => qn.k = v,
            Self::L => qn.l = v,
            Self::J => qn.j = v,
            Self::M => qn.m = v,
            Self::N => qn.n = v,
            Self::N2 => qn.n2 = v,
        }
    }
}

// Each separated equation with its own index and the indices of the
// equations it depends on, innermost first.
fn chain(kind: ModelKind) -> Vec<(FactorRole, Index, &'static [Index])> {
    use FactorRole::*;
    use Index::*;
    match kind {
        ModelKind::FourHarmonic | ModelKind::FourCoulomb => {
            vec![(Phi, N, &[]), (Theta, M, &[N]), (G, L, &[M, N]), (Radial, K, &[L, M, N])]
        }
        ModelKind::FiveHarmonic => vec![
            (Phi, N, &[]),
            (H, M, &[N]),
            (Theta, J, &[M, N]),
            (G, L, &[J, M, N]),
            (Radial, K, &[L, J, M, N]),
        ],
        ModelKind::SixHarmonic => vec![
            (Phi, N, &[]),
            (Phi2, N2, &[]),
            (H, M, &[N, N2]),
            (Theta, J, &[M, N, N2]),
            (G, L, &[J, M, N, N2]),
            (Radial, K, &[L, J, M, N, N2]),
        ],
    }
}

fn all_indices(kind: ModelKind) -> Vec<Index> {
    use Index::*;
    match kind {
        ModelKind::FourHarmonic | ModelKind::FourCoulomb => vec![K, L, M, N],
        ModelKind::FiveHarmonic => vec![K, L, J, M, N],
        ModelKind::SixHarmonic => vec![K, L, J, M, N, N2],
    }
}

// All tuples of `len` non-negative entries with sum ≤ max, lexicographic.
fn tuples(len: usize, max: u32) -> Vec<Vec<u32>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=max {
        for rest in tuples(len - 1, max - first) {
            let mut t = vec![first];
            t.extend(rest);
            out.push(t);
        }
    }
    out
}

fn qn_from(indices: &[Index], values: &[u32]) -> QuantumNumbers {
    let mut qn = QuantumNumbers::ground();
    for (i, v) in indices.iter().zip(values) {
        i.set(&mut qn, *v);
    }
    qn
}

fn tag(indices: &[Index], qn: &QuantumNumbers) -> String {
    let get = |i: Index| match i {
        Index::K => qn.k,
        Index::L => qn.l,
        Index::J => qn.j,
        Index::M => qn.m,
        Index::N => qn.n,
        Index::N2 => qn.n2,
    };
    indices.iter().map(|&i| format!("{}={}", i.name(), get(i))).collect::<Vec<_>>().join(" ")
}

/// The `count` lowest states (ties broken by index order), `+` sectors,
/// Bose statistics.
pub fn lowest_states(model: &Model, branch: &BranchSelector, count: usize) -> Result<Vec<QuantumNumbers>, OracleError> {
    let e0 = crate::spectrum::energy(model, branch, &QuantumNumbers::ground())?;
    let mut bound = e0;
    for _ in 0..200 {
        let levels = enumerate_levels(model, branch, bound);
        let members: Vec<QuantumNumbers> = levels.into_iter().flat_map(|l| l.members).collect();
        if members.len() >= count {
            return Ok(members.into_iter().take(count).collect());
        }
        bound = if model.kind.is_coulomb() { bound * 0.9 } else { bound + model.couplings.omega };
    }
    unreachable!("level counts grow without bound as the energy bound rises")
}

fn integration_range(f: &FactorSpec) -> (f64, f64) {
    match f.shape {
        FactorShape::Trig { interval, .. } => interval,
        FactorShape::HarmonicRadial { kappa, omega } => {
            (0.0, 1.5 * ((2.0 * kappa + 4.0 * f.degree as f64 + 40.0) / omega).sqrt())
        }
        FactorShape::CoulombRadial { eta_tilde, .. } => (0.0, 60.0 / eta_tilde),
    }
}

fn factor_integral(a: &FactorSpec, b: &FactorSpec) -> f64 {
    let (lo, hi) = integration_range(a);
    let (_, hi_b) = integration_range(b);
    let hi = hi.max(hi_b);
    let f = |x: f64| eval_factor(a, x).unwrap_or(0.0) * eval_factor(b, x).unwrap_or(0.0);
    tanh_sinh(f, lo, hi, 1e-14).0
}

/// `⟨a|b⟩` for every pair, each one-dimensional integral by tanh-sinh and
/// the states' own normalization constants.
pub fn gram_matrix(states: &[NormalizedState]) -> Vec<Vec<f64>> {
    let n = states.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&states[i], &states[j]);
            let prod: f64 = a.factors.iter().zip(&b.factors).map(|(fa, fb)| factor_integral(fa, fb)).product();
            prod / (a.norm_constant * b.norm_constant).sqrt()
        })
        .collect();
    let mut g = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        g[i][j] = v;
        g[j][i] = v;
    }
    g
}

#[derive(Debug, Clone)]
enum Job {
    Fd { role: FactorRole, own: Index, upstream: &'static [Index], base: QuantumNumbers },
    Ode { qn: QuantumNumbers },
    Gram,
    Hamiltonian { qn: QuantumNumbers, label: String, tol: f64, seed: u64 },
    CoulombAdjudication,
}

/// Runs every check for `model` on `branch`: FD eigenvalues of each
/// separated equation for every upstream index tuple of sum ≤ depth, ODE
/// residuals of every factor of each state of index sum ≤ depth, the Gram
/// matrix of the lowest states, and full-Hamiltonian residuals for the
/// ground state and each single-index excitation. Refuses inadmissible
/// branches; individual failures become failing report lines.
pub fn verify_suite(
    model: &Model,
    branch: &BranchSelector,
    options: &SuiteOptions,
) -> Result<Vec<VerificationReport>, OracleError> {
    branch.check_for(model.kind)?;
    let verdict = check_branch(model, branch, options.criterion);
    if let Some(v) = verdict.first_violation() {
        return Err(OracleError::Inadmissible { constraint: v.name.clone(), margin: v.margin });
    }
    let kind = model.kind;
    let mut jobs = Vec::new();
    for (role, own, upstream) in chain(kind) {
        for values in tuples(upstream.len(), options.depth) {
            jobs.push(Job::Fd { role, own, upstream, base: qn_from(upstream, &values) });
        }
    }
    let every = all_indices(kind);
    for values in tuples(every.len(), options.depth) {
        jobs.push(Job::Ode { qn: qn_from(&every, &values) });
    }
    jobs.push(Job::Gram);
    jobs.push(Job::Hamiltonian { qn: QuantumNumbers::ground(), label: "ground".into(), tol: GROUND_TOL, seed: options.seed });
    for (i, idx) in every.iter().enumerate() {
        let mut qn = QuantumNumbers::ground();
        idx.set(&mut qn, 1);
        jobs.push(Job::Hamiltonian {
            qn,
            label: format!("{}=1", idx.name()),
            tol: EXCITED_TOL,
            seed: options.seed.wrapping_add(i as u64 + 1),
        });
    }
    if kind.is_coulomb() {
        jobs.push(Job::CoulombAdjudication);
    }
    let reports: Vec<Vec<VerificationReport>> = jobs.par_iter().map(|job| run(model, branch, options, job)).collect();
    Ok(reports.into_iter().flatten().collect())
}

fn run(model: &Model, branch: &BranchSelector, options: &SuiteOptions, job: &Job) -> Vec<VerificationReport> {
    match job {
        Job::Fd { role, own, upstream, base } => fd_check(model, branch, options, *role, *own, upstream, base),
        Job::Ode { qn } => ode_checks(model, branch, options, qn),
        Job::Gram => vec![gram_check(model, branch, options)],
        Job::Hamiltonian { qn, label, tol, seed } => {
            let name = format!("hamiltonian {label}");
            let outcome = NormalizedState::new(model, branch, qn).map_err(OracleError::from).and_then(|s| {
                let cfgs = sample_configs(&s, options.configs, *seed);
                full_hamiltonian_residual(&s, &cfgs)
            });
            vec![match outcome {
                Ok(r) => VerificationReport::compare(name, 0.0, r, *tol, Measure::Absolute)
                    .with_notes(format!("{} configurations", options.configs)),
                Err(e) => VerificationReport::failed(name, e),
            }]
        }
        Job::CoulombAdjudication => vec![coulomb_adjudication(model, branch, options)],
    }
}

fn fd_check(
    model: &Model,
    branch: &BranchSelector,
    options: &SuiteOptions,
    role: FactorRole,
    own: Index,
    upstream: &[Index],
    base: &QuantumNumbers,
) -> Vec<VerificationReport> {
    const STATES: u32 = 3;
    let prefix = if upstream.is_empty() { String::new() } else { format!(" {}", tag(upstream, base)) };
    let name = |t: u32| format!("fd {}{} {}={}", role.name(), prefix, own.name(), t);
    let (grid, tol) = match role {
        FactorRole::Radial if model.kind.is_coulomb() => (options.coulomb_grid, COULOMB_TOL),
        FactorRole::Radial => (options.radial_grid, RADIAL_TOL),
        _ => (options.angular_grid, ANGULAR_TOL),
    };
    let run = || -> Result<Vec<VerificationReport>, OracleError> {
        let ode = separated_equation(model, branch, base, role, STATES - 1)?;
        let ex = fd_extrapolated(&ode, grid, STATES as usize)?;
        let mut out = Vec::new();
        for t in 0..STATES {
            let mut qn = *base;
            own.set(&mut qn, t);
            let (_, factors) = factor_specs(model, branch, &qn)?;
            let closed = factors.iter().find(|f| f.role == role).expect("role present in its own model").eigenvalue;
            let i = t as usize;
            out.push(
                VerificationReport::compare(name(t), closed, ex.values[i], tol, Measure::Relative)
                    .with_grids(&ex.grids)
                    .with_notes(format!("order {:.2}; error estimate {}", ex.order[i], g15(ex.error[i]))),
            );
        }
        Ok(out)
    };
    run().unwrap_or_else(|e| (0..STATES).map(|t| VerificationReport::failed(name(t), &e)).collect())
}

fn ode_checks(model: &Model, branch: &BranchSelector, options: &SuiteOptions, qn: &QuantumNumbers) -> Vec<VerificationReport> {
    let every = all_indices(model.kind);
    let label = tag(&every, qn);
    let factors = match factor_specs(model, branch, qn) {
        Ok((_, f)) => f,
        Err(e) => return vec![VerificationReport::failed(format!("ode {label}"), e)],
    };
    factors
        .iter()
        .map(|f| {
            let name = format!("ode {} {label}", f.role.name());
            match ode_residual(model, branch, qn, f.role, &interior_samples(f, options.residual_samples)) {
                Ok(r) => VerificationReport::compare(name, 0.0, r, ODE_TOL, Measure::Absolute),
                Err(e) => VerificationReport::failed(name, e),
            }
        })
        .collect()
}

fn gram_check(model: &Model, branch: &BranchSelector, options: &SuiteOptions) -> VerificationReport {
    let name = format!("gram lowest {}", options.gram_states);
    let run = || -> Result<f64, OracleError> {
        let qns = lowest_states(model, branch, options.gram_states)?;
        let states = qns.iter().map(|q| NormalizedState::new(model, branch, q)).collect::<Result<Vec<_>, _>>()?;
        let g = gram_matrix(&states);
        let mut worst: f64 = 0.0;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => VerificationReport::compare(name, 0.0, w, GRAM_TOL, Measure::Absolute)
            .with_notes("max |G - I| over all entries"),
        Err(e) => VerificationReport::failed(name, e),
    }
}

fn coulomb_adjudication(model: &Model, branch: &BranchSelector, options: &SuiteOptions) -> VerificationReport {
    let name = "coulomb ground energy adjudication";
    let qn = QuantumNumbers::ground();
    let run = || -> Result<VerificationReport, OracleError> {
        let s = separation_ladder(model, branch, &qn)?;
        let implemented = crate::spectrum::energy(model, branch, &qn)?;
        let alternative = printed_coulomb_energy(model.couplings.eta, 0, s.kappa_radial);
        let ode = separated_equation(model, branch, &qn, FactorRole::Radial, 0)?;
        let ex = fd_extrapolated(&ode, options.coulomb_grid, 1)?;
        let fd = ex.values[0];
        let alt_dev = (fd - alternative).abs() / fd.abs();
        let verdict = if alt_dev > COULOMB_TOL { "rejected" } else { "not excluded" };
        let notes = format!(
            "adjudication: FD ground energy {} confirms -eta^2/(2k+2kappa+1)^2 = {}; \
             alternative -4eta^2/(2k+kappa+1)^2 = {} {verdict} (relative deviation {})",
            g15(fd),
            g15(implemented),
            g15(alternative),
            g15(alt_dev)
        );
        Ok(VerificationReport::compare(name, implemented, fd, COULOMB_TOL, Measure::Relative)
            .with_grids(&ex.grids)
            .with_notes(notes))
    };
    run().unwrap_or_else(|e| VerificationReport::failed(name, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, Couplings};

    #[test]
    fn tuples_enumerate_bounded_sums() {
        assert_eq!(tuples(0, 2), vec![Vec::<u32>::new()]);
        assert_eq!(tuples(2, 1), vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(tuples(5, 2).len(), 21);
    }

    #[test]
    fn report_pass_follows_measure() {
        let r = VerificationReport::compare("x", 100.0, 100.1, 2e-3, Measure::Relative);
        assert!(r.pass);
        let r = VerificationReport::compare("x", 100.0, 100.1, 2e-3, Measure::Absolute);
        assert!(!r.pass);
        assert!(!VerificationReport::failed("x", "boom").pass);
    }

    #[test]
    fn lowest_states_are_sorted() {
        let m = build_model(ModelKind::FourHarmonic, Couplings { lambda: 1.0, g: 2.0, mu: 0.5, ..Default::default() }).unwrap();
        let s = lowest_states(&m, &BranchSelector::REGULAR, 20).unwrap();
        assert_eq!(s.len(), 20);
        let e: Vec<f64> =
            s.iter().map(|q| crate::spectrum::energy(&m, &BranchSelector::REGULAR, q).unwrap()).collect();
        // members of one level agree only to LEVEL_TOL
        assert!(e.windows(2).all(|w| w[0] <= w[1] + crate::spectrum::LEVEL_TOL * w[1].abs()));
        assert_eq!(s[0], QuantumNumbers::ground());
    }

    #[test]
    fn inadmissible_branch_is_refused() {
        let m = build_model(ModelKind::FourHarmonic, Couplings { lambda: 1.2, ..Default::default() }).unwrap();
        let irr: BranchSelector = "-a".parse().unwrap();
        match verify_suite(&m, &irr, &SuiteOptions::default()) {
            Err(OracleError::Inadmissible { constraint, .. }) => assert_eq!(constraint, "lambda < 8/9"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_suite_passes() {
        let m = build_model(ModelKind::FourHarmonic, Couplings { lambda: 1.0, g: 2.0, mu: 0.5, ..Default::default() }).unwrap();
        let opts = SuiteOptions { depth: 1, configs: 10, gram_states: 6, ..Default::default() };
        let reports = verify_suite(&m, &BranchSelector::REGULAR, &opts).unwrap();
        let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
