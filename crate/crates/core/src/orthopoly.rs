//! Gegenbauer, Jacobi and generalized Laguerre polynomials.
//!
//! Values come from the three-term recurrences; derivatives from the
//! parameter-shift identities; Gauss rules from the Golub-Welsch eigenproblem
//! on the analytic recurrence coefficients.

use std::f64::consts::PI;

use thiserror::Error;

use crate::tridiag::{self, TridiagError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("Gegenbauer order must satisfy alpha > -1/2 and alpha != 0, got {0}")]
    GegenbauerParameter(f64),
    #[error("Jacobi exponents must satisfy a > -1 and b > -1, got ({0}, {1})")]
    JacobiParameter(f64, f64),
    #[error("Laguerre exponent must satisfy alpha > -1, got {0}")]
    LaguerreParameter(f64),
    #[error("argument {x} outside the support [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },
    #[error("derivative order must be 1 or 2, got {0}")]
    DerivativeOrder(u8),
    #[error("a Gauss rule needs at least one node")]
    EmptyRule,
    #[error(transparent)]
    Eigen(#[from] TridiagError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    /// `C_n^{(alpha)}`, weight `(1 - x²)^{alpha - 1/2}` on `[-1, 1]`.
    Gegenbauer { alpha: f64 },
    /// `P_n^{(a, b)}`, weight `(1 - x)^a (1 + x)^b` on `[-1, 1]`.
    Jacobi { a: f64, b: f64 },
    /// `L_n^{(alpha)}`, weight `x^alpha e^{-x}` on `[0, ∞)`.
    Laguerre { alpha: f64 },
}

/// A validated polynomial family. Construction rejects parameters outside
/// the range where the weight is integrable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyFamily(FamilyKind);

impl PolyFamily {
    pub fn gegenbauer(alpha: f64) -> Result<Self, PolyError> {
        if !(alpha > -0.5) || alpha == 0.0 || !alpha.is_finite() {
            return Err(PolyError::GegenbauerParameter(alpha));
        }
        Ok(Self(FamilyKind::Gegenbauer { alpha }))
    }

    pub fn jacobi(a: f64, b: f64) -> Result<Self, PolyError> {
        if !(a > -1.0 && b > -1.0) || !a.is_finite() || !b.is_finite() {
            return Err(PolyError::JacobiParameter(a, b));
        }
        Ok(Self(FamilyKind::Jacobi { a, b }))
    }

    pub fn laguerre(alpha: f64) -> Result<Self, PolyError> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(PolyError::LaguerreParameter(alpha));
        }
        Ok(Self(FamilyKind::Laguerre { alpha }))
    }

    pub fn kind(&self) -> FamilyKind {
        self.0
    }

    /// Closed support of the weight.
    pub fn support(&self) -> (f64, f64) {
        match self.0 {
            FamilyKind::Laguerre { .. } => (0.0, f64::INFINITY),
            _ => (-1.0, 1.0),
        }
    }

    fn check_domain(&self, x: f64) -> Result<(), PolyError> {
        let (lo, hi) = self.support();
        let slack = 4.0 * f64::EPSILON;
        if x.is_nan() || x < lo - slack || x > hi + slack {
            return Err(PolyError::Domain { x, lo, hi });
        }
        Ok(())
    }

    /// Family of the first derivative under the parameter-shift identity,
    /// together with the constant factor.
    fn derivative_family(&self, degree: u32) -> (PolyFamily, f64) {
        match self.0 {
            FamilyKind::Gegenbauer { alpha } => (Self(FamilyKind::Gegenbauer { alpha: alpha + 1.0 }), 2.0 * alpha),
            FamilyKind::Jacobi { a, b } => (
                Self(FamilyKind::Jacobi { a: a + 1.0, b: b + 1.0 }),
                0.5 * (degree as f64 + a + b + 1.0),
            ),
            FamilyKind::Laguerre { alpha } => (Self(FamilyKind::Laguerre { alpha: alpha + 1.0 }), -1.0),
        }
    }

    /// Total mass of the weight function.
    pub fn weight_mass(&self) -> f64 {
        match self.0 {
            FamilyKind::Gegenbauer { alpha } => jacobi_mass(alpha - 0.5, alpha - 0.5),
            FamilyKind::Jacobi { a, b } => jacobi_mass(a, b),
            FamilyKind::Laguerre { alpha } => gamma(alpha + 1.0),
        }
    }

    /// Diagonal and squared off-diagonal of the Jacobi matrix of the
    /// orthonormal version of the family (order `n`).
    fn recurrence_matrix(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut diag = Vec::with_capacity(n);
        let mut off_sq = Vec::with_capacity(n.saturating_sub(1));
        match self.0 {
            FamilyKind::Gegenbauer { alpha } => {
                for k in 0..n {
                    diag.push(0.0);
                    if k >= 1 {
                        let kf = k as f64;
                        off_sq.push(kf * (kf + 2.0 * alpha - 1.0) / (4.0 * (kf + alpha) * (kf + alpha - 1.0)));
                    }
                }
            }
            FamilyKind::Jacobi { a, b } => {
                for k in 0..n {
                    let kf = k as f64;
                    let s = 2.0 * kf + a + b;
                    diag.push(if k == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) });
                    if k == 1 {
                        off_sq.push(4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b)));
                    } else if k >= 2 {
                        off_sq.push(
                            4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0)),
                        );
                    }
                }
            }
            FamilyKind::Laguerre { alpha } => {
                for k in 0..n {
                    let kf = k as f64;
                    diag.push(2.0 * kf + alpha + 1.0);
                    if k >= 1 {
                        off_sq.push(kf * (kf + alpha));
                    }
                }
            }
        }
        (diag, off_sq)
    }
}

/// Value of the degree-`degree` polynomial of `family` at `x`.
pub fn poly_eval(family: &PolyFamily, degree: u32, x: f64) -> Result<f64, PolyError> {
    family.check_domain(x)?;
    Ok(eval_unchecked(family.0, degree, x))
}

fn eval_unchecked(kind: FamilyKind, degree: u32, x: f64) -> f64 {
    if degree == 0 {
        return 1.0;
    }
    match kind {
        FamilyKind::Gegenbauer { alpha } => {
            let mut prev = 1.0;
            let mut cur = 2.0 * alpha * x;
            for k in 1..degree {
                let kf = k as f64;
                let next = (2.0 * (kf + alpha) * x * cur - (kf + 2.0 * alpha - 1.0) * prev) / (kf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
        FamilyKind::Jacobi { a, b } => {
            let mut prev = 1.0;
            let mut cur = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
            for k in 1..degree {
                let kf = k as f64;
                let s = 2.0 * kf + a + b;
                let c1 = 2.0 * (kf + 1.0) * (kf + a + b + 1.0) * s;
                let c2 = (s + 1.0) * ((s + 2.0) * s * x + a * a - b * b);
                let c3 = 2.0 * (kf + a) * (kf + b) * (s + 2.0);
                let next = (c2 * cur - c3 * prev) / c1;
                prev = cur;
                cur = next;
            }
            cur
        }
        FamilyKind::Laguerre { alpha } => {
            let mut prev = 1.0;
            let mut cur = 1.0 + alpha - x;
            for k in 1..degree {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// First or second derivative in `x`.
pub fn poly_derivative(family: &PolyFamily, degree: u32, x: f64, order: u8) -> Result<f64, PolyError> {
    family.check_domain(x)?;
    if !(1..=2).contains(&order) {
        return Err(PolyError::DerivativeOrder(order));
    }
    let mut fam = *family;
    let mut deg = degree;
    let mut scale = 1.0;
    for _ in 0..order {
        if deg == 0 {
            return Ok(0.0);
        }
        let (next, factor) = fam.derivative_family(deg);
        scale *= factor;
        fam = next;
        deg -= 1;
    }
    Ok(scale * eval_unchecked(fam.0, deg, x))
}

/// Squared weighted L² norm `∫ w(x) p_n(x)² dx`.
pub fn poly_norm_sq(family: &PolyFamily, degree: u32) -> f64 {
    let n = degree as f64;
    match family.0 {
        FamilyKind::Gegenbauer { alpha } => {
            // π 2^{1-2α} Γ(n+2α) / (n! (n+α) Γ(α)²)
            let (lg_num, s_num) = ln_gamma(n + 2.0 * alpha);
            let (lg_a, _) = ln_gamma(alpha);
            let (lg_fact, _) = ln_gamma(n + 1.0);
            let mag = (PI.ln() + (1.0 - 2.0 * alpha) * std::f64::consts::LN_2 + lg_num - lg_fact - 2.0 * lg_a).exp();
            s_num * mag / (n + alpha)
        }
        FamilyKind::Jacobi { a, b } => {
            if degree == 0 {
                return jacobi_mass(a, b);
            }
            let (l1, _) = ln_gamma(n + a + 1.0);
            let (l2, _) = ln_gamma(n + b + 1.0);
            let (l3, _) = ln_gamma(n + a + b + 1.0);
            let (l4, _) = ln_gamma(n + 1.0);
            ((a + b + 1.0) * std::f64::consts::LN_2 + l1 + l2 - l3 - l4).exp() / (2.0 * n + a + b + 1.0)
        }
        FamilyKind::Laguerre { alpha } => {
            let (l1, _) = ln_gamma(n + alpha + 1.0);
            let (l2, _) = ln_gamma(n + 1.0);
            (l1 - l2).exp()
        }
    }
}

/// An `n`-point Gauss rule for a family's weight.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub family: PolyFamily,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)`, approximating `∫ w(x) f(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Gauss rule via Golub-Welsch: nodes are the eigenvalues of the symmetric
/// Jacobi matrix, weights the weight mass times squared first eigenvector
/// components.
pub fn gauss_rule(family: &PolyFamily, n: usize) -> Result<QuadratureRule, PolyError> {
    if n == 0 {
        return Err(PolyError::EmptyRule);
    }
    let (diag, off_sq) = family.recurrence_matrix(n);
    let off: Vec<f64> = off_sq.iter().map(|v| v.sqrt()).collect();
    let (nodes, first) = tridiag::eigen_first_row(&diag, &off)?;
    let mass = family.weight_mass();
    let weights = first.iter().map(|z| mass * z * z).collect();
    Ok(QuadratureRule { nodes, weights, family: *family })
}

fn jacobi_mass(a: f64, b: f64) -> f64 {
    let (l1, _) = ln_gamma(a + 1.0);
    let (l2, _) = ln_gamma(b + 1.0);
    let (l3, _) = ln_gamma(a + b + 2.0);
    ((a + b + 1.0) * std::f64::consts::LN_2 + l1 + l2 - l3).exp()
}

/// `(ln|Γ(x)|, sign Γ(x))`.
pub(crate) fn ln_gamma(x: f64) -> (f64, f64) {
    let (v, sign) = libm::lgamma_r(x);
    (v, if sign < 0 { -1.0 } else { 1.0 })
}

pub(crate) fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}
