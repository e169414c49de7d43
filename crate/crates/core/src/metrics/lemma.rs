//! Numerical audit of the dissipation inequality behind the `W̃_p`
//! contraction: for a mean-zero `Φ` with `|Φ| < π/2`,
//!
//! ```text
//! ∫∫ [ψ(Φ) − ψ(Φ*)] sin((Φ* − Φ)/2) ≤ −(2/π) ∫ |Φ|^p,   ψ(x) = |x|^{p−1} sgn x
//! ```
//!
//! with all integrals taken as lattice quadratures `Σ w_i (·)`.
//!
//! The double sum factors through `sin((b − a)/2) = s_b c_a − c_b s_a`
//! (`s = sin(Φ/2)`, `c = cos(Φ/2)`), so both sides cost `O(L)`.

use crate::error::{Error, Result};
use crate::measure::OmegaGrid;
use crate::scalar::{as_f64, cast, count, tree_sum_by, Scalar};
use serde::Serialize;

/// Quadrature weights `g(Ω_k) ΔΩ_k / M_η` in fiber-major lattice order.
pub fn lattice_weights<T: Scalar>(grid: &OmegaGrid<T>, m_eta: usize) -> Vec<T> {
    let mut w = Vec::with_capacity(grid.len() * m_eta);
    for k in 0..grid.len() {
        w.extend(std::iter::repeat_n(grid.fiber_mass(k) / count(m_eta), m_eta));
    }
    w
}

/// Subtracts the weighted mean.
pub fn project_mean_zero<T: Scalar>(phi: &[T], weights: &[T]) -> Vec<T> {
    let total = tree_sum_by(weights.iter(), |&w| w);
    let mean = tree_sum_by(0..phi.len(), |i| weights[i] * phi[i]) / total;
    phi.iter().map(|&v| v - mean).collect()
}

/// Zero-mean field with the same sign pattern: the heavier of the positive
/// and negative parts is shrunk to balance the lighter one. Exact zeros stay
/// zero.
pub fn balance_signs<T: Scalar>(phi: &[T], weights: &[T]) -> Result<Vec<T>> {
    let pos = tree_sum_by(0..phi.len(), |i| weights[i] * phi[i].max(T::zero()));
    let neg = tree_sum_by(0..phi.len(), |i| weights[i] * (-phi[i]).max(T::zero()));
    if pos == T::zero() && neg == T::zero() {
        return Ok(phi.to_vec());
    }
    if pos == T::zero() || neg == T::zero() {
        return Err(Error::MeanNotZero(as_f64(pos - neg)));
    }
    let (sp, sn) = if pos > neg {
        (neg / pos, T::one())
    } else {
        (T::one(), pos / neg)
    };
    Ok(phi
        .iter()
        .map(|&v| if v > T::zero() { v * sp } else { v * sn })
        .collect())
}

/// Rescales so that `max |Φ| ≤ limit`; leaves smaller fields alone.
pub fn fit_to_range<T: Scalar>(phi: &[T], limit: T) -> Vec<T> {
    let peak = phi.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if peak <= limit {
        return phi.to_vec();
    }
    let scale = limit / peak;
    phi.iter().map(|&v| v * scale).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignClass {
    Positive,
    Zero,
    Negative,
}

impl SignClass {
    fn of<T: Scalar>(x: T) -> Self {
        if x > T::zero() {
            SignClass::Positive
        } else if x < T::zero() {
            SignClass::Negative
        } else {
            SignClass::Zero
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            SignClass::Positive => "P",
            SignClass::Zero => "Z",
            SignClass::Negative => "N",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// One block of the sign decomposition: `starred` is the class of `Φ*`,
/// `unstarred` the class of `Φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseAudit<T> {
    pub case: &'static str,
    pub starred: SignClass,
    pub unstarred: SignClass,
    pub value: T,
    pub bound: T,
    pub holds: bool,
}

const SLACK: f64 = 1e-10;
const MEAN_TOL: f64 = 1e-12;

fn signed_power<T: Scalar>(x: T, p: T) -> T {
    match SignClass::of(x) {
        SignClass::Zero => T::zero(),
        SignClass::Positive => x.powf(p - T::one()),
        SignClass::Negative => -(-x).powf(p - T::one()),
    }
}

fn validate<T: Scalar>(phi: &[T], weights: &[T], p: T) -> Result<()> {
    if phi.len() != weights.len() {
        return Err(Error::LatticeMismatch(format!(
            "{} values vs {} weights",
            phi.len(),
            weights.len()
        )));
    }
    if !(p >= T::one()) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "order p = {} must be finite and >= 1",
            as_f64(p)
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= T::zero())) {
        return Err(Error::InvalidParameter(format!("negative weight {}", as_f64(*w))));
    }
    let peak = phi.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if !(peak < T::FRAC_PI_2()) {
        return Err(Error::RangeViolation(as_f64(peak)));
    }
    let mean = tree_sum_by(0..phi.len(), |i| weights[i] * phi[i]);
    if mean.abs() > cast(MEAN_TOL) {
        return Err(Error::MeanNotZero(as_f64(mean)));
    }
    Ok(())
}

/// Weighted sums over one sign class.
#[derive(Default, Clone, Copy)]
struct Sums<T> {
    // Σ w, Σ w|Φ|, Σ w|Φ|^{p−1}, Σ w|Φ|^p
    mass: T,
    abs1: T,
    abs_pm1: T,
    abs_p: T,
    // Σ w s, Σ w c, Σ w ψ s, Σ w ψ c
    s: T,
    c: T,
    psi_s: T,
    psi_c: T,
}

fn class_sums<T: Scalar>(phi: &[T], weights: &[T], p: T, class: Option<SignClass>) -> Sums<T> {
    let idx: Vec<usize> = (0..phi.len())
        .filter(|&i| class.is_none_or(|c| SignClass::of(phi[i]) == c))
        .collect();
    let half = cast::<T>(0.5);
    let f = |g: &dyn Fn(T) -> T| tree_sum_by(idx.iter(), |&i| weights[i] * g(phi[i]));
    Sums {
        mass: f(&|_| T::one()),
        abs1: f(&|x| x.abs()),
        abs_pm1: f(&|x| if x == T::zero() { T::zero() } else { x.abs().powf(p - T::one()) }),
        abs_p: f(&|x| if x == T::zero() { T::zero() } else { x.abs().powf(p) }),
        s: f(&|x| (x * half).sin()),
        c: f(&|x| (x * half).cos()),
        psi_s: f(&|x| signed_power(x, p) * (x * half).sin()),
        psi_c: f(&|x| signed_power(x, p) * (x * half).cos()),
    }
}

/// `Σ_{Φ ∈ B} Σ_{Φ* ∈ A} w w* [ψ(Φ) − ψ(Φ*)] sin((Φ* − Φ)/2)`.
fn block<T: Scalar>(a: &Sums<T>, b: &Sums<T>) -> T {
    b.psi_c * a.s - b.psi_s * a.c - a.psi_s * b.c + a.psi_c * b.s
}

/// Evaluates both sides of the inequality.
pub fn lemma_cal_check<T: Scalar>(phi: &[T], weights: &[T], p: T) -> Result<LemmaCheck<T>> {
    validate(phi, weights, p)?;
    let all = class_sums(phi, weights, p, None);
    let lhs = block(&all, &all);
    let rhs = -cast::<T>(2.0) / T::PI() * all.abs_p;
    Ok(LemmaCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + cast(SLACK),
    })
}

/// Splits the left side into the nine sign blocks `I(A, B)` and checks each
/// against its individual bound.
pub fn lemma_cal_check_cases<T: Scalar>(phi: &[T], weights: &[T], p: T) -> Result<Vec<CaseAudit<T>>> {
    use SignClass::*;
    validate(phi, weights, p)?;
    let sums = |c| class_sums(phi, weights, p, Some(c));
    let (sp, sz, sn) = (sums(Positive), sums(Zero), sums(Negative));
    let pick = |c: SignClass| match c {
        Positive => sp,
        Zero => sz,
        Negative => sn,
    };
    let inv_pi = T::FRAC_1_PI();
    let two = cast::<T>(2.0);
    let table: [(&str, SignClass, SignClass); 9] = [
        ("I", Positive, Zero),
        ("II", Negative, Zero),
        ("III", Zero, Positive),
        ("IV", Zero, Negative),
        ("V", Positive, Negative),
        ("VI", Negative, Positive),
        ("VII", Positive, Positive),
        ("VIII", Negative, Negative),
        ("IX", Zero, Zero),
    ];
    Ok(table
        .iter()
        .map(|&(case, starred, unstarred)| {
            let a = pick(starred);
            let b = pick(unstarred);
            let bound = match (starred, unstarred) {
                (Zero, Zero) => T::zero(),
                (Zero, x) | (x, Zero) => -sz.mass * inv_pi * pick(x).abs_p,
                (x, y) if x == y => {
                    let s = pick(x);
                    -inv_pi * (two * s.mass * s.abs_p - two * s.abs_pm1 * s.abs1)
                }
                _ => {
                    -inv_pi
                        * (sp.mass * sn.abs_p
                            + sn.mass * sp.abs_p
                            + sn.abs_pm1 * sp.abs1
                            + sp.abs_pm1 * sn.abs1)
                }
            };
            let value = block(&a, &b);
            CaseAudit {
                case,
                starred,
                unstarred,
                value,
                bound,
                holds: value <= bound + cast(SLACK),
            }
        })
        .collect())
}
