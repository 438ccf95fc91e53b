//! Stewart-Sun eigenvalue condition numbers, eigenpair backward errors, the
//! exact quotients they satisfy under a Mobius transformation, and the
//! degree/conditioning bounds sandwiching those quotients.
//!
//! All quantities are invariant under rescaling of the eigenvalue
//! representative, except that the quotient formulas require the transformed
//! representative to be exactly `A^-1 [alpha0, beta0]^T`; they compute it
//! internally from the supplied representative.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::eigen::{eigenvalues, eigenvectors, EigenTriple};
use crate::error::{Error, Result};
use crate::mobius::{binom, mobius_transform, Mobius2x2, ProjPoint};
use crate::poly::{HomMatrixPolynomial, WeightScheme};

/// Magnitudes below this are treated as exact zeros when deciding whether a
/// denominator or an extreme coefficient vanishes.
pub const ZERO_THRESHOLD: f64 = 1e-300;

/// Which sensitivity quotient a record or bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotientKind {
    /// Quotient of Stewart-Sun condition numbers, transformed over original.
    CondTheta,
    /// Quotient of right eigenpair backward errors, original over transformed.
    BackwardRight,
    /// Quotient of left eigenpair backward errors; equals the right quotient.
    BackwardLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

/// `sum_i |alpha|^i |beta|^(k-i) w_i` for a representative and weight list.
fn weighted_sum(rep: &ProjPoint, weights: &[f64]) -> f64 {
    let k = weights.len() - 1;
    let a = rep.alpha().norm();
    let b = rep.beta().norm();
    weights
        .iter()
        .enumerate()
        .map(|(i, w)| a.powi(i as i32) * b.powi((k - i) as i32) * w)
        .sum()
}

/// Stewart-Sun condition number of the eigenvalue held by `triple`:
///
/// `(sum_i |a0|^i |b0|^(k-i) w_i) ||y|| ||x|| / |y^* (conj(b0) D_a P - conj(a0) D_b P) x|`
///
/// evaluated at the triple's representative. Returns infinity when the
/// denominator underflows, which signals a non-simple or pathological
/// eigenvalue.
pub fn stewart_sun_condition(
    p: &HomMatrixPolynomial,
    triple: &EigenTriple,
    scheme: WeightScheme,
) -> f64 {
    let rep = &triple.value;
    let num = weighted_sum(rep, &scheme.weights(p));
    let da = p.eval_d_alpha(rep);
    let db = p.eval_d_beta(rep);
    let bc = rep.beta().conj();
    let ac = rep.alpha().conj();
    let mix = da.map(|z| z * bc) - db.map(|z| z * ac);
    let denom = (triple.left.adjoint() * mix * &triple.right)[(0, 0)].norm();
    if denom < ZERO_THRESHOLD {
        return f64::INFINITY;
    }
    num * triple.left.norm() * triple.right.norm() / denom
}

/// Backward error of an approximate eigenpair `(vec, approx)`:
/// `||P(a,b) x|| / ((sum_i |a|^i |b|^(k-i) w_i) ||x||)` for the right side,
/// with `y^* P(a,b)` in the numerator for the left side.
pub fn backward_error(
    p: &HomMatrixPolynomial,
    vec: &DVector<Complex64>,
    side: Side,
    approx: &ProjPoint,
    scheme: WeightScheme,
) -> Result<f64> {
    if vec.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let m = p.evaluate(approx);
    let resid = match side {
        Side::Right => (&m * vec).norm(),
        Side::Left => (vec.adjoint() * &m).norm(),
    };
    let s = weighted_sum(approx, &scheme.weights(p));
    if s < ZERO_THRESHOLD {
        return Ok(f64::INFINITY);
    }
    Ok(resid / (s * vec.norm()))
}

/// Exact quotient of Stewart-Sun condition numbers between the eigenvalue of
/// `M_A(P)` associated with `rep` and the eigenvalue of `P` at `rep`:
///
/// `[sum_i |g|^i |d|^(k-i) wt_i / (|det A| sum_i |a|^i |b|^(k-i) w_i)]
///  * (|a|^2 + |b|^2) / (|g|^2 + |d|^2)`
///
/// with `[g, d] = A^-1 [a, b]`, weights `w` from `P` and `wt` from `M_A(P)`.
pub fn quotient_exact(
    a: &Mobius2x2,
    p: &HomMatrixPolynomial,
    p_tilde: &HomMatrixPolynomial,
    rep: &ProjPoint,
    scheme: WeightScheme,
) -> f64 {
    let mapped = a.map_eigenvalue(rep);
    let num = weighted_sum(&mapped, &scheme.weights(p_tilde));
    let den = a.det().norm() * weighted_sum(rep, &scheme.weights(p));
    let norm_ratio = (rep.norm() / mapped.norm()).powi(2);
    if den < ZERO_THRESHOLD {
        return f64::INFINITY;
    }
    (num / den) * norm_ratio
}

/// Exact common value of the right and left backward-error quotients for an
/// approximate eigenvalue `rep_hat` of `M_A(P)`:
/// `sum_i |g|^i |d|^(k-i) wt_i / sum_i |a|^i |b|^(k-i) w_i` with
/// `[a, b] = A [g, d]`. Independent of the approximate eigenvectors.
pub fn quotient_backward(
    a: &Mobius2x2,
    p: &HomMatrixPolynomial,
    p_tilde: &HomMatrixPolynomial,
    rep_hat: &ProjPoint,
    scheme: WeightScheme,
) -> f64 {
    let pushed = a.push_eigenvalue(rep_hat);
    let num = weighted_sum(rep_hat, &scheme.weights(p_tilde));
    let den = weighted_sum(&pushed, &scheme.weights(p));
    if den < ZERO_THRESHOLD {
        return f64::INFINITY;
    }
    num / den
}

/// `rho = max_i ||B_i|| / min(||B_0||, ||B_k||)`; undefined (and infinite)
/// when either extreme coefficient is zero.
#[derive(Debug, Clone, Copy)]
pub struct RhoFactor {
    pub value: f64,
    pub defined: bool,
}

pub fn rho_factors(p: &HomMatrixPolynomial) -> RhoFactor {
    let norms = p.coefficient_norms();
    let k = p.degree();
    let ends = norms[0].min(norms[k]);
    if ends < ZERO_THRESHOLD {
        return RhoFactor {
            value: f64::INFINITY,
            defined: false,
        };
    }
    let max = norms.iter().fold(0.0f64, |m, &x| m.max(x));
    RhoFactor {
        value: max / ends,
        defined: true,
    }
}

/// `S_k = 4(k+1)`.
pub fn s_factor(k: usize) -> f64 {
    4.0 * (k as f64 + 1.0)
}

/// `Z_k = 4(k+1)^2 C(k, floor(k/2))`.
pub fn z_factor(k: usize) -> f64 {
    let central = binom(k, (k / 2) as isize).expect("degree capped") as f64;
    4.0 * ((k + 1) * (k + 1)) as f64 * central
}

/// `Y_k = (k+1)^2 C(k, floor(k/2))`.
pub fn y_factor(k: usize) -> f64 {
    let central = binom(k, (k / 2) as isize).expect("degree capped") as f64;
    ((k + 1) * (k + 1)) as f64 * central
}

/// An eigenvalue-independent or eigenvalue-dependent sandwich `[lower, upper]`.
/// `available` is false when the coefficientwise variant lacks a defined rho.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
    pub available: bool,
}

impl Bounds {
    fn unavailable() -> Bounds {
        Bounds {
            lower: f64::NAN,
            upper: f64::NAN,
            available: false,
        }
    }

    fn coefficientwise_envelope(
        base: Bounds,
        p: &HomMatrixPolynomial,
        p_tilde: &HomMatrixPolynomial,
    ) -> Bounds {
        let rho = rho_factors(p);
        let rho_t = rho_factors(p_tilde);
        if !rho.defined || !rho_t.defined {
            return Bounds::unavailable();
        }
        Bounds {
            lower: base.lower / rho_t.value,
            upper: base.upper * rho.value,
            available: true,
        }
    }
}

/// Eigenvalue-independent bounds on the condition-number quotient.
///
/// Absolute weights bound through `||A||_inf`, `||A^-1||_inf` and `S_k`;
/// polynomial-norm weights through `cond_inf(A)` and `Z_k`; coefficientwise
/// weights take the polynomial-norm bounds with the lower one divided by
/// `rho~` and the upper one multiplied by `rho`.
pub fn bounds_cond(
    a: &Mobius2x2,
    p: &HomMatrixPolynomial,
    p_tilde: &HomMatrixPolynomial,
    scheme: WeightScheme,
) -> Bounds {
    let k = p.degree();
    if k == 0 {
        return Bounds::unavailable();
    }
    let na = a.norm_inf();
    let nai = a.inverse().norm_inf();
    let cond = na * nai;
    let base = match scheme {
        WeightScheme::Absolute => {
            if k == 1 {
                Bounds {
                    lower: 1.0 / (2.0 * na),
                    upper: 2.0 * nai,
                    available: true,
                }
            } else {
                let s = s_factor(k);
                Bounds {
                    lower: nai / (s * na.powi(k as i32 - 1)),
                    upper: s * nai.powi(k as i32 - 1) / na,
                    available: true,
                }
            }
        }
        WeightScheme::PolyNorm | WeightScheme::Coefficientwise => {
            if k == 1 {
                Bounds {
                    lower: 1.0 / (4.0 * cond),
                    upper: 4.0 * cond,
                    available: true,
                }
            } else {
                let z = z_factor(k);
                Bounds {
                    lower: 1.0 / (z * cond.powi(k as i32 - 1)),
                    upper: z * cond.powi(k as i32 - 1),
                    available: true,
                }
            }
        }
    };
    match scheme {
        WeightScheme::Coefficientwise => Bounds::coefficientwise_envelope(base, p, p_tilde),
        _ => base,
    }
}

/// Sharper, eigenvalue-dependent bounds on the condition-number quotient.
///
/// For `k = 1` they scale with `||[a0,b0]||_1 / ||[g0,d0]||_1`; for `k >= 2`
/// with `(||[g0,d0]||_inf / ||[a0,b0]||_inf)^(k-2)`. Polynomial-norm weights
/// multiply both ends by the coefficient-max ratio of `M_A(P)` over `P`;
/// coefficientwise weights use the same rho envelope as [`bounds_cond`].
/// Always contained in the eigenvalue-independent bounds.
pub fn bounds_cond_sharp(
    a: &Mobius2x2,
    rep: &ProjPoint,
    p: &HomMatrixPolynomial,
    p_tilde: &HomMatrixPolynomial,
    scheme: WeightScheme,
) -> Bounds {
    let k = p.degree();
    if k == 0 {
        return Bounds::unavailable();
    }
    let det = a.det().norm();
    let mapped = a.map_eigenvalue(rep);
    let base = if k == 1 {
        let r1 = rep.norm_1() / mapped.norm_1();
        Bounds {
            lower: r1 / (2.0 * det),
            upper: 2.0 * r1 / det,
            available: true,
        }
    } else {
        let rinf = (mapped.norm_inf() / rep.norm_inf()).powi(k as i32 - 2);
        let f = 2.0 * (k as f64 + 1.0);
        Bounds {
            lower: rinf / (f * det),
            upper: f * rinf / det,
            available: true,
        }
    };
    let base = match scheme {
        WeightScheme::Absolute => base,
        WeightScheme::PolyNorm | WeightScheme::Coefficientwise => {
            let t = p_tilde.inf_norm() / p.inf_norm();
            Bounds {
                lower: base.lower * t,
                upper: base.upper * t,
                available: true,
            }
        }
    };
    match scheme {
        WeightScheme::Coefficientwise => Bounds::coefficientwise_envelope(base, p, p_tilde),
        _ => base,
    }
}

/// Eigenvalue-independent bounds on the backward-error quotient, valid for
/// every degree without a case split: absolute weights give
/// `[1/((k+1)||A||_inf^k), (k+1)||A^-1||_inf^k]`, polynomial-norm weights give
/// `[1/(Y_k c^k), Y_k c^k]`, and coefficientwise weights take the rho envelope.
pub fn bounds_backward(
    a: &Mobius2x2,
    p: &HomMatrixPolynomial,
    p_tilde: &HomMatrixPolynomial,
    scheme: WeightScheme,
) -> Bounds {
    let k = p.degree();
    let na = a.norm_inf();
    let nai = a.inverse().norm_inf();
    let cond = na * nai;
    let base = match scheme {
        WeightScheme::Absolute => Bounds {
            lower: 1.0 / ((k as f64 + 1.0) * na.powi(k as i32)),
            upper: (k as f64 + 1.0) * nai.powi(k as i32),
            available: true,
        },
        WeightScheme::PolyNorm | WeightScheme::Coefficientwise => {
            let y = y_factor(k);
            Bounds {
                lower: 1.0 / (y * cond.powi(k as i32)),
                upper: y * cond.powi(k as i32),
                available: true,
            }
        }
    };
    match scheme {
        WeightScheme::Coefficientwise => Bounds::coefficientwise_envelope(base, p, p_tilde),
        _ => base,
    }
}

/// The simplified predictors obtained from the sharp bounds once the moderate
/// degree factors are dropped; useful for reading off the expected quotient
/// when `A` is ill conditioned.
#[derive(Debug, Clone, Copy)]
pub struct IllcondProfile {
    /// Predictor for the absolute quotient.
    pub absolute: f64,
    /// Predictor for the polynomial-norm-relative quotient.
    pub polynorm: f64,
}

pub fn illcond_profile(
    a: &Mobius2x2,
    rep: &ProjPoint,
    p: &HomMatrixPolynomial,
    p_tilde: &HomMatrixPolynomial,
) -> IllcondProfile {
    let k = p.degree();
    let det = a.det().norm();
    let mapped = a.map_eigenvalue(rep);
    let absolute = if k == 1 {
        rep.norm_1() / (mapped.norm_1() * det)
    } else {
        (mapped.norm_inf() / rep.norm_inf()).powi(k as i32 - 2) / det
    };
    IllcondProfile {
        absolute,
        polynorm: absolute * p_tilde.inf_norm() / p.inf_norm(),
    }
}

/// Everything measured about one eigenvalue of one `(P, A)` pair under one
/// weight scheme.
#[derive(Debug, Clone)]
pub struct SensitivityRecord {
    pub kind: QuotientKind,
    pub scheme: WeightScheme,
    /// Representative of the eigenvalue of `P` (for backward records, the
    /// pushed approximate eigenvalue `A [g, d]`).
    pub eigenvalue: ProjPoint,
    /// Representative of the associated eigenvalue of `M_A(P)`; always equals
    /// `A^-1` applied to `eigenvalue`.
    pub mapped: ProjPoint,
    /// Condition number of (or backward error with respect to) `P`.
    pub kappa_p: f64,
    /// Same quantity for `M_A(P)`.
    pub kappa_map: f64,
    /// Quotient from the closed-form expression.
    pub q_exact: f64,
    /// Quotient assembled from the two directly computed sensitivities.
    pub q_direct: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_sharp: f64,
    pub upper_sharp: f64,
    pub bounds_available: bool,
    pub rho: f64,
    pub rho_tilde: f64,
    pub cond_inf_a: f64,
    pub det_abs: f64,
    pub s_k: f64,
    pub z_k: f64,
    pub y_k: f64,
    /// True when every eigenpair involved passed the cluster and residual
    /// checks.
    pub simple: bool,
}

impl SensitivityRecord {
    /// Builds the condition-number record for one simple eigenvalue of `P`,
    /// extracting the transformed eigenpair at the associated representative.
    pub fn conditioning(
        a: &Mobius2x2,
        p: &HomMatrixPolynomial,
        p_tilde: &HomMatrixPolynomial,
        triple: &EigenTriple,
        scheme: WeightScheme,
    ) -> Result<SensitivityRecord> {
        let rep = triple.value;
        let mapped = a.map_eigenvalue(&rep);
        let triple_t = eigenvectors(p_tilde, &mapped)?;
        let kappa_p = stewart_sun_condition(p, triple, scheme);
        let kappa_map = stewart_sun_condition(p_tilde, &triple_t, scheme);
        let bounds = bounds_cond(a, p, p_tilde, scheme);
        let sharp = bounds_cond_sharp(a, &rep, p, p_tilde, scheme);
        Ok(SensitivityRecord {
            kind: QuotientKind::CondTheta,
            scheme,
            eigenvalue: rep,
            mapped,
            kappa_p,
            kappa_map,
            q_exact: quotient_exact(a, p, p_tilde, &rep, scheme),
            q_direct: kappa_map / kappa_p,
            lower: bounds.lower,
            upper: bounds.upper,
            lower_sharp: sharp.lower,
            upper_sharp: sharp.upper,
            bounds_available: bounds.available && sharp.available,
            rho: rho_factors(p).value,
            rho_tilde: rho_factors(p_tilde).value,
            cond_inf_a: a.cond_inf(),
            det_abs: a.det().norm(),
            s_k: s_factor(p.degree()),
            z_k: z_factor(p.degree()),
            y_k: y_factor(p.degree()),
            simple: triple.is_simple() && triple_t.is_simple(),
        })
    }

    /// Builds the backward-error record for one approximate eigenpair of
    /// `M_A(P)`. The right eigenvector of `triple_tilde` feeds the direct
    /// ratio; the closed form is vector-independent.
    pub fn backward(
        a: &Mobius2x2,
        p: &HomMatrixPolynomial,
        p_tilde: &HomMatrixPolynomial,
        triple_tilde: &EigenTriple,
        scheme: WeightScheme,
    ) -> Result<SensitivityRecord> {
        let rep_hat = triple_tilde.value;
        let pushed = a.push_eigenvalue(&rep_hat);
        let eta_map = backward_error(p_tilde, &triple_tilde.right, Side::Right, &rep_hat, scheme)?;
        let eta_p = backward_error(p, &triple_tilde.right, Side::Right, &pushed, scheme)?;
        let bounds = bounds_backward(a, p, p_tilde, scheme);
        Ok(SensitivityRecord {
            kind: QuotientKind::BackwardRight,
            scheme,
            eigenvalue: pushed,
            mapped: rep_hat,
            kappa_p: eta_p,
            kappa_map: eta_map,
            q_exact: quotient_backward(a, p, p_tilde, &rep_hat, scheme),
            q_direct: eta_p / eta_map,
            lower: bounds.lower,
            upper: bounds.upper,
            // No sharper eigenvalue-dependent theorem exists for backward
            // quotients; the plain bounds stand in for both.
            lower_sharp: bounds.lower,
            upper_sharp: bounds.upper,
            bounds_available: bounds.available,
            rho: rho_factors(p).value,
            rho_tilde: rho_factors(p_tilde).value,
            cond_inf_a: a.cond_inf(),
            det_abs: a.det().norm(),
            s_k: s_factor(p.degree()),
            z_k: z_factor(p.degree()),
            y_k: y_factor(p.degree()),
            simple: triple_tilde.is_simple(),
        })
    }

    /// True when the record can participate in assertions: all sensitivities
    /// finite, bounds available, and every involved eigenpair simple.
    pub fn is_clean(&self) -> bool {
        self.simple
            && self.bounds_available
            && self.kappa_p.is_finite()
            && self.kappa_map.is_finite()
            && self.q_exact.is_finite()
            && self.q_direct.is_finite()
    }
}

/// Condition-number records for every eigenvalue of `P`, flagged rows
/// included. The record order follows the eigensolver output.
pub fn analyze_polynomial(
    a: &Mobius2x2,
    p: &HomMatrixPolynomial,
    scheme: WeightScheme,
) -> Result<Vec<SensitivityRecord>> {
    let p_tilde = mobius_transform(a, p);
    let vals = eigenvalues(p)?;
    let mut out = Vec::with_capacity(vals.len());
    for v in &vals {
        let triple = eigenvectors(p, v)?;
        out.push(SensitivityRecord::conditioning(
            a, p, &p_tilde, &triple, scheme,
        )?);
    }
    Ok(out)
}
