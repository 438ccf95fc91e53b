//! Homogeneous complex matrix polynomials `P(alpha, beta) = sum_i alpha^i beta^(k-i) B_i`
//! stored densely by their `k+1` matrix coefficients, together with evaluation,
//! partial derivatives, norms and the coefficient weight schemes used by the
//! sensitivity formulas.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobius::ProjPoint;

pub type CMatrix = DMatrix<Complex64>;

/// Library-wide degree cap; binomial tables are precomputed up to this value.
pub const MAX_DEGREE: usize = 30;

/// Largest singular value of a complex matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    m.singular_values()[0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomMatrixPolynomial {
    coeffs: Vec<CMatrix>,
    rows: usize,
    cols: usize,
}

impl HomMatrixPolynomial {
    /// Builds a degree `coeffs.len() - 1` polynomial; index `i` holds the
    /// coefficient of the monomial `alpha^i beta^(k-i)`.
    ///
    /// The all-zero coefficient list is rejected: such a polynomial has no
    /// well-defined degree. A zero leading coefficient is allowed.
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self> {
        let first = coeffs.first().ok_or(Error::DimensionMismatch)?;
        let (rows, cols) = (first.nrows(), first.ncols());
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch);
        }
        if coeffs.iter().any(|c| c.nrows() != rows || c.ncols() != cols) {
            return Err(Error::DimensionMismatch);
        }
        if coeffs.len() - 1 > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(coeffs.len() - 1));
        }
        if coeffs.iter().all(|c| c.iter().all(|z| z.norm() == 0.0)) {
            return Err(Error::ZeroPolynomial);
        }
        Ok(HomMatrixPolynomial { coeffs, rows, cols })
    }

    /// Constructor for coefficient lists produced by maps that preserve
    /// validity (Mobius transforms, scalings by nonzero constants).
    pub(crate) fn from_parts(coeffs: Vec<CMatrix>, rows: usize, cols: usize) -> Self {
        debug_assert!(!coeffs.is_empty());
        debug_assert!(coeffs.iter().all(|c| c.nrows() == rows && c.ncols() == cols));
        HomMatrixPolynomial { coeffs, rows, cols }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn coeff(&self, i: usize) -> &CMatrix {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// Spectral norms of all coefficients, index-aligned.
    pub fn coefficient_norms(&self) -> Vec<f64> {
        self.coeffs.iter().map(spectral_norm).collect()
    }

    /// `max_i ||B_i||_2`.
    pub fn inf_norm(&self) -> f64 {
        self.coefficient_norms()
            .into_iter()
            .fold(0.0f64, f64::max)
    }

    /// Evaluates the polynomial at a representative of `pt`.
    ///
    /// Uses Horner recurrences in the ratio of the smaller to the larger
    /// component so no intermediate power exceeds the magnitude of the result.
    pub fn evaluate(&self, pt: &ProjPoint) -> CMatrix {
        eval_coeff_seq(&self.coeffs, self.rows, self.cols, pt.alpha(), pt.beta())
    }

    /// Partial derivative with respect to the first variable, evaluated at `pt`.
    /// Zero for degree-0 polynomials.
    pub fn eval_d_alpha(&self, pt: &ProjPoint) -> CMatrix {
        let k = self.degree();
        if k == 0 {
            return CMatrix::zeros(self.rows, self.cols);
        }
        let coeffs: Vec<CMatrix> = (0..k)
            .map(|j| self.coeffs[j + 1].scale((j + 1) as f64))
            .collect();
        eval_coeff_seq(&coeffs, self.rows, self.cols, pt.alpha(), pt.beta())
    }

    /// Partial derivative with respect to the second variable, evaluated at `pt`.
    pub fn eval_d_beta(&self, pt: &ProjPoint) -> CMatrix {
        let k = self.degree();
        if k == 0 {
            return CMatrix::zeros(self.rows, self.cols);
        }
        let coeffs: Vec<CMatrix> = (0..k)
            .map(|j| self.coeffs[j].scale((k - j) as f64))
            .collect();
        eval_coeff_seq(&coeffs, self.rows, self.cols, pt.alpha(), pt.beta())
    }

    /// Multiplies every coefficient by the complex scalar `c`.
    pub fn scale(&self, c: Complex64) -> HomMatrixPolynomial {
        let coeffs = self.coeffs.iter().map(|m| m.map(|z| z * c)).collect();
        HomMatrixPolynomial::from_parts(coeffs, self.rows, self.cols)
    }

    pub fn to_json_string(&self) -> String {
        let doc = PolyDocument::from(self);
        serde_json::to_string_pretty(&doc).expect("polynomial document serializes")
    }

    /// Parses the JSON document format
    /// `{"k": int, "rows": int, "cols": int, "coeffs": [[[re, im], ...], ...]}`
    /// with `coeffs[i]` holding `B_i` in row-major order. Never panics on
    /// malformed input.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: PolyDocument = serde_json::from_str(s)?;
        doc.try_into()
    }
}

/// Horner evaluation of `sum_i alpha^i beta^(k-i) C_i` for an arbitrary
/// coefficient sequence, factoring out the dominant component.
fn eval_coeff_seq(
    coeffs: &[CMatrix],
    rows: usize,
    cols: usize,
    alpha: Complex64,
    beta: Complex64,
) -> CMatrix {
    let k = coeffs.len() - 1;
    if k == 0 {
        return coeffs[0].clone();
    }
    let mut acc = CMatrix::zeros(rows, cols);
    if alpha.norm() >= beta.norm() {
        // alpha^k * sum_i C_i w^(k-i) with w = beta/alpha.
        let w = beta / alpha;
        acc.copy_from(&coeffs[0]);
        for c in coeffs.iter().skip(1) {
            acc = acc.map(|z| z * w) + c;
        }
        acc.map(|z| z * alpha.powu(k as u32))
    } else {
        // beta^k * sum_i C_i w^i with w = alpha/beta.
        let w = alpha / beta;
        acc.copy_from(&coeffs[k]);
        for c in coeffs.iter().rev().skip(1) {
            acc = acc.map(|z| z * w) + c;
        }
        acc.map(|z| z * beta.powu(k as u32))
    }
}

/// Choice of weights `omega_i` in condition numbers and backward errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightScheme {
    /// `omega_i = 1`.
    Absolute,
    /// `omega_i = ||P||_inf`, perturbations relative to the whole polynomial.
    PolyNorm,
    /// `omega_i = ||B_i||_2`, coefficientwise relative perturbations.
    Coefficientwise,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 3] = [
        WeightScheme::Absolute,
        WeightScheme::PolyNorm,
        WeightScheme::Coefficientwise,
    ];

    pub fn weights(&self, p: &HomMatrixPolynomial) -> Vec<f64> {
        let k = p.degree();
        match self {
            WeightScheme::Absolute => vec![1.0; k + 1],
            WeightScheme::PolyNorm => vec![p.inf_norm(); k + 1],
            WeightScheme::Coefficientwise => p.coefficient_norms(),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            WeightScheme::Absolute => "absolute",
            WeightScheme::PolyNorm => "polynorm",
            WeightScheme::Coefficientwise => "coefficientwise",
        }
    }
}

impl std::str::FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" | "a" => Ok(WeightScheme::Absolute),
            "polynorm" | "p" => Ok(WeightScheme::PolyNorm),
            "coefficientwise" | "r" => Ok(WeightScheme::Coefficientwise),
            other => Err(Error::InvalidConfig(format!(
                "unknown weight scheme `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Serialize, Deserialize)]
struct PolyDocument {
    k: u32,
    rows: u32,
    cols: u32,
    coeffs: Vec<Vec<[f64; 2]>>,
}

impl From<&HomMatrixPolynomial> for PolyDocument {
    fn from(p: &HomMatrixPolynomial) -> Self {
        let coeffs = p
            .coeffs
            .iter()
            .map(|m| {
                let mut flat = Vec::with_capacity(p.rows * p.cols);
                for r in 0..p.rows {
                    for c in 0..p.cols {
                        let z = m[(r, c)];
                        flat.push([z.re, z.im]);
                    }
                }
                flat
            })
            .collect();
        PolyDocument {
            k: p.degree() as u32,
            rows: p.rows as u32,
            cols: p.cols as u32,
            coeffs,
        }
    }
}

impl TryFrom<PolyDocument> for HomMatrixPolynomial {
    type Error = Error;

    fn try_from(doc: PolyDocument) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidPolyDocument(msg.to_string());
        if doc.rows == 0 || doc.cols == 0 {
            return Err(bad("rows and cols must be positive"));
        }
        if doc.k as usize > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(doc.k as usize));
        }
        if doc.coeffs.len() != doc.k as usize + 1 {
            return Err(bad("coeffs must hold exactly k+1 matrices"));
        }
        let entries = (doc.rows as u64)
            .checked_mul(doc.cols as u64)
            .filter(|n| *n <= 1 << 24)
            .ok_or_else(|| bad("matrix dimensions too large"))?;
        let mut coeffs = Vec::with_capacity(doc.coeffs.len());
        for flat in &doc.coeffs {
            if flat.len() as u64 != entries {
                return Err(bad("coefficient entry count must equal rows*cols"));
            }
            if flat.iter().any(|[re, im]| !re.is_finite() || !im.is_finite()) {
                return Err(bad("coefficient entries must be finite"));
            }
            let data: Vec<Complex64> = flat.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
            coeffs.push(CMatrix::from_row_slice(
                doc.rows as usize,
                doc.cols as usize,
                &data,
            ));
        }
        HomMatrixPolynomial::new(coeffs)
    }
}
