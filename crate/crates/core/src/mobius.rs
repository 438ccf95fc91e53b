//! Mobius transformations of homogeneous matrix polynomials.
//!
//! An invertible 2x2 matrix `A = [[a, b], [c, d]]` induces the coefficient map
//! `M_A(P)(gamma, delta) = sum_i (a*gamma + b*delta)^i (c*gamma + d*delta)^(k-i) B_i`.
//! The production path expands this through an explicit double-binomial formula
//! for the transformed coefficients; an independent interpolation route is kept
//! as a cross-check oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::{CDd, Dd};
use crate::error::{Error, Result};
use crate::poly::{CMatrix, HomMatrixPolynomial, MAX_DEGREE};

/// A representative `[alpha, beta]` of a line through the origin of C^2.
/// Homogeneous eigenvalues are such lines; all representatives differ by a
/// nonzero scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjPoint {
    alpha: Complex64,
    beta: Complex64,
}

impl ProjPoint {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() || (alpha.norm() == 0.0 && beta.norm() == 0.0) {
            return Err(Error::InvalidPoint);
        }
        Ok(ProjPoint { alpha, beta })
    }

    /// Internal constructor for points produced by nonsingular linear maps.
    pub(crate) fn raw(alpha: Complex64, beta: Complex64) -> Self {
        debug_assert!(alpha.norm() != 0.0 || beta.norm() != 0.0);
        ProjPoint { alpha, beta }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn norm(&self) -> f64 {
        self.alpha.norm().hypot(self.beta.norm())
    }

    pub fn norm_1(&self) -> f64 {
        self.alpha.norm() + self.beta.norm()
    }

    pub fn norm_inf(&self) -> f64 {
        self.alpha.norm().max(self.beta.norm())
    }

    /// Same line, representative multiplied by `t`.
    pub fn scaled(&self, t: Complex64) -> ProjPoint {
        debug_assert!(t.norm() > 0.0);
        ProjPoint::raw(self.alpha * t, self.beta * t)
    }

    /// Canonical representative: unit 2-norm with the first nonzero component
    /// rotated to the positive real axis.
    pub fn canonicalized(&self) -> ProjPoint {
        let n = self.norm();
        let (a, b) = (self.alpha / n, self.beta / n);
        let lead = if a.norm() > 0.0 { a } else { b };
        let phase = lead.conj() / lead.norm();
        ProjPoint::raw(a * phase, b * phase)
    }

    /// Chordal distance between the lines spanned by `self` and `other`:
    /// the sine of the principal angle, computed as
    /// `|u1 v2 - u2 v1| / (||u|| ||v||)`.
    pub fn chordal_distance(&self, other: &ProjPoint) -> f64 {
        let su = self.norm_inf();
        let sv = other.norm_inf();
        let (u1, u2) = (self.alpha / su, self.beta / su);
        let (v1, v2) = (other.alpha / sv, other.beta / sv);
        let cross = (u1 * v2 - u2 * v1).norm();
        let nu = u1.norm().hypot(u2.norm());
        let nv = v1.norm().hypot(v2.norm());
        (cross / (nu * nv)).clamp(0.0, 1.0)
    }
}

/// Element of GL(2, C) inducing a Mobius transformation, with cached
/// determinant.
///
/// Two exact norm identities of the adjugate hold for every such matrix and
/// are relied on when simplifying bounds:
/// `||adj(A)||_inf = ||A||_1` and `||adj(A)||_1 = ||A||_inf`, whence
/// `1/|det(A)| = ||A^-1||_inf/||A||_1 = ||A^-1||_1/||A||_inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius2x2 {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
    det: Complex64,
}

impl Mobius2x2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        if ![a, b, c, d].iter().all(|z| z.is_finite()) {
            return Err(Error::SingularMobius);
        }
        let det = a * d - b * c;
        if det.norm() == 0.0 || !det.is_finite() {
            return Err(Error::SingularMobius);
        }
        Ok(Mobius2x2 { a, b, c, d, det })
    }

    pub fn identity() -> Self {
        Self::from_real(1.0, 0.0, 0.0, 1.0)
    }

    /// `A_{+1} = [[1, 1], [-1, 1]]`, one of the two Cayley transformations.
    pub fn cayley_plus() -> Self {
        Self::from_real(1.0, 1.0, -1.0, 1.0)
    }

    /// `A_{-1} = [[1, -1], [1, 1]]`, the other Cayley transformation.
    pub fn cayley_minus() -> Self {
        Self::from_real(1.0, -1.0, 1.0, 1.0)
    }

    /// `R = [[0, 1], [1, 0]]`; `M_R` reverses the coefficient order.
    pub fn reversal() -> Self {
        Self::from_real(0.0, 1.0, 1.0, 0.0)
    }

    fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mobius2x2::new(
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(c, 0.0),
            Complex64::new(d, 0.0),
        )
        .expect("constant preset is invertible")
    }

    pub fn entries(&self) -> (Complex64, Complex64, Complex64, Complex64) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn det(&self) -> Complex64 {
        self.det
    }

    /// `adj(A) = [[d, -b], [-c, a]]`, so that `A^-1 = adj(A)/det(A)`.
    pub fn adjugate(&self) -> Mobius2x2 {
        Mobius2x2 {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
            det: self.det,
        }
    }

    pub fn inverse(&self) -> Mobius2x2 {
        let adj = self.adjugate();
        Mobius2x2 {
            a: adj.a / self.det,
            b: adj.b / self.det,
            c: adj.c / self.det,
            d: adj.d / self.det,
            det: Complex64::new(1.0, 0.0) / self.det,
        }
    }

    /// Maximum row sum of moduli.
    pub fn norm_inf(&self) -> f64 {
        (self.a.norm() + self.b.norm()).max(self.c.norm() + self.d.norm())
    }

    /// Maximum column sum of moduli.
    pub fn norm_1(&self) -> f64 {
        (self.a.norm() + self.c.norm()).max(self.b.norm() + self.d.norm())
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    /// `cond_inf(A) = ||A||_inf ||A^-1||_inf`.
    pub fn cond_inf(&self) -> f64 {
        self.norm_inf() * self.adjugate().norm_inf() / self.det.norm()
    }

    /// Representative of the eigenvalue of `M_A(P)` associated with `rep`:
    /// `A^-1 [alpha, beta]^T = [(d a0 - b b0)/det, (a b0 - c a0)/det]`.
    pub fn map_eigenvalue(&self, rep: &ProjPoint) -> ProjPoint {
        let gamma = (self.d * rep.alpha() - self.b * rep.beta()) / self.det;
        let delta = (self.a * rep.beta() - self.c * rep.alpha()) / self.det;
        ProjPoint::raw(gamma, delta)
    }

    /// Inverse of [`map_eigenvalue`](Self::map_eigenvalue): `A [gamma, delta]^T`.
    pub fn push_eigenvalue(&self, rep: &ProjPoint) -> ProjPoint {
        ProjPoint::raw(
            self.a * rep.alpha() + self.b * rep.beta(),
            self.c * rep.alpha() + self.d * rep.beta(),
        )
    }

    /// Matrix representing `M_self . M_inner` as operators. The composition
    /// law reverses the product order: `M_A . M_B = M_{BA}`, so this returns
    /// the matrix product `inner * self`.
    pub fn compose(&self, inner: &Mobius2x2) -> Mobius2x2 {
        let (a, b, c, d) = inner.entries();
        let (e, f, g, h) = self.entries();
        Mobius2x2 {
            a: a * e + b * g,
            b: a * f + b * h,
            c: c * e + d * g,
            d: c * f + d * h,
            det: inner.det * self.det,
        }
    }

    /// `mu * A`; induces `M_{mu A} = mu^k M_A` on degree-k polynomials.
    pub fn scale(&self, mu: Complex64) -> Result<Mobius2x2> {
        if mu.norm() == 0.0 || !mu.is_finite() {
            return Err(Error::ZeroScale);
        }
        Ok(Mobius2x2 {
            a: self.a * mu,
            b: self.b * mu,
            c: self.c * mu,
            d: self.d * mu,
            det: self.det * mu * mu,
        })
    }

    pub fn to_json_string(&self) -> String {
        let doc = MobiusDocument::from(self);
        serde_json::to_string(&doc).expect("mobius document serializes")
    }

    /// Parses a preset name (`cayley+`, `cayley-`, `reversal`, `identity`) or
    /// an inline JSON document `{"a":[re,im],"b":...,"c":...,"d":...}`.
    /// Never panics on malformed input.
    pub fn from_spec(spec: &str) -> Result<Self> {
        match spec.trim() {
            "cayley+" => Ok(Self::cayley_plus()),
            "cayley-" => Ok(Self::cayley_minus()),
            "reversal" => Ok(Self::reversal()),
            "identity" => Ok(Self::identity()),
            s => {
                let doc: MobiusDocument =
                    serde_json::from_str(s).map_err(|e| Error::MobiusSpec(e.to_string()))?;
                doc.try_into()
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MobiusDocument {
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
    d: [f64; 2],
}

impl From<&Mobius2x2> for MobiusDocument {
    fn from(m: &Mobius2x2) -> Self {
        let f = |z: Complex64| [z.re, z.im];
        MobiusDocument {
            a: f(m.a),
            b: f(m.b),
            c: f(m.c),
            d: f(m.d),
        }
    }
}

impl TryFrom<MobiusDocument> for Mobius2x2 {
    type Error = Error;

    fn try_from(doc: MobiusDocument) -> Result<Self> {
        let g = |v: [f64; 2]| Complex64::new(v[0], v[1]);
        Mobius2x2::new(g(doc.a), g(doc.b), g(doc.c), g(doc.d))
    }
}

const PASCAL: [[u64; MAX_DEGREE + 1]; MAX_DEGREE + 1] = build_pascal();

const fn build_pascal() -> [[u64; MAX_DEGREE + 1]; MAX_DEGREE + 1] {
    let mut t = [[0u64; MAX_DEGREE + 1]; MAX_DEGREE + 1];
    let mut s = 0;
    while s <= MAX_DEGREE {
        t[s][0] = 1;
        let mut j = 1;
        while j <= s {
            t[s][j] = t[s - 1][j - 1] + if j < s { t[s - 1][j] } else { 0 };
            j += 1;
        }
        s += 1;
    }
    t
}

/// Binomial coefficient with the convention `C(s, t) = 0` for `t < 0` or
/// `t > s`. Exact for `s <= 30`; larger `s` is rejected to guard overflow.
pub fn binom(s: usize, t: isize) -> Result<u64> {
    if s > MAX_DEGREE {
        return Err(Error::BinomialOverflow(s));
    }
    if t < 0 || t as usize > s {
        return Ok(0);
    }
    Ok(PASCAL[s][t as usize])
}

#[inline]
fn binom_unchecked(s: usize, t: isize) -> u64 {
    if t < 0 || t as usize > s {
        0
    } else {
        PASCAL[s][t as usize]
    }
}

/// Transforms `P` by `M_A` through the explicit coefficient expansion
///
/// `Bt_l = sum_i sum_j C(i,j) C(k-i, k-j-l) a^(i-j) b^j c^(j+l-i) d^(k-j-l) B_i`.
///
/// Terms whose binomial weight vanishes are skipped before any power is
/// formed, so negative exponents never arise.
pub fn mobius_transform(a: &Mobius2x2, p: &HomMatrixPolynomial) -> HomMatrixPolynomial {
    let k = p.degree();
    let (ea, eb, ec, ed) = a.entries();
    let mut coeffs = Vec::with_capacity(k + 1);
    for l in 0..=k {
        let mut acc = CMatrix::zeros(p.rows(), p.cols());
        for i in 0..=k {
            for j in 0..=(k - l) {
                let c1 = binom_unchecked(i, j as isize);
                if c1 == 0 {
                    continue;
                }
                let c2 = binom_unchecked(k - i, (k - j - l) as isize);
                if c2 == 0 {
                    continue;
                }
                let w = Complex64::new((c1 * c2) as f64, 0.0)
                    * ea.powu((i - j) as u32)
                    * eb.powu(j as u32)
                    * ec.powu((j + l - i) as u32)
                    * ed.powu((k - j - l) as u32);
                acc += p.coeff(i).map(|z| z * w);
            }
        }
        coeffs.push(acc);
    }
    HomMatrixPolynomial::from_parts(coeffs, p.rows(), p.cols())
}

/// Upper bound `||A||_inf^k C(k, floor(k/2)) sum_i ||B_i||_2` on the spectral
/// norm of every coefficient of `M_A(P)`.
pub fn coeff_norm_bound(a: &Mobius2x2, p: &HomMatrixPolynomial) -> f64 {
    let k = p.degree();
    let central = binom_unchecked(k, (k / 2) as isize) as f64;
    let sum: f64 = p.coefficient_norms().iter().sum();
    a.norm_inf().powi(k as i32) * central * sum
}

/// Recovers the coefficients of `M_A(P)` by sampling `Q(gamma, delta) =
/// P(a*gamma + b*delta, c*gamma + d*delta)` at the `k+1` quarter-circle nodes
/// `(cos theta_j, sin theta_j)`, `theta_j = j*pi/(2(k+1))`, and solving the
/// interpolation system with entries `gamma_j^l delta_j^(k-l)`.
///
/// Independent of [`mobius_transform`]; serves as its cross-check oracle. The
/// node data and the refinement residual are evaluated in double-double
/// arithmetic because the interpolation matrix becomes ill-conditioned as the
/// degree grows.
pub fn mobius_by_interpolation(a: &Mobius2x2, p: &HomMatrixPolynomial) -> HomMatrixPolynomial {
    let k = p.degree();
    let (rows, cols) = (p.rows(), p.cols());
    let nn = rows * cols;
    let m = k + 1;
    let (ea, eb, ec, ed) = a.entries();

    // Node values rounded to f64 are treated as the exact node definition.
    let nodes: Vec<(f64, f64)> = (0..m)
        .map(|j| {
            let th = j as f64 * std::f64::consts::PI / (2.0 * m as f64);
            (th.cos(), th.sin())
        })
        .collect();

    // Interpolation matrix in double-double, rounded copy for the LU solves.
    let mut v_dd = vec![vec![Dd::ZERO; m]; m];
    let mut v = DMatrix::<Complex64>::zeros(m, m);
    for (j, &(g, d)) in nodes.iter().enumerate() {
        for l in 0..=k {
            let e = Dd::from_f64(g).powi(l).mul(Dd::from_f64(d).powi(k - l));
            v_dd[j][l] = e;
            v[(j, l)] = Complex64::new(e.to_f64(), 0.0);
        }
    }

    // Right-hand sides: Q at the nodes, entrywise, in double-double.
    let mut rhs_dd = vec![vec![CDd::ZERO; nn]; m];
    for (j, &(g, d)) in nodes.iter().enumerate() {
        let gd = CDd::from_c64(Complex64::new(g, 0.0));
        let dd = CDd::from_c64(Complex64::new(d, 0.0));
        let al = CDd::from_c64(ea).mul(gd).add(CDd::from_c64(eb).mul(dd));
        let be = CDd::from_c64(ec).mul(gd).add(CDd::from_c64(ed).mul(dd));
        for i in 0..=k {
            let w = al.powi(i).mul(be.powi(k - i));
            let bi = p.coeff(i);
            for (e, dst) in bi.iter().zip(rhs_dd[j].iter_mut()) {
                *dst = dst.add(w.mul(CDd::from_c64(*e)));
            }
        }
    }

    let lu = v.clone().lu();
    assert!(
        lu.is_invertible(),
        "interpolation nodes must yield a nonsingular system for k <= {MAX_DEGREE}"
    );

    let mut rhs = DMatrix::<Complex64>::zeros(m, nn);
    for j in 0..m {
        for e in 0..nn {
            rhs[(j, e)] = rhs_dd[j][e].to_c64();
        }
    }
    let mut sol = lu.solve(&rhs).expect("factorization is invertible");

    // Two refinement sweeps with the residual accumulated in double-double.
    for _ in 0..2 {
        let mut resid = DMatrix::<Complex64>::zeros(m, nn);
        for j in 0..m {
            for e in 0..nn {
                let mut acc = rhs_dd[j][e];
                for l in 0..m {
                    acc = acc.sub(CDd::from_c64(sol[(l, e)]).mul_dd(v_dd[j][l]));
                }
                resid[(j, e)] = acc.to_c64();
            }
        }
        let corr = lu.solve(&resid).expect("factorization is invertible");
        sol += corr;
    }

    // Entry index e follows nalgebra's column-major iteration order.
    let coeffs: Vec<CMatrix> = (0..m)
        .map(|l| CMatrix::from_fn(rows, cols, |r, c| sol[(l, c * rows + r)]))
        .collect();
    HomMatrixPolynomial::from_parts(coeffs, rows, cols)
}
