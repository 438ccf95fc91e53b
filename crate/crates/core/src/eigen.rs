//! Homogeneous eigenvalues of regular square matrix polynomials via the first
//! Frobenius companion pencil, eigenvector extraction from the SVD of the
//! evaluated polynomial, and chordal matching utilities.

use nalgebra::linalg::Schur;
use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mobius::ProjPoint;
use crate::poly::{CMatrix, HomMatrixPolynomial};

/// Residual level below which a computed pair is accepted as an eigenpair.
pub const TOL_EIG: f64 = 1e-8;

/// Ratio of the two smallest singular values under which an eigenvalue is
/// flagged as clustered rather than simple.
pub const CLUSTER_RATIO: f64 = 10.0;

/// The pencil `gamma X + delta Y` with `X = blockdiag(B_k, I)` and `Y` holding
/// the block row `[B_{k-1}, ..., B_0]` over `-I` blocks on the first
/// subdiagonal. Its determinant equals `det P(gamma, delta)`.
#[derive(Debug, Clone)]
pub struct CompanionPencil {
    x: CMatrix,
    y: CMatrix,
    block: usize,
    degree: usize,
}

impl CompanionPencil {
    pub fn x(&self) -> &CMatrix {
        &self.x
    }

    pub fn y(&self) -> &CMatrix {
        &self.y
    }

    pub fn size(&self) -> usize {
        self.block * self.degree
    }

    /// Evaluates `gamma X + delta Y`.
    pub fn evaluate(&self, pt: &ProjPoint) -> CMatrix {
        let g = pt.alpha();
        let d = pt.beta();
        self.x.map(|z| z * g) + self.y.map(|z| z * d)
    }
}

/// First Frobenius companion form of a square polynomial of degree >= 1.
pub fn companion_pencil(p: &HomMatrixPolynomial) -> Result<CompanionPencil> {
    if !p.is_square() {
        return Err(Error::NotSquare);
    }
    let k = p.degree();
    if k == 0 {
        return Err(Error::DegreeZero);
    }
    let n = p.rows();
    let m = n * k;
    let mut x = CMatrix::identity(m, m);
    x.view_mut((0, 0), (n, n)).copy_from(p.coeff(k));
    let mut y = CMatrix::zeros(m, m);
    for j in 0..k {
        y.view_mut((0, j * n), (n, n)).copy_from(p.coeff(k - 1 - j));
    }
    for j in 0..k.saturating_sub(1) {
        let mut block = y.view_mut(((j + 1) * n, j * n), (n, n));
        block.fill_diagonal(Complex64::new(-1.0, 0.0));
    }
    Ok(CompanionPencil {
        x,
        y,
        block: n,
        degree: k,
    })
}

/// Fixed sample points for the regularity probe; projectively spread and not
/// aligned with any axis.
const PROBE_ANGLES: [f64; 3] = [0.345897932, 1.234567891, 2.468013579];

fn regularity_check(p: &HomMatrixPolynomial) -> Result<()> {
    for t in PROBE_ANGLES {
        let pt = ProjPoint::raw(
            Complex64::new(t.cos(), 0.0),
            Complex64::new(t.sin(), 0.0),
        );
        let sv = p.evaluate(&pt).singular_values();
        let (smax, smin) = (sv[0], sv[sv.len() - 1]);
        if smax > 0.0 && smin > 1e-12 * smax {
            return Ok(());
        }
    }
    Err(Error::NearSingular)
}

/// Rotation angles tried when the leading coefficient is too close to
/// singular for the direct reduction; the first angle is already generic.
const ROTATION_ANGLES: [f64; 6] = [0.7390851332151607, 1.2, 2.0, 0.3, 2.7, 1.8];

/// All `n k` homogeneous eigenvalues of a regular polynomial, in canonical
/// representatives. Infinite eigenvalues come out as points along `(1, 0)`.
///
/// The pencil is first rotated so its leading coefficient is well
/// conditioned, then reduced to a standard eigenproblem; the rotation is the
/// identity whenever `B_k` itself is far from singular.
pub fn eigenvalues(p: &HomMatrixPolynomial) -> Result<Vec<ProjPoint>> {
    if !p.is_square() {
        return Err(Error::NotSquare);
    }
    regularity_check(p)?;
    let pencil = companion_pencil(p)?;
    let m = pencil.size();

    let sv_k = p.coeff(p.degree()).singular_values();
    let direct_ok = sv_k[0] > 0.0 && sv_k[sv_k.len() - 1] >= 1e-6 * sv_k[0];

    let mut chosen: Option<(f64, CMatrix, CMatrix)> = None;
    if direct_ok {
        chosen = Some((0.0, pencil.x.clone(), pencil.y.clone()));
    } else {
        for theta in ROTATION_ANGLES {
            let (ct, st) = (theta.cos(), theta.sin());
            let xp = pencil.x.map(|z| z * ct) + pencil.y.map(|z| z * st);
            let sv = xp.singular_values();
            if sv[0] > 0.0 && sv[sv.len() - 1] > 1e-10 * sv[0] {
                let yp = pencil.x.map(|z| z * -st) + pencil.y.map(|z| z * ct);
                chosen = Some((theta, xp, yp));
                break;
            }
        }
    }
    let (theta, xp, yp) = chosen.ok_or(Error::NearSingular)?;

    let lu = xp.lu();
    let reduced = lu.solve(&yp).ok_or(Error::NearSingular)?;
    let neg = reduced.map(|z| -z);
    let schur = Schur::try_new(neg, f64::EPSILON, 100_000).ok_or(Error::EigensolveFailed)?;
    let mus = schur.eigenvalues().ok_or(Error::EigensolveFailed)?;
    debug_assert_eq!(mus.len(), m);

    let (ct, st) = (theta.cos(), theta.sin());
    Ok(mus
        .iter()
        .map(|mu| {
            // Undo the rotation: the pencil eigenvalue is S [mu, 1]^T.
            let alpha = ct * mu - Complex64::new(st, 0.0);
            let beta = st * mu + Complex64::new(ct, 0.0);
            ProjPoint::raw(alpha, beta).canonicalized()
        })
        .collect())
}

/// Eigenvalue representative with its right/left eigenvectors and the
/// separation data used to judge simplicity.
#[derive(Debug, Clone)]
pub struct EigenTriple {
    /// Canonical representative of the eigenvalue.
    pub value: ProjPoint,
    /// Unit right eigenvector.
    pub right: DVector<Complex64>,
    /// Unit left eigenvector.
    pub left: DVector<Complex64>,
    /// Gap between the two smallest singular values of `P` at the eigenvalue.
    pub sep: f64,
    /// Set when the two smallest singular values are within [`CLUSTER_RATIO`],
    /// indicating a cluster or a multiple eigenvalue.
    pub cluster_flag: bool,
    /// Set when the eigenpair residual exceeds `TOL_EIG * ||P||_inf * max(|a|,|b|)^k`.
    pub residual_flag: bool,
}

impl EigenTriple {
    pub fn is_simple(&self) -> bool {
        !self.cluster_flag && !self.residual_flag
    }
}

/// Right and left eigenvectors at (an approximation of) an eigenvalue,
/// extracted as the singular vectors of `P(alpha0, beta0)` for its smallest
/// singular value.
pub fn eigenvectors(p: &HomMatrixPolynomial, value: &ProjPoint) -> Result<EigenTriple> {
    if !p.is_square() {
        return Err(Error::NotSquare);
    }
    let n = p.rows();
    let m = p.evaluate(value);
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd requested v_t");
    let s = &svd.singular_values;

    let right = DVector::from_fn(n, |i, _| vt[(n - 1, i)].conj());
    // The right-side factor is computed more accurately than the left one for
    // nearly rank-deficient matrices, so the left vector comes from the
    // adjoint's decomposition instead of from u.
    let svd_adj = m.adjoint().svd(false, true);
    let vt_adj = svd_adj.v_t.as_ref().expect("svd requested v_t");
    let left = DVector::from_fn(n, |i, _| vt_adj[(n - 1, i)].conj());
    let smin = s[n - 1];
    let (sep, cluster_flag) = if n >= 2 {
        (s[n - 2] - smin, s[n - 2] < CLUSTER_RATIO * smin)
    } else {
        (f64::INFINITY, false)
    };
    let scale = p.inf_norm() * value.norm_inf().powi(p.degree() as i32);
    let residual_flag = smin > TOL_EIG * scale;

    Ok(EigenTriple {
        value: value.canonicalized(),
        right,
        left,
        sep,
        cluster_flag,
        residual_flag,
    })
}

/// Result of greedily pairing two eigenvalue lists by chordal distance.
#[derive(Debug, Clone)]
pub struct Matching {
    /// Index pairs `(src, dst)` in the order they were extracted.
    pub pairs: Vec<(usize, usize)>,
    /// Largest chordal distance among the matched pairs.
    pub max_distance: f64,
}

/// Pairs each point of `src` with a distinct point of `dst` by repeatedly
/// extracting the globally smallest chordal distance.
pub fn match_eigenvalues(src: &[ProjPoint], dst: &[ProjPoint]) -> Result<Matching> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch);
    }
    let n = src.len();
    let mut dist = vec![0.0f64; n * n];
    for (i, s) in src.iter().enumerate() {
        for (j, d) in dst.iter().enumerate() {
            dist[i * n + j] = s.chordal_distance(d);
        }
    }
    let mut used_src = vec![false; n];
    let mut used_dst = vec![false; n];
    let mut pairs = Vec::with_capacity(n);
    let mut max_distance = 0.0f64;
    for _ in 0..n {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in 0..n {
            if used_src[i] {
                continue;
            }
            for j in 0..n {
                if used_dst[j] {
                    continue;
                }
                let d = dist[i * n + j];
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        used_src[best.0] = true;
        used_dst[best.1] = true;
        max_distance = max_distance.max(best.2);
        pairs.push((best.0, best.1));
    }
    Ok(Matching {
        pairs,
        max_distance,
    })
}
