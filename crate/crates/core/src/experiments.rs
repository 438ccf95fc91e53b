//! Seeded, reproducible experiment campaigns: random polynomial and transform
//! generators, the rho-targeted coefficient scaling procedure, bound
//! attainment constructions, and the five standard experiment protocols with
//! their CSV schema.

use std::io::Write;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{eigenvalues, eigenvectors};
use crate::error::{Error, Result};
use crate::mobius::{mobius_transform, Mobius2x2, ProjPoint};
use crate::poly::{CMatrix, HomMatrixPolynomial, WeightScheme};
use crate::sensitivity::{rho_factors, SensitivityRecord};

/// Per-degree trial counts used by the full-scale degree sweeps
/// (degrees 1 through 15).
pub const PAPER_TRIAL_COUNTS: [usize; 15] = [75, 37, 25, 18, 15, 12, 10, 9, 8, 7, 7, 6, 5, 5, 5];

/// The five standard experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExperimentId {
    /// Condition-number quotients against the degree, orthogonal transforms.
    CondVsDegree,
    /// Condition-number quotients against rho, degree 2, orthogonal transforms.
    CondVsRho,
    /// Condition-number quotients against cond_inf(A), ill-conditioned transforms.
    CondVsIllcond,
    /// Backward-error quotients against the degree.
    BackwardVsDegree,
    /// Backward-error quotients against rho.
    BackwardVsRho,
}

impl ExperimentId {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(ExperimentId::CondVsDegree),
            2 => Ok(ExperimentId::CondVsRho),
            3 => Ok(ExperimentId::CondVsIllcond),
            4 => Ok(ExperimentId::BackwardVsDegree),
            5 => Ok(ExperimentId::BackwardVsRho),
            other => Err(Error::InvalidConfig(format!(
                "experiment id must be 1..=5, got {other}"
            ))),
        }
    }

    pub fn index(&self) -> u8 {
        match self {
            ExperimentId::CondVsDegree => 1,
            ExperimentId::CondVsRho => 2,
            ExperimentId::CondVsIllcond => 3,
            ExperimentId::BackwardVsDegree => 4,
            ExperimentId::BackwardVsRho => 5,
        }
    }

    pub fn is_backward(&self) -> bool {
        matches!(
            self,
            ExperimentId::BackwardVsDegree | ExperimentId::BackwardVsRho
        )
    }

    /// Weight scheme the experiment reports.
    pub fn scheme(&self) -> WeightScheme {
        match self {
            ExperimentId::CondVsRho | ExperimentId::BackwardVsRho => WeightScheme::Coefficientwise,
            _ => WeightScheme::PolyNorm,
        }
    }
}

/// One (degree, size, trial count) group within an experiment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CaseSpec {
    pub degree: usize,
    pub size: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    pub scheme: WeightScheme,
    pub cases: Vec<CaseSpec>,
    /// Rho targets for the rho experiments; each case runs its trial count
    /// once per target.
    pub rho_targets: Vec<f64>,
    /// Exponents `s` (cond_2(A) = 10^s) cycled through the trials of the
    /// ill-conditioning experiment.
    pub illcond_exponents: Vec<u32>,
}

impl ExperimentConfig {
    /// Desk-scale configuration: same protocols as the full runs with degree,
    /// rho and conditioning ranges cut to what double precision resolves.
    pub fn desk(experiment: ExperimentId, seed: u64) -> ExperimentConfig {
        let scheme = experiment.scheme();
        match experiment {
            ExperimentId::CondVsDegree | ExperimentId::BackwardVsDegree => ExperimentConfig {
                experiment,
                seed,
                scheme,
                cases: (1..=10)
                    .map(|k| CaseSpec {
                        degree: k,
                        size: 5,
                        trials: PAPER_TRIAL_COUNTS[k - 1],
                    })
                    .collect(),
                rho_targets: vec![],
                illcond_exponents: vec![],
            },
            ExperimentId::CondVsRho | ExperimentId::BackwardVsRho => ExperimentConfig {
                experiment,
                seed,
                scheme,
                cases: vec![CaseSpec {
                    degree: 2,
                    size: 5,
                    trials: 8,
                }],
                rho_targets: (0..=6).map(|t| 10f64.powi(t)).collect(),
                illcond_exponents: vec![],
            },
            ExperimentId::CondVsIllcond => ExperimentConfig {
                experiment,
                seed,
                scheme,
                cases: vec![
                    CaseSpec { degree: 1, size: 5, trials: 21 },
                    CaseSpec { degree: 1, size: 10, trials: 21 },
                    CaseSpec { degree: 2, size: 5, trials: 21 },
                    CaseSpec { degree: 3, size: 5, trials: 21 },
                ],
                rho_targets: vec![],
                illcond_exponents: (0..=6).collect(),
            },
        }
    }

    /// Full-scale configuration mirroring the published campaigns.
    pub fn paper(experiment: ExperimentId, seed: u64) -> ExperimentConfig {
        let scheme = experiment.scheme();
        match experiment {
            ExperimentId::CondVsDegree | ExperimentId::BackwardVsDegree => ExperimentConfig {
                experiment,
                seed,
                scheme,
                cases: (1..=15)
                    .map(|k| CaseSpec {
                        degree: k,
                        size: 5,
                        trials: PAPER_TRIAL_COUNTS[k - 1],
                    })
                    .collect(),
                rho_targets: vec![],
                illcond_exponents: vec![],
            },
            ExperimentId::CondVsRho | ExperimentId::BackwardVsRho => ExperimentConfig {
                experiment,
                seed,
                scheme,
                cases: vec![CaseSpec {
                    degree: 2,
                    size: 5,
                    trials: 3,
                }],
                rho_targets: (0..=10).map(|t| 10f64.powi(t)).collect(),
                illcond_exponents: vec![],
            },
            ExperimentId::CondVsIllcond => ExperimentConfig {
                experiment,
                seed,
                scheme,
                cases: vec![
                    CaseSpec { degree: 1, size: 5, trials: 11 },
                    CaseSpec { degree: 1, size: 10, trials: 11 },
                    CaseSpec { degree: 1, size: 15, trials: 11 },
                    CaseSpec { degree: 2, size: 5, trials: 11 },
                    CaseSpec { degree: 2, size: 10, trials: 11 },
                    CaseSpec { degree: 3, size: 5, trials: 11 },
                    CaseSpec { degree: 3, size: 8, trials: 11 },
                ],
                rho_targets: vec![],
                illcond_exponents: (0..=10).collect(),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cases.is_empty() {
            return Err(Error::InvalidConfig("no cases configured".into()));
        }
        for c in &self.cases {
            if c.trials < 1 {
                return Err(Error::InvalidConfig("trials must be >= 1".into()));
            }
            if c.degree < 1 || c.degree > 15 {
                return Err(Error::InvalidConfig(format!(
                    "degree {} outside [1, 15]",
                    c.degree
                )));
            }
            if c.size < 1 {
                return Err(Error::InvalidConfig("size must be >= 1".into()));
            }
        }
        for s in &self.illcond_exponents {
            if *s > 10 {
                return Err(Error::InvalidConfig(format!("exponent {s} outside [0, 10]")));
            }
        }
        for r in &self.rho_targets {
            if !r.is_finite() || *r < 1.0 {
                return Err(Error::InvalidConfig(format!("rho target {r} below 1")));
            }
        }
        let needs_rho = matches!(
            self.experiment,
            ExperimentId::CondVsRho | ExperimentId::BackwardVsRho
        );
        if needs_rho && self.rho_targets.is_empty() {
            return Err(Error::InvalidConfig("rho experiment needs targets".into()));
        }
        if self.experiment == ExperimentId::CondVsIllcond && self.illcond_exponents.is_empty() {
            return Err(Error::InvalidConfig(
                "ill-conditioning experiment needs exponents".into(),
            ));
        }
        Ok(())
    }
}

/// Per-trial RNG stream: one master seed, disjoint ChaCha streams per
/// (experiment, trial) so trials can run in parallel yet reproduce exactly.
pub fn trial_rng(seed: u64, experiment: u8, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((experiment as u64) << 48) | trial);
    rng
}

/// Matrix polynomial with independent standard normal real entries.
pub fn random_polynomial<R: Rng>(n: usize, k: usize, rng: &mut R) -> HomMatrixPolynomial {
    let coeffs: Vec<CMatrix> = (0..=k)
        .map(|_| CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), 0.0)))
        .collect();
    HomMatrixPolynomial::new(coeffs).expect("normal draw is nonzero")
}

fn orthogonal_2x2<R: Rng>(rng: &mut R) -> Matrix2<f64> {
    let g = Matrix2::from_fn(|_, _| rng.sample(StandardNormal));
    g.qr().q()
}

fn mobius_from_real(m: &Matrix2<f64>) -> Mobius2x2 {
    Mobius2x2::new(
        Complex64::new(m[(0, 0)], 0.0),
        Complex64::new(m[(0, 1)], 0.0),
        Complex64::new(m[(1, 0)], 0.0),
        Complex64::new(m[(1, 1)], 0.0),
    )
    .expect("orthogonal factor is invertible")
}

/// Orthogonal factor of the QR factorization of a standard normal 2x2 matrix;
/// cond_2(A) = 1.
pub fn random_orthogonal_2x2<R: Rng>(rng: &mut R) -> Mobius2x2 {
    mobius_from_real(&orthogonal_2x2(rng))
}

/// `A = U diag(r, r/10^s) W` with `U, W` random orthogonal and `r` standard
/// normal resampled while `|r| < 1e-3`; cond_2(A) = 10^s regardless of `r`.
pub fn random_illcond<R: Rng>(rng: &mut R, s: u32) -> Mobius2x2 {
    let u = orthogonal_2x2(rng);
    let w = orthogonal_2x2(rng);
    let r = loop {
        let x: f64 = rng.sample(StandardNormal);
        if x.abs() >= 1e-3 {
            break x;
        }
    };
    let d = Matrix2::new(r, 0.0, 0.0, r / 10f64.powi(s as i32));
    mobius_from_real(&(u * d * w))
}

/// Rescales the coefficients of a degree-2 polynomial so the measured rho
/// equals `rho_target`, following the case split on which coefficient norm
/// dominates. The RNG only breaks the all-norms-equal tie. The measured rho
/// of the result is asserted against the target to a relative 1e-9.
pub fn scale_poly_to_rho<R: Rng>(
    p: &HomMatrixPolynomial,
    rho_target: f64,
    rng: &mut R,
) -> Result<HomMatrixPolynomial> {
    if p.degree() != 2 || !rho_target.is_finite() || rho_target < 1.0 {
        return Err(Error::InvalidRhoInput);
    }
    let norms = p.coefficient_norms();
    if norms[0] < f64::MIN_POSITIVE || norms[2] < f64::MIN_POSITIVE {
        return Err(Error::InvalidRhoInput);
    }

    // Mirror so the smaller extreme coefficient sits at index 0.
    let mirrored = norms[2] < norms[0];
    let (n0, n1, n2) = if mirrored {
        (norms[2], norms[1], norms[0])
    } else {
        (norms[0], norms[1], norms[2])
    };

    let rho = rho_target;
    let rho_t = n1.max(n2) / n0;
    let mut scale = [1.0f64; 3];
    if n0 == n1 && n1 == n2 {
        let q = rng.gen_range(0..3usize);
        scale[q] = rho;
    } else if n1 >= n2 {
        // Middle coefficient dominates.
        if rho_t <= rho {
            scale = [rho_t, rho, rho_t];
        } else {
            scale = [rho_t, rho, rho * n1 / n2];
        }
    } else {
        // Leading coefficient (in the mirrored frame) dominates.
        if rho_t <= rho {
            scale = [1.0, 1.0, rho / rho_t];
        } else {
            let mid = if n1 > 0.0 { rho * n2 / n1 } else { 1.0 };
            scale = [rho_t, mid, rho];
        }
    }
    if mirrored {
        scale.reverse();
    }

    let coeffs: Vec<CMatrix> = p
        .coeffs()
        .iter()
        .zip(scale.iter())
        .map(|(c, s)| c.map(|z| z * *s))
        .collect();
    let scaled = HomMatrixPolynomial::new(coeffs)?;

    let measured = rho_factors(&scaled);
    if !measured.defined || ((measured.value - rho) / rho).abs() > 1e-9 {
        return Err(Error::RhoTargetMissed {
            got: measured.value,
            want: rho,
        });
    }
    Ok(scaled)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundTarget {
    Upper,
    Lower,
}

/// A polynomial constructed to drive the condition-number quotient toward one
/// end of its bounds, together with the eigenvalue that realizes it.
#[derive(Debug, Clone)]
pub struct Attainment {
    pub poly: HomMatrixPolynomial,
    pub eigenvalue: ProjPoint,
    /// Set when the optimal eigenvalue direction collided with the spectrum
    /// of the filler block and had to be nudged.
    pub rotated: bool,
}

/// Builds `P = diag(eps * q(alpha, beta), Q(alpha, beta))` where the scalar
/// polynomial `q` has a simple root along the extremal direction for the
/// eigenvalue-norm ratio, and the filler `Q` is `alpha^k I` or `beta^k I`
/// according to which entry of `A` has the largest modulus. The lower target
/// is produced by transforming the upper construction for `A^-1` back through
/// `M_{A^-1}`.
pub fn attainment_poly(
    a: &Mobius2x2,
    k: usize,
    n: usize,
    target: BoundTarget,
    eps: f64,
) -> Result<Attainment> {
    if k < 1 || n < 2 || !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidAttainment);
    }
    match target {
        BoundTarget::Upper => attainment_upper(a, k, n, eps),
        BoundTarget::Lower => {
            let inv = a.inverse();
            let up = attainment_upper(&inv, k, n, eps)?;
            Ok(Attainment {
                poly: mobius_transform(&inv, &up.poly),
                eigenvalue: a.push_eigenvalue(&up.eigenvalue),
                rotated: up.rotated,
            })
        }
    }
}

fn attainment_upper(a: &Mobius2x2, k: usize, n: usize, eps: f64) -> Result<Attainment> {
    let (ea, eb, ec, ed) = a.entries();
    let one = Complex64::new(1.0, 0.0);
    let sign = |z: Complex64| if z.norm() > 0.0 { z.conj() / z.norm() } else { one };

    // Eigenvalue direction attaining the norm ratio in the sharp bounds:
    // for k = 1 the image of the max 1-norm column of A, for k >= 2 the sign
    // vector of the max row of A^-1.
    let mut v = if k == 1 {
        let col0 = ea.norm() + ec.norm();
        let col1 = eb.norm() + ed.norm();
        if col0 >= col1 {
            ProjPoint::raw(ea, ec)
        } else {
            ProjPoint::raw(eb, ed)
        }
    } else {
        let inv = a.inverse();
        let (ia, ib, ic, id) = inv.entries();
        let row0 = ia.norm() + ib.norm();
        let row1 = ic.norm() + id.norm();
        let (p, q) = if row0 >= row1 { (ia, ib) } else { (ic, id) };
        ProjPoint::raw(sign(p), sign(q))
    };

    // Filler block concentrating the coefficient mass where it picks up
    // |A|_max^k under the transform.
    let nm = a.norm_max();
    let filler_at_leading = ea.norm() == nm || eb.norm() == nm;
    let filler_dir = if filler_at_leading {
        ProjPoint::raw(Complex64::new(0.0, 0.0), one)
    } else {
        ProjPoint::raw(one, Complex64::new(0.0, 0.0))
    };

    // The root must stay away from the filler's eigenvalue direction.
    let mut rotated = false;
    if v.chordal_distance(&filler_dir) < 0.05 {
        let (ct, st) = (0.07f64.cos(), 0.07f64.sin());
        v = ProjPoint::raw(v.alpha() * ct - v.beta() * st, v.alpha() * st + v.beta() * ct);
        rotated = true;
    }

    // q(alpha, beta) = (b0 a - a0 b) * (b1 a - a1 b)^(k-1) with the second
    // root along the orthogonal complement of v.
    let perp = ProjPoint::raw(-v.beta().conj(), v.alpha().conj());
    let lin_v = [-v.alpha(), v.beta()];
    let lin_p = [-perp.alpha(), perp.beta()];
    let mut q = vec![one];
    q = conv(&q, &lin_v);
    for _ in 1..k {
        q = conv(&q, &lin_p);
    }
    debug_assert_eq!(q.len(), k + 1);

    let filler_index = if filler_at_leading { k } else { 0 };
    let coeffs: Vec<CMatrix> = (0..=k)
        .map(|i| {
            let mut m = CMatrix::zeros(n, n);
            m[(0, 0)] = q[i] * eps;
            if i == filler_index {
                for j in 1..n {
                    m[(j, j)] = one;
                }
            }
            m
        })
        .collect();
    Ok(Attainment {
        poly: HomMatrixPolynomial::new(coeffs)?,
        eigenvalue: v,
        rotated,
    })
}

/// Convolution of coefficient lists indexed by the power of the first
/// variable.
fn conv(p: &[Complex64], lin: &[Complex64; 2]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i] += c * lin[0];
        out[i + 1] += c * lin[1];
    }
    out
}

/// Rows produced by one generated `(P, A)` pair.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub experiment: u8,
    pub trial: usize,
    pub seed: u64,
    pub k: usize,
    pub n: usize,
    pub scheme: WeightScheme,
    pub rows: Vec<SensitivityRecord>,
    /// Eigenvalues dropped because an involved eigenpair was flagged or a
    /// sensitivity came out non-finite.
    pub dropped_rows: usize,
    /// Regeneration attempts consumed by regularity or scaling rejections.
    pub retries: usize,
}

impl TrialRecord {
    /// Wraps records not produced by an experiment campaign (the analyze
    /// path): experiment, trial and seed columns are zeroed.
    pub fn standalone(rows: Vec<SensitivityRecord>, k: usize, n: usize, scheme: WeightScheme) -> Self {
        TrialRecord {
            experiment: 0,
            trial: 0,
            seed: 0,
            k,
            n,
            scheme,
            rows,
            dropped_rows: 0,
            retries: 0,
        }
    }
}

/// One planned trial: what gets generated before any randomness is consumed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PlannedTrial {
    pub trial: usize,
    pub degree: usize,
    pub size: usize,
    pub rho_target: Option<f64>,
    pub illcond_exponent: Option<u32>,
}

impl ExperimentConfig {
    /// The deterministic trial schedule this configuration expands to.
    pub fn planned_trials(&self) -> Vec<PlannedTrial> {
        let mut plan = Vec::new();
        let mut trial = 0usize;
        match self.experiment {
            ExperimentId::CondVsRho | ExperimentId::BackwardVsRho => {
                for target in &self.rho_targets {
                    for case in &self.cases {
                        for _ in 0..case.trials {
                            plan.push(PlannedTrial {
                                trial,
                                degree: case.degree,
                                size: case.size,
                                rho_target: Some(*target),
                                illcond_exponent: None,
                            });
                            trial += 1;
                        }
                    }
                }
            }
            ExperimentId::CondVsIllcond => {
                for case in &self.cases {
                    for t in 0..case.trials {
                        let s = self.illcond_exponents[t % self.illcond_exponents.len()];
                        plan.push(PlannedTrial {
                            trial,
                            degree: case.degree,
                            size: case.size,
                            rho_target: None,
                            illcond_exponent: Some(s),
                        });
                        trial += 1;
                    }
                }
            }
            _ => {
                for case in &self.cases {
                    for _ in 0..case.trials {
                        plan.push(PlannedTrial {
                            trial,
                            degree: case.degree,
                            size: case.size,
                            rho_target: None,
                            illcond_exponent: None,
                        });
                        trial += 1;
                    }
                }
            }
        }
        plan
    }
}

/// Runs a full campaign. Trials execute in parallel on the current rayon
/// pool; output order and content depend only on `(config, seed)`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let plan = cfg.planned_trials();
    plan.par_iter()
        .map(|tp| run_trial(cfg, tp))
        .collect::<Result<Vec<_>>>()
}

fn run_trial(cfg: &ExperimentConfig, tp: &PlannedTrial) -> Result<TrialRecord> {
    let mut rng = trial_rng(cfg.seed, cfg.experiment.index(), tp.trial as u64);
    let mut retries = 0usize;
    let mut record = TrialRecord {
        experiment: cfg.experiment.index(),
        trial: tp.trial,
        seed: cfg.seed,
        k: tp.degree,
        n: tp.size,
        scheme: cfg.scheme,
        rows: Vec::new(),
        dropped_rows: 0,
        retries: 0,
    };

    for _attempt in 0..4 {
        let base = random_polynomial(tp.size, tp.degree, &mut rng);
        let p = match tp.rho_target {
            Some(target) => match scale_poly_to_rho(&base, target, &mut rng) {
                Ok(p) => p,
                Err(_) => {
                    retries += 1;
                    continue;
                }
            },
            None => base,
        };
        let a = match tp.illcond_exponent {
            Some(s) => random_illcond(&mut rng, s),
            None => random_orthogonal_2x2(&mut rng),
        };
        let p_tilde = mobius_transform(&a, &p);

        let eig_target = if cfg.experiment.is_backward() {
            &p_tilde
        } else {
            &p
        };
        let vals = match eigenvalues(eig_target) {
            Ok(v) => v,
            Err(_) => {
                retries += 1;
                continue;
            }
        };

        let mut rows = Vec::with_capacity(vals.len());
        let mut dropped = 0usize;
        for v in &vals {
            let triple = eigenvectors(eig_target, v)?;
            if !triple.is_simple() {
                dropped += 1;
                continue;
            }
            let rec = if cfg.experiment.is_backward() {
                SensitivityRecord::backward(&a, &p, &p_tilde, &triple, cfg.scheme)?
            } else {
                SensitivityRecord::conditioning(&a, &p, &p_tilde, &triple, cfg.scheme)?
            };
            if rec.is_clean() {
                rows.push(rec);
            } else {
                dropped += 1;
            }
        }
        record.rows = rows;
        record.dropped_rows = dropped;
        record.retries = retries;
        return Ok(record);
    }
    // All attempts rejected; report an empty trial rather than failing the
    // whole campaign.
    record.retries = retries;
    Ok(record)
}

pub const CSV_HEADER: &str = "experiment,trial,seed,k,n,scheme,cond_inf_A,det_abs,rho,rho_tilde,alpha_re,alpha_im,beta_re,beta_im,gamma_re,gamma_im,delta_re,delta_im,kappa_P,kappa_MAP,q_exact,q_direct,lower,upper,lower_sharp,upper_sharp,simple_flag";

/// 17 significant digits; round-trips f64 exactly.
fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Writes trial records in the standard schema, one row per eigenvalue.
pub fn write_csv<W: Write>(records: &[TrialRecord], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for tr in records {
        for r in &tr.rows {
            let e = &r.eigenvalue;
            let m = &r.mapped;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                tr.experiment,
                tr.trial,
                tr.seed,
                tr.k,
                tr.n,
                tr.scheme,
                fmt(r.cond_inf_a),
                fmt(r.det_abs),
                fmt(r.rho),
                fmt(r.rho_tilde),
                fmt(e.alpha().re),
                fmt(e.alpha().im),
                fmt(e.beta().re),
                fmt(e.beta().im),
                fmt(m.alpha().re),
                fmt(m.alpha().im),
                fmt(m.beta().re),
                fmt(m.beta().im),
                fmt(r.kappa_p),
                fmt(r.kappa_map),
                fmt(r.q_exact),
                fmt(r.q_direct),
                fmt(r.lower),
                fmt(r.upper),
                fmt(r.lower_sharp),
                fmt(r.upper_sharp),
                r.simple,
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::spectral_norm;
    use crate::sensitivity::quotient_exact;

    #[test]
    fn rng_streams_are_deterministic_and_disjoint() {
        let a: Vec<f64> = {
            let mut r = trial_rng(7, 1, 0);
            (0..8).map(|_| r.sample(StandardNormal)).collect()
        };
        let b: Vec<f64> = {
            let mut r = trial_rng(7, 1, 0);
            (0..8).map(|_| r.sample(StandardNormal)).collect()
        };
        assert_eq!(a, b);
        let c: Vec<f64> = {
            let mut r = trial_rng(7, 1, 1);
            (0..8).map(|_| r.sample(StandardNormal)).collect()
        };
        assert_ne!(a, c);
        let d: Vec<f64> = {
            let mut r = trial_rng(7, 2, 0);
            (0..8).map(|_| r.sample(StandardNormal)).collect()
        };
        assert_ne!(a, d);
    }

    #[test]
    fn random_polynomial_reproduces_and_is_standard_normal() {
        let p1 = random_polynomial(5, 3, &mut trial_rng(42, 1, 9));
        let p2 = random_polynomial(5, 3, &mut trial_rng(42, 1, 9));
        assert_eq!(p1, p2);

        let mut rng = trial_rng(123, 1, 0);
        let big = random_polynomial(20, 24, &mut rng);
        let mut count = 0usize;
        let (mut sum, mut sumsq) = (0.0f64, 0.0f64);
        for c in big.coeffs() {
            for z in c.iter() {
                assert_eq!(z.im, 0.0);
                sum += z.re;
                sumsq += z.re * z.re;
                count += 1;
            }
        }
        let n = count as f64;
        let mean = sum / n;
        let var = sumsq / n - mean * mean;
        // 5 sigma windows for 10^4 samples.
        assert_eq!(count, 20 * 20 * 25);
        assert!(mean.abs() < 5.0 / n.sqrt());
        assert!((var - 1.0).abs() < 5.0 * (2.0f64 / n).sqrt());
    }

    #[test]
    fn orthogonal_generator_contracts() {
        let mut rng = trial_rng(5, 1, 3);
        for _ in 0..20 {
            let a = random_orthogonal_2x2(&mut rng);
            let (ea, eb, ec, ed) = a.entries();
            let m = Matrix2::new(ea.re, eb.re, ec.re, ed.re);
            let gram = m.transpose() * m;
            assert!((gram - Matrix2::identity()).norm() < 1e-14);
            assert!((a.det().norm() - 1.0).abs() < 1e-14);
            let ci = a.cond_inf();
            assert!((1.0..=2.0 + 1e-12).contains(&ci));
        }
    }

    #[test]
    fn illcond_generator_contract() {
        let mut rng = trial_rng(17, 3, 2);
        for s in [0u32, 3, 6] {
            let a = random_illcond(&mut rng, s);
            let (ea, eb, ec, ed) = a.entries();
            let m = Matrix2::new(ea.re, eb.re, ec.re, ed.re);
            let svd = m.svd(false, false);
            let cond2 = svd.singular_values[0] / svd.singular_values[1];
            assert!(
                (cond2 - 10f64.powi(s as i32)).abs() < 1e-10 * 10f64.powi(s as i32),
                "s={s}"
            );
            let ci = a.cond_inf();
            let target = 10f64.powi(s as i32);
            assert!(ci >= target / 2.0 && ci <= 2.0 * target);
        }
    }

    #[test]
    fn rho_scaling_hits_target_across_branches() {
        let mut rng = trial_rng(99, 2, 0);
        // Branches are exercised by shaping the coefficient norms.
        let shapes: [[f64; 3]; 5] = [
            [1.0, 5.0, 2.0],   // middle dominates
            [1.0, 5.0, 2.0],   // middle dominates, low target -> (b2)
            [1.0, 2.0, 7.0],   // trailing dominates
            [1.0, 2.0, 7.0],   // trailing dominates, low target -> (c2)
            [2.0, 1.0, 1.0],   // mirrored: min extreme on the trailing side
        ];
        let targets = [1e3, 2.0, 1e4, 1.5, 1e2];
        for (shape, target) in shapes.iter().zip(targets) {
            let base = random_polynomial(4, 2, &mut rng);
            let norms = base.coefficient_norms();
            let coeffs: Vec<CMatrix> = base
                .coeffs()
                .iter()
                .zip(norms.iter())
                .zip(shape.iter())
                .map(|((c, n), s)| c.map(|z| z * (*s / *n)))
                .collect();
            let shaped = HomMatrixPolynomial::new(coeffs).unwrap();
            let scaled = scale_poly_to_rho(&shaped, target, &mut rng).unwrap();
            let measured = rho_factors(&scaled);
            assert!(measured.defined);
            assert!(
                ((measured.value - target) / target).abs() <= 1e-9,
                "shape {shape:?} target {target}: got {}",
                measured.value
            );
        }
    }

    #[test]
    fn rho_scaling_equal_norms_and_unit_target() {
        let mut rng = trial_rng(7, 2, 1);
        let eye = CMatrix::identity(3, 3);
        let p = HomMatrixPolynomial::new(vec![eye.clone(), eye.clone(), eye]).unwrap();
        let scaled = scale_poly_to_rho(&p, 1.0, &mut rng).unwrap();
        for (c, d) in scaled.coeffs().iter().zip(p.coeffs()) {
            assert!(spectral_norm(&(c - d)) < 1e-15);
        }
        let boosted = scale_poly_to_rho(&p, 50.0, &mut rng).unwrap();
        let m = rho_factors(&boosted);
        assert!((m.value - 50.0).abs() < 1e-9 * 50.0);
    }

    #[test]
    fn rho_scaling_rejects_bad_inputs() {
        let mut rng = trial_rng(1, 2, 2);
        let p = random_polynomial(2, 3, &mut rng);
        assert!(scale_poly_to_rho(&p, 10.0, &mut rng).is_err());
        let q = random_polynomial(2, 2, &mut rng);
        assert!(scale_poly_to_rho(&q, 0.5, &mut rng).is_err());
    }

    #[test]
    fn attainment_identity_gives_unit_quotient() {
        let id = Mobius2x2::identity();
        let at = attainment_poly(&id, 3, 3, BoundTarget::Upper, 1e-8).unwrap();
        let pt = mobius_transform(&id, &at.poly);
        let q = quotient_exact(&id, &at.poly, &pt, &at.eigenvalue, WeightScheme::PolyNorm);
        assert!((q - 1.0).abs() < 1e-10);
    }

    #[test]
    fn attainment_rejects_degenerate_requests() {
        let id = Mobius2x2::identity();
        assert!(attainment_poly(&id, 0, 3, BoundTarget::Upper, 1e-8).is_err());
        assert!(attainment_poly(&id, 2, 1, BoundTarget::Upper, 1e-8).is_err());
        assert!(attainment_poly(&id, 2, 3, BoundTarget::Upper, 0.0).is_err());
    }

    #[test]
    fn experiment_runs_are_byte_identical() {
        let mut cfg = ExperimentConfig::desk(ExperimentId::CondVsDegree, 31);
        cfg.cases.truncate(2);
        let r1 = run_experiment(&cfg).unwrap();
        let r2 = run_experiment(&cfg).unwrap();
        let mut b1 = Vec::new();
        let mut b2 = Vec::new();
        write_csv(&r1, &mut b1).unwrap();
        write_csv(&r2, &mut b2).unwrap();
        assert!(!b1.is_empty());
        assert_eq!(b1, b2);
    }

    #[test]
    fn experiment_row_counts_match_structure() {
        let mut cfg = ExperimentConfig::desk(ExperimentId::CondVsDegree, 8);
        cfg.cases = vec![CaseSpec { degree: 2, size: 3, trials: 4 }];
        let recs = run_experiment(&cfg).unwrap();
        assert_eq!(recs.len(), 4);
        for tr in &recs {
            assert_eq!(tr.rows.len() + tr.dropped_rows, 6); // n*k per trial
        }
    }

    #[test]
    fn config_validation_rejects_out_of_range() {
        let mut cfg = ExperimentConfig::desk(ExperimentId::CondVsDegree, 1);
        cfg.cases[0].degree = 16;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::desk(ExperimentId::CondVsIllcond, 1);
        cfg.illcond_exponents = vec![11];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::desk(ExperimentId::CondVsRho, 1);
        cfg.rho_targets = vec![0.5];
        assert!(cfg.validate().is_err());
    }
}
