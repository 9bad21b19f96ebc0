//! Rademacher sums for vector-valued forms of weight 1/2: Kloosterman and
//! Bessel factors, the separate D = 0 constant-term formula, character
//! twists rho_{n|h}^v, truncation control with per-coefficient diagnostics,
//! and normalization to the projected sum with C(1,1) = 0, C(D0,r0) = 1.
//!
//! Summation runs over full shells of ascending c with Kahan-compensated
//! accumulation; shells are independent tasks and the reduction is ordered,
//! so results are identical regardless of worker count.

use crate::arith::{self, OmCharacter};
use crate::jacobi::{self, VectorForm};
use crate::qseries::QSeries;
use crate::weil::{self, MetaplecticElement};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RademacherError {
    #[error("gamma = ({a}, {b}; {c}, {d}) is not in Gamma0({n})")]
    NotInGamma0 { a: i64, b: i64, c: i64, d: i64, n: u64 },
    #[error("gcd({a}, {c}) != 1, no completion exists")]
    NotCoprime { a: i64, c: i64 },
    #[error("(D, r) = ({d}, {r}) violates D = r^2 mod 4m")]
    BadTarget { d: i64, r: u64 },
    #[error("poles are prescribed, not computed: D = {0} < 0")]
    NegativeTarget(i64),
    #[error("normalization underdetermined: {0}")]
    Underdetermined(String),
    #[error("integrality diagnostics failed at (D, r) = ({d}, {r}): {value} is {dist:.4} from an integer (tolerance {tol})")]
    NotIntegral { d: i64, r: u64, value: f64, dist: f64, tol: f64 },
    #[error(transparent)]
    Weil(#[from] weil::WeilError),
}

/// The data of one Rademacher sum: index m, pole (D0, r0), level n, and
/// character chi = rho_{n|h}^v, plus the truncation bound on c.
#[derive(Debug, Clone)]
pub struct RademacherSpec {
    pub m: u64,
    pub d0: i64,
    pub r0: u64,
    pub level: u64,
    pub h: u64,
    pub v: u64,
    pub c_max: u64,
}

impl RademacherSpec {
    pub fn new(m: u64, d0: i64, r0: u64, level: u64, h: u64, v: u64, c_max: u64) -> Self {
        assert!(d0 < 0 && ((r0 * r0) as i64 - d0).rem_euclid(4 * m as i64) == 0);
        assert!(level >= 1 && h >= 1 && c_max >= level);
        RademacherSpec { m, d0, r0, level, h, v, c_max }
    }
}

/// chi(gamma) = e(-c d v / n h) for gamma in Gamma0(n).
pub fn chi_eval(n: u64, h: u64, v: u64, gamma: &MetaplecticElement) -> Result<Complex64, RademacherError> {
    if gamma.c.rem_euclid(n as i64) != 0 {
        return Err(RademacherError::NotInGamma0 {
            a: gamma.a,
            b: gamma.b,
            c: gamma.c,
            d: gamma.d,
            n,
        });
    }
    let nh = (n * h) as f64;
    Ok(weil::e(-(gamma.c as f64) * (gamma.d as f64) * v as f64 / nh))
}

/// Modified Bessel function of the first kind at order 1/2, in closed form
/// sqrt(2/(pi x)) sinh(x).
pub fn bessel_i_half(x: f64) -> f64 {
    assert!(x > 0.0);
    (2.0 / (PI * x)).sqrt() * x.sinh()
}

/// Completion of a coprime pair to gamma = (a, b; c, d) in SL2(Z) with
/// 0 <= d < c, branch +1.
pub fn completion_of(a: i64, c: i64) -> Result<MetaplecticElement, RademacherError> {
    assert!(c > 0 && (0..c).contains(&a));
    let (g, x, _y) = ext_gcd(a, c);
    if g != 1 {
        return Err(RademacherError::NotCoprime { a, c });
    }
    // a x + c y = 1; take d = x mod c, b = (a d - 1)/c
    let d = x.rem_euclid(c);
    let b = (a * d - 1) / c;
    Ok(MetaplecticElement::new(a, b, c, d, 1).expect("determinant 1 by construction"))
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Per-coefficient convergence and integrality diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientDiagnostic {
    /// Absolute contribution of the last summed shell.
    pub last_shell: f64,
    /// last_shell / max(|value|, 1): the empirical convergence gate.
    pub relative_tail: f64,
    /// Distance from the scaled value to the nearest integer (populated by
    /// the normalization step).
    pub nearest_int_dist: f64,
}

/// Raw Rademacher output at the requested (D, r) targets.
#[derive(Debug, Clone)]
pub struct RademacherResult {
    pub spec: RademacherSpec,
    pub raw: BTreeMap<(i64, u64), f64>,
    pub diagnostics: BTreeMap<(i64, u64), CoefficientDiagnostic>,
    /// Largest imaginary residue over all targets; should be float noise.
    pub max_imag: f64,
}

/// One (a, c) summand of the coefficient formula, for each target:
/// D > 0: B_{gamma,1/2}(mu, D/4m)_s K_{gamma,chi}(mu, D/4m)_{s r} summed
/// over the two (or one) rows s = +-r0; D = 0 uses the constant-term
/// factors with Gamma(3/2) = sqrt(pi)/2.
fn single_term(
    spec: &RademacherSpec,
    a: i64,
    c: i64,
    d_override: Option<i64>,
    targets: &[(i64, u64)],
) -> Result<Vec<Complex64>, RademacherError> {
    let m = spec.m;
    let four_m = 4.0 * m as f64;
    let mu = spec.d0 as f64 / four_m;
    let mut gamma = completion_of(a, c)?;
    if let Some(dd) = d_override {
        // shift b, d along gamma T^t
        let t = (dd - gamma.d) / c;
        gamma = MetaplecticElement::new(gamma.a, gamma.b + gamma.a * t, gamma.c, gamma.d + gamma.c * t, 1)
            .expect("still unimodular");
    }
    let chi = chi_eval(spec.level, spec.h, spec.v, &gamma)?;
    let mut rows_idx = vec![spec.r0 as usize % (2 * m as usize)];
    let neg = (2 * m - spec.r0 % (2 * m)) as usize % (2 * m as usize);
    if neg != rows_idx[0] {
        rows_idx.push(neg);
    }
    let rows = weil::rho_rows(m, &gamma, &rows_idx)?;
    let e18 = weil::e(-1.0 / 8.0);
    let seed_phase = weil::e(mu * a as f64 / c as f64);
    let mut out = Vec::with_capacity(targets.len());
    for &(dd, r) in targets {
        let d_phase = weil::e(dd as f64 / four_m * gamma.d as f64 / c as f64);
        let mut ksum = Complex64::new(0.0, 0.0);
        for row in &rows {
            // K_{s r} = e(D/4m d/c) chi(gamma) conj(rho_{s r}) e(mu_s a/c)
            ksum += d_phase * chi * row[r as usize % (2 * m as usize)].conj() * seed_phase;
        }
        let term = if dd > 0 {
            let quarter = (spec.d0.unsigned_abs() as f64 / dd as f64).powf(0.25);
            let arg = PI * ((dd as f64) * (spec.d0.unsigned_abs() as f64)).sqrt() / (m as f64 * c as f64);
            e18 * quarter * (2.0 * PI / c as f64) * bessel_i_half(arg) * ksum
        } else {
            // D = 0, r = 0: e(-1/8) sqrt(-mu)/Gamma(3/2) (2 pi/c)^{3/2} K,
            // the D -> 0+ limit of the Bessel factor above
            let gamma_32 = PI.sqrt() / 2.0;
            e18 * (-mu).sqrt() / gamma_32 * (2.0 * PI / c as f64).powf(1.5) * ksum
        };
        out.push(term);
    }
    Ok(out)
}

fn shell_contribution(spec: &RademacherSpec, c: i64, targets: &[(i64, u64)]) -> Result<Vec<Complex64>, RademacherError> {
    let mut acc = vec![Complex64::new(0.0, 0.0); targets.len()];
    for a in 0..c {
        if num_integer::gcd(a, c) != 1 {
            continue;
        }
        let t = single_term(spec, a, c, None, targets)?;
        for (x, y) in acc.iter_mut().zip(t) {
            *x += y;
        }
    }
    Ok(acc)
}

/// One raw Fourier coefficient C^{m,D0,r0}_{n,chi}(D, r); D >= 0 with
/// D = r^2 mod 4m (D < 0 entries are the prescribed seed, not computed).
pub fn coefficient(spec: &RademacherSpec, d: i64, r: u64) -> Result<f64, RademacherError> {
    let res = coefficients(spec, &[(d, r)])?;
    Ok(res.raw[&(d, r)])
}

/// Per-shell contributions |sum over the shell| for one target, ascending
/// in c: the diagnostic behind the empirical convergence gate.
pub fn shell_profile(spec: &RademacherSpec, d: i64, r: u64) -> Result<Vec<(i64, f64)>, RademacherError> {
    let shells: Vec<i64> = (1..=spec.c_max as i64)
        .filter(|c| c % spec.level as i64 == 0)
        .collect();
    let targets = [(d, r)];
    let per: Result<Vec<_>, _> = shells
        .par_iter()
        .map(|&c| shell_contribution(spec, c, &targets).map(|v| (c, v[0].norm())))
        .collect();
    per
}

/// The raw Fourier coefficients C^{m,D0,r0}_{n,chi}(D, r) at the given
/// targets, each with D >= 0 and D = r^2 mod 4m (D < 0 entries are the
/// prescribed seed, not computed here).
pub fn coefficients(
    spec: &RademacherSpec,
    targets: &[(i64, u64)],
) -> Result<RademacherResult, RademacherError> {
    let four_m = 4 * spec.m as i64;
    for &(d, r) in targets {
        if d < 0 {
            return Err(RademacherError::NegativeTarget(d));
        }
        if (d - (r * r) as i64).rem_euclid(four_m) != 0 {
            return Err(RademacherError::BadTarget { d, r });
        }
        if d == 0 && r % (2 * spec.m) != 0 {
            return Err(RademacherError::BadTarget { d, r });
        }
    }
    let shells: Vec<i64> = (1..=spec.c_max as i64)
        .filter(|c| c % spec.level as i64 == 0)
        .collect();
    let per_shell: Result<Vec<Vec<Complex64>>, RademacherError> = shells
        .par_iter()
        .map(|&c| shell_contribution(spec, c, targets))
        .collect();
    let per_shell = per_shell?;
    // ordered Kahan reduction: ascending c, independent of worker count
    let mut sums: Vec<(Kahan, Kahan)> = vec![(Kahan::default(), Kahan::default()); targets.len()];
    let mut last = vec![0.0f64; targets.len()];
    for shell in &per_shell {
        for (i, z) in shell.iter().enumerate() {
            sums[i].0.add(z.re);
            sums[i].1.add(z.im);
            last[i] = z.norm();
        }
    }
    let mut raw = BTreeMap::new();
    let mut diagnostics = BTreeMap::new();
    let mut max_imag = 0.0f64;
    for (i, &(d, r)) in targets.iter().enumerate() {
        let value = sums[i].0.sum;
        max_imag = max_imag.max(sums[i].1.sum.abs());
        raw.insert((d, r), value);
        diagnostics.insert(
            (d, r),
            CoefficientDiagnostic {
                last_shell: last[i],
                relative_tail: last[i] / value.abs().max(1.0),
                nearest_int_dist: f64::NAN,
            },
        );
    }
    Ok(RademacherResult { spec: spec.clone(), raw, diagnostics, max_imag })
}

/// Specification of a normalized Rademacher computation for a lambdency.
#[derive(Debug, Clone)]
pub struct NormalizedSpec {
    pub d0: i64,
    pub lambency: arith::Lambency,
    pub level: u64,
    pub h: u64,
    pub v: u64,
    pub c_max: u64,
    pub d_max: i64,
    /// The lambdency constant C(D0, r0); scaled coefficients must be this
    /// close to integers times the constant.
    pub c_d0r0: i64,
    /// Integrality tolerance as a fraction of c_d0r0 (0.2 by default).
    pub tol: f64,
}

/// A normalized Rademacher sum: the projected combination
/// Omega_m^alpha(a R + b theta_m) with C(1,+-1) = 0 and C(D0,+-r0) = 1,
/// rounded to exact rationals where the integrality diagnostics pass.
#[derive(Debug, Clone)]
pub struct NormalizedSum {
    pub form: VectorForm,
    /// Pre-rounding scaled values c_d0r0 * C(D, r).
    pub scaled_raw: BTreeMap<(i64, u64), f64>,
    pub diagnostics: BTreeMap<(i64, u64), CoefficientDiagnostic>,
    pub max_imag: f64,
    pub a_norm: f64,
    pub b_norm: f64,
}

/// Targets (D, r) with 0 <= D <= d_max, D = r^2 mod 4m, one per +-orbit.
fn canonical_targets(m: u64, d_max: i64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    for d in 0..=d_max {
        for r in arith::sqrt_classes(d, m) {
            if r <= m {
                out.push((d, r));
            }
        }
    }
    out
}

pub fn normalized_sum(spec: &NormalizedSpec) -> Result<NormalizedSum, RademacherError> {
    let m = spec.lambency.m();
    let r0 = arith::min_sqrt_class(spec.d0, m).ok_or_else(|| {
        RademacherError::Underdetermined(format!("D0 = {} is not a square mod {}", spec.d0, 4 * m))
    })?;
    let alpha = OmCharacter::from_kernel(m, spec.lambency.k())
        .map_err(|e| RademacherError::Underdetermined(e.to_string()))?;
    let proj = jacobi::projector(m, &alpha);

    let raw_spec = RademacherSpec::new(m, spec.d0, r0, spec.level, spec.h, spec.v, spec.c_max);
    let targets = canonical_targets(m, spec.d_max);
    let raw = coefficients(&raw_spec, &targets)?;
    let get_raw = |d: i64, r: u64| -> f64 {
        let rr = r % (2 * m);
        let rc = rr.min(2 * m - rr % (2 * m)).min(rr);
        let key = (d, if rr <= m { rr } else { 2 * m - rr });
        let _ = rc;
        raw.raw.get(&key).copied().unwrap_or(0.0)
    };

    // theta contributions, exact
    let order = spec.d_max / (4 * m as i64) + 2;
    let theta = jacobi::theta_vector(m, order);
    let theta_proj = theta.apply_matrix(&proj);

    // seed vector of R: 1 at +-r0, projected exactly
    let seed_at = |r: u64| -> BigRational {
        let dim = 2 * m as usize;
        let mut acc = BigRational::zero();
        for s in 0..dim {
            let w = proj.entry(r as usize % dim, s);
            if w.is_zero() {
                continue;
            }
            let su = s as u64;
            if su % (2 * m) == r0 % (2 * m) || (su + r0) % (2 * m) == 0 {
                acc += w;
            }
        }
        acc
    };
    let s1_seed = seed_at(r0);
    if s1_seed.is_zero() {
        return Err(RademacherError::Underdetermined(
            "projected seed vanishes at r0".to_string(),
        ));
    }
    let a_exact = s1_seed.recip();
    let a_norm = a_exact.to_f64().unwrap();

    // b from C(1, 1) = 0: a (P Raw)(1,1) + b (P theta)(1,1) = 0
    let proj_raw = |d: i64, r: u64| -> f64 {
        let dim = 2 * m as usize;
        let mut acc = 0.0;
        for s in 0..dim {
            let w = proj.entry(r as usize % dim, s);
            if !w.is_zero() {
                acc += w.to_f64().unwrap() * get_raw(d, s as u64);
            }
        }
        acc
    };
    let theta_11 = theta_proj
        .coefficient(1, 1)
        .map_err(|_| RademacherError::Underdetermined("theta order too small".to_string()))?;
    if theta_11.is_zero() {
        return Err(RademacherError::Underdetermined(
            "projected theta vanishes at (1, 1); C(1,1) = 0 cannot be imposed".to_string(),
        ));
    }
    let b_norm = -a_norm * proj_raw(1, 1) / theta_11.to_f64().unwrap();

    // assemble, round, and diagnose
    let cu = spec.c_d0r0 as f64;
    let mut scaled_raw = BTreeMap::new();
    let mut diagnostics = BTreeMap::new();
    let mut comps: Vec<BTreeMap<i64, BigRational>> = vec![BTreeMap::new(); 2 * m as usize];
    // exact seed rows: the normalized series has C(D0, +-r0) = 1
    for r in 0..2 * m {
        let seed = seed_at(r).clone() * &a_exact;
        if !seed.is_zero() {
            comps[r as usize].insert(spec.d0, seed);
        }
    }
    for &(d, r) in &targets {
        let theta_dr = theta_proj
            .coefficient(d, r)
            .map(|c| c.to_f64().unwrap())
            .unwrap_or(0.0);
        let val = cu * (a_norm * proj_raw(d, r) + b_norm * theta_dr);
        let rounded = val.round();
        let dist = (val - rounded).abs();
        let mut diag = raw.diagnostics.get(&(d, r)).copied().unwrap_or(CoefficientDiagnostic {
            last_shell: 0.0,
            relative_tail: 0.0,
            nearest_int_dist: dist,
        });
        diag.nearest_int_dist = dist;
        scaled_raw.insert((d, r), val);
        diagnostics.insert((d, r), diag);
        if dist >= spec.tol * cu.abs() {
            return Err(RademacherError::NotIntegral { d, r, value: val, dist, tol: spec.tol * cu.abs() });
        }
        if rounded != 0.0 {
            let c = BigRational::new(BigInt::from(rounded as i64), BigInt::from(spec.c_d0r0));
            comps[r as usize].insert(d, c.clone());
            let neg = ((2 * m - r % (2 * m)) % (2 * m)) as usize;
            if neg != r as usize {
                comps[neg].insert(d, c);
            }
        }
    }
    let bound = spec.d_max + 1;
    let components: Vec<QSeries> = comps
        .into_iter()
        .map(|map| QSeries::from_parts(4 * m, map, bound))
        .collect();
    let form = VectorForm::new(m, components, 1).expect("normalized output satisfies support");
    Ok(NormalizedSum { form, scaled_raw, diagnostics, max_imag: raw.max_imag, a_norm, b_norm })
}
