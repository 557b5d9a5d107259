//! Scalar fibering-map algebra on the ray {t u : t > 0} through a function u.
//!
//! Everything is driven by four integrals of u packed into FunctionData; no
//! function-space object appears here. Along the ray the energy is
//!   h(t) = (t^2/2) h1b_sq + (a t^4/4) dir_sq^2 - (t^p/p) fp,
//! and critical points of h are exactly the Nehari points on the ray. Root
//! finding uses the auxiliary maps m(t) = t^-2 h1b_sq - t^(p-4) fp (for h')
//! and g(t) = (t^-2/2) h1b_sq - (t^(p-4)/p) fp (for zeros of h), both of which
//! are decreasing-then-increasing with known minimizer scales, so every root
//! is bracketed before bisection. All bisection runs in log t.

use crate::constants::{self, d_of_p};
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use serde::{Deserialize, Serialize};

/// Scale-free Nehari membership tolerance on |h'(1)|.
pub const NEHARI_TOL: f64 = 1e-9;
/// Roots closer than this in log t are reported as one tangent (degenerate)
/// critical point.
const MERGE_LOG_TOL: f64 = 1e-10;

/// The scalar quadruple driving all fibering algebra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionData {
    /// b-weighted norm squared: b * dir_sq + mass.
    pub h1b_sq: f64,
    /// Dirichlet seminorm squared.
    pub dir_sq: f64,
    /// Mass (L^2 norm squared).
    pub mass: f64,
    /// Weighted p-integral of f(x)|u|^p (the coefficient is folded in).
    pub fp: f64,
}

impl FunctionData {
    /// Build the quadruple from raw integrals, deriving the weighted norm.
    pub fn from_parts(dir_sq: f64, mass: f64, fp: f64, b: f64) -> Self {
        FunctionData { h1b_sq: b * dir_sq + mass, dir_sq, mass, fp }
    }

    /// Consistency of the quadruple against the coefficient b.
    pub fn check(&self, b: f64) -> Result<()> {
        for (name, v) in [
            ("h1b_sq", self.h1b_sq),
            ("dir_sq", self.dir_sq),
            ("mass", self.mass),
            ("fp", self.fp),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Degenerate(format!("{name} = {v} is not a finite nonneg value")));
            }
        }
        let expect = b * self.dir_sq + self.mass;
        if (self.h1b_sq - expect).abs() > 1e-9 * expect.max(1e-300) {
            return Err(Error::Degenerate(format!(
                "h1b_sq = {} inconsistent with b*dir_sq + mass = {expect}",
                self.h1b_sq
            )));
        }
        Ok(())
    }

    /// Plain H^1 norm (unweighted), used by the norm bounds of the theorems.
    pub fn norm_h1(&self) -> f64 {
        (self.dir_sq + self.mass).sqrt()
    }

    /// Data of the scaled function t*u.
    pub fn scaled(&self, t: f64, p: f64) -> Self {
        FunctionData {
            h1b_sq: t * t * self.h1b_sq,
            dir_sq: t * t * self.dir_sq,
            mass: t * t * self.mass,
            fp: t.powf(p) * self.fp,
        }
    }
}

/// Multiply a possibly overflowed power of t by a finite bracket, keeping the
/// sign honest (an overflowed power times a zero bracket is zero, not NaN).
fn pow_mul(tpow: f64, bracket: f64) -> f64 {
    if bracket == 0.0 {
        0.0
    } else {
        tpow * bracket
    }
}

/// J_a(tu). For t >= 1 the polynomial is factored so the bracket stays finite
/// for every admissible datum; only a genuinely out-of-range energy overflows,
/// and then to a correctly signed infinity.
pub fn fiber_value(t: f64, data: &FunctionData, params: &ProblemParams) -> f64 {
    let p = params.p;
    let d2 = data.dir_sq * data.dir_sq;
    let t2 = t * t;
    if t >= 1.0 {
        let bracket =
            0.5 * data.h1b_sq / t2 + 0.25 * params.a * d2 - t.powf(p - 4.0) / p * data.fp;
        pow_mul(t2 * t2, bracket)
    } else {
        0.5 * t2 * data.h1b_sq + 0.25 * params.a * t2 * t2 * d2 - t.powf(p) / p * data.fp
    }
}

/// (h'(t), h''(t)) of the fibering map, factored the same way as
/// [`fiber_value`] so huge ray scales give signed infinities instead of NaN.
pub fn fiber_derivatives(t: f64, data: &FunctionData, params: &ProblemParams) -> (f64, f64) {
    let a = params.a;
    let p = params.p;
    let d2 = data.dir_sq * data.dir_sq;
    if t >= 1.0 {
        let t2 = t * t;
        let tp4 = t.powf(p - 4.0);
        let hp = pow_mul(t2 * t, data.h1b_sq / t2 + a * d2 - tp4 * data.fp);
        let hpp = pow_mul(t2, data.h1b_sq / t2 + 3.0 * a * d2 - (p - 1.0) * tp4 * data.fp);
        (hp, hpp)
    } else {
        let hp = t * data.h1b_sq + a * t * t * t * d2 - t.powf(p - 1.0) * data.fp;
        let hpp = data.h1b_sq + 3.0 * a * t * t * d2 - (p - 1.0) * t.powf(p - 2.0) * data.fp;
        (hp, hpp)
    }
}

/// The semilinear Nehari scale T_f(u) = (h1b_sq/fp)^(1/(p-2)).
pub fn t_f(data: &FunctionData, p: f64) -> Result<f64> {
    if !(data.fp > 0.0 && data.h1b_sq > 0.0) {
        return Err(Error::Degenerate("T_f needs positive fp and h1b_sq".into()));
    }
    Ok((data.h1b_sq / data.fp).powf(1.0 / (p - 2.0)))
}

/// Scale-free Nehari residual |h'(1)| / max(h1b_sq, fp).
pub fn nehari_residual(data: &FunctionData, params: &ProblemParams) -> f64 {
    let (hp, _) = fiber_derivatives(1.0, data, params);
    hp.abs() / data.h1b_sq.max(data.fp).max(1e-300)
}

/// The three equivalent forms of h''(1) on a Nehari point:
/// direct, -(p-2)h1b_sq + a(4-p)dir_sq^2, and -2 h1b_sq + (4-p) fp.
pub fn nehari_h_pp_forms(data: &FunctionData, params: &ProblemParams) -> (f64, f64, f64) {
    let (_, hpp) = fiber_derivatives(1.0, data, params);
    let p = params.p;
    let d2 = data.dir_sq * data.dir_sq;
    let form_b = -(p - 2.0) * data.h1b_sq + params.a * (4.0 - p) * d2;
    let form_c = -2.0 * data.h1b_sq + (4.0 - p) * data.fp;
    (hpp, form_b, form_c)
}

/// The two reduced expressions for J_a(u) on a Nehari point:
/// (1/4)h1b_sq - ((4-p)/(4p))fp and ((p-2)/(2p))h1b_sq - (a(4-p)/(4p))dir_sq^2.
pub fn nehari_energy_forms(data: &FunctionData, params: &ProblemParams) -> (f64, f64) {
    let p = params.p;
    let d2 = data.dir_sq * data.dir_sq;
    (
        0.25 * data.h1b_sq - (4.0 - p) / (4.0 * p) * data.fp,
        (p - 2.0) / (2.0 * p) * data.h1b_sq - params.a * (4.0 - p) / (4.0 * p) * d2,
    )
}

fn m_shifted(t: f64, data: &FunctionData, params: &ProblemParams) -> f64 {
    let p = params.p;
    data.h1b_sq / (t * t) - t.powf(p - 4.0) * data.fp
        + params.a * data.dir_sq * data.dir_sq
}

fn g_shifted(t: f64, data: &FunctionData, params: &ProblemParams) -> f64 {
    let p = params.p;
    0.5 * data.h1b_sq / (t * t) - t.powf(p - 4.0) / p * data.fp
        + 0.25 * params.a * data.dir_sq * data.dir_sq
}

/// Bisection in log t between a point where `f` is positive and one where it
/// is negative. 200 halvings localize the root far below any tolerance here.
fn bisect_log(f: &dyn Fn(f64) -> f64, x_pos: f64, x_neg: f64) -> f64 {
    let mut lp = x_pos.ln();
    let mut ln_ = x_neg.ln();
    for _ in 0..200 {
        let mid = 0.5 * (lp + ln_);
        if f(mid.exp()) > 0.0 {
            lp = mid;
        } else {
            ln_ = mid;
        }
        if (lp - ln_).abs() < 1e-15 {
            break;
        }
    }
    (0.5 * (lp + ln_)).exp()
}

/// Walk outward from `from` by factors of 2 (direction < 1 walks down) until
/// `f` turns positive; both shifted maps tend to positive limits in the search
/// direction, so this terminates.
fn expand_to_positive(
    f: &dyn Fn(f64) -> f64,
    from: f64,
    factor: f64,
    limit_steps: u32,
) -> Result<f64> {
    let mut x = from;
    for _ in 0..limit_steps {
        x *= factor;
        if !x.is_finite() || x == 0.0 {
            return Err(Error::Solver(format!(
                "critical scale left the representable range during expansion from {from:.3e}"
            )));
        }
        if f(x) > 0.0 {
            return Ok(x);
        }
    }
    Err(Error::Solver("root bracket expansion ran away".into()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiberingReport {
    pub t_f: f64,
    /// Smaller critical point (ray local max; MINUS side), if any.
    pub t_minus: Option<f64>,
    /// Larger critical point (ray local min; PLUS side), if any.
    pub t_plus: Option<f64>,
    /// True when the two critical points merged into one degenerate (ZERO) point.
    pub tangent: bool,
    /// Zero-energy scales: h(t_hat_1) = h(t_hat_0) = 0 with t_hat_1 < t_hat_0.
    pub t_hat_1: Option<f64>,
    pub t_hat_0: Option<f64>,
    /// Tangency scale at which h and h' vanish together when a = a0_u (a > 0 only).
    pub t0_u: Option<f64>,
    /// Zero-energy tangency coupling of this data.
    pub a0_u: f64,
    /// Truth of the sufficient root-existence hypothesis
    /// fp > (p/(4-p)) (2a(4-p)/(p-2))^((p-2)/2) h1b_sq^(p/2).
    pub hypothesis_ok: bool,
    /// Ordering chain T_f < t- < sqrt(D)(2/(4-p))^(1/(p-2))T_f < ... < t+,
    /// evaluated only when two distinct roots exist.
    pub ordering_ok: Option<bool>,
    pub j_t_f: f64,
    pub j_t_minus: Option<f64>,
    pub j_t_plus: Option<f64>,
}

/// Locate all critical points and zero-energy scales of the fibering map.
pub fn critical_points(data: &FunctionData, params: &ProblemParams) -> Result<FiberingReport> {
    params.validate()?;
    data.check(params.b)?;
    if !(data.fp > 0.0) {
        return Err(Error::Degenerate("fibering analysis needs fp > 0".into()));
    }
    if !(data.dir_sq > 0.0) {
        return Err(Error::Degenerate("fibering analysis needs dir_sq > 0".into()));
    }
    let p = params.p;
    let a = params.a;
    let tf = t_f(data, p)?;
    let e = 1.0 / (p - 2.0);

    // Sufficient hypothesis for two roots (low dimensions); true at a = 0.
    // dir_sq <= h1b_sq/b always, so the b power keeps the bound sufficient
    // for every weight, reducing to the plain form at b = 1.
    let rhs = p / (4.0 - p)
        * (2.0 * a * (4.0 - p) / (p - 2.0)).powf((p - 2.0) / 2.0)
        * data.h1b_sq.powf(p / 2.0)
        / params.b.powf(p - 2.0);
    let hypothesis_ok = data.fp > rhs;

    let mcb = |t: f64| m_shifted(t, data, params);
    let gcb = |t: f64| g_shifted(t, data, params);

    let (t_minus, t_plus, tangent);
    if a == 0.0 {
        // single critical point, a ray maximum at exactly T_f
        t_minus = Some(tf);
        t_plus = None;
        tangent = false;
    } else {
        let t_mstar = (2.0 / (4.0 - p)).powf(e) * tf;
        let v = mcb(t_mstar);
        let scale = data.h1b_sq / (t_mstar * t_mstar)
            + data.fp * t_mstar.powf(p - 4.0)
            + a * data.dir_sq * data.dir_sq;
        if v > 1e-14 * scale {
            t_minus = None;
            t_plus = None;
            tangent = false;
        } else if v >= -1e-14 * scale {
            t_minus = Some(t_mstar);
            t_plus = Some(t_mstar);
            tangent = true;
        } else {
            let lo = expand_to_positive(&mcb, t_mstar, 0.5, 2000)?;
            let hi = expand_to_positive(&mcb, t_mstar, 2.0, 2000)?;
            let tm = bisect_log(&mcb, lo, t_mstar);
            let tp = bisect_log(&mcb, hi, t_mstar);
            if (tp / tm).ln() < MERGE_LOG_TOL {
                t_minus = Some(0.5 * (tm + tp));
                t_plus = Some(0.5 * (tm + tp));
                tangent = true;
            } else {
                t_minus = Some(tm);
                t_plus = Some(tp);
                tangent = false;
            }
        }
    }

    // Zero-energy scales from the g-map.
    let (t_hat_1, t_hat_0);
    if a == 0.0 {
        // g crosses zero once, at (p/2)^(1/(p-2)) T_f, then stays negative
        t_hat_1 = Some((p / 2.0).powf(e) * tf);
        t_hat_0 = None;
    } else {
        let t_gstar = (p / (4.0 - p)).powf(e) * tf;
        let v = gcb(t_gstar);
        let scale = 0.5 * data.h1b_sq / (t_gstar * t_gstar)
            + data.fp * t_gstar.powf(p - 4.0) / p
            + 0.25 * a * data.dir_sq * data.dir_sq;
        if v > 1e-14 * scale {
            t_hat_1 = None;
            t_hat_0 = None;
        } else if v >= -1e-14 * scale {
            t_hat_1 = Some(t_gstar);
            t_hat_0 = Some(t_gstar);
        } else {
            let lo = expand_to_positive(&gcb, t_gstar, 0.5, 2000)?;
            let hi = expand_to_positive(&gcb, t_gstar, 2.0, 2000)?;
            t_hat_1 = Some(bisect_log(&gcb, lo, t_gstar));
            t_hat_0 = Some(bisect_log(&gcb, hi, t_gstar));
        }
    }

    let t0_u = if a > 0.0 {
        Some((2.0 * (p - 2.0) * data.fp / (a * p * data.dir_sq * data.dir_sq)).powf(1.0 / (4.0 - p)))
    } else {
        None
    };
    let a0_u = constants::a_star_prefactor(p) * constants::a_bar_quotient(data, p)?;

    let ordering_ok = match (t_minus, t_plus, tangent) {
        (Some(tm), Some(tp), false) => {
            let mid = d_of_p(p)?.sqrt() * (2.0 / (4.0 - p)).powf(e) * tf;
            let upper = (2.0 / (4.0 - p)).powf(e) * tf;
            Some(tf < tm && tm < mid && mid < upper && upper < tp)
        }
        _ => None,
    };

    Ok(FiberingReport {
        t_f: tf,
        t_minus,
        t_plus,
        tangent,
        t_hat_1,
        t_hat_0,
        t0_u,
        a0_u,
        hypothesis_ok,
        ordering_ok,
        j_t_f: fiber_value(tf, data, params),
        j_t_minus: t_minus.map(|t| fiber_value(t, data, params)),
        j_t_plus: t_plus.map(|t| fiber_value(t, data, params)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    M1,
    M2,
    Outside,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiltrationSplit {
    /// Energy level c separating the two filtration pieces.
    pub c: f64,
    /// Norm gap bounds: the two positive roots of the level equation
    /// ((p-2)/(2p)) y^2 - (a(4-p)/(4p)) y^4 = c in y = |u|_{H^1}.
    pub d1: f64,
    /// Infinite when a = 0 (the quartic term vanishes).
    pub d2: f64,
    pub membership: Membership,
    pub norm_h1: f64,
    pub energy: f64,
    /// sqrt(D(p)) (2 s_p_p/(f_inf(4-p)))^(1/(p-2)) < d1 (strict for a > 0).
    pub sandwich_lower_ok: bool,
    /// sqrt(2) (2 s_p_p/(f_inf(4-p)))^(1/(p-2)) < d2.
    pub sandwich_upper_ok: bool,
}

/// Classify a Nehari point into the small-norm or large-norm filtration piece.
pub fn filtration_split(
    data: &FunctionData,
    params: &ProblemParams,
    s_p_p: f64,
) -> Result<FiltrationSplit> {
    params.validate()?;
    data.check(params.b)?;
    let res = nehari_residual(data, params);
    if res > NEHARI_TOL {
        return Err(Error::precondition(
            "data lies on the Nehari set",
            format!("|h'(1)| residual = {res:.3e}"),
        ));
    }
    let p = params.p;
    let l0 = constants::lambda0(params, s_p_p)?;
    let a_bound = (p - 2.0) / (2.0 * (4.0 - p)) * ((4.0 - p) / p).powf(2.0 / (p - 2.0)) * l0;
    if params.a >= a_bound {
        return Err(Error::precondition(
            "a < (p-2)/(2(4-p)) ((4-p)/p)^(2/(p-2)) Lambda_0",
            format!("a = {} but the bound is {a_bound}", params.a),
        ));
    }
    let d = d_of_p(p)?;
    let scale_sq = (2.0 * s_p_p / (params.f_inf * (4.0 - p))).powf(2.0 / (p - 2.0));
    let c = d * (p - 2.0) / (2.0 * p) * scale_sq;
    let alpha = (p - 2.0) / (2.0 * p);
    let beta = params.a * (4.0 - p) / (4.0 * p);
    let (d1, d2) = if params.a == 0.0 {
        ((c / alpha).sqrt(), f64::INFINITY)
    } else {
        let disc = alpha * alpha - 4.0 * beta * c;
        if disc <= 0.0 {
            return Err(Error::precondition(
                "the level equation has two positive roots",
                format!("discriminant = {disc:.3e} at a = {}", params.a),
            ));
        }
        let y_minus = (alpha - disc.sqrt()) / (2.0 * beta);
        let y_plus = (alpha + disc.sqrt()) / (2.0 * beta);
        (y_minus.sqrt(), y_plus.sqrt())
    };
    let norm = data.norm_h1();
    let energy = fiber_value(1.0, data, params);
    let membership = if energy >= c {
        Membership::Outside
    } else if norm < d1 {
        Membership::M1
    } else if norm > d2 {
        Membership::M2
    } else {
        return Err(Error::Degenerate(format!(
            "Nehari point with energy {energy} < c = {c} landed inside the norm gap \
             [{d1}, {d2}] at norm {norm}; this contradicts the filtration split"
        )));
    };
    Ok(FiltrationSplit {
        c,
        d1,
        d2,
        membership,
        norm_h1: norm,
        energy,
        sandwich_lower_ok: d.sqrt() * scale_sq.sqrt() < d1 || params.a == 0.0,
        sandwich_upper_ok: 2f64.sqrt() * scale_sq.sqrt() < d2,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct M3Roots {
    pub t1_minus: f64,
    pub t2_minus: f64,
    /// T_f < t1 < (2/(4-p))^(1/(p-2)) T_f < t2.
    pub ordering_ok: bool,
    /// h''(1) < 0 at the t1-scaled point and > 0 at the t2-scaled point.
    pub sign_ok: bool,
    pub j_t1: f64,
    pub j_t2: f64,
}

/// The two distinguished scales of the nonautonomous comparison lemma; same
/// root equation as critical_points, packaged with the ordering and sign
/// checks the lemma states.
pub fn lemma_m3_roots(data: &FunctionData, params: &ProblemParams) -> Result<M3Roots> {
    let report = critical_points(data, params)?;
    let (t1, t2) = match (report.t_minus, report.t_plus, report.tangent) {
        (Some(t1), Some(t2), false) => (t1, t2),
        _ => {
            return Err(Error::Degenerate(format!(
                "expected two distinct fibering roots, got report {:?}",
                (report.t_minus, report.t_plus, report.tangent)
            )));
        }
    };
    let p = params.p;
    let upper = (2.0 / (4.0 - p)).powf(1.0 / (p - 2.0)) * report.t_f;
    // h'' at the root scale directly; rescaling the datum first would push fp
    // through t^p and can overflow for the large root
    let (_, hpp1) = fiber_derivatives(t1, data, params);
    let (_, hpp2) = fiber_derivatives(t2, data, params);
    Ok(M3Roots {
        t1_minus: t1,
        t2_minus: t2,
        ordering_ok: report.t_f < t1 && t1 < upper && upper < t2,
        sign_ok: hpp1 < 0.0 && hpp2 > 0.0,
        j_t1: report.j_t_minus.unwrap(),
        j_t2: report.j_t_plus.unwrap(),
    })
}
