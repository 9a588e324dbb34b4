//! Closed-form diversity–multiplexing tradeoff curves.
//!
//! Fixed-κ decode-and-forward curves are assembled as the lower envelope over
//! the number of decoding relays `m` of `Pr(E_m)` exponent plus conditional
//! outage exponent. Amplify-and-forward curves and all optimal-κ envelopes
//! are written out directly. Every curve is a sequence of labelled segments on
//! `[0, 1]`; most are affine, a few optimal-κ envelopes are not.

use std::fmt::Write as _;

use serde::Serialize;

use crate::pwl::Pwl;
use crate::{Error, Mode, Protocol, Result, KAPPA_HAT};

/// How the frame split κ = p/q is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KappaPolicy {
    Fixed(f64),
    /// Per-r supremum over κ ≥ 1.
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SegmentForm {
    Affine { slope: f64, intercept: f64 },
    /// `(n0 + n1 r + n2 r²) / (d0 + d1 r)`
    Rational { num: [f64; 3], den: [f64; 2] },
    /// `c0 + c1 r + cs √r`
    SqrtAffine { c0: f64, c1: f64, cs: f64 },
    /// Pointwise supremum over κ of the fixed-κ curve, maximized numerically.
    KappaSupremum { protocol: Protocol, mode: Mode, relays: usize },
}

impl SegmentForm {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            SegmentForm::Affine { slope, intercept } => slope * r + intercept,
            SegmentForm::Rational { num, den } => (num[0] + num[1] * r + num[2] * r * r) / (den[0] + den[1] * r),
            SegmentForm::SqrtAffine { c0, c1, cs } => c0 + c1 * r + cs * r.sqrt(),
            SegmentForm::KappaSupremum { protocol, mode, relays } => kappa_supremum(protocol, mode, relays, r).0,
        }
    }

    pub fn expr(&self) -> String {
        match *self {
            SegmentForm::Affine { slope, intercept } => format!("{intercept:.12} {} {:.12}*r", sign(slope), slope.abs()),
            SegmentForm::Rational { num, den } => format!(
                "({:.12} {} {:.12}*r {} {:.12}*r^2) / ({:.12} {} {:.12}*r)",
                num[0],
                sign(num[1]),
                num[1].abs(),
                sign(num[2]),
                num[2].abs(),
                den[0],
                sign(den[1]),
                den[1].abs()
            ),
            SegmentForm::SqrtAffine { c0, c1, cs } => {
                format!("{c0:.12} {} {:.12}*r {} {:.12}*sqrt(r)", sign(c1), c1.abs(), sign(cs), cs.abs())
            }
            SegmentForm::KappaSupremum { .. } => "sup over kappa of fixed-kappa curve".to_string(),
        }
    }
}

fn sign(x: f64) -> char {
    if x < 0.0 {
        '-'
    } else {
        '+'
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub r_start: f64,
    pub r_end: f64,
    #[serde(flatten)]
    pub form: SegmentForm,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmtCurve {
    pub protocol: Protocol,
    pub mode: Mode,
    pub relays: usize,
    pub policy: KappaPolicy,
    pub segments: Vec<Segment>,
}

impl DmtCurve {
    fn from_pwl(protocol: Protocol, mode: Mode, relays: usize, policy: KappaPolicy, f: &Pwl) -> Self {
        let segments = f
            .pieces()
            .iter()
            .map(|p| Segment {
                r_start: p.start,
                r_end: p.end,
                form: SegmentForm::Affine { slope: p.slope, intercept: p.intercept },
                provenance: p.label.clone(),
            })
            .collect();
        DmtCurve { protocol, mode, relays, policy, segments }
    }

    fn segment_index(&self, r: f64) -> usize {
        self.segments.iter().position(|s| r <= s.r_end).unwrap_or(self.segments.len() - 1)
    }

    /// Left-continuous evaluation on `[0, 1]`.
    pub fn eval(&self, r: f64) -> f64 {
        self.segments[self.segment_index(r)].form.eval(r)
    }

    pub fn eval_right(&self, r: f64) -> f64 {
        let i = self.segments.iter().position(|s| r < s.r_end).unwrap_or(self.segments.len() - 1);
        self.segments[i].form.eval(r)
    }

    pub fn provenance_at(&self, r: f64) -> &str {
        &self.segments[self.segment_index(r)].provenance
    }

    /// Largest jump between adjacent segments.
    pub fn max_jump(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| (w[0].form.eval(w[0].r_end) - w[1].form.eval(w[1].r_start)).abs())
            .fold(0.0, f64::max)
    }

    /// `(r, d(r))` on `{0, step, …, 1}`.
    pub fn sample(&self, step: f64) -> Vec<(f64, f64)> {
        sample_grid(step).into_iter().map(|r| (r, self.eval(r))).collect()
    }

    /// One row per segment: `r_start,r_end,slope,intercept,expr,provenance`.
    /// Slope and intercept are left empty for non-affine segments.
    pub fn segments_csv(&self) -> String {
        let mut s = String::from("r_start,r_end,slope,intercept,expr,provenance\n");
        for seg in &self.segments {
            let (slope, intercept) = match seg.form {
                SegmentForm::Affine { slope, intercept } => (format!("{slope:.12}"), format!("{intercept:.12}")),
                _ => (String::new(), String::new()),
            };
            let _ = writeln!(
                s,
                "{:.12},{:.12},{slope},{intercept},{},{}",
                seg.r_start,
                seg.r_end,
                csv_field(&seg.form.expr()),
                csv_field(&seg.provenance)
            );
        }
        s
    }

    /// `r,d` on a uniform grid.
    pub fn sampled_csv(&self, step: f64) -> String {
        let mut s = String::from("r,d\n");
        for (r, d) in self.sample(step) {
            let _ = writeln!(s, "{r:.6},{d:.12}");
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `{0, step, 2·step, …, 1}`; the last point is exactly 1.
pub fn sample_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    (0..=n).map(|k| if k == n { 1.0 } else { k as f64 * step }).collect()
}

/// `(P, Q) = (κ/(1+κ), 1/(1+κ))`.
pub fn shares(kappa: f64) -> (f64, f64) {
    (kappa / (1.0 + kappa), 1.0 / (1.0 + kappa))
}

fn check_inputs(relays: usize, policy: KappaPolicy) -> Result<()> {
    if relays == 0 {
        return Err(Error::Invalid("need at least one relay".into()));
    }
    if let KappaPolicy::Fixed(k) = policy {
        if !k.is_finite() || k < 1.0 {
            return Err(Error::Invalid(format!("κ must be finite and ≥ 1, got {k}")));
        }
    }
    Ok(())
}

fn source_alone() -> Pwl {
    Pwl::affine(0.0, 1.0, -1.0, 1.0, "source alone")
}

/// Exponent of `Pr(E_m)`: `(M−m)(1 − r/P)` up to `P`, then 0 (`m = 0`) or ∞.
pub fn decode_event_pwl(relays: usize, m: usize, p: f64) -> Pwl {
    let k = (relays - m) as f64;
    let label = format!("{m} of {relays} relays decode");
    let head = Pwl::affine_on(0.0, 1.0, 0.0, p, -k / p, k, &label);
    let tail = if m == 0 {
        Pwl::affine_on(0.0, 1.0, p, 1.0, 0.0, 0.0, &label)
    } else {
        Pwl::infinite(0.0, 1.0)
    };
    head.min(&tail)
}

/// Outage exponent conditioned on exactly `m` relays having decoded.
pub fn conditional_df_pwl(protocol: Protocol, mode: Mode, m: usize, p: f64, q: f64) -> Pwl {
    let mf = m as f64;
    let on = |a: f64, b: f64, slope: f64, intercept: f64, label: &str| Pwl::affine_on(0.0, 1.0, a, b, slope, intercept, label);
    match (protocol, mode) {
        (Protocol::Nsdf, Mode::Finite) => {
            let l = "parallel source/relay streams";
            on(0.0, mf * q, -1.0 / q, 1.0 + mf, l).min(&on(mf * q, 1.0, -1.0, 1.0 + mf * q, l))
        }
        (Protocol::Osdf, Mode::Finite) => {
            let l = "orthogonal relay phase, parallel streams";
            let a = on(0.0, mf * q, -1.0 / q, 1.0 + mf, l);
            let b = on(mf * q, p + mf * q, -1.0 / p, 1.0 + mf * q / p, l);
            let zero = on(p + mf * q, 1.0, 0.0, 0.0, l);
            a.min(&b).min(&zero)
        }
        (Protocol::Nsdf, Mode::Infinite) => {
            let l = "joint source/relay phase";
            let full = on(0.0, 1.0, -(mf + 1.0), mf + 1.0, l);
            let low = on(0.0, q, -mf / q, 1.0 + mf, l);
            let high = on(q, 1.0, -1.0 / p, 1.0 / p, l);
            full.min(&low).min(&high)
        }
        (Protocol::Osdf, Mode::Infinite) => {
            let l = "orthogonal relay phase, joint streams";
            if m == 0 {
                on(0.0, p, -1.0 / p, 1.0, l).min(&on(p, 1.0, 0.0, 0.0, l))
            } else {
                on(0.0, q, -mf / q, 1.0 + mf, l).min(&on(q, 1.0, -1.0 / p, 1.0 / p, l))
            }
        }
        _ => panic!("conditional_df_pwl called for an AF protocol"),
    }
}

/// Fixed-κ DF curve as a piecewise-affine function.
pub fn df_fixed_pwl(protocol: Protocol, mode: Mode, relays: usize, kappa: f64) -> Pwl {
    let (p, q) = shares(kappa);
    let mut curve: Option<Pwl> = None;
    for m in 0..=relays {
        let b = decode_event_pwl(relays, m, p).add(&conditional_df_pwl(protocol, mode, m, p, q));
        curve = Some(match curve {
            None => b,
            Some(c) => c.min(&b),
        });
    }
    curve.unwrap().max(&source_alone())
}

/// Fixed-κ AF curve as a piecewise-affine function.
pub fn af_fixed_pwl(protocol: Protocol, mode: Mode, relays: usize, kappa: f64) -> Pwl {
    let (p, q) = shares(kappa);
    let mf = relays as f64;
    let on = |a: f64, b: f64, slope: f64, intercept: f64, label: &str| Pwl::affine_on(0.0, 1.0, a, b, slope, intercept, label);
    let threshold = (mf + 1.0) / mf;
    match (protocol, mode) {
        (Protocol::Naf, Mode::Finite) => {
            let l = "relayed copy of the second half";
            on(0.0, q, -mf / q, mf + 1.0, l).min(&on(q, 1.0, -1.0 / p, 1.0 + q / p, "direct link dominates"))
        }
        (Protocol::Naf, Mode::Infinite) => {
            if kappa <= threshold {
                on(0.0, 0.5, -(2.0 * mf + 1.0), mf + 1.0, "relays at full rate")
                    .min(&on(0.5, 1.0, -1.0, 1.0, "source alone"))
            } else {
                let d = p - q;
                let a = on(0.0, q, -(mf * d / q + 2.0 * mf), 1.0 + mf, "relays at full rate");
                let b = on(q, 0.5, -(1.0 + 2.0 * q / d), 1.0 + q / d, "relay phase saturated");
                a.min(&b).min(&on(0.5, 1.0, -1.0, 1.0, "source alone"))
            }
        }
        (Protocol::Oaf, _) => {
            if kappa <= threshold {
                on(0.0, p, -(mf + 1.0) / p, mf + 1.0, "relays at full rate").min(&on(p, 1.0, 0.0, 0.0, "rate above source phase"))
            } else {
                let a = on(0.0, q, -mf / q, mf + 1.0, "relays at full rate");
                let b = on(q, p, -1.0 / (p - q), p / (p - q), "relay phase saturated");
                a.min(&b).min(&on(p, 1.0, 0.0, 0.0, "rate above source phase"))
            }
        }
        _ => panic!("af_fixed_pwl called for a DF protocol"),
    }
}

/// Scalar evaluation of a fixed-κ curve, without building segments.
pub fn fixed_value(protocol: Protocol, mode: Mode, relays: usize, kappa: f64, r: f64) -> f64 {
    let (p, q) = shares(kappa);
    let mf = relays as f64;
    if !protocol.is_decode_forward() {
        return af_fixed_value(protocol, mode, relays, p, q, r);
    }
    let mut best = f64::INFINITY;
    for m in 0..=relays {
        let dec = if r <= p {
            (mf - m as f64) * (1.0 - r / p)
        } else if m == 0 {
            0.0
        } else {
            continue;
        };
        best = best.min(dec + conditional_df_value(protocol, mode, m, p, q, r));
    }
    best.max(1.0 - r)
}

fn conditional_df_value(protocol: Protocol, mode: Mode, m: usize, p: f64, q: f64, r: f64) -> f64 {
    let mf = m as f64;
    match (protocol, mode) {
        (Protocol::Nsdf, Mode::Finite) => {
            if r <= mf * q {
                1.0 + mf - r / q
            } else {
                1.0 + mf * q - r
            }
        }
        (Protocol::Osdf, Mode::Finite) => {
            if r <= mf * q {
                1.0 + mf - r / q
            } else {
                (1.0 + mf * q / p - r / p).max(0.0)
            }
        }
        (Protocol::Nsdf, Mode::Infinite) => {
            let side = if r <= q { 1.0 + mf * (1.0 - r / q) } else { (1.0 - r) / p };
            ((mf + 1.0) * (1.0 - r)).min(side)
        }
        (Protocol::Osdf, Mode::Infinite) => {
            if m == 0 {
                (1.0 - r / p).max(0.0)
            } else if r <= q {
                1.0 + mf * (1.0 - r / q)
            } else {
                (1.0 - r) / p
            }
        }
        _ => unreachable!(),
    }
}

fn af_fixed_value(protocol: Protocol, mode: Mode, relays: usize, p: f64, q: f64, r: f64) -> f64 {
    let mf = relays as f64;
    let small_kappa = p / q <= (mf + 1.0) / mf;
    match (protocol, mode) {
        (Protocol::Naf, Mode::Finite) => {
            if r <= q {
                mf + 1.0 - mf * r / q
            } else {
                1.0 + q / p - r / p
            }
        }
        (Protocol::Naf, Mode::Infinite) => {
            if small_kappa || r >= 0.5 {
                mf * (1.0 - 2.0 * r).max(0.0) + 1.0 - r
            } else if r <= q {
                1.0 + mf - (mf * (p - q) / q + 2.0 * mf) * r
            } else {
                (1.0 - r) + q * (1.0 - 2.0 * r) / (p - q)
            }
        }
        _ => {
            if r >= p {
                0.0
            } else if small_kappa {
                (mf + 1.0) * (1.0 - r / p)
            } else if r <= q {
                mf + 1.0 - mf * r / q
            } else {
                (p - r) / (p - q)
            }
        }
    }
}

const SUP_GRID: usize = 4000;

/// `(sup_κ d_κ(r), argmax κ)`, maximizing over `Q = 1/(1+κ) ∈ (0, 1/2]`.
/// A uniform grid in `Q` brackets the maximizer, golden-section refines it.
pub fn kappa_supremum(protocol: Protocol, mode: Mode, relays: usize, r: f64) -> (f64, f64) {
    let value = |t: f64| fixed_value(protocol, mode, relays, (1.0 - t) / t, r);
    let step = 0.5 / SUP_GRID as f64;
    let mut best = (f64::NEG_INFINITY, 0.5);
    for i in (1..=SUP_GRID).rev() {
        let t = i as f64 * step;
        let v = value(t);
        if v > best.0 {
            best = (v, t);
        }
    }
    let (mut a, mut b) = ((best.1 - step).max(step * 1e-3), (best.1 + step).min(0.5));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (value(c), value(d));
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = value(d);
        }
    }
    for (v, t) in [(fc, c), (fd, d)] {
        if v > best.0 {
            best = (v, t);
        }
    }
    (best.0, (1.0 - best.1) / best.1)
}

/// Whether the closed-form optimal-κ envelope is the true supremum. For
/// finite-support DF with three or more relays it is not, and the optimal
/// curve falls back to numerical maximization over κ.
fn closed_form_envelope_holds(protocol: Protocol, mode: Mode, relays: usize) -> bool {
    !(protocol.is_decode_forward() && mode == Mode::Finite && relays >= 3)
}

fn fixed_curve(protocol: Protocol, mode: Mode, relays: usize, kappa: f64) -> DmtCurve {
    let f = if protocol.is_decode_forward() {
        df_fixed_pwl(protocol, mode, relays, kappa)
    } else {
        af_fixed_pwl(protocol, mode, relays, kappa)
    };
    DmtCurve::from_pwl(protocol, mode, relays, KappaPolicy::Fixed(kappa), &f)
}

/// κ that maximizes the NSDF synchronous diversity at low rates:
/// the positive root of `M κ² − κ − M = 0`.
pub fn kappa_nsdf_infinite(relays: usize) -> f64 {
    let m = relays as f64;
    (1.0 + (1.0 + 4.0 * m * m).sqrt()) / (2.0 * m)
}

fn affine(r0: f64, r1: f64, slope: f64, intercept: f64, prov: &str) -> Segment {
    Segment { r_start: r0, r_end: r1, form: SegmentForm::Affine { slope, intercept }, provenance: prov.into() }
}

fn optimal_curve(protocol: Protocol, mode: Mode, relays: usize) -> DmtCurve {
    let m = relays as f64;
    if !closed_form_envelope_holds(protocol, mode, relays) {
        let segments = vec![Segment {
            r_start: 0.0,
            r_end: 1.0,
            form: SegmentForm::KappaSupremum { protocol, mode, relays },
            provenance: "numerical supremum over κ".into(),
        }];
        return DmtCurve { protocol, mode, relays, policy: KappaPolicy::Optimal, segments };
    }
    let segments = match (protocol, mode) {
        (Protocol::Nsdf, Mode::Finite) => {
            let b = 1.0 / (1.0 + KAPPA_HAT);
            vec![
                affine(0.0, b, -(m * (1.0 + 1.0 / KAPPA_HAT) + 1.0), m + 1.0, "optimal κ = golden ratio"),
                Segment {
                    r_start: b,
                    r_end: 1.0,
                    form: SegmentForm::SqrtAffine { c0: m + 1.0, c1: -1.0, cs: -m },
                    provenance: "optimal κ = √r/(1−√r)".into(),
                },
            ]
        }
        (Protocol::Nsdf, Mode::Infinite) => {
            let k = kappa_nsdf_infinite(relays);
            let b = 1.0 / (1.0 + k);
            vec![
                affine(0.0, b, -m * (1.0 + k), m + 1.0, "optimal κ = κ_M"),
                Segment {
                    r_start: b,
                    r_end: 1.0,
                    form: SegmentForm::Rational { num: [m + 1.0, -(m + 2.0), 1.0], den: [1.0, m - 1.0] },
                    provenance: "optimal κ = (1+(M−1)r)/(M(1−r))".into(),
                },
            ]
        }
        (Protocol::Osdf, Mode::Finite) => vec![
            affine(0.0, 1.0 / 3.0, -1.5 * (m + 1.0), m + 1.0, "optimal κ = 2"),
            Segment {
                r_start: 1.0 / 3.0,
                r_end: 1.0,
                form: SegmentForm::Rational { num: [m + 1.0, -(m + 1.0), 0.0], den: [1.0, 1.0] },
                provenance: "optimal κ = (1+r)/(1−r)".into(),
            },
        ],
        (Protocol::Osdf, Mode::Infinite) => {
            let b = m / (2.0 * m + 1.0);
            vec![
                affine(0.0, b, -(2.0 * m + 1.0), m + 1.0, "optimal κ = (M+1)/M"),
                Segment {
                    r_start: b,
                    r_end: 1.0,
                    form: SegmentForm::Rational { num: [m + 1.0, -(m + 1.0), 0.0], den: [1.0, m] },
                    provenance: "optimal κ = (1+Mr)/(M(1−r))".into(),
                },
            ]
        }
        (Protocol::Naf, Mode::Finite) => vec![
            affine(0.0, 0.5, -2.0 * m, m + 1.0, "optimal κ = 1"),
            affine(0.5, 1.0, -2.0, 2.0, "optimal κ = 1"),
        ],
        (Protocol::Naf, Mode::Infinite) => vec![
            affine(0.0, 0.5, -(2.0 * m + 1.0), m + 1.0, "optimal κ = 1"),
            affine(0.5, 1.0, -1.0, 1.0, "optimal κ = 1"),
        ],
        (Protocol::Oaf, _) => vec![
            affine(0.0, 0.5, -(2.0 * m + 1.0), m + 1.0, "optimal κ = (M+1)/M"),
            affine(0.5, 1.0, -1.0, 1.0, "source alone"),
        ],
    };
    DmtCurve { protocol, mode, relays, policy: KappaPolicy::Optimal, segments }
}

/// DMT curve for any protocol/mode/policy.
pub fn dmt(protocol: Protocol, mode: Mode, relays: usize, policy: KappaPolicy) -> Result<DmtCurve> {
    check_inputs(relays, policy)?;
    Ok(match policy {
        KappaPolicy::Fixed(k) => fixed_curve(protocol, mode, relays, k),
        KappaPolicy::Optimal => optimal_curve(protocol, mode, relays),
    })
}

pub fn dmt_nsdf(relays: usize, mode: Mode, policy: KappaPolicy) -> Result<DmtCurve> {
    dmt(Protocol::Nsdf, mode, relays, policy)
}

pub fn dmt_osdf(relays: usize, mode: Mode, policy: KappaPolicy) -> Result<DmtCurve> {
    dmt(Protocol::Osdf, mode, relays, policy)
}

pub fn dmt_naf(relays: usize, mode: Mode, policy: KappaPolicy) -> Result<DmtCurve> {
    dmt(Protocol::Naf, mode, relays, policy)
}

/// OAF curves do not depend on the mode; both modes give the same segments.
pub fn dmt_oaf(relays: usize, mode: Mode, policy: KappaPolicy) -> Result<DmtCurve> {
    dmt(Protocol::Oaf, mode, relays, policy)
}

/// Per-r maximizing κ. For OAF above r = 1/2 the source should transmit
/// alone; this is reported as `f64::INFINITY`.
pub fn optimal_kappa(protocol: Protocol, mode: Mode, relays: usize, r: f64) -> Result<f64> {
    if relays == 0 {
        return Err(Error::Invalid("need at least one relay".into()));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Invalid(format!("r must lie in [0, 1), got {r}")));
    }
    let m = relays as f64;
    if !closed_form_envelope_holds(protocol, mode, relays) {
        return Ok(kappa_supremum(protocol, mode, relays, r).1);
    }
    Ok(match (protocol, mode) {
        (Protocol::Nsdf, Mode::Finite) => {
            if r <= 1.0 / (1.0 + KAPPA_HAT) {
                KAPPA_HAT
            } else {
                r.sqrt() / (1.0 - r.sqrt())
            }
        }
        (Protocol::Nsdf, Mode::Infinite) => {
            let k = kappa_nsdf_infinite(relays);
            if r < 1.0 / (1.0 + k) {
                k
            } else {
                (1.0 + (m - 1.0) * r) / (m * (1.0 - r))
            }
        }
        (Protocol::Osdf, Mode::Finite) => {
            if r <= 1.0 / 3.0 {
                2.0
            } else {
                (1.0 + r) / (1.0 - r)
            }
        }
        (Protocol::Osdf, Mode::Infinite) => {
            if r <= m / (2.0 * m + 1.0) {
                (m + 1.0) / m
            } else {
                (1.0 + m * r) / (m * (1.0 - r))
            }
        }
        (Protocol::Naf, _) => 1.0,
        (Protocol::Oaf, _) => {
            if r <= 0.5 {
                (m + 1.0) / m
            } else {
                f64::INFINITY
            }
        }
    })
}

/// Evaluate a curve, rejecting `r` outside `[0, 1]`.
pub fn eval_curve(curve: &DmtCurve, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) || r.is_nan() {
        return Err(Error::Invalid(format!("r must lie in [0, 1], got {r}")));
    }
    Ok(curve.eval(r))
}

/// Diversity of `M+1`-antenna MISO: `(M+1)(1 − r)`.
pub fn miso_bound(relays: usize, r: f64) -> f64 {
    (relays as f64 + 1.0) * (1.0 - r)
}
