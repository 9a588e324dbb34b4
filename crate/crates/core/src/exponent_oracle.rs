//! Brute-force solvers for the outage-exponent infimum problems.
//!
//! Every DMT curve is the value of a small linear-objective problem
//!
//! ```text
//!     inf  w·x   subject to   surrogate(x) ≤ r,   x ∈ [0, 1.25]^dim
//! ```
//!
//! where `surrogate` is [`crate::channel_model::surrogate`]. This module
//! solves those problems by grid search, independently of the closed forms in
//! [`crate::dmt_closed_form`], and assembles them into outage exponents.
//!
//! Two solvers are provided:
//!
//! * [`solve_inf`] — reduced: the source exponent `α_0` is gridded, the
//!   remaining (symmetric) exponent is found by bisection, and every discrete
//!   local minimum is re-gridded at 1/100 of the step.
//! * [`solve_inf_full`] — a plain grid over all variables (DF: `α_0..α_m`;
//!   AF: `α_0, α, β`). Exponential in the dimension; used to validate the
//!   reduction at coarse steps.
//!
//! The outage event is `surrogate < r`. Both solvers use the closed constraint
//! `surrogate ≤ r`; the objective is continuous, so the infimum is the same.

use crate::channel_model::{surrogate, Shares};
use crate::dmt_closed_form::fixed_value;
use crate::{Error, Mode, Protocol, Result};
use std::fmt::Write as _;

/// Upper edge of the exponent box.
pub const BOX_MAX: f64 = 1.25;
pub const DEFAULT_GRID_STEP: f64 = 0.005;

const FEAS_TOL: f64 = 1e-12;
const BISECT_ITERS: usize = 60;
const REFINE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfProblem {
    pub protocol: Protocol,
    pub mode: Mode,
    pub shares: Shares,
    /// `M`; enters the AF objective `α_0 + Mα + Mβ`.
    pub relays: usize,
    /// Number of decoded relays `m` (DF only).
    pub participants: usize,
    pub r: f64,
}

impl InfProblem {
    /// `d_{E_m}`: exactly `m` of the relays decoded.
    pub fn df(protocol: Protocol, mode: Mode, shares: Shares, relays: usize, m: usize, r: f64) -> Result<Self> {
        if !protocol.is_decode_forward() {
            return Err(Error::Invalid(format!("{protocol} is not a decode-and-forward protocol")));
        }
        if m > relays {
            return Err(Error::Invalid(format!("m = {m} exceeds M = {relays}")));
        }
        Self::checked(InfProblem { protocol, mode, shares, relays, participants: m, r })
    }

    pub fn af(protocol: Protocol, mode: Mode, shares: Shares, relays: usize, r: f64) -> Result<Self> {
        if protocol.is_decode_forward() {
            return Err(Error::Invalid(format!("{protocol} is not an amplify-and-forward protocol")));
        }
        Self::checked(InfProblem { protocol, mode, shares, relays, participants: relays, r })
    }

    /// Direct transmission only: `inf α_0` s.t. `(1−α_0)⁺ ≤ r`.
    pub fn source_alone(r: f64) -> Result<Self> {
        // NSDF with nobody decoded over a finite-support frame is exactly the
        // source-to-destination link used for the whole frame.
        Self::checked(InfProblem {
            protocol: Protocol::Nsdf,
            mode: Mode::Finite,
            shares: Shares::from_kappa(1.0),
            relays: 1,
            participants: 0,
            r,
        })
    }

    fn checked(pb: Self) -> Result<Self> {
        if pb.relays == 0 {
            return Err(Error::Invalid("at least one relay is required".into()));
        }
        if !(0.0..=1.0).contains(&pb.r) {
            return Err(Error::Invalid(format!("r = {} outside [0, 1]", pb.r)));
        }
        Ok(pb)
    }

    /// Number of variables in the full formulation.
    pub fn dimension(&self) -> usize {
        if self.protocol.is_decode_forward() {
            self.participants + 1
        } else {
            3
        }
    }

    /// Surrogate mutual-information exponent at `x`.
    pub fn constraint(&self, x: &[f64]) -> f64 {
        let (p, q) = (self.shares.p, self.shares.q);
        if self.protocol.is_decode_forward() {
            surrogate(self.protocol, self.mode, p, q, x, &[])
        } else {
            surrogate(self.protocol, self.mode, p, q, &x[..2], &x[2..3])
        }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        if self.protocol.is_decode_forward() {
            x.iter().sum()
        } else {
            let m = self.relays as f64;
            x[0] + m * x[1] + m * x[2]
        }
    }

    pub fn feasible(&self, x: &[f64]) -> bool {
        self.constraint(x) <= self.r + FEAS_TOL
    }

    /// Point used by the reduced solver: `α_0` plus the symmetric remainder.
    fn reduced_point(&self, a0: f64, t: f64) -> Vec<f64> {
        if self.protocol.is_decode_forward() {
            let mut x = vec![t; self.participants + 1];
            x[0] = a0;
            x
        } else {
            vec![a0, 0.0, t]
        }
    }

    /// Best objective for a fixed `α_0`, minimising the remaining exponent by
    /// bisection (the constraint is non-increasing in it).
    fn best_given_a0(&self, a0: f64) -> Option<(f64, Vec<f64>)> {
        if self.protocol.is_decode_forward() && self.participants == 0 {
            let x = vec![a0];
            return self.feasible(&x).then_some((a0, x));
        }
        let feasible_at = |t: f64| self.feasible(&self.reduced_point(a0, t));
        let t = if feasible_at(0.0) {
            0.0
        } else if !feasible_at(BOX_MAX) {
            return None;
        } else {
            let (mut lo, mut hi) = (0.0, BOX_MAX);
            for _ in 0..BISECT_ITERS {
                let mid = 0.5 * (lo + hi);
                if feasible_at(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let x = self.reduced_point(a0, t);
        Some((self.objective(&x), x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Infimum, or `+∞` if no point of the box is feasible.
    pub value: f64,
    /// Minimiser in the full formulation's coordinates (empty if infeasible).
    pub argmin: Vec<f64>,
    pub grid_step: f64,
}

impl OracleResult {
    fn infeasible(grid_step: f64) -> Self {
        OracleResult { value: f64::INFINITY, argmin: Vec::new(), grid_step }
    }
}

fn check_step(step: f64) -> Result<usize> {
    if !(step > 0.0 && step <= 0.01 + 1e-15) {
        return Err(Error::Invalid(format!("grid step {step} must lie in (0, 0.01]")));
    }
    Ok((BOX_MAX / step).round() as usize)
}

fn grid_point(k: usize, n: usize, step: f64) -> f64 {
    if k == n {
        BOX_MAX
    } else {
        k as f64 * step
    }
}

/// Reduced grid solver.
pub fn solve_inf(pb: &InfProblem, grid_step: f64) -> Result<OracleResult> {
    let n = check_step(grid_step)?;
    let coarse: Vec<Option<(f64, Vec<f64>)>> = (0..=n).map(|k| pb.best_given_a0(grid_point(k, n, grid_step))).collect();
    let val = |k: usize| coarse[k].as_ref().map_or(f64::INFINITY, |c| c.0);

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |cand: Option<(f64, Vec<f64>)>| {
        if let Some(c) = cand {
            if best.as_ref().is_none_or(|b| c.0 < b.0) {
                best = Some(c);
            }
        }
    };
    for k in 0..=n {
        let v = val(k);
        if !v.is_finite() {
            continue;
        }
        let left = if k == 0 { f64::INFINITY } else { val(k - 1) };
        let right = if k == n { f64::INFINITY } else { val(k + 1) };
        consider(coarse[k].clone());
        if v <= left && v <= right {
            // the true minimiser lies within one step of a discrete local minimum
            let c = grid_point(k, n, grid_step);
            let lo = (c - grid_step).max(0.0);
            let hi = (c + grid_step).min(BOX_MAX);
            for j in 0..=2 * REFINE {
                let a0 = lo + (hi - lo) * j as f64 / (2 * REFINE) as f64;
                consider(pb.best_given_a0(a0));
            }
        }
    }
    Ok(match best {
        Some((value, argmin)) => OracleResult { value, argmin, grid_step },
        None => OracleResult::infeasible(grid_step),
    })
}

/// Plain grid over every variable of the full formulation.
pub fn solve_inf_full(pb: &InfProblem, grid_step: f64) -> Result<OracleResult> {
    if !(grid_step > 0.0 && grid_step <= 0.25) {
        return Err(Error::Invalid(format!("grid step {grid_step} must lie in (0, 0.25]")));
    }
    let n = (BOX_MAX / grid_step).round() as usize;
    let dim = pb.dimension();
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    let mut best = OracleResult::infeasible(grid_step);
    loop {
        for (xi, &k) in x.iter_mut().zip(&idx) {
            *xi = grid_point(k, n, grid_step);
        }
        let obj = pb.objective(&x);
        if obj < best.value && pb.feasible(&x) {
            best.value = obj;
            best.argmin = x.clone();
        }
        let mut d = 0;
        while d < dim {
            idx[d] += 1;
            if idx[d] <= n {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == dim {
            break;
        }
    }
    Ok(best)
}

/// SNR exponent of `Pr(E_m)`: `(1 − r/P)(M−m)` for `r ≤ P`; beyond the
/// broadcast share nobody decodes, so `E_0` is certain (0) and every other
/// event has exponent `+∞`.
pub fn decode_exponent(relays: usize, m: usize, r: f64, shares: Shares) -> Result<f64> {
    if m > relays {
        return Err(Error::Invalid(format!("m = {m} exceeds M = {relays}")));
    }
    if r <= shares.p {
        Ok((1.0 - r / shares.p) * (relays - m) as f64)
    } else if m == 0 {
        Ok(0.0)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Outage exponent assembled from the infimum problems, with the decode
/// event and minimising problem that attain it.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledExponent {
    pub value: f64,
    /// Winning decode-set size for DF; `None` for AF.
    pub decoded: Option<usize>,
    pub argmin: Vec<f64>,
    /// Whether direct transmission (`1 − r`) beat cooperation.
    pub source_alone: bool,
}

/// Outage exponent of a protocol at frame split `shares` and multiplexing
/// gain `r`: `min_m [decode exponent + d_{E_m}]` for DF, the single infimum
/// for AF, then compared against direct transmission for every protocol but
/// OAF.
pub fn assemble_detailed(
    protocol: Protocol,
    mode: Mode,
    relays: usize,
    shares: Shares,
    r: f64,
    grid_step: f64,
) -> Result<AssembledExponent> {
    let mut best = AssembledExponent { value: f64::INFINITY, decoded: None, argmin: Vec::new(), source_alone: false };
    if protocol.is_decode_forward() {
        for m in 0..=relays {
            let dec = decode_exponent(relays, m, r, shares)?;
            if dec.is_infinite() {
                continue;
            }
            let sol = solve_inf(&InfProblem::df(protocol, mode, shares, relays, m, r)?, grid_step)?;
            if dec + sol.value < best.value {
                best = AssembledExponent { value: dec + sol.value, decoded: Some(m), argmin: sol.argmin, source_alone: false };
            }
        }
    } else {
        let sol = solve_inf(&InfProblem::af(protocol, mode, shares, relays, r)?, grid_step)?;
        best.value = sol.value;
        best.argmin = sol.argmin;
    }
    if protocol != Protocol::Oaf {
        let direct = solve_inf(&InfProblem::source_alone(r)?, grid_step)?;
        if direct.value > best.value {
            best = AssembledExponent { value: direct.value, decoded: None, argmin: direct.argmin, source_alone: true };
        }
    }
    Ok(best)
}

pub fn assemble_outage_exponent(
    protocol: Protocol,
    mode: Mode,
    relays: usize,
    shares: Shares,
    r: f64,
    grid_step: f64,
) -> Result<f64> {
    assemble_detailed(protocol, mode, relays, shares, r, grid_step).map(|a| a.value)
}

/// One row of an oracle-versus-closed-form comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub r: f64,
    pub oracle: f64,
    pub closed_form: f64,
    pub gap: f64,
    pub detail: AssembledExponent,
}

/// Compare the oracle with the fixed-κ closed form on `r_grid`.
pub fn compare_fixed_kappa(
    protocol: Protocol,
    mode: Mode,
    relays: usize,
    kappa: f64,
    r_grid: &[f64],
    grid_step: f64,
) -> Result<Vec<OracleRow>> {
    let shares = Shares::from_kappa(kappa);
    r_grid
        .iter()
        .map(|&r| {
            let detail = assemble_detailed(protocol, mode, relays, shares, r, grid_step)?;
            let closed_form = fixed_value(protocol, mode, relays, kappa, r);
            let gap = if detail.value == closed_form { 0.0 } else { (detail.value - closed_form).abs() };
            Ok(OracleRow { r, oracle: detail.value, closed_form, gap, detail })
        })
        .collect()
}

pub fn rows_csv(rows: &[OracleRow]) -> String {
    let mut s = String::from("r,oracle_d,closed_form_d,abs_gap,decoded,argmin\n");
    for row in rows {
        let decoded = match (row.detail.source_alone, row.detail.decoded) {
            (true, _) => "direct".to_string(),
            (false, Some(m)) => m.to_string(),
            (false, None) => String::new(),
        };
        let argmin: Vec<String> = row.detail.argmin.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(
            s,
            "{:.4},{:.9},{:.9},{:.3e},{},{}",
            row.r,
            row.oracle,
            row.closed_form,
            row.gap,
            decoded,
            argmin.join(" ")
        );
    }
    s
}

/// Negated least-squares slope of `log10 p_out` against `log10 ρ`
/// (`ρ = 10^{snr_db/10}`).
pub fn regress_slope(snr_db: &[f64], p_out: &[f64]) -> Result<f64> {
    if snr_db.len() != p_out.len() {
        return Err(Error::Dimension(format!("{} SNR points but {} probabilities", snr_db.len(), p_out.len())));
    }
    if snr_db.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} points; at least 3 are needed for a slope",
            snr_db.len()
        )));
    }
    if let Some(i) = p_out.iter().position(|&p| !(p > 0.0)) {
        return Err(Error::InsufficientData(format!(
            "zero outage probability at {} dB; increase the trial count or lower the SNR",
            snr_db[i]
        )));
    }
    let x: Vec<f64> = snr_db.iter().map(|s| s / 10.0).collect();
    let y: Vec<f64> = p_out.iter().map(|p| p.log10()).collect();
    Ok(-least_squares(&x, &y))
}

/// Fit of `log p_out ≈ c − d·log ρ + k·log ln ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylogFit {
    /// The diversity estimate `d`.
    pub slope: f64,
    /// Power `k` of the `log ρ` prefactor.
    pub log_power: f64,
    /// Standard error of `slope` implied by the per-point errors.
    pub slope_se: f64,
}

/// Diversity estimate that allows a `(log ρ)^k` prefactor.
///
/// At desk-scale SNR the outage probability behaves like `c·ρ^{-d}(log ρ)^k`,
/// where `k` counts flat directions of the infimum problem and product
/// channels `h_j g_j`. A plain fit then returns roughly `d − k/ln ρ`; fitting
/// `k` jointly removes that bias. `rel_se` (standard error of `p_out` divided
/// by `p_out`) weights the points; `None` weights them equally.
pub fn regress_slope_polylog(snr_db: &[f64], p_out: &[f64], rel_se: Option<&[f64]>) -> Result<PolylogFit> {
    if snr_db.len() != p_out.len() || rel_se.is_some_and(|s| s.len() != p_out.len()) {
        return Err(Error::Dimension("SNR, probability and error vectors differ in length".into()));
    }
    if snr_db.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} points; at least 4 are needed for a log-corrected slope",
            snr_db.len()
        )));
    }
    if let Some(i) = p_out.iter().position(|&p| !(p > 0.0)) {
        return Err(Error::InsufficientData(format!(
            "zero outage probability at {} dB; increase the trial count or lower the SNR",
            snr_db[i]
        )));
    }
    let n = snr_db.len();
    let mut x = nalgebra::DMatrix::zeros(n, 3);
    let mut y = nalgebra::DVector::zeros(n);
    for i in 0..n {
        let log_rho = snr_db[i] / 10.0;
        let w = match rel_se {
            Some(s) if s[i] > 0.0 => std::f64::consts::LN_10 / s[i],
            _ => 1.0,
        };
        x[(i, 0)] = w;
        x[(i, 1)] = w * log_rho;
        x[(i, 2)] = w * (log_rho * std::f64::consts::LN_10).log10();
        y[i] = w * p_out[i].log10();
    }
    let normal = x.transpose() * &x;
    let cov = normal
        .try_inverse()
        .ok_or_else(|| Error::Numerical("degenerate SNR grid for the log-corrected fit".into()))?;
    let coef = &cov * x.transpose() * y;
    Ok(PolylogFit { slope: -coef[1], log_power: coef[2], slope_se: cov[(1, 1)].max(0.0).sqrt() })
}

fn least_squares(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
