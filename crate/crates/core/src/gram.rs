//! Structured correlation matrices of the discrete channel model.
//!
//! For finite-support pulses the matched-filter outputs are coupled through
//! `Ξ`, an `(m+1)×(m+1)` array of `q×q` banded Toeplitz blocks
//! `Γ_{i,j}(k, l) = γ_{i,j}(k − l)`. Its block symbol is
//! `Γ(ω) = Σ_n γ(n) e^{−ιωn}`. Sinc pulses instead give full Toeplitz
//! matrices `Γ_j` of waveform samples.

use crate::quad::Rule;
use crate::waveforms::{correlate, sample_waveform, sinc, DelayProfile, Waveform};
use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Tolerance below which an eigenvalue of `Ξ` counts as zero (relative to the largest).
pub const RANK_TOL: f64 = 1e-10;

/// Sampled cross-correlations `γ_{i,j}(n)` for `n = −u..=u`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationLags {
    u: usize,
    // data[i][j][n + u]
    data: Vec<Vec<Vec<f64>>>,
}

impl CorrelationLags {
    pub fn compute(waveforms: &[Waveform], delays: &DelayProfile, u: usize) -> Result<Self> {
        if waveforms.len() != delays.len() {
            return Err(Error::Dimension(format!(
                "{} waveforms but {} delays",
                waveforms.len(),
                delays.len()
            )));
        }
        for w in waveforms {
            match w.support_u() {
                None => return Err(Error::ModeMismatch("Ξ is only defined for finite-support pulses".into())),
                Some(wu) if wu as usize > u => {
                    return Err(Error::Dimension(format!("pulse support {wu} exceeds band order {u}")))
                }
                _ => {}
            }
        }
        let nodes = waveforms.len();
        let mut data = vec![vec![vec![0.0; 2 * u + 1]; nodes]; nodes];
        for i in 0..nodes {
            for j in 0..nodes {
                let tau = delays.relative(i, j);
                for n in -(u as i64)..=(u as i64) {
                    data[i][j][(n + u as i64) as usize] = correlate(&waveforms[i], &waveforms[j], n, tau)?;
                }
            }
        }
        Ok(CorrelationLags { u, data })
    }

    pub fn nodes(&self) -> usize {
        self.data.len()
    }

    pub fn band(&self) -> usize {
        self.u
    }

    /// `γ_{i,j}(n)`, zero outside the band.
    pub fn get(&self, i: usize, j: usize, n: i64) -> f64 {
        let u = self.u as i64;
        if n.abs() > u {
            0.0
        } else {
            self.data[i][j][(n + u) as usize]
        }
    }

    /// `Γ(ω)` by the DTFT definition.
    pub fn symbol(&self, omega: f64) -> DMatrix<Complex64> {
        let m = self.nodes();
        let u = self.u as i64;
        DMatrix::from_fn(m, m, |i, j| {
            (-u..=u).map(|n| Complex64::from_polar(self.get(i, j, n), -omega * n as f64)).sum()
        })
    }

    fn max_abs_diff(&self, other: &CorrelationLags) -> f64 {
        if self.u != other.u || self.nodes() != other.nodes() {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for (a, b) in self.data.iter().flatten().flatten().zip(other.data.iter().flatten().flatten()) {
            d = d.max((a - b).abs());
        }
        d
    }
}

/// Banded `size×size` Toeplitz matrix with entries `γ_{i,j}(k − l)`.
fn toeplitz_block(lags: &CorrelationLags, i: usize, j: usize, size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |k, l| lags.get(i, j, k as i64 - l as i64))
}

/// `Ξ` and its blocks. The destination noise after matched filtering has
/// covariance `Φ = σ_d² Ξ`.
#[derive(Debug, Clone)]
pub struct CorrelationGram {
    q: usize,
    lags: CorrelationLags,
    xi: DMatrix<f64>,
}

/// Assemble `Ξ` for one waveform per participating node.
pub fn build_xi(waveforms: &[Waveform], delays: &DelayProfile, u: usize, q: usize) -> Result<CorrelationGram> {
    if q < u + 1 {
        return Err(Error::Dimension(format!("block size q = {q} must be at least u + 1 = {}", u + 1)));
    }
    let lags = CorrelationLags::compute(waveforms, delays, u)?;
    Ok(CorrelationGram::from_lags(lags, q))
}

impl CorrelationGram {
    pub fn from_lags(lags: CorrelationLags, q: usize) -> Self {
        let m = lags.nodes();
        let mut xi = DMatrix::zeros(m * q, m * q);
        for i in 0..m {
            for j in 0..m {
                xi.view_mut((i * q, j * q), (q, q)).copy_from(&toeplitz_block(&lags, i, j, q));
            }
        }
        CorrelationGram { q, lags, xi }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn band(&self) -> usize {
        self.lags.u
    }

    pub fn nodes(&self) -> usize {
        self.lags.nodes()
    }

    pub fn lags(&self) -> &CorrelationLags {
        &self.lags
    }

    pub fn xi(&self) -> &DMatrix<f64> {
        &self.xi
    }

    /// Block `Γ_{i,j}`.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        let q = self.q;
        self.xi.view((i * q, j * q), (q, q)).into_owned()
    }

    /// `size×size` Toeplitz autocorrelation of node `i` (e.g. the source's
    /// broadcast phase with `p` symbols).
    pub fn autocorrelation(&self, i: usize, size: usize) -> DMatrix<f64> {
        toeplitz_block(&self.lags, i, i, size)
    }

    /// Principal submatrix of `Ξ` restricted to the listed nodes, in order.
    pub fn restrict(&self, nodes: &[usize]) -> DMatrix<f64> {
        let q = self.q;
        let k = nodes.len();
        let mut out = DMatrix::zeros(k * q, k * q);
        for (a, &i) in nodes.iter().enumerate() {
            for (b, &j) in nodes.iter().enumerate() {
                out.view_mut((a * q, b * q), (q, q)).copy_from(&self.xi.view((i * q, j * q), (q, q)));
            }
        }
        out
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted(SymmetricEigen::new(self.xi.clone()).eigenvalues.iter().copied().collect())
    }

    /// Numerical rank of `Ξ` (eigenvalues above `RANK_TOL·λ_max`).
    pub fn rank(&self) -> usize {
        let ev = self.eigenvalues();
        let top = ev.last().copied().unwrap_or(0.0).max(0.0);
        ev.iter().filter(|&&l| l > RANK_TOL * top).count()
    }

    /// True when `Ξ` is singular — e.g. identical pulses with equal delays,
    /// where all node signals collapse onto one q-dimensional subspace.
    pub fn is_degenerate(&self) -> bool {
        self.rank() < self.xi.nrows()
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// `ω_k = 2πk/n`, `k = 0..n`.
pub fn uniform_omega_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// `Γ(ω)` on a grid together with its spectra.
#[derive(Debug, Clone)]
pub struct SpectralGram {
    pub omega: Vec<f64>,
    pub matrices: Vec<DMatrix<Complex64>>,
    /// Ascending eigenvalues `μ_k(ω)` per grid point.
    pub eigenvalues: Vec<Vec<f64>>,
    /// Largest entrywise gap between the DTFT and the integral evaluation of `Γ(ω)`.
    pub dtft_integral_gap: f64,
    lags: CorrelationLags,
}

/// `Γ(ω)` via the DTFT of `γ_{i,j}` and, independently, via
/// `Γ(ω) = ∫₀^{T_s} v(t,ω)^† v(t,ω) dt` with
/// `v_a(t,ω) = Σ_{i=0}^{u} ψ_a(t + iT_s − τ_a) e^{ιωi}`.
pub fn build_gamma_omega(
    waveforms: &[Waveform],
    delays: &DelayProfile,
    u: usize,
    omega_grid: &[f64],
) -> Result<SpectralGram> {
    if omega_grid.len() < 64 {
        return Err(Error::Invalid(format!("ω grid needs at least 64 points, got {}", omega_grid.len())));
    }
    let lags = CorrelationLags::compute(waveforms, delays, u)?;
    let results: Vec<(DMatrix<Complex64>, f64)> = omega_grid
        .par_iter()
        .map(|&w| {
            let dtft = lags.symbol(w);
            let integral = gamma_omega_integral(waveforms, delays, u, w);
            let gap = (&dtft - &integral).iter().map(|z| z.norm()).fold(0.0, f64::max);
            (dtft, gap)
        })
        .collect();
    let dtft_integral_gap = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let matrices: Vec<DMatrix<Complex64>> = results.into_iter().map(|r| r.0).collect();
    let eigenvalues = matrices.iter().map(hermitian_eigenvalues).collect();
    Ok(SpectralGram { omega: omega_grid.to_vec(), matrices, eigenvalues, dtft_integral_gap, lags })
}

/// Integral form of `Γ(ω)` evaluated with quadrature over one symbol interval.
pub fn gamma_omega_integral(waveforms: &[Waveform], delays: &DelayProfile, u: usize, omega: f64) -> DMatrix<Complex64> {
    let m = waveforms.len();
    let ts = delays.symbol_interval();
    let breaks: Vec<f64> = delays.delays().to_vec();
    let phases: Vec<Complex64> = (0..=u).map(|i| Complex64::from_polar(1.0, omega * i as f64)).collect();
    let mut acc = DMatrix::<Complex64>::zeros(m, m);
    let mut v = vec![Complex64::new(0.0, 0.0); m];
    for (t, wt) in Rule::standard().nodes_split(0.0, ts, &breaks) {
        for (a, va) in v.iter_mut().enumerate() {
            *va = (0..=u)
                .map(|i| phases[i] * waveforms[a].eval(t + i as f64 * ts - delays.delays()[a]))
                .sum();
        }
        for a in 0..m {
            for b in 0..m {
                acc[(a, b)] += v[a].conj() * v[b] * wt;
            }
        }
    }
    acc
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    sorted(SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect())
}

impl SpectralGram {
    pub fn nodes(&self) -> usize {
        self.lags.nodes()
    }

    /// Largest `‖Γ(ω) − Γ(ω)^†‖_max` over the grid.
    pub fn hermitian_defect(&self) -> f64 {
        self.matrices
            .iter()
            .map(|g| (g - g.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// `μ_min(ω)` / `μ_max(ω)` at an arbitrary frequency.
    fn extreme_eig(&self, omega: f64, want_max: bool) -> f64 {
        let ev = hermitian_eigenvalues(&self.lags.symbol(omega));
        if want_max {
            *ev.last().unwrap()
        } else {
            ev[0]
        }
    }

    /// Global extreme of `μ_min` (or `μ_max`) over `ω`: grid search followed by
    /// golden-section refinement around the best grid point.
    fn refined_extreme(&self, want_max: bool) -> f64 {
        let sign = if want_max { -1.0 } else { 1.0 };
        let f = |w: f64| sign * self.extreme_eig(w, want_max);
        let (k, _) = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, ev)| (k, sign * if want_max { *ev.last().unwrap() } else { ev[0] }))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let step = 2.0 * PI / self.omega.len() as f64;
        let (mut a, mut b) = (self.omega[k] - step, self.omega[k] + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..80 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        let grid_best = sign
            * if want_max {
                *self.eigenvalues[k].last().unwrap()
            } else {
                self.eigenvalues[k][0]
            };
        sign * grid_best.min(fc.min(fd))
    }

    /// CSV rows `ω, μ_1, …, μ_{m+1}`.
    pub fn to_csv(&self) -> String {
        let m = self.nodes();
        let mut s = String::from("omega");
        for k in 1..=m {
            s.push_str(&format!(",mu_{k}"));
        }
        s.push('\n');
        for (w, ev) in self.omega.iter().zip(&self.eigenvalues) {
            s.push_str(&format!("{w:.12}"));
            for e in ev {
                s.push_str(&format!(",{e:.12e}"));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdReport {
    pub min_eig: f64,
    pub argmin_omega: f64,
    /// Grid frequencies where the smallest eigenvalue is below `−1e-9`.
    pub violating_omega: Vec<f64>,
}

impl PsdReport {
    pub fn passed(&self) -> bool {
        self.violating_omega.is_empty()
    }
}

pub fn check_psd(sg: &SpectralGram) -> PsdReport {
    let mut min_eig = f64::INFINITY;
    let mut argmin_omega = 0.0;
    let mut violating_omega = Vec::new();
    for (w, ev) in sg.omega.iter().zip(&sg.eigenvalues) {
        if ev[0] < min_eig {
            min_eig = ev[0];
            argmin_omega = *w;
        }
        if ev[0] < -1e-9 {
            violating_omega.push(*w);
        }
    }
    PsdReport { min_eig, argmin_omega, violating_omega }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SzegoReport {
    pub q: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub contained: bool,
    /// `Σλ_k(Ξ)/q`.
    pub trace_per_q: f64,
    /// `(1/2π)∫ tr Γ(ω) dω`.
    pub trace_symbol: f64,
    pub trace_rel_err: f64,
}

/// Containment slack for eigenvalues of `Ξ` against the symbol's range.
pub const SZEGO_SLACK: f64 = 1e-6;

/// Check that every eigenvalue of `Ξ` lies in `[min μ, max μ]` of the block
/// symbol, and compare normalised traces.
pub fn szego_eig_check(cg: &CorrelationGram, sg: &SpectralGram) -> Result<SzegoReport> {
    if cg.lags.max_abs_diff(&sg.lags) > 1e-12 {
        return Err(Error::Invalid("Ξ and Γ(ω) were built from different configurations".into()));
    }
    let ev = cg.eigenvalues();
    let lambda_min = ev[0];
    let lambda_max = *ev.last().unwrap();
    let mu_min = sg.refined_extreme(false);
    let mu_max = sg.refined_extreme(true);
    let contained = lambda_min >= mu_min - SZEGO_SLACK && lambda_max <= mu_max + SZEGO_SLACK;
    let trace_per_q = ev.iter().sum::<f64>() / cg.q as f64;
    // entries are trigonometric polynomials, so the uniform-grid mean is exact
    let trace_symbol = sg.eigenvalues.iter().map(|e| e.iter().sum::<f64>()).sum::<f64>() / sg.omega.len() as f64;
    let trace_rel_err = (trace_per_q - trace_symbol).abs() / trace_symbol.abs();
    Ok(SzegoReport {
        q: cg.q,
        lambda_min,
        lambda_max,
        mu_min,
        mu_max,
        contained,
        trace_per_q,
        trace_symbol,
        trace_rel_err,
    })
}

/// Szegő reports for a sequence of block sizes over one configuration.
pub fn szego_sweep(
    waveforms: &[Waveform],
    delays: &DelayProfile,
    u: usize,
    qs: &[usize],
    omega_points: usize,
) -> Result<Vec<SzegoReport>> {
    let sg = build_gamma_omega(waveforms, delays, u, &uniform_omega_grid(omega_points))?;
    qs.iter()
        .map(|&q| {
            let cg = CorrelationGram::from_lags(sg.lags.clone(), q);
            if q < u + 1 {
                return Err(Error::Dimension(format!("q = {q} < u + 1")));
            }
            szego_eig_check(&cg, &sg)
        })
        .collect()
}

/// Full `q×q` Toeplitz matrix of sinc samples, `Γ_j(k, l) = γ_j(k − l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSampleMatrix {
    /// `γ_j(k)` for `k = −q+1..=q−1`.
    pub samples: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl ToeplitzSampleMatrix {
    pub fn q(&self) -> usize {
        self.matrix.nrows()
    }

    fn sample(&self, k: i64) -> f64 {
        let q = self.q() as i64;
        self.samples[(k + q - 1) as usize]
    }
}

pub fn build_gamma_j(psi_j: &Waveform, tau_j0: f64, q: usize) -> Result<ToeplitzSampleMatrix> {
    let samples = sample_waveform(psi_j, tau_j0, q)?;
    let qi = q as i64;
    let matrix = DMatrix::from_fn(q, q, |k, l| samples[(k as i64 - l as i64 + qi - 1) as usize]);
    Ok(ToeplitzSampleMatrix { samples, matrix })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirculantReport {
    pub n: usize,
    /// DFT of the circulant embedding's first column (its eigenvalues).
    pub dft: Vec<Complex64>,
    pub min_abs_dft: f64,
    /// Largest eigenvalue modulus of `Γ_j`.
    pub eig_abs_max: f64,
    /// `max_ω |f(ω)|` with `f` the DTFT of the sample sequence.
    pub f_abs_max: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub hermitian: bool,
    /// `|λ| ≤ 2·max|f|` for every eigenvalue.
    pub within_bound: bool,
    /// For Hermitian `Γ_j`: every eigenvalue in `[m_f − 1e-6, M_f + 1e-6]`.
    pub within_symbol_range: Option<bool>,
}

/// Embed `Γ_j` in the `N×N` circulant of the sequence
/// `γ(0), …, γ(q−1), 0, …, 0, γ(−q+1), …, γ(−1)` and inspect its spectrum.
pub fn circulant_rank_check(tm: &ToeplitzSampleMatrix, n: usize) -> Result<CirculantReport> {
    let q = tm.q();
    if n <= 2 * q {
        return Err(Error::Dimension(format!("circulant size {n} must exceed 2q = {}", 2 * q)));
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..q {
        col[k] = Complex64::new(tm.sample(k as i64), 0.0);
    }
    for k in 1..q {
        col[n - k] = Complex64::new(tm.sample(-(k as i64)), 0.0);
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut col);
    let min_abs_dft = col.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);

    let fine = 4096;
    let qi = q as i64;
    let f: Vec<Complex64> = (0..fine)
        .map(|k| {
            let w = 2.0 * PI * k as f64 / fine as f64;
            (-qi + 1..qi).map(|j| Complex64::from_polar(tm.sample(j), -w * j as f64)).sum()
        })
        .collect();
    let f_abs_max = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let f_min = f.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let f_max = f.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);

    let hermitian = (&tm.matrix - tm.matrix.transpose()).amax() < 1e-12;
    let (eig_abs_max, within_symbol_range) = if hermitian {
        let ev = SymmetricEigen::new(tm.matrix.clone()).eigenvalues;
        let ok = ev.iter().all(|&l| l >= f_min - 1e-6 && l <= f_max + 1e-6);
        (ev.amax(), Some(ok))
    } else {
        let ev = tm.matrix.complex_eigenvalues();
        (ev.iter().map(|z| z.norm()).fold(0.0, f64::max), None)
    };
    Ok(CirculantReport {
        n,
        dft: col,
        min_abs_dft,
        eig_abs_max,
        f_abs_max,
        f_min,
        f_max,
        hermitian,
        within_bound: eig_abs_max <= 2.0 * f_abs_max + 1e-9,
        within_symbol_range,
    })
}

/// `Γ(ω)` for identical sinc pulses, with the DTFT truncated at `|n| ≤ horizon`:
/// `Γ_{a,b}(ω) = Σ_n sinc(n − τ_{a,b}) e^{−ιωn}`.
pub fn sinc_gamma_omega(delays: &DelayProfile, horizon: usize, omega: f64) -> DMatrix<Complex64> {
    let m = delays.len();
    let ts = delays.symbol_interval();
    let h = horizon as i64;
    DMatrix::from_fn(m, m, |a, b| {
        let tau = delays.relative(a, b) / ts;
        (-h..=h).map(|n| Complex64::from_polar(sinc(n as f64 - tau), -omega * n as f64)).sum()
    })
}

/// Largest `σ₂/σ₁` of the truncated sinc symbol over grid points with
/// `|ω| ≤ 3π/4` (wrapped to `(−π, π]`); the band edge is excluded because the
/// DTFT of `sinc(n − τ)` jumps there.
pub fn sinc_rank_one_ratio(delays: &DelayProfile, horizon: usize, omega_grid: &[f64]) -> f64 {
    omega_grid
        .iter()
        .map(|&w| {
            let wrapped = (w + PI).rem_euclid(2.0 * PI) - PI;
            (w, wrapped)
        })
        .filter(|(_, wr)| wr.abs() <= 0.75 * PI)
        .map(|(w, _)| {
            let sv = sinc_gamma_omega(delays, horizon, w).singular_values();
            let mut s: Vec<f64> = sv.iter().copied().collect();
            s.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if s.len() < 2 || s[0] == 0.0 {
                0.0
            } else {
                s[1] / s[0]
            }
        })
        .fold(0.0, f64::max)
}

/// Infinite-support waveform matrices `Γ_j`, one per node, with `Γ_0` the
/// reference (delay zero).
pub fn build_gamma_set(waveforms: &[Waveform], delays: &DelayProfile, q: usize) -> Result<Vec<ToeplitzSampleMatrix>> {
    if waveforms.len() != delays.len() {
        return Err(Error::Dimension(format!("{} waveforms but {} delays", waveforms.len(), delays.len())));
    }
    waveforms
        .iter()
        .zip(delays.delays())
        .map(|(w, &tau)| build_gamma_j(w, tau, q))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveforms::{make_waveform, WaveformSpec};

    fn rect() -> Waveform {
        make_waveform(WaveformSpec::rectangular(1)).unwrap()
    }

    #[test]
    fn single_node_xi_is_identity() {
        let d = DelayProfile::new(vec![0.0], 1.0).unwrap();
        let cg = build_xi(&[rect()], &d, 1, 4).unwrap();
        assert!((cg.xi() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-12);
    }

    #[test]
    fn two_rect_off_diagonal_block() {
        let d = DelayProfile::new(vec![0.0, 0.3], 1.0).unwrap();
        let cg = build_xi(&[rect(), rect()], &d, 1, 3).unwrap();
        let b = cg.block(1, 0);
        let col: Vec<f64> = b.column(0).iter().copied().collect();
        for (a, e) in col.iter().zip([0.7, 0.3, 0.0]) {
            assert!((a - e).abs() < 1e-12, "{col:?}");
        }
        assert!((cg.xi() - cg.xi().transpose()).amax() < 1e-12);
    }

    #[test]
    fn q_too_small() {
        let d = DelayProfile::new(vec![0.0], 1.0).unwrap();
        let w = make_waveform(WaveformSpec::rectangular(2)).unwrap();
        assert!(matches!(build_xi(&[w], &d, 2, 2), Err(Error::Dimension(_))));
    }

    #[test]
    fn synchronous_identical_collapses_rank() {
        let d = DelayProfile::synchronous(3, 1.0);
        let w = make_waveform(WaveformSpec::raised_cosine(0.5, 2)).unwrap();
        let cg = build_xi(&[w.clone(), w.clone(), w], &d, 2, 5).unwrap();
        assert_eq!(cg.rank(), 5);
        assert!(cg.is_degenerate());
    }

    #[test]
    fn dtft_of_two_tap() {
        let d = DelayProfile::new(vec![0.0, 0.3], 1.0).unwrap();
        let sg = build_gamma_omega(&[rect(), rect()], &d, 1, &uniform_omega_grid(256)).unwrap();
        assert!(sg.dtft_integral_gap < 1e-7, "{}", sg.dtft_integral_gap);
        for (w, g) in sg.omega.iter().zip(&sg.matrices) {
            let expect = Complex64::new(0.7, 0.0) + Complex64::from_polar(0.3, *w);
            assert!((g[(0, 1)] - expect).norm() < 1e-12);
        }
        let at_pi = sg.lags.symbol(PI);
        assert!((at_pi[(0, 1)].norm() - 0.4).abs() < 1e-12);
        assert!(sg.hermitian_defect() < 1e-12);
    }

    #[test]
    fn circulant_of_impulse() {
        let s = make_waveform(WaveformSpec::sinc()).unwrap();
        let tm = build_gamma_j(&s, 0.0, 8).unwrap();
        assert!((tm.matrix.clone() - DMatrix::<f64>::identity(8, 8)).amax() < 1e-15);
        let rep = circulant_rank_check(&tm, 32).unwrap();
        assert!((rep.min_abs_dft - 1.0).abs() < 1e-12);
        assert_eq!(rep.within_symbol_range, Some(true));
    }
}
