//! Fading realizations, decode sets, and mutual information — exact
//! (log-det of the matched-filter model) and the high-SNR exponent surrogate.
//!
//! Units: `mutual_info` returns bits per channel use averaged over the frame
//! of `ℓ = p + q` uses. The surrogate returns multiples of `log ρ`, already
//! divided by `ℓ`, so outage at multiplexing gain `r` is `surrogate < r`.
//!
//! Seeds: `sample_channels(M, seed)` uses `ChaCha8Rng::seed_from_u64(seed)`.
//! Monte Carlo workers use `derive_rng(seed, stream)` which additionally
//! selects ChaCha stream `stream`, so streams never overlap.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::gram::{build_gamma_set, build_xi, CorrelationGram};
use crate::waveforms::{DelayProfile, Waveform};
use crate::{Error, Mode, Protocol, Result};

/// Integer frame split: `p` broadcast uses, `q` relay-phase uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSplit {
    pub p: usize,
    pub q: usize,
}

impl FrameSplit {
    /// Requires `p ≥ q ≥ 1` (κ ≥ 1).
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if q == 0 || p < q {
            return Err(Error::Invalid(format!("frame split needs p ≥ q ≥ 1, got p={p}, q={q}")));
        }
        Ok(FrameSplit { p, q })
    }

    pub fn ell(&self) -> usize {
        self.p + self.q
    }

    pub fn kappa(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn shares(&self) -> Shares {
        Shares { p: self.p as f64 / self.ell() as f64, q: self.q as f64 / self.ell() as f64 }
    }
}

/// Fractional frame shares `P = p/ℓ`, `Q = q/ℓ`. Unlike `FrameSplit` these
/// can represent irrational κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shares {
    pub p: f64,
    pub q: f64,
}

impl Shares {
    pub fn from_kappa(kappa: f64) -> Self {
        Shares { p: kappa / (1.0 + kappa), q: 1.0 / (1.0 + kappa) }
    }

    pub fn kappa(&self) -> f64 {
        self.p / self.q
    }
}

/// `h[0]` source→destination, `h[j]` relay j→destination, `g[j−1]` source→relay j.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<Complex64>,
    pub g: Vec<Complex64>,
    pub sigma_d2: f64,
    pub sigma_r2: f64,
}

/// Circularly-symmetric `CN(0, 1)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

impl ChannelRealization {
    pub fn sample<R: Rng + ?Sized>(relays: usize, rng: &mut R) -> Self {
        let h = (0..=relays).map(|_| complex_gaussian(rng)).collect();
        let g = (0..relays).map(|_| complex_gaussian(rng)).collect();
        ChannelRealization { h, g, sigma_d2: 1.0, sigma_r2: 1.0 }
    }

    /// Realization with the given gains and zero phases.
    pub fn from_gains(h2: &[f64], g2: &[f64]) -> Self {
        ChannelRealization {
            h: h2.iter().map(|x| Complex64::new(x.sqrt(), 0.0)).collect(),
            g: g2.iter().map(|x| Complex64::new(x.sqrt(), 0.0)).collect(),
            sigma_d2: 1.0,
            sigma_r2: 1.0,
        }
    }

    pub fn relays(&self) -> usize {
        self.g.len()
    }
}

pub fn derive_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn sample_channels(relays: usize, seed: u64) -> Result<ChannelRealization> {
    if relays == 0 {
        return Err(Error::Invalid("need at least one relay".into()));
    }
    Ok(ChannelRealization::sample(relays, &mut ChaCha8Rng::seed_from_u64(seed)))
}

/// `α_i = −log|h_i|²/log ρ` (i = 0..M), `β_j = −log|h_j g_j|²/log ρ` (j = 1..M).
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentPoint {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ExponentPoint {
    pub fn from_realization(real: &ChannelRealization, rho: f64) -> Self {
        let lr = rho.ln();
        let alpha = real.h.iter().map(|h| -h.norm_sqr().ln() / lr).collect();
        let beta = real.g.iter().zip(&real.h[1..]).map(|(g, h)| -(h.norm_sqr() * g.norm_sqr()).ln() / lr).collect();
        ExponentPoint { alpha, beta }
    }
}

/// Relays that decoded the source message in phase 1 (sorted, 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecodeSet {
    pub relays: Vec<usize>,
}

impl DecodeSet {
    pub fn len(&self) -> usize {
        self.relays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relays.is_empty()
    }

    /// Nodes transmitting in phase 2: the decoded relays, preceded by the
    /// source for non-orthogonal protocols.
    pub fn participants(&self, protocol: Protocol) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.relays.len() + 1);
        if protocol.is_non_orthogonal() {
            v.push(0);
        }
        v.extend_from_slice(&self.relays);
        v
    }

    pub fn all(relays: usize) -> Self {
        DecodeSet { relays: (1..=relays).collect() }
    }
}

/// `|g_k|² ≥ (ρ^{r/P} − 1)/ρ`, i.e. `p·log(1+ρ|g_k|²) ≥ ℓR` with `R = r·log ρ`.
pub fn decode_threshold(rho: f64, r: f64, shares: Shares) -> f64 {
    (rho.powf(r / shares.p) - 1.0) / rho
}

pub fn decode_set(real: &ChannelRealization, rho: f64, r: f64, fs: FrameSplit) -> DecodeSet {
    decode_set_shares(real, rho, r, fs.shares())
}

pub fn decode_set_shares(real: &ChannelRealization, rho: f64, r: f64, shares: Shares) -> DecodeSet {
    let thr = decode_threshold(rho, r, shares) * real.sigma_r2;
    DecodeSet { relays: real.g.iter().enumerate().filter(|(_, g)| g.norm_sqr() >= thr).map(|(k, _)| k + 1).collect() }
}

#[inline]
fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// High-SNR mutual-information exponent divided by `ℓ`.
///
/// DF: `alpha = [α_0, α_i for each decoded relay]`, `beta` unused.
/// AF: `alpha = [α_0, …, α_M]`, `beta = [β_1, …, β_M]`.
pub fn surrogate(protocol: Protocol, mode: Mode, p: f64, q: f64, alpha: &[f64], beta: &[f64]) -> f64 {
    let a0 = alpha[0];
    let relays = &alpha[1..];
    match (protocol, mode) {
        (Protocol::Nsdf, Mode::Finite) => pos(1.0 - a0) + q * relays.iter().map(|a| pos(1.0 - a)).sum::<f64>(),
        (Protocol::Nsdf, Mode::Infinite) => {
            let amin = alpha.iter().copied().fold(f64::INFINITY, f64::min);
            p * pos(1.0 - a0) + q * pos(1.0 - amin)
        }
        (Protocol::Osdf, Mode::Finite) => p * pos(1.0 - a0) + q * relays.iter().map(|a| pos(1.0 - a)).sum::<f64>(),
        (Protocol::Osdf, Mode::Infinite) => {
            let second = if relays.is_empty() {
                0.0
            } else {
                pos(1.0 - relays.iter().copied().fold(f64::INFINITY, f64::min))
            };
            p * pos(1.0 - a0) + q * second
        }
        (Protocol::Naf, _) | (Protocol::Oaf, _) => {
            let b = beta.iter().copied().fold(f64::INFINITY, f64::min);
            let a = relays.iter().copied().fold(f64::INFINITY, f64::min);
            match (protocol, mode) {
                (Protocol::Naf, Mode::Finite) => p * pos(1.0 - a0) + q * pos((1.0 - a0).max(1.0 - b)),
                (Protocol::Naf, Mode::Infinite) => {
                    let inner = (-a).max(2.0 * (1.0 - a0)).max(1.0 - a - a0).max(1.0 - b);
                    (p - q) * pos(1.0 - a0) + q * pos(inner)
                }
                (Protocol::Oaf, Mode::Finite) => (p - q) * pos(1.0 - a0) + q * pos((1.0 - a0).max(1.0 - b)),
                _ => {
                    let inner = (-a).max(1.0 - a0).max(1.0 - a - a0).max(1.0 - b);
                    (p - q) * pos(1.0 - a0) + q * pos(inner)
                }
            }
        }
    }
}

/// Surrogate for a realization's exponents. For DF protocols the decode set
/// selects which relay exponents enter; AF ignores it.
pub fn mutual_info_surrogate(
    protocol: Protocol,
    mode: Mode,
    shares: Shares,
    exps: &ExponentPoint,
    decoded: &DecodeSet,
) -> f64 {
    if protocol.is_decode_forward() {
        let mut alpha = Vec::with_capacity(decoded.len() + 1);
        alpha.push(exps.alpha[0]);
        alpha.extend(decoded.relays.iter().map(|&k| exps.alpha[k]));
        surrogate(protocol, mode, shares.p, shares.q, &alpha, &[])
    } else {
        surrogate(protocol, mode, shares.p, shares.q, &exps.alpha, &exps.beta)
    }
}

/// Waveform-dependent matrices for the exact model.
#[derive(Debug, Clone)]
pub enum ChannelGrams {
    /// `Ξ` over all `M+1` nodes (block size `q`) and the source's `p×p`
    /// autocorrelation `Γ'_{0,0}`.
    Finite { xi: CorrelationGram, source: DMatrix<f64> },
    /// Sinc sample matrices `Γ_j` (`q×q`), node 0 first.
    Infinite { gammas: Vec<DMatrix<f64>> },
}

impl ChannelGrams {
    pub fn finite(waveforms: &[Waveform], delays: &DelayProfile, u: usize, fs: FrameSplit) -> Result<Self> {
        if waveforms.iter().any(|w| !w.is_finite()) {
            return Err(Error::ModeMismatch("finite-support grams need finite pulses".into()));
        }
        let xi = build_xi(waveforms, delays, u, fs.q)?;
        let source = xi.autocorrelation(0, fs.p);
        Ok(ChannelGrams::Finite { xi, source })
    }

    pub fn infinite(waveforms: &[Waveform], delays: &DelayProfile, fs: FrameSplit) -> Result<Self> {
        let gammas = build_gamma_set(waveforms, delays, fs.q)?.into_iter().map(|t| t.matrix).collect();
        Ok(ChannelGrams::Infinite { gammas })
    }

    pub fn mode(&self) -> Mode {
        match self {
            ChannelGrams::Finite { .. } => Mode::Finite,
            ChannelGrams::Infinite { .. } => Mode::Infinite,
        }
    }

    pub fn nodes(&self) -> usize {
        match self {
            ChannelGrams::Finite { xi, .. } => xi.nodes(),
            ChannelGrams::Infinite { gammas } => gammas.len(),
        }
    }

    /// `Γ'_{0,0}` (finite) or the identity (sinc pulses are Nyquist).
    fn source_block(&self, p: usize) -> DMatrix<f64> {
        match self {
            ChannelGrams::Finite { source, .. } => source.clone(),
            ChannelGrams::Infinite { .. } => DMatrix::identity(p, p),
        }
    }
}

/// Mode whose surrogate governs a configuration: a finite-support setup
/// whose `Ξ` is singular (identical pulses, zero delays) behaves like the
/// synchronous network, i.e. the infinite-support form.
pub fn effective_mode(grams: &ChannelGrams) -> Mode {
    match grams {
        ChannelGrams::Finite { xi, .. } if xi.is_degenerate() => Mode::Infinite,
        g => g.mode(),
    }
}

/// Linear relay maps `A_j = c·[0 | I_q]` (keep the last `q` of `p` received
/// symbols) with a common scale `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayProcessor {
    pub select: DMatrix<f64>,
    pub scale: f64,
    pub budget: f64,
}

impl RelayProcessor {
    pub fn matrix(&self) -> DMatrix<f64> {
        &self.select * self.scale
    }

    /// `E‖x_j‖²/q` averaged over `g_j ~ CN(0,1)`, for source symbol energy `rho`.
    pub fn power_per_symbol(&self, source: &DMatrix<f64>, rho: f64) -> f64 {
        let a = self.matrix();
        let signal = &a * source * source * a.transpose() * rho;
        let noise = &a * source * a.transpose();
        (signal.trace() + noise.trace()) / self.select.nrows() as f64
    }
}

/// Scale chosen so the mean relay output energy per symbol equals `budget`
/// given unit-variance `g_j` and source symbol energy `rho`.
pub fn make_relay_processor(fs: FrameSplit, grams: &ChannelGrams, rho: f64, budget: f64) -> Result<RelayProcessor> {
    if fs.q > fs.p {
        return Err(Error::Invalid(format!("relay map needs q ≤ p, got p={}, q={}", fs.p, fs.q)));
    }
    let mut select = DMatrix::zeros(fs.q, fs.p);
    for k in 0..fs.q {
        select[(k, fs.p - fs.q + k)] = 1.0;
    }
    let source = grams.source_block(fs.p);
    let unit = RelayProcessor { select: select.clone(), scale: 1.0, budget };
    let raw = unit.power_per_symbol(&source, rho);
    Ok(RelayProcessor { select, scale: (budget / raw).sqrt(), budget })
}

fn logdet2_real(m: DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    let chol = Cholesky::new(m).ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    Ok((0..n).map(|k| l[(k, k)].ln()).sum::<f64>() * 2.0 / std::f64::consts::LN_2)
}

fn logdet2_complex(m: DMatrix<Complex64>, what: &str) -> Result<f64> {
    let n = m.nrows();
    let chol = Cholesky::new(m).ok_or_else(|| {
        Error::SingularNoiseCovariance(format!(
            "{what} is not positive definite; the waveform/delay configuration makes the correlation matrix singular"
        ))
    })?;
    let l = chol.l_dirty();
    Ok((0..n).map(|k| l[(k, k)].re.ln()).sum::<f64>() * 2.0 / std::f64::consts::LN_2)
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `log₂det(Φ + ρHH†) − log₂det(Φ)`.
fn gaussian_mi(h: &DMatrix<Complex64>, phi: &DMatrix<Complex64>, rho: f64) -> Result<f64> {
    let noise = logdet2_complex(phi.clone(), "noise covariance")?;
    let total = phi + h * h.adjoint() * Complex64::new(rho, 0.0);
    Ok(logdet2_complex(total, "received covariance")? - noise)
}

/// Exact mutual information in bits per channel use (frame-averaged).
#[allow(clippy::too_many_arguments)]
pub fn mutual_info(
    protocol: Protocol,
    fs: FrameSplit,
    real: &ChannelRealization,
    grams: &ChannelGrams,
    rho: f64,
    decoded: &DecodeSet,
    processor: Option<&RelayProcessor>,
) -> Result<f64> {
    if grams.nodes() != real.h.len() {
        return Err(Error::Dimension(format!("grams cover {} nodes, realization has {}", grams.nodes(), real.h.len())));
    }
    let rho_d = rho / real.sigma_d2;
    let bits = if protocol.is_decode_forward() {
        df_bits(protocol, fs, real, grams, rho_d, decoded)?
    } else {
        let a = processor.ok_or_else(|| Error::Invalid("AF protocols need a relay processor".into()))?;
        af_bits(protocol, fs, real, grams, rho_d, a)?
    };
    Ok(bits / fs.ell() as f64)
}

fn df_bits(
    protocol: Protocol,
    fs: FrameSplit,
    real: &ChannelRealization,
    grams: &ChannelGrams,
    rho: f64,
    decoded: &DecodeSet,
) -> Result<f64> {
    let h2: Vec<f64> = real.h.iter().map(|h| h.norm_sqr()).collect();
    let nodes = decoded.participants(protocol);
    match grams {
        ChannelGrams::Finite { xi, source } => {
            let phase1 = logdet2_real(DMatrix::identity(fs.p, fs.p) + source * (rho * h2[0]))?;
            if nodes.is_empty() {
                return Ok(phase1);
            }
            // Sylvester form I + ρ|D|Ξ_D|D| stays valid when Ξ is singular
            let sub = xi.restrict(&nodes);
            let scale: Vec<f64> = nodes.iter().flat_map(|&i| std::iter::repeat_n(h2[i].sqrt(), fs.q)).collect();
            let n = sub.nrows();
            let k = DMatrix::from_fn(n, n, |a, b| f64::from(a == b) + rho * scale[a] * sub[(a, b)] * scale[b]);
            Ok(phase1 + logdet2_real(k)?)
        }
        ChannelGrams::Infinite { gammas } => {
            let phase1 = fs.p as f64 * (1.0 + rho * h2[0]).log2();
            if nodes.is_empty() {
                return Ok(phase1);
            }
            let mut k = DMatrix::<f64>::identity(fs.q, fs.q);
            for &i in &nodes {
                k += &gammas[i] * gammas[i].transpose() * (rho * h2[i]);
            }
            Ok(phase1 + logdet2_real(k)?)
        }
    }
}

fn af_bits(
    protocol: Protocol,
    fs: FrameSplit,
    real: &ChannelRealization,
    grams: &ChannelGrams,
    rho: f64,
    processor: &RelayProcessor,
) -> Result<f64> {
    let (p, q) = (fs.p, fs.q);
    let relays = real.relays();
    let a = processor.matrix();
    let h0 = real.h[0];
    let with_source = protocol.is_non_orthogonal();
    // destination branches in phase 2: one matched filter per transmitting
    // node for finite pulses, a single sampled stream for sinc pulses
    let branches: Vec<usize> = match grams {
        ChannelGrams::Infinite { .. } => vec![0],
        _ if with_source => (0..=relays).collect(),
        _ => (1..=relays).collect(),
    };
    let nb = branches.len();
    let source = grams.source_block(p);
    let source_c = to_complex(&source);

    // Γ_{i,j}: effect of node j's phase-2 stream on branch i
    let gamma = |i: usize, j: usize| -> DMatrix<f64> {
        match grams {
            ChannelGrams::Finite { xi, .. } => xi.block(i, j),
            ChannelGrams::Infinite { gammas } => gammas[j].clone(),
        }
    };

    let cols = if with_source { p + q } else { p };
    let rows = p + nb * q;
    let mut h = DMatrix::<Complex64>::zeros(rows, cols);
    let mut phi = DMatrix::<Complex64>::zeros(rows, rows);

    h.view_mut((0, 0), (p, p)).copy_from(&(&source_c * h0));
    phi.view_mut((0, 0), (p, p)).copy_from(&source_c);

    for (bi, &i) in branches.iter().enumerate() {
        let r0 = p + bi * q;
        // relayed copy of x_1
        let mut gi = DMatrix::<Complex64>::zeros(q, p);
        for j in 1..=relays {
            let m = to_complex(&(gamma(i, j) * &a * &source));
            gi += m * (real.h[j] * real.g[j - 1]);
        }
        h.view_mut((r0, 0), (q, p)).copy_from(&gi);
        if with_source {
            h.view_mut((r0, p), (q, q)).copy_from(&(to_complex(&gamma(i, 0)) * h0));
        }
        for (bk, &k) in branches.iter().enumerate() {
            let c0 = p + bk * q;
            // destination noise
            let mut blk = match grams {
                ChannelGrams::Finite { xi, .. } => to_complex(&xi.block(i, k)),
                ChannelGrams::Infinite { .. } => {
                    if bi == bk {
                        DMatrix::identity(q, q)
                    } else {
                        DMatrix::zeros(q, q)
                    }
                }
            };
            // forwarded relay noise
            for j in 1..=relays {
                let left = gamma(i, j) * &a;
                let right = gamma(k, j) * &a;
                let m = &left * &source * right.transpose() * (real.h[j].norm_sqr() * real.sigma_r2 / real.sigma_d2);
                blk += to_complex(&m);
            }
            phi.view_mut((r0, c0), (q, q)).copy_from(&blk);
        }
    }
    gaussian_mi(&h, &phi, rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_split_validation() {
        assert!(FrameSplit::new(1, 2).is_err());
        assert!(FrameSplit::new(3, 0).is_err());
        let fs = FrameSplit::new(3, 2).unwrap();
        assert_eq!(fs.ell(), 5);
        assert!((fs.shares().p - 0.6).abs() < 1e-15);
    }

    #[test]
    fn surrogate_named_values() {
        // all links at full strength
        let v = surrogate(Protocol::Nsdf, Mode::Finite, 0.5, 0.5, &[0.0, 0.0, 0.0], &[]);
        assert!((v - 2.0).abs() < 1e-15);
        // α_0 = 1, β = 0 under NAF finite leaves only the relayed term
        let v = surrogate(Protocol::Naf, Mode::Finite, 0.6, 0.4, &[1.0, 0.3], &[0.0]);
        assert!((v - 0.4).abs() < 1e-15);
        // OAF infinite with α = 0
        let v = surrogate(Protocol::Oaf, Mode::Infinite, 0.6, 0.4, &[0.5, 0.0], &[0.8]);
        assert!((v - (0.2 * 0.5 + 0.4 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn decode_threshold_matches_rate_condition() {
        let fs = FrameSplit::new(2, 1).unwrap();
        let (rho, r) = (1e3, 0.4);
        let thr = decode_threshold(rho, r, fs.shares());
        let rate = fs.ell() as f64 * r * rho.log2();
        assert!((fs.p as f64 * (1.0 + rho * thr).log2() - rate).abs() < 1e-9);
    }
}
