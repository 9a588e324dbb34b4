//! Experiment files for the `outage` subcommand.

use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use relaydmt::channel_model::FrameSplit;
use relaydmt::dmt_closed_form::optimal_kappa;
use relaydmt::outage_sim::{ExperimentConfig, InfoMetric, Sampling};
use relaydmt::waveforms::WaveformSpec;
use relaydmt::{Mode, Protocol};
use serde::{Deserialize, Serialize};

/// Largest denominator tried when a real κ is turned into a frame split.
pub const MAX_FRAME_DENOMINATOR: usize = 32;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub protocol: Protocol,
    pub mode: String,
    pub relays: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub r: OneOrMany,
    pub frame: FrameSection,
    #[serde(default)]
    pub snr: SnrSection,
    #[serde(default = "default_trials")]
    pub trials_per_point: u64,
    #[serde(default)]
    pub metric: InfoMetric,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub pulse: Vec<PulseSection>,
    pub delays: Option<Vec<f64>>,
    #[serde(default)]
    pub resample_delays: bool,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_seed() -> u64 {
    1
}

fn default_trials() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Either `p`/`q` symbol counts or a target `kappa` (a number or `"opt"`).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub kappa: Option<KappaValue>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum KappaValue {
    Number(f64),
    Word(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrSection {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl Default for SnrSection {
    fn default() -> Self {
        SnrSection { start_db: 30.0, stop_db: 60.0, step_db: 2.5 }
    }
}

impl SnrSection {
    fn grid(&self) -> Result<Vec<f64>> {
        ensure!(self.step_db > 0.0, "snr.step_db must be positive");
        ensure!(self.stop_db >= self.start_db, "snr.stop_db must not be below snr.start_db");
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.start_db + k as f64 * self.step_db).collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub kind: String,
    pub rolloff: Option<f64>,
    pub u: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub prefix: Option<String>,
}

/// `rect[:u]`, `rc:<rolloff>[:u]` or `sinc`; also used by `gram --pulse`.
pub fn parse_pulse(s: &str) -> Result<WaveformSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let u = |i: usize| -> Result<u32> {
        parts.get(i).map_or(Ok(1), |v| v.parse().with_context(|| format!("bad support `{v}` in pulse `{s}`")))
    };
    let spec = match parts[0] {
        "rect" if parts.len() <= 2 => WaveformSpec::rectangular(u(1)?),
        "rc" if (2..=3).contains(&parts.len()) => {
            let beta = parts[1].parse().with_context(|| format!("bad rolloff in pulse `{s}`"))?;
            WaveformSpec::raised_cosine(beta, u(2)?)
        }
        "sinc" if parts.len() == 1 => WaveformSpec::sinc(),
        _ => bail!("unrecognised pulse `{s}` (expected rect[:u], rc:<rolloff>[:u] or sinc)"),
    };
    spec.validate()?;
    Ok(spec)
}

impl PulseSection {
    fn spec(&self) -> Result<WaveformSpec> {
        let spec = match (self.kind.as_str(), self.rolloff) {
            ("rect", None) => WaveformSpec::rectangular(self.u.unwrap_or(1)),
            ("rc", Some(b)) => WaveformSpec::raised_cosine(b, self.u.unwrap_or(1)),
            ("sinc", None) if self.u.is_none() => WaveformSpec::sinc(),
            ("rc", None) => bail!("pulse kind `rc` needs a rolloff"),
            ("rect" | "sinc", Some(_)) => bail!("rolloff only applies to `rc` pulses"),
            ("sinc", None) => bail!("sinc pulses have infinite support; drop `u`"),
            (k, _) => bail!("unknown pulse kind `{k}` (expected rect, rc or sinc)"),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Closest `p/q ≥ 1` with `q ≤ MAX_FRAME_DENOMINATOR`; ties go to the smaller `q`.
pub fn rational_frame(kappa: f64) -> Result<FrameSplit> {
    ensure!(kappa.is_finite() && kappa >= 1.0, "kappa must be a finite real ≥ 1, got {kappa}");
    let mut best = (f64::INFINITY, 1, 1);
    for q in 1..=MAX_FRAME_DENOMINATOR {
        let p = ((kappa * q as f64).round() as usize).max(q);
        let err = (p as f64 / q as f64 - kappa).abs();
        if err < best.0 - 1e-15 {
            best = (err, p, q);
        }
    }
    Ok(FrameSplit::new(best.1, best.2)?)
}

/// Fully resolved experiment: what actually runs, and what gets hashed.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedExperiment {
    pub protocol: Protocol,
    pub mode: Mode,
    pub relays: usize,
    pub seed: u64,
    pub runs: Vec<ResolvedRun>,
    pub snr_db: Vec<f64>,
    pub trials_per_point: u64,
    pub metric: InfoMetric,
    pub sampling: Sampling,
    pub pulses: Vec<WaveformSpec>,
    pub delays: Option<Vec<f64>>,
    pub resample_delays: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedRun {
    pub r: f64,
    pub frame: FrameSplit,
}

impl ExperimentFile {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid experiment file {}", path.display()))
    }

    pub fn resolve(&self, seed_override: Option<u64>) -> Result<ResolvedExperiment> {
        let mode: Mode = self.mode.parse()?;
        ensure!(self.relays >= 1, "relays must be at least 1");
        ensure!(self.trials_per_point > 0, "trials_per_point must be positive");
        let rs = self.r.values();
        ensure!(!rs.is_empty(), "r must list at least one multiplexing gain");
        for &r in &rs {
            ensure!((0.0..=1.0).contains(&r), "r = {r} outside [0, 1]");
        }
        let f = &self.frame;
        let runs = match (f.p, f.q, &f.kappa) {
            (Some(p), Some(q), None) => {
                let frame = FrameSplit::new(p, q)?;
                rs.iter().map(|&r| ResolvedRun { r, frame }).collect()
            }
            (None, None, Some(KappaValue::Number(k))) => {
                let frame = rational_frame(*k)?;
                rs.iter().map(|&r| ResolvedRun { r, frame }).collect()
            }
            (None, None, Some(KappaValue::Word(w))) if w == "opt" => rs
                .iter()
                .map(|&r| Ok(ResolvedRun { r, frame: rational_frame(optimal_kappa(self.protocol, mode, self.relays, r)?)? }))
                .collect::<Result<_>>()?,
            (None, None, Some(KappaValue::Word(w))) => bail!("frame.kappa must be a number or \"opt\", got \"{w}\""),
            _ => bail!("[frame] needs either both `p` and `q`, or `kappa` alone"),
        };
        let pulses = self.pulse.iter().map(PulseSection::spec).collect::<Result<Vec<_>>>()?;
        let resolved = ResolvedExperiment {
            protocol: self.protocol,
            mode,
            relays: self.relays,
            seed: seed_override.unwrap_or(self.seed),
            runs,
            snr_db: self.snr.grid()?,
            trials_per_point: self.trials_per_point,
            metric: self.metric,
            sampling: self.sampling,
            pulses,
            delays: self.delays.clone(),
            resample_delays: self.resample_delays,
        };
        for run in &resolved.runs {
            resolved.config(run).validate()?;
        }
        Ok(resolved)
    }
}

impl ResolvedExperiment {
    pub fn config(&self, run: &ResolvedRun) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(self.protocol, self.mode, self.relays, run.frame, run.r);
        if !self.pulses.is_empty() {
            cfg.waveforms = self.pulses.clone();
        }
        cfg.delays = self.delays.clone();
        cfg.resample_delays = self.resample_delays;
        cfg.snr_grid_db = self.snr_db.clone();
        cfg.trials_per_point = self.trials_per_point;
        cfg.seed = self.seed;
        cfg.metric = self.metric;
        cfg.sampling = self.sampling;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_frames() {
        let f = rational_frame(1.5).unwrap();
        assert_eq!((f.p, f.q), (3, 2));
        let f = rational_frame(1.0).unwrap();
        assert_eq!((f.p, f.q), (1, 1));
        let f = rational_frame(relaydmt::KAPPA_HAT).unwrap();
        assert_eq!((f.p, f.q), (34, 21));
        assert!(rational_frame(0.5).is_err());
    }

    #[test]
    fn pulse_strings() {
        assert_eq!(parse_pulse("rect").unwrap(), WaveformSpec::rectangular(1));
        assert_eq!(parse_pulse("rc:0.25:3").unwrap(), WaveformSpec::raised_cosine(0.25, 3));
        assert!(parse_pulse("rc").is_err());
        assert!(parse_pulse("gauss").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "protocol = \"nsdf\"\nmode = \"finite\"\nrelays = 1\nr = 0.25\nbogus = 3\n[frame]\np = 1\nq = 1\n";
        assert!(toml::from_str::<ExperimentFile>(text).is_err());
        let ok = text.replace("bogus = 3\n", "");
        let exp: ExperimentFile = toml::from_str(&ok).unwrap();
        assert_eq!(exp.resolve(None).unwrap().runs.len(), 1);
    }
}
