//! Piecewise-affine functions on a closed interval, with `+∞` pieces.
//!
//! Pieces are contiguous and carry a label that survives `min`/`max`, so a
//! lower envelope remembers which candidate won on each stretch.

use std::fmt;

const MERGE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub slope: f64,
    /// `+∞` marks a piece where the function is infinite (slope is then 0).
    pub intercept: f64,
    pub label: String,
}

impl Piece {
    pub fn value(&self, r: f64) -> f64 {
        if self.intercept.is_infinite() {
            self.intercept
        } else {
            self.slope * r + self.intercept
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.intercept.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pwl {
    pieces: Vec<Piece>,
}

impl Pwl {
    /// `slope·r + intercept` on `[lo, hi]`.
    pub fn affine(lo: f64, hi: f64, slope: f64, intercept: f64, label: impl Into<String>) -> Self {
        assert!(hi >= lo, "empty interval [{lo}, {hi}]");
        Pwl { pieces: vec![Piece { start: lo, end: hi, slope, intercept, label: label.into() }] }
    }

    pub fn constant(lo: f64, hi: f64, value: f64, label: impl Into<String>) -> Self {
        Self::affine(lo, hi, 0.0, value, label)
    }

    pub fn infinite(lo: f64, hi: f64) -> Self {
        Self::affine(lo, hi, 0.0, f64::INFINITY, "")
    }

    /// `slope·r + intercept` on `[a, b] ∩ [lo, hi]`, `+∞` elsewhere in `[lo, hi]`.
    pub fn affine_on(lo: f64, hi: f64, a: f64, b: f64, slope: f64, intercept: f64, label: &str) -> Self {
        let a = a.clamp(lo, hi);
        let b = b.clamp(lo, hi);
        let mut pieces = Vec::new();
        if a > lo {
            pieces.push(Piece { start: lo, end: a, slope: 0.0, intercept: f64::INFINITY, label: String::new() });
        }
        if b >= a {
            pieces.push(Piece { start: a, end: b, slope, intercept, label: label.to_string() });
        }
        if hi > b {
            pieces.push(Piece { start: b, end: hi, slope: 0.0, intercept: f64::INFINITY, label: String::new() });
        }
        Pwl::from_pieces(pieces)
    }

    /// Build from contiguous pieces; zero-length pieces are dropped unless
    /// they are the only one.
    pub fn from_pieces(pieces: Vec<Piece>) -> Self {
        assert!(!pieces.is_empty());
        for w in pieces.windows(2) {
            assert!((w[0].end - w[1].start).abs() < 1e-12, "pieces not contiguous: {:?} / {:?}", w[0], w[1]);
        }
        let lo = pieces[0].start;
        let hi = pieces.last().unwrap().end;
        let mut kept: Vec<Piece> = pieces.into_iter().filter(|p| p.end - p.start > MERGE_TOL).collect();
        if kept.is_empty() {
            return Pwl::constant(lo, hi, 0.0, "");
        }
        kept[0].start = lo;
        for i in 1..kept.len() {
            kept[i].start = kept[i - 1].end;
        }
        kept.last_mut().unwrap().end = hi;
        Pwl { pieces: kept }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.pieces[0].start, self.pieces.last().unwrap().end)
    }

    fn piece_index(&self, r: f64) -> usize {
        // left-continuous: a breakpoint belongs to the piece ending there
        self.pieces.iter().position(|p| r <= p.end).unwrap_or(self.pieces.len() - 1)
    }

    /// Left-continuous evaluation.
    pub fn eval(&self, r: f64) -> f64 {
        self.pieces[self.piece_index(r)].value(r)
    }

    /// Evaluation from the right (differs from `eval` only at jumps).
    pub fn eval_right(&self, r: f64) -> f64 {
        let i = self.pieces.iter().position(|p| r < p.end).unwrap_or(self.pieces.len() - 1);
        self.pieces[i].value(r)
    }

    pub fn label_at(&self, r: f64) -> &str {
        &self.pieces[self.piece_index(r)].label
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pieces.iter().map(|p| p.start).collect();
        v.push(self.domain().1);
        v
    }

    /// Largest jump at interior breakpoints (∞ if a finite/infinite transition occurs).
    pub fn max_jump(&self) -> f64 {
        self.pieces
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].value(w[0].end), w[1].value(w[1].start));
                if a.is_infinite() && b.is_infinite() {
                    0.0
                } else {
                    (a - b).abs()
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn is_continuous(&self, tol: f64) -> bool {
        self.max_jump() < tol
    }

    fn merged_breaks(&self, other: &Pwl) -> Vec<f64> {
        let mut b = self.breakpoints();
        b.extend(other.breakpoints());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup_by(|x, y| (*x - *y).abs() < MERGE_TOL);
        b
    }

    fn piece_on(&self, a: f64, b: f64) -> &Piece {
        let mid = 0.5 * (a + b);
        &self.pieces[self.pieces.iter().position(|p| mid <= p.end).unwrap_or(self.pieces.len() - 1)]
    }

    fn envelope(&self, other: &Pwl, take_lower: bool) -> Pwl {
        assert_domains_match(self, other);
        let breaks = self.merged_breaks(other);
        let mut out: Vec<Piece> = Vec::new();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let f = self.piece_on(a, b);
            let g = other.piece_on(a, b);
            let mut cuts = vec![a];
            if !f.is_infinite() && !g.is_infinite() {
                let da = f.value(a) - g.value(a);
                let db = f.value(b) - g.value(b);
                if da * db < 0.0 {
                    let x = a + (b - a) * da / (da - db);
                    if x - a > MERGE_TOL && b - x > MERGE_TOL {
                        cuts.push(x);
                    }
                }
            }
            cuts.push(b);
            for c in cuts.windows(2) {
                let mid = 0.5 * (c[0] + c[1]);
                let (fv, gv) = (f.value(mid), g.value(mid));
                let pick_f = if take_lower { fv <= gv } else { fv >= gv };
                let src = if pick_f { f } else { g };
                out.push(Piece { start: c[0], end: c[1], ..src.clone() });
            }
        }
        Pwl::from_pieces(out).simplified()
    }

    /// Pointwise minimum.
    pub fn min(&self, other: &Pwl) -> Pwl {
        self.envelope(other, true)
    }

    /// Pointwise maximum.
    pub fn max(&self, other: &Pwl) -> Pwl {
        self.envelope(other, false)
    }

    /// Pointwise sum; labels are joined with `" + "` (empty labels skipped).
    pub fn add(&self, other: &Pwl) -> Pwl {
        assert_domains_match(self, other);
        let breaks = self.merged_breaks(other);
        let out = breaks
            .windows(2)
            .map(|w| {
                let f = self.piece_on(w[0], w[1]);
                let g = other.piece_on(w[0], w[1]);
                let infinite = f.is_infinite() || g.is_infinite();
                let label = match (f.label.is_empty(), g.label.is_empty()) {
                    (true, _) => g.label.clone(),
                    (_, true) => f.label.clone(),
                    _ => format!("{} + {}", f.label, g.label),
                };
                Piece {
                    start: w[0],
                    end: w[1],
                    slope: if infinite { 0.0 } else { f.slope + g.slope },
                    intercept: if infinite { f64::INFINITY } else { f.intercept + g.intercept },
                    label,
                }
            })
            .collect();
        Pwl::from_pieces(out).simplified()
    }

    /// Replace every label.
    pub fn relabel(mut self, label: &str) -> Pwl {
        for p in &mut self.pieces {
            p.label = label.to_string();
        }
        self
    }

    /// Merge neighbours that share slope, intercept and label.
    pub fn simplified(mut self) -> Pwl {
        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in self.pieces.drain(..) {
            if let Some(last) = out.last_mut() {
                let same_line = (last.is_infinite() && p.is_infinite())
                    || ((last.slope - p.slope).abs() < 1e-12 && (last.intercept - p.intercept).abs() < 1e-12);
                if same_line && last.label == p.label {
                    last.end = p.end;
                    continue;
                }
            }
            out.push(p);
        }
        Pwl { pieces: out }
    }

    /// `(r, f(r))` on a uniform grid including both ends.
    pub fn sample(&self, step: f64) -> Vec<(f64, f64)> {
        let (lo, hi) = self.domain();
        let n = ((hi - lo) / step).round() as usize;
        (0..=n).map(|k| {
            let r = if k == n { hi } else { lo + k as f64 * step };
            (r, self.eval(r))
        }).collect()
    }
}

fn assert_domains_match(a: &Pwl, b: &Pwl) {
    let (da, db) = (a.domain(), b.domain());
    assert!(
        (da.0 - db.0).abs() < 1e-12 && (da.1 - db.1).abs() < 1e-12,
        "domain mismatch {da:?} vs {db:?}"
    );
}

impl fmt::Display for Pwl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.pieces {
            writeln!(f, "[{:.6}, {:.6}] {:+.6}·r {:+.6}  {}", p.start, p.end, p.slope, p.intercept, p.label)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_splits_at_crossing() {
        let f = Pwl::affine(0.0, 1.0, -2.0, 2.0, "f");
        let g = Pwl::affine(0.0, 1.0, -1.0, 1.5, "g");
        let m = f.min(&g);
        assert_eq!(m.pieces().len(), 2);
        assert!((m.breakpoints()[1] - 0.5).abs() < 1e-15);
        assert_eq!(m.label_at(0.1), "g");
        assert_eq!(m.label_at(0.9), "f");
        assert!(m.is_continuous(1e-12));
    }

    #[test]
    fn infinite_pieces_absorb_in_sum() {
        let f = Pwl::affine_on(0.0, 1.0, 0.0, 0.4, -1.0, 1.0, "f");
        let g = Pwl::affine(0.0, 1.0, 0.0, 1.0, "g");
        let s = f.add(&g);
        assert_eq!(s.eval(0.2), 1.8);
        assert!(s.eval(0.7).is_infinite());
        let m = s.min(&Pwl::constant(0.0, 1.0, 1.7, "c"));
        assert_eq!(m.eval(0.7), 1.7);
        assert_eq!(m.eval(0.05), 1.7);
    }

    #[test]
    fn left_continuous_at_jump() {
        let f = Pwl::from_pieces(vec![
            Piece { start: 0.0, end: 0.5, slope: 0.0, intercept: 1.0, label: "a".into() },
            Piece { start: 0.5, end: 1.0, slope: 0.0, intercept: 0.0, label: "b".into() },
        ]);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval_right(0.5), 0.0);
        assert!(!f.is_continuous(1e-12));
    }
}
