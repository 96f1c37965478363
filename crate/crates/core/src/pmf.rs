//! Probability mass functions on a uniform grid.
//!
//! `GridPMF` stores probabilities for the values `(offset + i) * step`,
//! `i = 0..len`. The offset may be negative, so centered and negated laws
//! live on the same representation. This is the carrier for exact Lindley
//! evaluation: waiting-time laws are propagated by convolve / shift / clip.

use crate::error::{Error, Result};
use crate::math::Kahan;

/// Mass-conservation budget for a pmf.
pub const MASS_TOL: f64 = 1e-9;
/// Negative masses above this magnitude abort; smaller ones are clipped.
const NEG_CLIP: f64 = -1e-15;
/// Per-side cumulative mass dropped when trimming far tails between
/// Lindley steps. Orders of magnitude below `MASS_TOL` so that a full
/// session stays within budget.
const STEP_TAIL_TRIM: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct GridPMF {
    step: f64,
    offset: i64,
    probs: Vec<f64>,
}

impl GridPMF {
    /// Build a pmf, validating mass and clipping float dust.
    pub fn new(step: f64, offset: i64, probs: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::invalid(format!("grid step must be > 0, got {step}")));
        }
        if probs.is_empty() {
            return Err(Error::invalid("pmf needs at least one cell"));
        }
        let mut pmf = GridPMF { step, offset, probs };
        pmf.clip_negatives()?;
        let mass = pmf.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::MassLeak { mass, tol: MASS_TOL });
        }
        pmf.trim();
        Ok(pmf)
    }

    /// Point mass at grid index `idx`.
    pub fn point(step: f64, idx: i64) -> Self {
        GridPMF { step, offset: idx, probs: vec![1.0] }
    }

    /// Build from (index, mass) atoms; masses at equal indices accumulate.
    pub fn from_atoms(step: f64, atoms: &[(i64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("no atoms"));
        }
        let lo = atoms.iter().map(|a| a.0).min().unwrap();
        let hi = atoms.iter().map(|a| a.0).max().unwrap();
        let mut probs = vec![0.0; (hi - lo + 1) as usize];
        for &(i, p) in atoms {
            probs[(i - lo) as usize] += p;
        }
        GridPMF::new(step, lo, probs)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Value represented by cell `i`.
    pub fn value_at(&self, i: usize) -> f64 {
        (self.offset + i as i64) as f64 * self.step
    }

    pub fn prob_at_index(&self, idx: i64) -> f64 {
        if idx < self.offset {
            return 0.0;
        }
        let i = (idx - self.offset) as usize;
        self.probs.get(i).copied().unwrap_or(0.0)
    }

    pub fn iter_atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (self.value_at(i), p))
    }

    pub fn total_mass(&self) -> f64 {
        let mut k = Kahan::new();
        for &p in &self.probs {
            k.add(p);
        }
        k.total()
    }

    pub fn mean(&self) -> f64 {
        let mut k = Kahan::new();
        for (i, &p) in self.probs.iter().enumerate() {
            k.add(p * (self.offset + i as i64) as f64);
        }
        k.total() * self.step
    }

    pub fn moments(&self) -> (f64, f64) {
        let mean = self.mean();
        let mut k = Kahan::new();
        for (i, &p) in self.probs.iter().enumerate() {
            let d = (self.offset + i as i64) as f64 * self.step - mean;
            k.add(p * d * d);
        }
        (mean, k.total())
    }

    pub fn variance(&self) -> f64 {
        self.moments().1
    }

    /// CDF at grid index `idx` (mass of all cells <= idx).
    pub fn cdf_at_index(&self, idx: i64) -> f64 {
        if idx < self.offset {
            return 0.0;
        }
        let upto = ((idx - self.offset) as usize + 1).min(self.probs.len());
        let mut k = Kahan::new();
        for &p in &self.probs[..upto] {
            k.add(p);
        }
        k.total()
    }

    /// Smallest grid value whose CDF is >= y.
    pub fn quantile(&self, y: f64) -> f64 {
        let mut acc = Kahan::new();
        for (i, &p) in self.probs.iter().enumerate() {
            acc.add(p);
            if acc.total() >= y {
                return self.value_at(i);
            }
        }
        self.value_at(self.probs.len() - 1)
    }

    /// Convolution of two pmfs on the same grid step. The operand with
    /// fewer nonzero cells drives the outer loop, so sparse service pmfs on
    /// refined grids convolve at cost nnz(short) * len(long).
    pub fn convolve(&self, other: &GridPMF) -> GridPMF {
        debug_assert!((self.step - other.step).abs() < 1e-12 * self.step);
        let nnz = |p: &GridPMF| p.probs.iter().filter(|&&x| x != 0.0).count();
        let (short, long) = if nnz(self) <= nnz(other) {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = vec![0.0; short.probs.len() + long.probs.len() - 1];
        for (i, &a) in short.probs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in long.probs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let mut pmf = GridPMF {
            step: self.step,
            offset: self.offset + other.offset,
            probs: out,
        };
        pmf.trim();
        pmf
    }

    /// Shift the law by `cells` grid cells.
    pub fn shift_cells(mut self, cells: i64) -> GridPMF {
        self.offset += cells;
        self
    }

    /// Split into the nonnegative part with negatives collapsed to an atom at
    /// zero (the next waiting-time law), the expectation of the clipped
    /// negative part (the idle-time contribution), and the expectation of the
    /// positive part (the next mean waiting time).
    pub fn lindley_clip(&self) -> (GridPMF, f64, f64) {
        let step = self.step;
        let mut at_or_below = Kahan::new();
        let mut e_neg = Kahan::new();
        let mut e_pos = Kahan::new();
        let mut pos = Vec::new();
        for (i, &p) in self.probs.iter().enumerate() {
            let idx = self.offset + i as i64;
            if idx <= 0 {
                at_or_below.add(p);
                if idx < 0 {
                    e_neg.add(p * (-idx) as f64);
                }
            } else {
                e_pos.add(p * idx as f64);
                pos.push((idx, p));
            }
        }
        let mut probs = vec![0.0];
        let mut offset = 0i64;
        if let Some(&(last, _)) = pos.last() {
            probs = vec![0.0; last as usize + 1];
            for (idx, p) in pos {
                probs[idx as usize] = p;
            }
            offset = 0;
        }
        probs[0] = at_or_below.total();
        let mut w = GridPMF { step, offset, probs };
        w.trim();
        w.truncate_tail_above(STEP_TAIL_TRIM);
        (w, e_neg.total() * step, e_pos.total() * step)
    }

    /// Check mass conservation after a pipeline of steps.
    pub fn check_mass(&self) -> Result<()> {
        let mass = self.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::MassLeak { mass, tol: MASS_TOL });
        }
        Ok(())
    }

    /// Rescale so the total mass is exactly 1 (within float rounding).
    pub fn normalize(&mut self) {
        let mass = self.total_mass();
        if mass > 0.0 {
            for p in &mut self.probs {
                *p /= mass;
            }
        }
    }

    /// Reverse the support: the law of -X.
    pub fn negated(&self) -> GridPMF {
        let mut probs = self.probs.clone();
        probs.reverse();
        let hi = self.offset + self.probs.len() as i64 - 1;
        GridPMF { step: self.step, offset: -hi, probs }
    }

    /// True when the pmf is symmetric around its mean cell.
    pub fn is_palindrome(&self, tol: f64) -> bool {
        let n = self.probs.len();
        (0..n / 2).all(|i| (self.probs[i] - self.probs[n - 1 - i]).abs() <= tol)
    }

    fn clip_negatives(&mut self) -> Result<()> {
        for p in &mut self.probs {
            if *p < 0.0 {
                if *p < NEG_CLIP {
                    return Err(Error::NegativeMass(*p));
                }
                *p = 0.0;
            }
        }
        Ok(())
    }

    /// Drop leading/trailing zero cells, keeping one guard cell.
    fn trim(&mut self) {
        let first = self.probs.iter().position(|&p| p != 0.0);
        let Some(first) = first else {
            self.probs.truncate(1);
            return;
        };
        let last = self.probs.iter().rposition(|&p| p != 0.0).unwrap();
        let lo = first.saturating_sub(1);
        let hi = (last + 2).min(self.probs.len());
        if lo > 0 || hi < self.probs.len() {
            self.probs.drain(hi..);
            self.probs.drain(..lo);
            self.offset += lo as i64;
        }
    }

    /// Drop an upper tail of cumulative mass <= `eps`.
    fn truncate_tail_above(&mut self, eps: f64) {
        let mut acc = 0.0;
        let mut cut = self.probs.len();
        for (i, &p) in self.probs.iter().enumerate().rev() {
            if acc + p > eps {
                break;
            }
            acc += p;
            cut = i;
        }
        if cut < self.probs.len() && cut > 0 {
            self.probs.truncate(cut);
        }
    }
}
