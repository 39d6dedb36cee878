//! Arcs of the unit circle claimed by each code of a single stage.

use std::f64::consts::TAU;

use crate::data::circle_point;
use crate::error::{Result, SvqError};
use crate::svq::SvqStage;

/// Circular runs of grid points where one code's posterior exceeds `1/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeArcs {
    pub code: usize,
    /// `(first, last)` grid indices of each run, inclusive, wrapping.
    pub runs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcReport {
    pub resolution: usize,
    pub codes: Vec<CodeArcs>,
    /// Grid points not claimed by any code.
    pub uncovered: usize,
}

impl ArcReport {
    pub fn single_arcs(&self) -> bool {
        self.codes.iter().all(|c| c.runs.len() == 1)
    }

    pub fn covers_circle(&self) -> bool {
        self.uncovered == 0
    }

    pub fn passed(&self) -> bool {
        self.single_arcs() && self.covers_circle()
    }
}

fn circular_runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let n = mask.len();
    if mask.iter().all(|&b| b) {
        return vec![(0, n - 1)];
    }
    // start scanning just after a gap so no run straddles the seam
    let Some(gap) = mask.iter().position(|&b| !b) else {
        return Vec::new();
    };
    let mut runs = Vec::new();
    let mut start = None;
    for step in 1..=n {
        let i = (gap + step) % n;
        match (mask[i], start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, (i + n - 1) % n));
                start = None;
            }
            _ => {}
        }
    }
    runs.sort_unstable();
    runs
}

pub fn circle_arcs(stage: &SvqStage, resolution: usize) -> Result<ArcReport> {
    if stage.input_dim() != 2 {
        return Err(SvqError::dims("circle stage input", 2, stage.input_dim()));
    }
    if resolution < 8 {
        return Err(SvqError::invalid("resolution", "must be at least 8"));
    }
    let m = stage.m();
    let level = 1.0 / m as f64;
    let mut masks = vec![vec![false; resolution]; m];
    let mut uncovered = 0;
    for k in 0..resolution {
        let x = circle_point(TAU * k as f64 / resolution as f64).data;
        let p = stage.posterior(&x)?;
        let mut any = false;
        for (y, &v) in p.probs.iter().enumerate() {
            if v > level {
                masks[y][k] = true;
                any = true;
            }
        }
        if !any {
            uncovered += 1;
        }
    }
    Ok(ArcReport {
        resolution,
        codes: masks
            .iter()
            .enumerate()
            .map(|(code, mask)| CodeArcs {
                code,
                runs: circular_runs(mask),
            })
            .collect(),
        uncovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_wrap_around() {
        let m = [true, false, false, true, true];
        assert_eq!(circular_runs(&m), vec![(3, 0)]);
        let m = [true, false, true, false];
        assert_eq!(circular_runs(&m), vec![(0, 0), (2, 2)]);
        assert_eq!(circular_runs(&[false; 3]), vec![]);
        assert_eq!(circular_runs(&[true; 3]), vec![(0, 2)]);
    }

    #[test]
    fn radial_codes_give_one_arc_each() {
        let m = 6;
        let mut w = Vec::new();
        let mut r = Vec::new();
        for y in 0..m {
            let t = TAU * y as f64 / m as f64;
            w.extend([8.0 * t.cos(), 8.0 * t.sin()]);
            r.extend([t.cos(), t.sin()]);
        }
        let stage = SvqStage::new(m, 20, 2, w, vec![-4.0; m], r).unwrap();
        let rep = circle_arcs(&stage, 360).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }
}
