use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("box must have matching, nonempty bound vectors")]
    BadBounds,
    #[error("axis {axis}: lower bound {lo} is not below upper bound {hi}")]
    Degenerate { axis: usize, lo: f64, hi: f64 },
    #[error("step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("axis {axis} has only {nodes} nodes; at least 3 are required")]
    TooFewNodes { axis: usize, nodes: usize },
}

/// Uniform structured grid over a box, one step size for all axes.
///
/// Nodes sit at `lo_a + i*step`; the number of intervals per axis is the
/// rounded `(hi_a - lo_a)/step`, so a bound that is not an exact multiple
/// of the step is snapped to the nearest node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
    step: f64,
    intervals: Vec<usize>,
}

impl GridBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, step: f64) -> Result<Self, GridError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(GridError::BadBounds);
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(GridError::BadStep(step));
        }
        let mut intervals = Vec::with_capacity(lo.len());
        for axis in 0..lo.len() {
            if !(lo[axis] < hi[axis]) {
                return Err(GridError::Degenerate {
                    axis,
                    lo: lo[axis],
                    hi: hi[axis],
                });
            }
            let m = ((hi[axis] - lo[axis]) / step).round() as usize;
            if m < 2 {
                return Err(GridError::TooFewNodes {
                    axis,
                    nodes: m + 1,
                });
            }
            intervals.push(m);
        }
        Ok(GridBox {
            lo,
            hi,
            step,
            intervals,
        })
    }

    /// Same box with the step divided by `factor` (for convergence studies).
    pub fn refined(&self, factor: usize) -> GridBox {
        GridBox::new(self.lo.clone(), self.hi.clone(), self.step / factor as f64)
            .expect("refining a valid box keeps it valid")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Intervals per axis; nodes per axis is one more.
    pub fn intervals(&self, axis: usize) -> usize {
        self.intervals[axis]
    }

    pub fn nodes(&self, axis: usize) -> usize {
        self.intervals[axis] + 1
    }

    pub fn node_count(&self) -> usize {
        self.intervals.iter().map(|m| m + 1).product()
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + i as f64 * self.step
    }

    pub fn node_coords(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(a, &i)| self.coord(a, i))
            .collect()
    }

    /// Flat index with the last axis fastest, so flat order is
    /// lexicographic order of the node multi-index.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (a, &i) in idx.iter().enumerate() {
            flat = flat * (self.intervals[a] + 1) + i;
        }
        flat
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            let nodes = self.intervals[a] + 1;
            idx[a] = flat % nodes;
            flat /= nodes;
        }
        idx
    }

    /// Node whose coordinates match `x` to within a small fraction of the
    /// step on every axis.
    pub fn node_of_point(&self, x: &[f64]) -> Result<Vec<usize>, usize> {
        let mut idx = Vec::with_capacity(self.dim());
        for axis in 0..self.dim() {
            let t = (x[axis] - self.lo[axis]) / self.step;
            let i = t.round();
            if (t - i).abs() > 1e-6 || i < 0.0 || i as usize > self.intervals[axis] {
                return Err(axis);
            }
            idx.push(i as usize);
        }
        Ok(idx)
    }
}
