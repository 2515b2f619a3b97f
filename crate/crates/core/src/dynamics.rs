//! Unitary steps between consecutive slices and composed transports.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::statespace::{max_abs, same_slice, Ket, SliceRef, C64};

/// Unitary map from one slice to the next. Rows are indexed by the target
/// basis, columns by the source basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StepUnitary {
    from: SliceRef,
    to: SliceRef,
    matrix: DMatrix<C64>,
}

impl StepUnitary {
    pub fn new(from: SliceRef, to: SliceRef, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.ncols() != from.dim() {
            return Err(Error::DimensionMismatch {
                expected: from.dim(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() != to.dim() {
            return Err(Error::DimensionMismatch {
                expected: to.dim(),
                found: matrix.nrows(),
            });
        }
        Ok(Self { from, to, matrix })
    }

    /// Builds the step from images of each source basis ket, given as
    /// `(source, [(target, amplitude)])`. Unlisted sources map to zero.
    pub fn from_images(
        from: SliceRef,
        to: SliceRef,
        images: &[(&str, &[(&str, f64)])],
    ) -> Result<Self> {
        let mut m = DMatrix::<C64>::zeros(to.dim(), from.dim());
        for &(src, image) in images {
            let col = from.require_index(src)?;
            for &(dst, amp) in image {
                let row = to.require_index(dst)?;
                m[(row, col)] += C64::new(amp, 0.0);
            }
        }
        Self::new(from, to, m)
    }

    pub fn from_slice(&self) -> &SliceRef {
        &self.from
    }

    pub fn to_slice(&self) -> &SliceRef {
        &self.to
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `max|U†U - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.matrix.ncols();
        let gram = self.matrix.adjoint() * &self.matrix;
        let mut r = max_abs(&(gram - DMatrix::<C64>::identity(n, n)));
        if self.matrix.nrows() == n {
            let other = &self.matrix * self.matrix.adjoint();
            r = r.max(max_abs(&(other - DMatrix::<C64>::identity(n, n))));
        } else {
            r = f64::INFINITY;
        }
        r
    }
}

/// Ordered slices and the steps connecting them; `steps[j]` maps slice `j`
/// to slice `j + 1`. Slice `j` carries time index `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dynamics {
    slices: Vec<SliceRef>,
    steps: Vec<StepUnitary>,
}

impl Dynamics {
    pub fn new(steps: Vec<StepUnitary>) -> Result<Self> {
        let first = steps.first().ok_or(Error::NoSteps)?;
        let mut slices = vec![first.from.clone()];
        for (j, step) in steps.iter().enumerate() {
            let prev = slices.last().expect("non-empty");
            if same_slice(prev, &step.from).is_err() {
                return Err(Error::BrokenChain {
                    step: j,
                    reason: format!(
                        "source slice t{} does not match previous target t{}",
                        step.from.time_index(),
                        prev.time_index()
                    ),
                });
            }
            slices.push(step.to.clone());
        }
        for (j, s) in slices.iter().enumerate() {
            if s.time_index() != j {
                return Err(Error::BrokenChain {
                    step: j.saturating_sub(1),
                    reason: format!("slice at position {j} has time index {}", s.time_index()),
                });
            }
        }
        Ok(Self { slices, steps })
    }

    pub fn slices(&self) -> &[SliceRef] {
        &self.slices
    }

    pub fn steps(&self) -> &[StepUnitary] {
        &self.steps
    }

    pub fn final_time(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn slice(&self, time: usize) -> Result<&SliceRef> {
        self.slices.get(time).ok_or(Error::TimeOutOfRange {
            index: time,
            max: self.final_time(),
        })
    }

    /// Replaces the step leaving slice `time`.
    pub fn with_step(&self, time: usize, step: StepUnitary) -> Result<Self> {
        let mut steps = self.steps.clone();
        if time >= steps.len() {
            return Err(Error::TimeOutOfRange {
                index: time,
                max: steps.len().saturating_sub(1),
            });
        }
        steps[time] = step;
        Self::new(steps)
    }

    fn check_ket(&self, ket: &Ket) -> Result<()> {
        let slice = self.slice(ket.time_index())?;
        same_slice(slice, ket.slice())
    }

    /// Evolves `ket` to `target` by composed steps, or composed adjoints when
    /// `target` is earlier.
    pub fn transport(&self, ket: &Ket, target: usize) -> Result<Ket> {
        self.check_ket(ket)?;
        let target_slice = self.slice(target)?.clone();
        let mut amps = ket.amplitudes().clone();
        let start = ket.time_index();
        if target >= start {
            for step in &self.steps[start..target] {
                amps = &step.matrix * amps;
            }
        } else {
            for step in self.steps[target..start].iter().rev() {
                amps = step.matrix.adjoint() * amps;
            }
        }
        Ket::from_vector(target_slice, amps)
    }

    /// Full matrix of `T_{target,source}`.
    pub fn propagator(&self, source: usize, target: usize) -> Result<DMatrix<C64>> {
        let n = self.slice(source)?.dim();
        self.slice(target)?;
        let mut m = DMatrix::<C64>::identity(n, n);
        if target >= source {
            for step in &self.steps[source..target] {
                m = &step.matrix * m;
            }
        } else {
            for step in self.steps[target..source].iter().rev() {
                m = step.matrix.adjoint() * m;
            }
        }
        Ok(m)
    }

    pub fn step_validate(&self, tol: f64) -> StepReport {
        StepReport {
            tol,
            residuals: self
                .steps
                .iter()
                .map(StepUnitary::unitarity_residual)
                .collect(),
        }
    }
}

/// Unitarity residual `max|U†U - I|` for every step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub tol: f64,
    pub residuals: Vec<f64>,
}

impl StepReport {
    pub fn ok(&self) -> bool {
        self.residuals.iter().all(|&r| r <= self.tol)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Indices of steps failing unitarity.
    pub fn failures(&self) -> Vec<usize> {
        self.residuals
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > self.tol)
            .map(|(i, _)| i)
            .collect()
    }
}
