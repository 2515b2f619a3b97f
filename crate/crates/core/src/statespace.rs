//! Labeled time slices, kets, operators, projectors and projective
//! decompositions of the identity.
//!
//! Every vector and matrix is tied to the [`TimeSlice`] whose orthonormal
//! channel basis indexes it. Mixing objects from different slices is an error
//! rather than a silent reinterpretation.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default absolute tolerance on matrix max-norm residuals.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Name of a channel (a basis ket) within one time slice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelLabel(String);

impl ChannelLabel {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::EmptyLabel);
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered orthonormal channel basis at one time index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeSlice {
    time_index: usize,
    labels: Vec<ChannelLabel>,
}

pub type SliceRef = Arc<TimeSlice>;

impl TimeSlice {
    pub fn new<I, S>(time_index: usize, labels: I) -> Result<SliceRef>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels = labels
            .into_iter()
            .map(ChannelLabel::new)
            .collect::<Result<Vec<_>>>()?;
        if labels.is_empty() {
            return Err(Error::EmptySlice);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel {
                    label: l.to_string(),
                    time: time_index,
                });
            }
        }
        Ok(Arc::new(Self { time_index, labels }))
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[ChannelLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.as_str() == label)
    }

    pub(crate) fn require_index(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::UnknownLabel {
            label: label.to_string(),
            time: self.time_index,
        })
    }
}

pub(crate) fn same_slice(a: &SliceRef, b: &SliceRef) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::SliceMismatch {
            left: a.time_index,
            right: b.time_index,
        })
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A vector over a slice basis. Not necessarily normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    slice: SliceRef,
    amps: DVector<C64>,
}

impl Ket {
    pub fn new(slice: SliceRef, amps: Vec<C64>) -> Result<Self> {
        Self::from_vector(slice, DVector::from_vec(amps))
    }

    pub fn from_vector(slice: SliceRef, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != slice.dim() {
            return Err(Error::DimensionMismatch {
                expected: slice.dim(),
                found: amps.len(),
            });
        }
        if let Some(index) = amps
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { slice, amps })
    }

    pub fn real(slice: SliceRef, amps: &[f64]) -> Result<Self> {
        Self::new(slice, amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero(slice: SliceRef) -> Self {
        let n = slice.dim();
        Self {
            slice,
            amps: DVector::zeros(n),
        }
    }

    pub fn basis(slice: SliceRef, label: &str) -> Result<Self> {
        let i = slice.require_index(label)?;
        let mut k = Self::zero(slice);
        k.amps[i] = C64::new(1.0, 0.0);
        Ok(k)
    }

    /// Builds `Σ c_i |label_i⟩`.
    pub fn from_components(slice: SliceRef, components: &[(&str, C64)]) -> Result<Self> {
        let mut k = Self::zero(slice);
        for &(label, c) in components {
            let i = k.slice.require_index(label)?;
            k.amps[i] += c;
        }
        Ok(k)
    }

    pub fn slice(&self) -> &SliceRef {
        &self.slice
    }

    pub fn time_index(&self) -> usize {
        self.slice.time_index
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, label: &str) -> Result<C64> {
        Ok(self.amps[self.slice.require_index(label)?])
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        same_slice(&self.slice, &other.slice)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn scale(&self, c: C64) -> Ket {
        Ket {
            slice: self.slice.clone(),
            amps: &self.amps * c,
        }
    }

    pub fn add(&self, other: &Ket) -> Result<Ket> {
        same_slice(&self.slice, &other.slice)?;
        Ok(Ket {
            slice: self.slice.clone(),
            amps: &self.amps + &other.amps,
        })
    }

    pub fn sub(&self, other: &Ket) -> Result<Ket> {
        same_slice(&self.slice, &other.slice)?;
        Ok(Ket {
            slice: self.slice.clone(),
            amps: &self.amps - &other.amps,
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn distance_max(&self, other: &Ket) -> Result<f64> {
        Ok(self
            .sub(other)?
            .amps
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn with_amplitudes(&self, amps: DVector<C64>) -> Ket {
        Ket {
            slice: self.slice.clone(),
            amps,
        }
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.slice.time_index;
        let mut first = true;
        for (label, a) in self.slice.labels.iter().zip(self.amps.iter()) {
            if a.norm() == 0.0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if a.im == 0.0 {
                write!(f, "{}|{}{}>", a.re, label, t)?;
            } else {
                write!(f, "({})|{}{}>", a, label, t)?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// A square matrix acting on one slice.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    slice: SliceRef,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(slice: SliceRef, matrix: DMatrix<C64>) -> Result<Self> {
        let n = slice.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if matrix.nrows() != n {
                    matrix.nrows()
                } else {
                    matrix.ncols()
                },
            });
        }
        Ok(Self { slice, matrix })
    }

    pub fn identity(slice: SliceRef) -> Self {
        let n = slice.dim();
        Self {
            slice,
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn zero(slice: SliceRef) -> Self {
        let n = slice.dim();
        Self {
            slice,
            matrix: DMatrix::zeros(n, n),
        }
    }

    pub fn slice(&self) -> &SliceRef {
        &self.slice
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        same_slice(&self.slice, &ket.slice)?;
        Ok(ket.with_amplitudes(&self.matrix * &ket.amps))
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            slice: self.slice.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        same_slice(&self.slice, &rhs.slice)?;
        Ok(Operator {
            slice: self.slice.clone(),
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn add(&self, rhs: &Operator) -> Result<Operator> {
        same_slice(&self.slice, &rhs.slice)?;
        Ok(Operator {
            slice: self.slice.clone(),
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    pub fn sub(&self, rhs: &Operator) -> Result<Operator> {
        same_slice(&self.slice, &rhs.slice)?;
        Ok(Operator {
            slice: self.slice.clone(),
            matrix: &self.matrix - &rhs.matrix,
        })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Max-norm of the entrywise difference.
    pub fn distance(&self, rhs: &Operator) -> Result<f64> {
        same_slice(&self.slice, &rhs.slice)?;
        Ok(max_abs(&(&self.matrix - &rhs.matrix)))
    }

    pub fn hermiticity_residual(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn idempotence_residual(&self) -> f64 {
        max_abs(&(&self.matrix * &self.matrix - &self.matrix))
    }

    /// `⟨bra|self|ket⟩`.
    pub fn matrix_element(&self, bra: &Ket, ket: &Ket) -> Result<C64> {
        bra.inner(&self.apply(ket)?)
    }
}

/// An orthogonal projector: Hermitian and idempotent within tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    op: Operator,
    name: String,
}

impl Projector {
    pub fn new(op: Operator, name: impl Into<String>, tol: f64) -> Result<Self> {
        let hermiticity = op.hermiticity_residual();
        let idempotence = op.idempotence_residual();
        if hermiticity > tol || idempotence > tol {
            return Err(Error::NotAProjector {
                hermiticity,
                idempotence,
            });
        }
        Ok(Self {
            op,
            name: name.into(),
        })
    }

    /// Diagonal projector onto the listed channels. Named e.g. `B2+C2`.
    pub fn from_labels(slice: &SliceRef, labels: &[&str]) -> Result<Self> {
        let n = slice.dim();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for &l in labels {
            let i = slice.require_index(l)?;
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        let t = slice.time_index;
        let name = if labels.is_empty() {
            format!("0_{t}")
        } else if m.iter().filter(|z| z.re == 1.0).count() == n {
            format!("I{t}")
        } else {
            // keep basis order regardless of argument order
            slice
                .labels
                .iter()
                .enumerate()
                .filter(|(i, _)| m[(*i, *i)].re == 1.0)
                .map(|(_, l)| format!("{l}{t}"))
                .collect::<Vec<_>>()
                .join("+")
        };
        Ok(Self {
            op: Operator {
                slice: slice.clone(),
                matrix: m,
            },
            name,
        })
    }

    /// Rank-one projector `|k⟩⟨k| / ‖k‖²`.
    pub fn from_ket(ket: &Ket) -> Result<Self> {
        let n2 = ket.norm_squared();
        if n2 == 0.0 {
            return Err(Error::ZeroKet);
        }
        let m = (&ket.amps * ket.amps.adjoint()).unscale(n2);
        Ok(Self {
            op: Operator {
                slice: ket.slice.clone(),
                matrix: m,
            },
            name: format!("[{ket}]"),
        })
    }

    pub fn identity(slice: &SliceRef) -> Self {
        Self {
            op: Operator::identity(slice.clone()),
            name: format!("I{}", slice.time_index),
        }
    }

    /// `I - P`.
    pub fn complement(&self) -> Projector {
        let slice = self.op.slice.clone();
        let n = slice.dim();
        let m = DMatrix::<C64>::identity(n, n) - &self.op.matrix;
        let name = complement_name(&slice, &m).unwrap_or_else(|| format!("~{}", self.name));
        Projector {
            op: Operator { slice, matrix: m },
            name,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn slice(&self) -> &SliceRef {
        &self.op.slice
    }

    pub fn time_index(&self) -> usize {
        self.op.slice.time_index
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.op.matrix
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        self.op.apply(ket)
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let n = self.slice().dim();
        max_abs(&(&self.op.matrix - DMatrix::<C64>::identity(n, n))) <= tol
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        max_abs(&self.op.matrix) <= tol
    }

    pub fn distance(&self, other: &Projector) -> Result<f64> {
        self.op.distance(&other.op)
    }
}

impl fmt::Display for Projector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Label-style name when `m` is an exact 0/1 diagonal.
fn complement_name(slice: &SliceRef, m: &DMatrix<C64>) -> Option<String> {
    let n = slice.dim();
    let mut picked = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            let diag_ok = i == j && (z == C64::new(1.0, 0.0) || z == C64::new(0.0, 0.0));
            if !(diag_ok || (i != j && z == C64::new(0.0, 0.0))) {
                return None;
            }
        }
        if m[(i, i)].re == 1.0 {
            picked.push(slice.labels[i].as_str());
        }
    }
    Projector::from_labels(slice, &picked).ok().map(|p| p.name)
}

/// Outcome of [`pdi_validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct PdiReport {
    pub tol: f64,
    /// Largest `max|P_i P_j|` over `i < j`.
    pub orthogonality_residual: f64,
    pub worst_pair: Option<(usize, usize)>,
    /// `max|Σ P_i - I|`.
    pub completeness_residual: f64,
    /// Basis labels (row, column) of the worst completeness entry.
    pub worst_entry: Option<(ChannelLabel, ChannelLabel)>,
}

impl PdiReport {
    pub fn ok(&self) -> bool {
        self.orthogonality_residual <= self.tol && self.completeness_residual <= self.tol
    }

    fn describe(&self) -> String {
        let mut out = Vec::new();
        if self.orthogonality_residual > self.tol {
            let (i, j) = self.worst_pair.unwrap_or_default();
            out.push(format!(
                "parts {i} and {j} not orthogonal (residual {:.3e})",
                self.orthogonality_residual
            ));
        }
        if self.completeness_residual > self.tol {
            let at = self
                .worst_entry
                .as_ref()
                .map(|(r, c)| {
                    if r == c {
                        format!(" at {r}")
                    } else {
                        format!(" at ({r},{c})")
                    }
                })
                .unwrap_or_default();
            out.push(format!(
                "sum differs from identity (residual {:.3e}{at})",
                self.completeness_residual
            ));
        }
        out.join("; ")
    }
}

/// Checks mutual orthogonality and completeness of `parts`.
pub fn pdi_validate(parts: &[Projector], tol: f64) -> Result<PdiReport> {
    let first = parts.first().ok_or(Error::EmptyPdi)?;
    let slice = first.slice().clone();
    for p in parts {
        same_slice(&slice, p.slice())?;
    }
    let n = slice.dim();

    let mut orthogonality_residual = 0.0;
    let mut worst_pair = None;
    for i in 0..parts.len() {
        for j in (i + 1)..parts.len() {
            let r = max_abs(&(parts[i].matrix() * parts[j].matrix()));
            if worst_pair.is_none() || r > orthogonality_residual {
                orthogonality_residual = r;
                worst_pair = Some((i, j));
            }
        }
    }

    let mut sum = DMatrix::<C64>::zeros(n, n);
    for p in parts {
        sum += p.matrix();
    }
    let diff = sum - DMatrix::<C64>::identity(n, n);
    let mut completeness_residual = 0.0;
    let mut worst = (0, 0);
    for i in 0..n {
        for j in 0..n {
            let r = diff[(i, j)].norm();
            if r > completeness_residual {
                completeness_residual = r;
                worst = (i, j);
            }
        }
    }
    let worst_entry = (completeness_residual > 0.0)
        .then(|| (slice.labels[worst.0].clone(), slice.labels[worst.1].clone()));

    Ok(PdiReport {
        tol,
        orthogonality_residual,
        worst_pair,
        completeness_residual,
        worst_entry,
    })
}

/// A validated projective decomposition of the identity on one slice.
#[derive(Clone, Debug, PartialEq)]
pub struct Pdi {
    slice: SliceRef,
    parts: Vec<Projector>,
}

impl Pdi {
    pub fn new(parts: Vec<Projector>, tol: f64) -> Result<Self> {
        let report = pdi_validate(&parts, tol)?;
        if !report.ok() {
            return Err(Error::NotAPdi(report.describe()));
        }
        Ok(Self {
            slice: parts[0].slice().clone(),
            parts,
        })
    }

    /// Each group of labels becomes one diagonal part.
    pub fn from_label_groups(slice: &SliceRef, groups: &[&[&str]]) -> Result<Self> {
        let parts = groups
            .iter()
            .map(|g| Projector::from_labels(slice, g))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts, DEFAULT_TOL)
    }

    /// One rank-one part per basis channel.
    pub fn channels(slice: &SliceRef) -> Self {
        let parts = slice
            .labels
            .iter()
            .map(|l| Projector::from_labels(slice, &[l.as_str()]).expect("label from slice"))
            .collect();
        Self {
            slice: slice.clone(),
            parts,
        }
    }

    pub fn slice(&self) -> &SliceRef {
        &self.slice
    }

    pub fn parts(&self) -> &[Projector] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<Projector> {
        self.parts
    }
}
