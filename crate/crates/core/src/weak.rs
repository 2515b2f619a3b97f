//! Forward and backward states, weak values, and the comparison between the
//! nonzero-weak-value presence rule and the consistent-histories verdict.

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::histories::{chain_ket, infer, History, InferenceVerdict};
use crate::statespace::{same_slice, Ket, Projector, C64};

/// Forward state `|ψ_t⟩` and backward state `|φ_t⟩` at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoStateVector {
    pub forward: Ket,
    pub backward: Ket,
}

impl TwoStateVector {
    pub fn at(dynamics: &Dynamics, initial: &Ket, final_state: &Ket, time: usize) -> Result<Self> {
        Ok(Self {
            forward: dynamics.transport(initial, time)?,
            backward: backward_state(dynamics, final_state, time)?,
        })
    }

    /// `⟨φ_t|ψ_t⟩`.
    pub fn overlap(&self) -> C64 {
        self.backward.inner(&self.forward).expect("same slice")
    }

    /// `⟨φ|Q|ψ⟩ / ⟨φ|ψ⟩`.
    pub fn weak_value(&self, q: &Projector, tol: f64) -> Result<C64> {
        same_slice(self.forward.slice(), q.slice())?;
        let overlap = self.overlap();
        if overlap.norm() <= tol {
            return Err(Error::VanishingOverlap {
                time: self.forward.time_index(),
                overlap: overlap.norm(),
            });
        }
        Ok(self.backward.inner(&q.apply(&self.forward)?)? / overlap)
    }
}

/// The post-selected state run backwards: `T_{t,f} |final⟩`.
pub fn backward_state(dynamics: &Dynamics, final_state: &Ket, time: usize) -> Result<Ket> {
    dynamics.transport(final_state, time)
}

/// Weak value of `q` at the time of its slice, for pre-selection `initial`
/// and post-selection `final_state`.
pub fn weak_value(
    dynamics: &Dynamics,
    initial: &Ket,
    final_state: &Ket,
    q: &Projector,
    tol: f64,
) -> Result<C64> {
    TwoStateVector::at(dynamics, initial, final_state, q.time_index())?.weak_value(q, tol)
}

/// `|⟨f|chain(initial, P, [f])⟩ - ⟨φ_t|ψ_t⟩ ⟨P⟩_w|`; zero up to rounding.
pub fn chain_weak_identity_check(
    dynamics: &Dynamics,
    initial: &Ket,
    final_state: &Ket,
    p: &Projector,
    tol: f64,
) -> Result<f64> {
    let tsv = TwoStateVector::at(dynamics, initial, final_state, p.time_index())?;
    let wv = tsv.weak_value(p, tol)?;
    let final_event = Projector::from_ket(final_state)?;
    let chain = chain_ket(
        dynamics,
        initial,
        &History::new(vec![p.clone(), final_event])?,
    )?;
    let lhs = final_state.inner(&chain)?;
    Ok((lhs - tsv.overlap() * wv).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresenceVerdict {
    Present,
    Absent,
    /// The two-history family is inconsistent; presence cannot be discussed.
    Meaningless,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PresenceRow {
    pub channel: String,
    pub time: usize,
    pub weak_value: C64,
    /// Nonzero weak value means present.
    pub tsvf: PresenceVerdict,
    /// Taken from [`infer`] on `initial ⊙ {P, I - P} ⊙ [final]`.
    pub ch: PresenceVerdict,
}

impl PresenceRow {
    /// Verdict predicted from the weak value alone: 1 present, 0 absent,
    /// anything else meaningless.
    pub fn weak_value_criterion(&self, tol: f64) -> PresenceVerdict {
        classify_weak_value(self.weak_value, tol)
    }
}

pub fn classify_weak_value(w: C64, tol: f64) -> PresenceVerdict {
    if (w - 1.0).norm() <= tol {
        PresenceVerdict::Present
    } else if w.norm() <= tol {
        PresenceVerdict::Absent
    } else {
        PresenceVerdict::Meaningless
    }
}

pub fn presence_table(
    dynamics: &Dynamics,
    initial: &Ket,
    final_state: &Ket,
    channels: &[Projector],
    tol: f64,
) -> Result<Vec<PresenceRow>> {
    let final_event = Projector::from_ket(final_state)?;
    channels
        .iter()
        .map(|q| {
            let w = weak_value(dynamics, initial, final_state, q, tol)?;
            let tsvf = if w.norm() > tol {
                PresenceVerdict::Present
            } else {
                PresenceVerdict::Absent
            };
            let ch = match infer(dynamics, initial, &final_event, q, tol)? {
                InferenceVerdict::Defined(p) if (p - 1.0).abs() <= tol => PresenceVerdict::Present,
                InferenceVerdict::Defined(p) if p.abs() <= tol => PresenceVerdict::Absent,
                // a consistent two-history family always has one null chain ket
                InferenceVerdict::Defined(_) | InferenceVerdict::Incommensurate(_) => {
                    PresenceVerdict::Meaningless
                }
            };
            Ok(PresenceRow {
                channel: q.name().to_string(),
                time: q.time_index(),
                weak_value: w,
                tsvf,
                ch,
            })
        })
        .collect()
}
