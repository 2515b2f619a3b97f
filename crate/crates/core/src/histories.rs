//! History families, chain kets and the consistency condition.
//!
//! A history is a sequence of projectors at increasing times, all following a
//! pure initial state. Its chain ket is obtained by alternately transporting
//! to the next event time and projecting. A family is consistent when chain
//! kets of distinct histories are mutually orthogonal, and only then do the
//! squared norms of the chain kets serve as probabilities.

use std::fmt;

use nalgebra::DMatrix;

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::statespace::{max_abs, same_slice, Ket, Projector, C64};

/// Default tolerance for the normalized chain-ket overlap.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-10;

/// A sequence of events at strictly increasing times. Times without an event
/// carry the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct History {
    events: Vec<Projector>,
}

impl History {
    pub fn new(events: Vec<Projector>) -> Result<Self> {
        for w in events.windows(2) {
            if w[1].time_index() <= w[0].time_index() {
                return Err(Error::UnorderedEvents {
                    previous: w[0].time_index(),
                    next: w[1].time_index(),
                });
            }
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[Projector] {
        &self.events
    }

    pub fn at(&self, time: usize) -> Option<&Projector> {
        self.events.iter().find(|p| p.time_index() == time)
    }

    pub fn final_time(&self) -> Option<usize> {
        self.events.last().map(Projector::time_index)
    }

    fn check(&self, dynamics: &Dynamics) -> Result<()> {
        for p in &self.events {
            same_slice(dynamics.slice(p.time_index())?, p.slice())?;
        }
        Ok(())
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.events.iter().map(Projector::name).collect();
        f.write_str(&names.join(" ⊙ "))
    }
}

/// Histories sharing a pure initial state. `complete` families jointly cover
/// the identity on the history space of the times they mention; otherwise the
/// family is a subfamily and normalization is not expected.
#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    initial: Ket,
    histories: Vec<History>,
    complete: bool,
}

impl Family {
    pub fn new(
        dynamics: &Dynamics,
        initial: Ket,
        histories: Vec<History>,
        complete: bool,
        tol: f64,
    ) -> Result<Self> {
        same_slice(dynamics.slice(initial.time_index())?, initial.slice())?;
        for h in &histories {
            h.check(dynamics)?;
            if let Some(first) = h.events.first() {
                if first.time_index() <= initial.time_index() {
                    return Err(Error::EventBeforeInitial {
                        time: first.time_index(),
                        initial: initial.time_index(),
                    });
                }
            }
        }
        let fam = Self {
            initial,
            histories,
            complete,
        };
        if complete {
            let residual = fam.completeness_residual(dynamics)?;
            if residual > tol {
                return Err(Error::IncompleteFamily { residual });
            }
        }
        Ok(fam)
    }

    pub fn initial(&self) -> &Ket {
        &self.initial
    }

    pub fn histories(&self) -> &[History] {
        &self.histories
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn len(&self) -> usize {
        self.histories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histories.is_empty()
    }

    /// Times at which at least one history has an event.
    pub fn event_times(&self) -> Vec<usize> {
        let mut times: Vec<usize> = self
            .histories
            .iter()
            .flat_map(|h| h.events.iter().map(Projector::time_index))
            .collect();
        times.sort_unstable();
        times.dedup();
        times
    }

    /// `max|Σ_h ⊗_t P_{h,t} - I|` on the tensor product of the event-time
    /// slices.
    pub fn completeness_residual(&self, dynamics: &Dynamics) -> Result<f64> {
        let times = self.event_times();
        if times.is_empty() {
            return Ok(if self.histories.is_empty() { 1.0 } else { 0.0 });
        }
        let mut dim = 1;
        for &t in &times {
            dim *= dynamics.slice(t)?.dim();
        }
        let mut sum = DMatrix::<C64>::zeros(dim, dim);
        for h in &self.histories {
            let mut term = DMatrix::<C64>::identity(1, 1);
            for &t in &times {
                let factor = match h.at(t) {
                    Some(p) => p.matrix().clone(),
                    None => {
                        let n = dynamics.slice(t)?.dim();
                        DMatrix::identity(n, n)
                    }
                };
                term = term.kronecker(&factor);
            }
            sum += term;
        }
        Ok(max_abs(&(sum - DMatrix::<C64>::identity(dim, dim))))
    }

    pub fn initial_label(&self) -> String {
        basis_label(&self.initial).unwrap_or_else(|| "ψ".to_string())
    }

    /// Display form such as `S0 ⊙ A2 ⊙ F4`.
    pub fn history_label(&self, index: usize) -> String {
        let h = &self.histories[index];
        if h.events.is_empty() {
            self.initial_label()
        } else {
            format!("{} ⊙ {}", self.initial_label(), h)
        }
    }
}

/// `S0` for `|S0⟩`, `None` if the ket is not a unit basis vector.
fn basis_label(ket: &Ket) -> Option<String> {
    let amps = ket.amplitudes();
    let mut hit = None;
    for (i, a) in amps.iter().enumerate() {
        if *a == C64::new(1.0, 0.0) && hit.is_none() {
            hit = Some(i);
        } else if *a != C64::new(0.0, 0.0) {
            return None;
        }
    }
    hit.map(|i| format!("{}{}", ket.slice().labels()[i], ket.time_index()))
}

/// Alternates transport and projection along `history`, starting from
/// `initial`. The result lives on the slice of the last event.
pub fn chain_ket(dynamics: &Dynamics, initial: &Ket, history: &History) -> Result<Ket> {
    history.check(dynamics)?;
    let mut ket = initial.clone();
    for p in &history.events {
        if p.time_index() <= ket.time_index() {
            return Err(Error::EventBeforeInitial {
                time: p.time_index(),
                initial: initial.time_index(),
            });
        }
        ket = p.apply(&dynamics.transport(&ket, p.time_index())?)?;
    }
    Ok(ket)
}

/// Chain kets of every history, transported to the latest event time of the
/// family so they can be compared.
pub fn family_chain_kets(dynamics: &Dynamics, family: &Family) -> Result<Vec<Ket>> {
    let last = family
        .histories
        .iter()
        .filter_map(History::final_time)
        .max()
        .unwrap_or(family.initial.time_index());
    family
        .histories
        .iter()
        .map(|h| dynamics.transport(&chain_ket(dynamics, &family.initial, h)?, last))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// Largest `|⟨c_i|c_j⟩| / max(1, ‖c_i‖‖c_j‖)` over distinct histories.
    pub max_overlap: f64,
    /// Pairs whose normalized overlap exceeds the tolerance, with the raw
    /// inner product `⟨c_i|c_j⟩`.
    pub offending_pairs: Vec<(usize, usize, C64)>,
    pub tol: f64,
}

/// Pairwise orthogonality test of chain kets. An overlap exactly equal to
/// `tol` counts as consistent.
pub fn consistency_check(
    dynamics: &Dynamics,
    family: &Family,
    tol: f64,
) -> Result<ConsistencyReport> {
    let kets = family_chain_kets(dynamics, family)?;
    Ok(consistency_of(&kets, tol))
}

fn consistency_of(kets: &[Ket], tol: f64) -> ConsistencyReport {
    let mut max_overlap: f64 = 0.0;
    let mut offending_pairs = Vec::new();
    for i in 0..kets.len() {
        for j in (i + 1)..kets.len() {
            let ip = kets[i].inner(&kets[j]).expect("common slice");
            let scale = (kets[i].norm() * kets[j].norm()).max(1.0);
            let overlap = ip.norm() / scale;
            max_overlap = max_overlap.max(overlap);
            if overlap > tol {
                offending_pairs.push((i, j, ip));
            }
        }
    }
    ConsistencyReport {
        consistent: max_overlap <= tol,
        max_overlap,
        offending_pairs,
        tol,
    }
}

/// Extended Born rule: `‖chain ket‖²` per history, index-aligned with
/// `family.histories()`. Rejects inconsistent families.
pub fn born_probabilities(dynamics: &Dynamics, family: &Family, tol: f64) -> Result<Vec<f64>> {
    let kets = family_chain_kets(dynamics, family)?;
    let report = consistency_of(&kets, tol);
    if !report.consistent {
        return Err(Error::Inconsistent(report));
    }
    Ok(kets.iter().map(Ket::norm_squared).collect())
}

/// Whether the history lies inside the event (`P E = P`), outside it
/// (`P E = 0`), or straddles it.
fn contained_in(history: &History, index: usize, event: &Projector, tol: f64) -> Result<bool> {
    let t = event.time_index();
    let p = match history.at(t) {
        Some(p) => {
            same_slice(p.slice(), event.slice())?;
            p.matrix().clone()
        }
        None => {
            let n = event.slice().dim();
            DMatrix::identity(n, n)
        }
    };
    let prod = &p * event.matrix();
    if max_abs(&(&prod - &p)) <= tol {
        Ok(true)
    } else if max_abs(&prod) <= tol {
        Ok(false)
    } else {
        Err(Error::NotExpressible {
            time: t,
            history: index,
        })
    }
}

fn members(family: &Family, events: &[Projector], tol: f64) -> Result<Vec<bool>> {
    family
        .histories
        .iter()
        .enumerate()
        .map(|(i, h)| {
            events
                .iter()
                .try_fold(true, |acc, e| Ok(acc && contained_in(h, i, e, tol)?))
        })
        .collect()
}

/// `Pr(query | condition)` within one consistent family. Both arguments are
/// conjunctions of single-time events, each of which must be a union of the
/// family's histories.
pub fn conditional_probability(
    dynamics: &Dynamics,
    family: &Family,
    condition: &[Projector],
    query: &[Projector],
    tol: f64,
) -> Result<f64> {
    let weights = born_probabilities(dynamics, family, tol)?;
    let in_condition = members(family, condition, tol)?;
    let in_query = members(family, query, tol)?;
    let denom: f64 = weights
        .iter()
        .zip(&in_condition)
        .filter(|(_, &c)| c)
        .map(|(w, _)| w)
        .sum();
    if denom <= tol {
        return Err(Error::ZeroProbabilityCondition);
    }
    let numer: f64 = weights
        .iter()
        .zip(in_condition.iter().zip(&in_query))
        .filter(|(_, (&c, &q))| c && q)
        .map(|(w, _)| w)
        .sum();
    Ok(numer / denom)
}

/// Splits every history whose projector at `time` (identity when absent)
/// equals `Σ parts`, producing one history per part. The result is not
/// checked for consistency.
pub fn refine(family: &Family, time: usize, parts: &[Projector], tol: f64) -> Result<Family> {
    let first = parts.first().ok_or(Error::EmptyPdi)?;
    if first.time_index() != time {
        return Err(Error::SliceMismatch {
            left: time,
            right: first.time_index(),
        });
    }
    let slice = first.slice().clone();
    let n = slice.dim();
    let mut sum = DMatrix::<C64>::zeros(n, n);
    for (i, p) in parts.iter().enumerate() {
        same_slice(&slice, p.slice())?;
        sum += p.matrix();
        for q in &parts[i + 1..] {
            let residual = max_abs(&(p.matrix() * q.matrix()));
            if residual > tol {
                return Err(Error::RefinementNotOrthogonal { residual });
            }
        }
    }

    let mut matched = false;
    let mut histories = Vec::new();
    for h in &family.histories {
        let current = match h.at(time) {
            Some(p) => {
                same_slice(p.slice(), &slice)?;
                p.matrix().clone()
            }
            None => DMatrix::identity(n, n),
        };
        if max_abs(&(&current - &sum)) > tol {
            histories.push(h.clone());
            continue;
        }
        matched = true;
        for part in parts {
            let mut events: Vec<Projector> = h
                .events
                .iter()
                .filter(|p| p.time_index() != time)
                .cloned()
                .collect();
            let at = events.partition_point(|p| p.time_index() < time);
            events.insert(at, part.clone());
            histories.push(History { events });
        }
    }
    if !matched {
        return Err(Error::RefinementMismatch { time });
    }
    Ok(Family {
        initial: family.initial.clone(),
        histories,
        complete: family.complete,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum InferenceVerdict {
    Defined(f64),
    Incommensurate(ConsistencyReport),
}

impl InferenceVerdict {
    pub fn probability(&self) -> Option<f64> {
        match self {
            Self::Defined(p) => Some(*p),
            Self::Incommensurate(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Self::Defined(_))
    }
}

/// Evaluates `Pr(query | initial, final_event)` in the coarsest family
/// `initial ⊙ {query, I - query} ⊙ final_event`, or reports that this family
/// is inconsistent.
pub fn infer(
    dynamics: &Dynamics,
    initial: &Ket,
    final_event: &Projector,
    query: &Projector,
    tol: f64,
) -> Result<InferenceVerdict> {
    let forward = final_event.apply(&dynamics.transport(initial, final_event.time_index())?)?;
    if forward.norm_squared() <= tol {
        return Err(Error::ImpossibleFinalEvent);
    }
    let histories = vec![
        History::new(vec![query.clone(), final_event.clone()])?,
        History::new(vec![query.complement(), final_event.clone()])?,
    ];
    let family = Family::new(dynamics, initial.clone(), histories, false, tol)?;
    let kets = family_chain_kets(dynamics, &family)?;
    let report = consistency_of(&kets, tol);
    if !report.consistent {
        return Ok(InferenceVerdict::Incommensurate(report));
    }
    let inside = kets[0].norm_squared();
    let outside = kets[1].norm_squared();
    Ok(InferenceVerdict::Defined(inside / (inside + outside)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mzi::{build_nested_mzi, BeamSplitterParams};
    use crate::statespace::DEFAULT_TOL;

    fn setup(alpha2: f64) -> (Dynamics, Ket) {
        let d = build_nested_mzi(BeamSplitterParams::new(alpha2).unwrap()).unwrap();
        let s0 = Ket::basis(d.slices()[0].clone(), "S").unwrap();
        (d, s0)
    }

    fn p(d: &Dynamics, t: usize, labels: &[&str]) -> Projector {
        Projector::from_labels(&d.slices()[t], labels).unwrap()
    }

    #[test]
    fn unordered_events_rejected() {
        let (d, _) = setup(0.5);
        let err = History::new(vec![p(&d, 4, &["F"]), p(&d, 2, &["A"])]).unwrap_err();
        assert!(matches!(
            err,
            Error::UnorderedEvents {
                previous: 4,
                next: 2
            }
        ));
        assert!(History::new(vec![p(&d, 2, &["A"]), p(&d, 2, &["B"])]).is_err());
    }

    #[test]
    fn event_at_initial_time_rejected() {
        let (d, s0) = setup(0.5);
        let h = History::new(vec![p(&d, 0, &["S"])]).unwrap();
        assert!(matches!(
            Family::new(&d, s0, vec![h], false, DEFAULT_TOL),
            Err(Error::EventBeforeInitial { .. })
        ));
    }

    #[test]
    fn incomplete_family_flagged_complete_is_rejected() {
        let (d, s0) = setup(0.5);
        let hs = vec![
            History::new(vec![p(&d, 2, &["A"]), p(&d, 4, &["F"])]).unwrap(),
            History::new(vec![p(&d, 2, &["B", "C"]), p(&d, 4, &["F"])]).unwrap(),
        ];
        assert!(matches!(
            Family::new(&d, s0.clone(), hs.clone(), true, DEFAULT_TOL),
            Err(Error::IncompleteFamily { .. })
        ));
        let mut hs = hs;
        hs.push(History::new(vec![p(&d, 4, &["G", "H"])]).unwrap());
        assert!(Family::new(&d, s0, hs, true, DEFAULT_TOL).is_ok());
    }

    #[test]
    fn chain_ket_examples() {
        for alpha2 in [0.2, 1.0 / 3.0, 0.7] {
            let (d, s0) = setup(alpha2);
            let beta2 = 1.0 - alpha2;
            let f4 = p(&d, 4, &["F"]);
            let a = chain_ket(
                &d,
                &s0,
                &History::new(vec![p(&d, 2, &["A"]), f4.clone()]).unwrap(),
            )
            .unwrap();
            assert!((a.amplitude("F").unwrap().re - alpha2).abs() < 1e-14);
            assert!(a.norm_squared() - alpha2 * alpha2 < 1e-14);

            let bc = chain_ket(
                &d,
                &s0,
                &History::new(vec![p(&d, 2, &["B", "C"]), f4.clone()]).unwrap(),
            )
            .unwrap();
            assert!(bc.norm() < 1e-15);

            let b = chain_ket(&d, &s0, &History::new(vec![p(&d, 2, &["B"]), f4]).unwrap()).unwrap();
            assert!((b.amplitude("F").unwrap().re + beta2 / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_history_chain_ket_is_initial() {
        let (d, s0) = setup(0.4);
        assert_eq!(
            chain_ket(&d, &s0, &History::new(vec![]).unwrap()).unwrap(),
            s0
        );
    }

    #[test]
    fn born_probabilities_reject_inconsistent() {
        let (d, s0) = setup(1.0 / 3.0);
        let f4 = p(&d, 4, &["F"]);
        let fam = Family::new(
            &d,
            s0,
            vec![
                History::new(vec![p(&d, 2, &["B"]), f4.clone()]).unwrap(),
                History::new(vec![p(&d, 2, &["A", "C"]), f4]).unwrap(),
            ],
            false,
            DEFAULT_TOL,
        )
        .unwrap();
        match born_probabilities(&d, &fam, DEFAULT_TOL) {
            Err(Error::Inconsistent(report)) => {
                assert!((report.max_overlap - 2.0 / 9.0).abs() < 1e-14);
                assert_eq!(report.offending_pairs.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tie_at_tolerance_is_consistent() {
        let s = crate::statespace::TimeSlice::new(0, ["x", "y"]).unwrap();
        let k1 = Ket::real(s.clone(), &[0.5, 0.0]).unwrap();
        let k2 = Ket::real(s, &[0.25, 0.0]).unwrap();
        let r = consistency_of(&[k1, k2], 0.125);
        assert!(r.consistent);
        assert_eq!(r.max_overlap, 0.125);
    }

    #[test]
    fn conditional_probability_rejects_straddling_event() {
        let (d, s0) = setup(0.3);
        let f4 = p(&d, 4, &["F"]);
        let fam = Family::new(
            &d,
            s0,
            vec![
                History::new(vec![p(&d, 2, &["A"]), f4.clone()]).unwrap(),
                History::new(vec![p(&d, 2, &["B", "C"]), f4.clone()]).unwrap(),
            ],
            false,
            DEFAULT_TOL,
        )
        .unwrap();
        let err =
            conditional_probability(&d, &fam, &[f4.clone()], &[p(&d, 2, &["C"])], DEFAULT_TOL)
                .unwrap_err();
        assert!(matches!(
            err,
            Error::NotExpressible {
                time: 2,
                history: 1
            }
        ));
        let err = conditional_probability(
            &d,
            &fam,
            &[p(&d, 4, &["G"])],
            &[p(&d, 2, &["A"])],
            DEFAULT_TOL,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ZeroProbabilityCondition));
    }

    #[test]
    fn refine_rejects_bad_parts() {
        let (d, s0) = setup(0.3);
        let f4 = p(&d, 4, &["F"]);
        let fam = Family::new(
            &d,
            s0,
            vec![
                History::new(vec![p(&d, 2, &["A"]), f4.clone()]).unwrap(),
                History::new(vec![p(&d, 2, &["B", "C"]), f4]).unwrap(),
            ],
            false,
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(matches!(
            refine(&fam, 2, &[p(&d, 2, &["A"]), p(&d, 2, &["B"])], DEFAULT_TOL),
            Err(Error::RefinementMismatch { time: 2 })
        ));
        assert!(matches!(
            refine(
                &fam,
                2,
                &[p(&d, 2, &["B", "C"]), p(&d, 2, &["C"])],
                DEFAULT_TOL
            ),
            Err(Error::RefinementNotOrthogonal { .. })
        ));
        let split = refine(&fam, 2, &[p(&d, 2, &["B"]), p(&d, 2, &["C"])], DEFAULT_TOL).unwrap();
        assert_eq!(split.len(), 3);
        assert_eq!(split.history_label(2), "S0 ⊙ C2 ⊙ F4");
    }

    #[test]
    fn infer_rejects_impossible_final_event() {
        let (d, s0) = setup(0.3);
        // |S0> never reaches the E channel at t3
        let e3 = p(&d, 3, &["E"]);
        let a2 = p(&d, 2, &["A"]);
        let h = Family::new(&d, s0.clone(), vec![], false, DEFAULT_TOL).unwrap();
        assert!(h.is_empty());
        assert!(matches!(
            infer(&d, &s0, &e3, &a2, DEFAULT_TOL),
            Err(Error::ImpossibleFinalEvent)
        ));
    }
}
