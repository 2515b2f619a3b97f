//! Weak measurement with qubit probes.
//!
//! Each probe starts in `|0⟩` and is rotated by a small angle when the
//! particle passes through a channel it watches:
//! `|P⟩|0⟩ → |P⟩(ζ|0⟩ + η|1⟩)` with `η = √ε`, `ζ = √(1-ε)`. The joint state
//! is stored densely as a `channels × 2^probes` matrix whose columns are the
//! branch components `|Φ^κ⟩` for every probe bitstring `κ`.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::statespace::{same_slice, ChannelLabel, Ket, Pdi, SliceRef, C64};

/// Canonical order of the built-in probes; also the order their letters
/// appear in bitstring labels.
pub const BUILTIN_PROBES: [&str; 6] = ["a", "d", "b", "c", "e", "w"];

const MAX_PROBES: usize = 16;

/// A probe and the `(time, channel)` pairs at which it couples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeSpec {
    id: String,
    couplings: Vec<(usize, ChannelLabel)>,
}

impl ProbeSpec {
    pub fn new(id: impl Into<String>, couplings: &[(usize, &str)]) -> Result<Self> {
        let id = id.into();
        if id.is_empty() || id == "o" {
            return Err(Error::InvalidProbe {
                probe: id,
                reason: "id must be non-empty and not `o`".into(),
            });
        }
        let mut out: Vec<(usize, ChannelLabel)> = Vec::new();
        for &(t, ch) in couplings {
            let label = ChannelLabel::new(ch)?;
            if out.iter().any(|(u, l)| *u == t && *l == label) {
                return Err(Error::InvalidProbe {
                    probe: id,
                    reason: format!("duplicate coupling ({t}, {ch})"),
                });
            }
            out.push((t, label));
        }
        if out.is_empty() {
            return Err(Error::InvalidProbe {
                probe: id,
                reason: "no couplings".into(),
            });
        }
        Ok(Self { id, couplings: out })
    }

    /// `a`, `d` at t1; `b`, `c` at t2; `e` at t3; `w` on both `B` and `C` at t2.
    pub fn builtin(id: &str) -> Result<Self> {
        match id {
            "a" => Self::new("a", &[(1, "A")]),
            "d" => Self::new("d", &[(1, "D")]),
            "b" => Self::new("b", &[(2, "B")]),
            "c" => Self::new("c", &[(2, "C")]),
            "e" => Self::new("e", &[(3, "E")]),
            "w" => Self::new("w", &[(2, "B"), (2, "C")]),
            _ => Err(Error::InvalidProbe {
                probe: id.to_string(),
                reason: format!("not a built-in probe ({})", BUILTIN_PROBES.join(", ")),
            }),
        }
    }

    /// Built-in probes from a comma separated list such as `a,d,e,w`,
    /// returned in canonical order.
    pub fn builtin_set(list: &str) -> Result<Vec<Self>> {
        let mut ids: Vec<&str> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        for id in &ids {
            Self::builtin(id)?;
        }
        ids.sort_by_key(|id| BUILTIN_PROBES.iter().position(|b| b == id));
        ids.dedup();
        ids.into_iter().map(Self::builtin).collect()
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn couplings(&self) -> &[(usize, ChannelLabel)] {
        &self.couplings
    }
}

/// Coupling strength `ε ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeStrength {
    epsilon: f64,
}

impl ProbeStrength {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eta(&self) -> f64 {
        self.epsilon.sqrt()
    }

    pub fn zeta(&self) -> f64 {
        (1.0 - self.epsilon).sqrt()
    }
}

/// Image of the excited probe state `|1⟩` under a coupling. Only `|0⟩ →
/// ζ|0⟩ + η|1⟩` is fixed physically; this picks the remaining column.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum CouplingCompletion {
    /// `|1⟩ → -η|0⟩ + ζ|1⟩`.
    #[default]
    Rotation,
    /// `|1⟩ → e^{iθ}(-η|0⟩ + ζ|1⟩)`.
    Phased(f64),
}

impl CouplingCompletion {
    fn excited_column(&self, s: ProbeStrength) -> (C64, C64) {
        let phase = match *self {
            Self::Rotation => C64::new(1.0, 0.0),
            Self::Phased(theta) => C64::from_polar(1.0, theta),
        };
        (phase * -s.eta(), phase * s.zeta())
    }
}

/// Bitstring of excited probes; bit `k` refers to the `k`-th probe of the
/// list the state was evolved with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Kappa(pub u64);

impl Kappa {
    pub const NONE: Kappa = Kappa(0);

    pub fn excited(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(&self, probe: usize) -> bool {
        self.0 >> probe & 1 == 1
    }

    /// `o` when nothing fired, else the ids in probe order, e.g. `dbe`.
    pub fn label(&self, probes: &[ProbeSpec]) -> String {
        if self.0 == 0 {
            return "o".into();
        }
        probes
            .iter()
            .enumerate()
            .filter(|(k, _)| self.contains(*k))
            .map(|(_, p)| p.id.as_str())
            .collect()
    }
}

/// Particle plus probes: `Σ_κ |Φ^κ⟩ ⊗ |κ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    slice: SliceRef,
    probes: Vec<ProbeSpec>,
    amps: DMatrix<C64>,
}

impl JointState {
    pub fn slice(&self) -> &SliceRef {
        &self.slice
    }

    pub fn probes(&self) -> &[ProbeSpec] {
        &self.probes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn branch_count(&self) -> usize {
        self.amps.ncols()
    }

    /// The particle component `|Φ^κ⟩`.
    pub fn component(&self, kappa: Kappa) -> Ket {
        let col = self.amps.column(kappa.0 as usize).into_owned();
        Ket::from_vector(self.slice.clone(), col).expect("consistent dimensions")
    }

    pub fn kappa_label(&self, kappa: Kappa) -> String {
        kappa.label(&self.probes)
    }

    /// Bitstring for a label such as `dbe`.
    pub fn kappa_from_label(&self, label: &str) -> Option<Kappa> {
        kappa_from_label(&self.probes, label)
    }
}

fn kappa_from_label(probes: &[ProbeSpec], label: &str) -> Option<Kappa> {
    if label == "o" {
        return Some(Kappa::NONE);
    }
    let mut bits = 0u64;
    let mut rest = label;
    while !rest.is_empty() {
        let (k, p) = probes
            .iter()
            .enumerate()
            .filter(|(_, p)| rest.starts_with(p.id.as_str()))
            .max_by_key(|(_, p)| p.id.len())?;
        bits |= 1 << k;
        rest = &rest[p.id.len()..];
    }
    Some(Kappa(bits))
}

fn validate_probes(dynamics: &Dynamics, probes: &[ProbeSpec], start: usize) -> Result<()> {
    if probes.len() > MAX_PROBES {
        return Err(Error::InvalidProbe {
            probe: probes[MAX_PROBES].id.clone(),
            reason: format!("at most {MAX_PROBES} probes supported"),
        });
    }
    for (i, p) in probes.iter().enumerate() {
        if probes[..i].iter().any(|q| q.id == p.id) {
            return Err(Error::InvalidProbe {
                probe: p.id.clone(),
                reason: "duplicate probe id".into(),
            });
        }
        for (t, ch) in &p.couplings {
            let slice = dynamics.slice(*t).map_err(|_| Error::InvalidProbe {
                probe: p.id.clone(),
                reason: format!("coupling time t{t} outside the dynamics"),
            })?;
            if *t < start {
                return Err(Error::InvalidProbe {
                    probe: p.id.clone(),
                    reason: format!("coupling at t{t} precedes the initial state at t{start}"),
                });
            }
            if slice.index_of(ch.as_str()).is_none() {
                return Err(Error::InvalidProbe {
                    probe: p.id.clone(),
                    reason: format!("channel {ch} does not exist at t{t}"),
                });
            }
        }
    }
    Ok(())
}

/// Evolves `initial` with the default coupling completion; returns the joint
/// state at the final time.
pub fn evolve_with_probes(
    dynamics: &Dynamics,
    probes: &[ProbeSpec],
    strength: ProbeStrength,
    initial: &Ket,
) -> Result<JointState> {
    let mut states = evolve_trajectory(
        dynamics,
        probes,
        strength,
        initial,
        CouplingCompletion::Rotation,
    )?;
    Ok(states.pop().expect("at least one time"))
}

/// Joint states at every time from the initial slice to the final one, each
/// taken after that time's couplings have acted.
pub fn evolve_trajectory(
    dynamics: &Dynamics,
    probes: &[ProbeSpec],
    strength: ProbeStrength,
    initial: &Ket,
    completion: CouplingCompletion,
) -> Result<Vec<JointState>> {
    let start = initial.time_index();
    same_slice(dynamics.slice(start)?, initial.slice())?;
    let norm = initial.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    validate_probes(dynamics, probes, start)?;

    let branches = 1usize << probes.len();
    let mut amps = DMatrix::<C64>::zeros(initial.slice().dim(), branches);
    amps.set_column(0, initial.amplitudes());

    // couplings per time, ordered by probe id
    let mut order: Vec<usize> = (0..probes.len()).collect();
    order.sort_by(|&i, &j| probes[i].id.cmp(&probes[j].id));

    let zeta = C64::new(strength.zeta(), 0.0);
    let eta = C64::new(strength.eta(), 0.0);
    let (c01, c11) = completion.excited_column(strength);

    let mut states = Vec::new();
    for t in start..=dynamics.final_time() {
        let slice = dynamics.slice(t)?.clone();
        for &k in &order {
            let bit = 1usize << k;
            for (_, ch) in probes[k].couplings.iter().filter(|(u, _)| *u == t) {
                let row = slice.require_index(ch.as_str())?;
                for kappa in (0..branches).filter(|x| x & bit == 0) {
                    let a0 = amps[(row, kappa)];
                    let a1 = amps[(row, kappa | bit)];
                    amps[(row, kappa)] = zeta * a0 + c01 * a1;
                    amps[(row, kappa | bit)] = eta * a0 + c11 * a1;
                }
            }
        }
        states.push(JointState {
            slice,
            probes: probes.to_vec(),
            amps: amps.clone(),
        });
        if t < dynamics.final_time() {
            amps = dynamics.steps()[t].matrix() * amps;
        }
    }
    Ok(states)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchComponent {
    pub kappa: Kappa,
    pub label: String,
    pub phi: Ket,
}

/// Nonzero `|Φ^κ⟩` (norm above `tol`), ordered by number of excited probes
/// and then by bitstring.
pub fn branch_components(js: &JointState, tol: f64) -> Vec<BranchComponent> {
    let mut out: Vec<BranchComponent> = (0..js.branch_count())
        .map(|k| Kappa(k as u64))
        .map(|kappa| BranchComponent {
            kappa,
            label: js.kappa_label(kappa),
            phi: js.component(kappa),
        })
        .filter(|b| b.phi.norm() > tol)
        .collect();
    out.sort_by_key(|b| (b.kappa.excited(), b.kappa));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub detector: String,
    pub kappa: Kappa,
    pub label: String,
    pub probability: f64,
}

/// Joint probabilities of a detector outcome and a probe bitstring.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    probes: Vec<ProbeSpec>,
    detectors: Vec<String>,
    outcomes: Vec<Outcome>,
}

impl OutcomeDistribution {
    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn detectors(&self) -> &[String] {
        &self.detectors
    }

    pub fn probes(&self) -> &[ProbeSpec] {
        &self.probes
    }

    pub fn total(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    pub fn kappa(&self, label: &str) -> Option<Kappa> {
        kappa_from_label(&self.probes, label)
    }

    pub fn probe_index(&self, id: &str) -> Option<usize> {
        self.probes.iter().position(|p| p.id == id)
    }

    /// `Pr(detector, κ)`.
    pub fn probability(&self, detector: &str, kappa: Kappa) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| o.detector == detector && o.kappa == kappa)
            .map(|o| o.probability)
            .sum()
    }

    /// Total probability of outcomes with detector in `detectors` and `κ`
    /// satisfying `pred`.
    pub fn probability_where(&self, detectors: &[&str], pred: impl Fn(Kappa) -> bool) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| detectors.contains(&o.detector.as_str()) && pred(o.kappa))
            .map(|o| o.probability)
            .sum()
    }

    pub fn detector_marginal(&self, detector: &str) -> f64 {
        self.probability_where(&[detector], |_| true)
    }

    /// `Pr(κ ∈ pred | detector ∈ detectors)`; `None` if the condition has
    /// zero probability.
    pub fn conditional(&self, detectors: &[&str], pred: impl Fn(Kappa) -> bool) -> Option<f64> {
        let denom = self.probability_where(detectors, |_| true);
        (denom > 0.0).then(|| self.probability_where(detectors, pred) / denom)
    }
}

/// Probabilities `‖P_d Φ^κ‖²` for every detector part `P_d` and every `κ`.
pub fn outcome_distribution(js: &JointState, detector: &Pdi) -> Result<OutcomeDistribution> {
    same_slice(js.slice(), detector.slice())?;
    let mut outcomes = Vec::new();
    for part in detector.parts() {
        let projected = part.matrix() * &js.amps;
        for k in 0..js.branch_count() {
            let kappa = Kappa(k as u64);
            outcomes.push(Outcome {
                detector: part.name().to_string(),
                kappa,
                label: js.kappa_label(kappa),
                probability: projected.column(k).norm_squared(),
            });
        }
    }
    Ok(OutcomeDistribution {
        probes: js.probes.clone(),
        detectors: detector
            .parts()
            .iter()
            .map(|p| p.name().to_string())
            .collect(),
        outcomes,
    })
}

/// For each detector, the bitstrings with amplitude above `tol`, i.e.
/// probability above `tol²`, ordered by number of excited probes.
pub fn coincidence_support(dist: &OutcomeDistribution, tol: f64) -> Vec<(String, Vec<String>)> {
    let threshold = tol * tol;
    dist.detectors
        .iter()
        .map(|d| {
            let kappas: BTreeSet<(u32, Kappa)> = dist
                .outcomes
                .iter()
                .filter(|o| &o.detector == d && o.probability > threshold)
                .map(|o| (o.kappa.excited(), o.kappa))
                .collect();
            let labels = kappas
                .into_iter()
                .map(|(_, k)| k.label(&dist.probes))
                .collect();
            (d.clone(), labels)
        })
        .collect()
}

/// Observed counts per outcome, index-aligned with
/// [`OutcomeDistribution::outcomes`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleCounts {
    pub draws: u64,
    pub counts: Vec<u64>,
}

impl SampleCounts {
    pub fn count_where(
        &self,
        dist: &OutcomeDistribution,
        detectors: &[&str],
        pred: impl Fn(Kappa) -> bool,
    ) -> u64 {
        dist.outcomes
            .iter()
            .zip(&self.counts)
            .filter(|(o, _)| detectors.contains(&o.detector.as_str()) && pred(o.kappa))
            .map(|(_, c)| c)
            .sum()
    }
}

impl fmt::Display for SampleCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} draws", self.draws)
    }
}

/// `n` independent draws from `dist`, reproducible for a given seed.
pub fn sample(dist: &OutcomeDistribution, n: u64, seed: u64) -> Result<SampleCounts> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let weights: Vec<f64> = dist.outcomes.iter().map(|o| o.probability).collect();
    let index = WeightedIndex::new(&weights).map_err(|e| Error::InvalidProbe {
        probe: "distribution".into(),
        reason: e.to_string(),
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; weights.len()];
    for _ in 0..n {
        counts[index.sample(&mut rng)] += 1;
    }
    Ok(SampleCounts { draws: n, counts })
}
